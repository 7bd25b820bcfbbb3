//! Spectral Galerkin sampling of the heat and wave fields on a periodic
//! lattice, and the exact moments of the lattice model.
//!
//! Modes are the Fourier coefficients `ĥ_k(t) = ∫_0^L e^{iξ_k x} H(t,x) dx`,
//! `ξ_k = 2πk/L`, `|k| ≤ K`. White noise on the circle gives each mode a
//! noise of intensity `L`, complex for `k ≥ 1` (with `ĥ_{-k} = conj ĥ_k`)
//! and real for `k = 0`. The field is `H(t,x) = L^{-1} Σ_k ĥ_k e^{-iξ_k x}`.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::moments::{heat_kernel_mass, wave_mode_covariance};
use crate::rng::{mean_se, normal, stream};
use crate::symbols::{ls_slope, Symbol};
use crate::testfn::TestFunction;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lattice {
    /// Circumference `L`.
    pub length: f64,
    /// Highest mode `K`.
    pub modes: usize,
    /// Number of grid points `N ≥ 2K + 1`.
    pub points: usize,
    pub times: Vec<f64>,
}

impl Lattice {
    pub fn new(length: f64, modes: usize, points: usize, times: Vec<f64>) -> Result<Self> {
        if !(length > 0.0) || modes < 1 || points < 2 * modes + 1 {
            return Err(Error::InvalidArgument("need L > 0, K >= 1, N >= 2K + 1".into()));
        }
        if times.is_empty() || times[0] < 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("time grid must be nonempty, start >= 0 and increase".into()));
        }
        Ok(Lattice { length, modes, points, times })
    }

    /// Lattice with the minimal `2K + 1` points.
    pub fn minimal(length: f64, modes: usize, times: Vec<f64>) -> Result<Self> {
        Self::new(length, modes, 2 * modes + 1, times)
    }

    pub fn xi(&self, k: usize) -> f64 {
        2.0 * std::f64::consts::PI * k as f64 / self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.points as f64
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.points).map(|j| j as f64 * self.dx()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    Heat,
    Wave,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldSample {
    pub kind: FieldKind,
    pub seed: u64,
    pub replicate: usize,
    /// `values[i][j] = u(t_i, x_j)`.
    pub values: Vec<Vec<f64>>,
    /// Largest imaginary part left by synthesis, relative to the field scale.
    pub imag_residue: f64,
}

pub(crate) struct Plans {
    pub(crate) forward: Arc<dyn Fft<f64>>,
    pub(crate) inverse: Arc<dyn Fft<f64>>,
}

impl Plans {
    pub(crate) fn new(n: usize) -> Self {
        let mut p = FftPlanner::new();
        Plans { forward: p.plan_fft_forward(n), inverse: p.plan_fft_inverse(n) }
    }
}

/// Point values from modes `0..=K`.
pub(crate) fn synthesize(modes: &[Complex64], lat: &Lattice, plans: &Plans) -> (Vec<f64>, f64) {
    let n = lat.points;
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    buf[0] = modes[0];
    for (k, &m) in modes.iter().enumerate().skip(1) {
        buf[k] = m;
        buf[n - k] = m.conj();
    }
    plans.forward.process(&mut buf);
    let scale = buf.iter().map(|z| z.re.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let residue = buf.iter().map(|z| z.im.abs()).fold(0.0, f64::max) / scale;
    (buf.iter().map(|z| z.re / lat.length).collect(), residue)
}

/// Modes `ĥ_k`, `0 ≤ k ≤ K`, recovered from point values.
pub fn recover_modes(values: &[f64], lat: &Lattice) -> Vec<Complex64> {
    let plans = Plans::new(lat.points);
    recover_with(values, lat, &plans)
}

fn recover_with(values: &[f64], lat: &Lattice, plans: &Plans) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plans.inverse.process(&mut buf);
    let c = lat.length / lat.points as f64;
    buf[..=lat.modes].iter().map(|z| z * c).collect()
}

/// `⟨u, φ⟩ = L^{-1} Σ_k ĥ_k conj(φ̂_k)` for point values `u`.
pub fn pair(values: &[f64], lat: &Lattice, phi: &TestFunction) -> f64 {
    pair_modes(&recover_modes(values, lat), lat, phi)
}

fn pair_modes(modes: &[Complex64], lat: &Lattice, phi: &TestFunction) -> f64 {
    let mut s = (modes[0] * phi.fourier(0.0).conj()).re;
    for (k, m) in modes.iter().enumerate().skip(1) {
        s += 2.0 * (m * phi.fourier(lat.xi(k)).conj()).re;
    }
    s / lat.length
}

/// Heat modes at every grid time for one replicate.
fn heat_modes(sym: &Symbol, lat: &Lattice, seed: u64, rep: usize) -> Vec<Vec<Complex64>> {
    let m = lat.times.len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); lat.modes + 1]; m];
    for k in 0..=lat.modes {
        let psi = sym.psi(lat.xi(k)).conj();
        let mut rng = stream(seed, rep as u64, k as u64);
        let mut h = Complex64::new(0.0, 0.0);
        let mut prev = 0.0;
        for (i, &t) in lat.times.iter().enumerate() {
            let dt = t - prev;
            prev = t;
            if dt > 0.0 {
                let var = lat.length * heat_kernel_mass(psi.re, dt);
                let eta = if k == 0 {
                    Complex64::new(var.sqrt() * normal(&mut rng), 0.0)
                } else {
                    let s = (0.5 * var).sqrt();
                    Complex64::new(s * normal(&mut rng), s * normal(&mut rng))
                };
                h = (-dt * psi).exp() * h + eta;
            }
            out[i][k] = h;
        }
    }
    out
}

fn check_replicates(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidArgument("need at least one replicate".into()));
    }
    Ok(())
}

/// `M` replicates of the heat field, each mode an exact Ornstein–Uhlenbeck
/// recursion between grid times.
pub fn simulate_heat_field(sym: &Symbol, lat: &Lattice, seed: u64, m: usize) -> Result<Vec<FieldSample>> {
    check_replicates(m)?;
    Ok((0..m)
        .into_par_iter()
        .map_init(
            || Plans::new(lat.points),
            |plans, rep| {
                let modes = heat_modes(sym, lat, seed, rep);
                let mut values = Vec::with_capacity(modes.len());
                let mut residue: f64 = 0.0;
                for md in &modes {
                    let (v, r) = synthesize(md, lat, plans);
                    residue = residue.max(r);
                    values.push(v);
                }
                FieldSample { kind: FieldKind::Heat, seed, replicate: rep, values, imag_residue: residue }
            },
        )
        .collect())
}

/// Per-mode Cholesky factors of `C_k(t_i, t_j)` over times with positive
/// variance (earlier times with zero variance stay 0).
fn wave_factors(sym: &Symbol, lat: &Lattice) -> Result<(usize, Vec<DMatrix<f64>>)> {
    let first = lat.times.iter().position(|&t| t > 0.0).unwrap_or(lat.times.len());
    let ts = &lat.times[first..];
    let n = ts.len();
    let mut out = Vec::with_capacity(lat.modes + 1);
    for k in 0..=lat.modes {
        let a = sym.re(lat.xi(k)).max(0.0).sqrt();
        let mut c = DMatrix::from_fn(n, n, |i, j| {
            let (hi, lo) = if ts[i] >= ts[j] { (ts[i], ts[j]) } else { (ts[j], ts[i]) };
            wave_mode_covariance(a, hi, lo)
        });
        let jitter = 1e-12 * c.trace();
        for i in 0..n {
            c[(i, i)] += jitter;
        }
        match c.cholesky() {
            Some(ch) => out.push(ch.l()),
            None => return Err(Error::NotPositiveDefinite { mode: k as i64 }),
        }
    }
    Ok((first, out))
}

/// `M` replicates of the wave field; each mode's path over the time grid is
/// drawn exactly from its Gaussian law.
pub fn simulate_wave_field(sym: &Symbol, lat: &Lattice, seed: u64, m: usize) -> Result<Vec<FieldSample>> {
    check_replicates(m)?;
    if !sym.is_symmetric() {
        return Err(Error::SymmetryRequired);
    }
    let (first, factors) = wave_factors(sym, lat)?;
    let nt = lat.times.len();
    Ok((0..m)
        .into_par_iter()
        .map_init(
            || Plans::new(lat.points),
            |plans, rep| {
                let mut modes = vec![vec![Complex64::new(0.0, 0.0); lat.modes + 1]; nt];
                for (k, l) in factors.iter().enumerate() {
                    let mut rng = stream(seed, rep as u64, k as u64);
                    let n = l.nrows();
                    let draw = |rng: &mut ChaCha8Rng| nalgebra::DVector::from_fn(n, |_, _| normal(rng));
                    let (re, im) = if k == 0 {
                        (l * draw(&mut rng) * lat.length.sqrt(), nalgebra::DVector::zeros(n))
                    } else {
                        let s = (0.5 * lat.length).sqrt();
                        let re = l * draw(&mut rng) * s;
                        let im = l * draw(&mut rng) * s;
                        (re, im)
                    };
                    for i in 0..n {
                        modes[first + i][k] = Complex64::new(re[i], im[i]);
                    }
                }
                let mut values = Vec::with_capacity(nt);
                let mut residue: f64 = 0.0;
                for md in &modes {
                    let (v, r) = synthesize(md, lat, plans);
                    residue = residue.max(r);
                    values.push(v);
                }
                FieldSample { kind: FieldKind::Wave, seed, replicate: rep, values, imag_residue: residue }
            },
        )
        .collect())
}

/// `L^{-1} Σ_{|k| ≤ K} |φ̂_k|² c(k)` for a real per-mode weight.
fn lattice_sum(lat: &Lattice, phi: &TestFunction, c: impl Fn(usize) -> f64) -> f64 {
    let mut s = phi.modulus_sq(0.0) * c(0);
    for k in 1..=lat.modes {
        s += 2.0 * phi.modulus_sq(lat.xi(k)) * c(k);
    }
    s / lat.length
}

/// Exact lattice variance of `⟨H(t_i), φ⟩` for every grid time.
pub fn lattice_heat_moments(sym: &Symbol, lat: &Lattice, phi: &TestFunction) -> Vec<f64> {
    lat.times.iter().map(|&t| lattice_sum(lat, phi, |k| heat_kernel_mass(sym.re(lat.xi(k)), t))).collect()
}

/// Exact lattice `Cov(⟨H(t), φ⟩, ⟨H(s), φ⟩)`, `s ≤ t`.
pub fn lattice_heat_covariance(sym: &Symbol, lat: &Lattice, phi: &TestFunction, s: f64, t: f64) -> f64 {
    let (s, t) = if s <= t { (s, t) } else { (t, s) };
    lattice_sum(lat, phi, |k| {
        let z = sym.psi(lat.xi(k));
        ((-(t - s) * z).exp()).re * heat_kernel_mass(z.re, s)
    })
}

/// Exact lattice variance of `⟨W(t_i), φ⟩` for every grid time.
pub fn lattice_wave_moments(sym: &Symbol, lat: &Lattice, phi: &TestFunction) -> Vec<f64> {
    lat.times.iter().map(|&t| lattice_wave_covariance(sym, lat, phi, t, t)).collect()
}

pub fn lattice_wave_covariance(sym: &Symbol, lat: &Lattice, phi: &TestFunction, s: f64, t: f64) -> f64 {
    let (s, t) = if s <= t { (s, t) } else { (t, s) };
    lattice_sum(lat, phi, |k| wave_mode_covariance(sym.re(lat.xi(k)).max(0.0).sqrt(), t, s))
}

/// Empirical `E[XY]` with its standard error.
pub fn second_moment(x: &[f64], y: &[f64]) -> (f64, f64) {
    let p: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    mean_se(&p)
}

/// Pairings `⟨u(t_i), φ⟩` for each replicate.
pub fn pairings(samples: &[FieldSample], lat: &Lattice, phi: &TestFunction, i: usize) -> Vec<f64> {
    let plans = Plans::new(lat.points);
    samples.iter().map(|s| pair_modes(&recover_with(&s.values[i], lat, &plans), lat, phi)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Space,
    Time,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderEstimate {
    /// Half the fitted slope of log increment variance on log separation.
    pub exponent: f64,
    pub std_error: f64,
    pub separations: Vec<f64>,
    pub variances: Vec<f64>,
}

/// Grid steps used for spatial increments.
const SPACE_STEPS: [usize; 4] = [4, 8, 16, 32];
const BOOTSTRAP: usize = 200;

/// Path Hölder exponent estimated from empirical increment variances.
///
/// In space the separations are 4, 8, 16 and 32 grid steps at the last
/// time; in time they are `t_m - t_i` for every earlier grid time.
pub fn empirical_holder_estimate(samples: &[FieldSample], lat: &Lattice, dir: Direction) -> Result<HolderEstimate> {
    if samples.len() < 1000 {
        return Err(Error::InvalidArgument("need at least 1000 replicates".into()));
    }
    let last = lat.times.len() - 1;
    let n = lat.points;
    // Per replicate, per separation: mean squared increment over x.
    let (seps, per_rep): (Vec<f64>, Vec<Vec<f64>>) = match dir {
        Direction::Space => {
            let steps: Vec<usize> = SPACE_STEPS.iter().copied().filter(|&s| s <= n / 4).collect();
            if steps.len() < 4 {
                return Err(Error::InsufficientSeparations(format!("only {} spatial separations fit", steps.len())));
            }
            let seps = steps.iter().map(|&s| s as f64 * lat.dx()).collect();
            let per = samples
                .iter()
                .map(|smp| {
                    let u = &smp.values[last];
                    steps.iter().map(|&s| (0..n).map(|j| (u[(j + s) % n] - u[j]).powi(2)).sum::<f64>() / n as f64).collect()
                })
                .collect();
            (seps, per)
        }
        Direction::Time => {
            let t = lat.times[last];
            let idx: Vec<usize> = (0..last).filter(|&i| t - lat.times[i] > 0.0).collect();
            if idx.len() < 4 {
                return Err(Error::InsufficientSeparations(format!("only {} temporal separations", idx.len())));
            }
            let seps = idx.iter().map(|&i| t - lat.times[i]).collect();
            let per = samples
                .iter()
                .map(|smp| {
                    let u = &smp.values[last];
                    idx.iter()
                        .map(|&i| u.iter().zip(&smp.values[i]).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / n as f64)
                        .collect()
                })
                .collect();
            (seps, per)
        }
    };
    let fit = |reps: &[usize]| -> (f64, Vec<f64>) {
        let vars: Vec<f64> = (0..seps.len())
            .map(|j| reps.iter().map(|&r| per_rep[r][j]).sum::<f64>() / reps.len() as f64)
            .collect();
        let pts: Vec<(f64, f64)> = seps.iter().zip(&vars).map(|(s, v)| (s.ln(), v.ln())).collect();
        (ls_slope(&pts) / 2.0, vars)
    };
    let all: Vec<usize> = (0..samples.len()).collect();
    let (exponent, variances) = fit(&all);
    let boot: Vec<f64> = (0..BOOTSTRAP)
        .map(|b| {
            let mut rng = stream(0x5eed, b as u64, 0);
            let reps: Vec<usize> = (0..samples.len()).map(|_| rand::Rng::random_range(&mut rng, 0..samples.len())).collect();
            fit(&reps).0
        })
        .collect();
    let (_, se) = mean_se(&boot);
    let std_error = se * (BOOTSTRAP as f64).sqrt();
    Ok(HolderEstimate { exponent, std_error, separations: seps, variances })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupRow {
    pub modes: usize,
    pub points: usize,
    pub grid_max: f64,
    pub running_max: f64,
    /// Largest difference at shared grid points between the previous level
    /// and this level's projection onto the previous level's modes.
    pub coupling_residual: f64,
}

/// Grid maxima of `|H(t, ·)|` as the lattice refines: level `i` has
/// `K_0 2^i` modes on `4 K_0 2^i` points, so grids are nested and the
/// shared modes use the same noise.
pub fn sup_growth_probe(
    sym: &Symbol,
    length: f64,
    base_modes: usize,
    levels: usize,
    t: f64,
    seed: u64,
) -> Result<Vec<SupRow>> {
    if !(t > 0.0) || levels == 0 {
        return Err(Error::InvalidArgument("need t > 0 and at least one level".into()));
    }
    let mut rows: Vec<SupRow> = Vec::with_capacity(levels);
    let mut prev: Option<(Lattice, Vec<f64>)> = None;
    for i in 0..levels {
        let k = base_modes << i;
        let lat = Lattice::new(length, k, 4 * k, vec![t])?;
        let plans = Plans::new(lat.points);
        let modes = heat_modes(sym, &lat, seed, 0).remove(0);
        let (vals, _) = synthesize(&modes, &lat, &plans);
        let grid_max = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let coupling_residual = match &prev {
            Some((pl, pv)) => {
                let mut low = modes.clone();
                for m in low.iter_mut().skip(pl.modes + 1) {
                    *m = Complex64::new(0.0, 0.0);
                }
                let (lv, _) = synthesize(&low, &lat, &plans);
                pv.iter().enumerate().map(|(j, v)| (lv[2 * j] - v).abs()).fold(0.0, f64::max)
            }
            None => 0.0,
        };
        let running_max = rows.last().map_or(grid_max, |r| r.running_max.max(grid_max));
        rows.push(SupRow { modes: k, points: lat.points, grid_max, running_max, coupling_residual });
        prev = Some((lat, vals));
    }
    Ok(rows)
}
