//! Picard iteration for `u = H + ∫_0^t p_{t-s} ∗ b(u(s)) ds` on a periodic
//! lattice, with the lattice transition densities it needs.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::functionals::hawkes_existence;
use crate::moments::heat_kernel_mass;
use crate::quadrature::QuadratureSpec;
use crate::sampler::{synthesize, FieldSample, Lattice, Plans};
use crate::symbols::{ls_slope, Symbol};
use crate::{Error, Result};

/// Bounded, globally Lipschitz drift.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Nonlinearity {
    Zero,
    Constant { c: f64 },
    /// `c·tanh(u)`.
    Tanh { c: f64 },
    /// `c·sin(clamp(u, -π/2, π/2))`.
    ClippedSine { c: f64 },
}

impl Nonlinearity {
    pub fn apply(&self, u: f64) -> f64 {
        match *self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::Constant { c } => c,
            Nonlinearity::Tanh { c } => c * u.tanh(),
            Nonlinearity::ClippedSine { c } => {
                let h = std::f64::consts::FRAC_PI_2;
                c * u.clamp(-h, h).sin()
            }
        }
    }

    pub fn bound(&self) -> f64 {
        match *self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::Constant { c } | Nonlinearity::Tanh { c } | Nonlinearity::ClippedSine { c } => c.abs(),
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match *self {
            Nonlinearity::Zero | Nonlinearity::Constant { .. } => 0.0,
            Nonlinearity::Tanh { c } | Nonlinearity::ClippedSine { c } => c.abs(),
        }
    }

    /// `λ = 2 Lip_b`, or 1 when `b` is constant.
    pub fn lambda(&self) -> f64 {
        let l = self.lipschitz();
        if l > 0.0 {
            2.0 * l
        } else {
            1.0
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthFit {
    pub c: f64,
    pub eta: f64,
    /// `∫_0^s ‖p_r‖² dr ≤ C e^{ηs}` on a grid of `s ∈ (0, t]`.
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityGrid {
    pub t: f64,
    pub dx: f64,
    /// `p_t(x_j)` after clipping and renormalization.
    pub values: Vec<f64>,
    /// `Σ p Δx` before clipping.
    pub mass: f64,
    /// Mass removed by clipping negative ringing.
    pub clipped_mass: f64,
    /// `∫_0^t ‖p_s‖²_{L²} ds` on the lattice.
    pub sq_norm_integral: f64,
    pub growth: GrowthFit,
}

/// Raw lattice density: `L^{-1} Σ_{|k|≤K} e^{-iξ_k x - tΨ(ξ_k)}`, then
/// negative values clipped and the mass renormalized.
fn density_values(sym: &Symbol, lat: &Lattice, t: f64, plans: &Plans) -> (Vec<f64>, f64, f64) {
    let modes: Vec<Complex64> = (0..=lat.modes).map(|k| (-t * sym.psi(lat.xi(k))).exp()).collect();
    let (mut v, _) = synthesize(&modes, lat, plans);
    let dx = lat.dx();
    let mass = v.iter().sum::<f64>() * dx;
    let mut clipped = 0.0;
    for p in v.iter_mut() {
        if *p < 0.0 {
            clipped -= *p * dx;
            *p = 0.0;
        }
    }
    if clipped > 0.0 {
        let m = v.iter().sum::<f64>() * dx;
        v.iter_mut().for_each(|p| *p /= m);
    }
    (v, mass, clipped)
}

fn sq_norm_integral(sym: &Symbol, lat: &Lattice, t: f64) -> f64 {
    let mut s = heat_kernel_mass(sym.re(0.0), t);
    for k in 1..=lat.modes {
        s += 2.0 * heat_kernel_mass(sym.re(lat.xi(k)), t);
    }
    s / lat.length
}

fn growth_fit(sym: &Symbol, lat: &Lattice, t: f64) -> GrowthFit {
    let ts: Vec<f64> = (1..=16).map(|i| t * i as f64 / 16.0).collect();
    let logs: Vec<f64> = ts.iter().map(|&s| sq_norm_integral(sym, lat, s).ln()).collect();
    let pts: Vec<(f64, f64)> = ts.iter().copied().zip(logs.iter().copied()).collect();
    let eta = ls_slope(&pts).max(0.0);
    // Both sides increase, so bounding I(s_{i+1}) by C e^{η s_i} covers [s_i, s_{i+1}].
    let c = (0..ts.len())
        .map(|i| (logs[i] - eta * if i == 0 { 0.0 } else { ts[i - 1] }).exp())
        .fold(0.0, f64::max);
    let holds = (1..=256).all(|i| {
        let s = t * i as f64 / 256.0;
        sq_norm_integral(sym, lat, s) <= c * (eta * s).exp() * (1.0 + 1e-9)
    });
    GrowthFit { c, eta, holds }
}

fn require_existence(sym: &Symbol) -> Result<()> {
    if !hawkes_existence(sym, 1.0, &QuadratureSpec::default())?.is_finite() {
        return Err(Error::DeltaNotAdmissible);
    }
    Ok(())
}

/// Lattice transition density `p_t` with its mass, clipping and growth
/// diagnostics.
pub fn transition_density(sym: &Symbol, t: f64, lat: &Lattice) -> Result<DensityGrid> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument("t must be > 0".into()));
    }
    require_existence(sym)?;
    let plans = Plans::new(lat.points);
    let (values, mass, clipped_mass) = density_values(sym, lat, t, &plans);
    if clipped_mass > 1e-6 {
        return Err(Error::RingingExcess(clipped_mass));
    }
    Ok(DensityGrid {
        t,
        dx: lat.dx(),
        values,
        mass,
        clipped_mass,
        sq_norm_integral: sq_norm_integral(sym, lat, t),
        growth: growth_fit(sym, lat, t),
    })
}

/// `(f ∗ g)(x_i) = Σ_j f(x_i - x_j) g(x_j) Δx`.
pub fn cyclic_convolution(f: &[f64], g: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    let plans = Plans::new(n);
    let mut a: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut b: Vec<Complex64> = g.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    plans.forward.process(&mut a);
    plans.forward.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    plans.inverse.process(&mut a);
    a.iter().map(|z| z.re * dx / n as f64).collect()
}

/// The Duhamel operator `J f(t_i) = Σ_j ω_ij (p_{t_i - t_j} ∗ f(t_j))` with
/// trapezoid weights on the sample grid, `t_0 = 0` included.
struct Duhamel {
    times: Vec<f64>,
    kernels: Vec<Vec<Option<Vec<Complex64>>>>,
    dx: f64,
    points: usize,
    plans: Plans,
    clipped_mass: f64,
}

impl Duhamel {
    fn new(sym: &Symbol, lat: &Lattice, times: Vec<f64>) -> Result<Self> {
        let plans = Plans::new(lat.points);
        let mut cache: HashMap<u64, Vec<Complex64>> = HashMap::new();
        let mut clipped_mass: f64 = 0.0;
        let mut kernels = Vec::with_capacity(times.len());
        for i in 0..times.len() {
            let mut row = Vec::with_capacity(i + 1);
            for j in 0..=i {
                let tau = times[i] - times[j];
                if tau <= 0.0 {
                    row.push(None);
                    continue;
                }
                let entry = cache.entry(tau.to_bits()).or_insert_with(|| {
                    let (v, _, c) = density_values(sym, lat, tau, &plans);
                    clipped_mass = clipped_mass.max(c);
                    let mut z: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                    plans.forward.process(&mut z);
                    z
                });
                row.push(Some(entry.clone()));
            }
            kernels.push(row);
        }
        if clipped_mass > 1e-6 {
            return Err(Error::RingingExcess(clipped_mass));
        }
        Ok(Duhamel { times, kernels, dx: lat.dx(), points: lat.points, plans, clipped_mass })
    }

    fn weight(&self, i: usize, j: usize) -> f64 {
        let t = &self.times;
        if i == 0 {
            return 0.0;
        }
        let left = if j > 0 { t[j] - t[j - 1] } else { 0.0 };
        let right = if j < i { t[j + 1] - t[j] } else { 0.0 };
        0.5 * (left + right)
    }

    fn apply(&self, f: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = self.points;
        let spectra: Vec<Vec<Complex64>> = f
            .par_iter()
            .map(|row| {
                let mut z: Vec<Complex64> = row.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                self.plans.forward.process(&mut z);
                z
            })
            .collect();
        (0..self.times.len())
            .into_par_iter()
            .map(|i| {
                let mut acc = vec![Complex64::new(0.0, 0.0); n];
                let mut direct = vec![0.0; n];
                for j in 0..=i {
                    let w = self.weight(i, j);
                    if w == 0.0 {
                        continue;
                    }
                    match &self.kernels[i][j] {
                        Some(k) => {
                            let w = w * self.dx / n as f64;
                            for ((a, p), s) in acc.iter_mut().zip(k).zip(&spectra[j]) {
                                *a += p * s * w;
                            }
                        }
                        // p_0 is the identity.
                        None => direct.iter_mut().zip(&f[j]).for_each(|(d, x)| *d += w * x),
                    }
                }
                self.plans.inverse.process(&mut acc);
                acc.iter().zip(&direct).map(|(a, d)| a.re + d).collect()
            })
            .collect()
    }

    /// `∫ e^{-λt} Σ_x |f(t, x)| Δx dt` by the trapezoid rule.
    fn norm(&self, f: &[Vec<f64>], lambda: f64) -> f64 {
        let m = self.times.len();
        (0..m)
            .map(|i| {
                let w = if m == 1 { 1.0 } else { self.weight(m - 1, i) };
                w * (-lambda * self.times[i]).exp() * f[i].iter().map(|x| x.abs()).sum::<f64>() * self.dx
            })
            .sum()
    }
}

/// Sample grid with `t = 0` prepended when missing (`H(0) = 0`).
fn padded(h: &FieldSample, lat: &Lattice) -> Result<(Vec<f64>, Vec<Vec<f64>>, usize)> {
    if h.values.len() != lat.times.len() || h.values.iter().any(|r| r.len() != lat.points) {
        return Err(Error::InvalidArgument("sample does not match the lattice".into()));
    }
    if lat.times[0] == 0.0 {
        Ok((lat.times.clone(), h.values.clone(), 0))
    } else {
        let mut t = vec![0.0];
        t.extend(&lat.times);
        let mut v = vec![vec![0.0; lat.points]];
        v.extend(h.values.iter().cloned());
        Ok((t, v, 1))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PicardDiagnostics {
    pub lambda: f64,
    /// `D_n = ‖u_{n+1} - u_n‖_Υ`, `n ≥ 0`.
    pub differences: Vec<f64>,
    /// `D_n / D_{n-1}`, `n ≥ 1`.
    pub ratios: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
    pub clipped_mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PicardRun {
    pub solution: FieldSample,
    pub diagnostics: PicardDiagnostics,
}

fn map_b(b: &Nonlinearity, u: &[Vec<f64>]) -> Vec<Vec<f64>> {
    u.iter().map(|r| r.iter().map(|&x| b.apply(x)).collect()).collect()
}

fn sub(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p - q).collect()).collect()
}

/// `u_0 = 0`, `u_{n+1} = H + J b(u_n)` until `D_n < tol`.
pub fn picard_solve(sym: &Symbol, b: &Nonlinearity, h: &FieldSample, lat: &Lattice, tol: f64, max_iter: usize) -> Result<PicardRun> {
    if max_iter == 0 || !(tol > 0.0) {
        return Err(Error::InvalidArgument("need tol > 0 and max_iter >= 1".into()));
    }
    require_existence(sym)?;
    let (times, hv, skip) = padded(h, lat)?;
    let op = Duhamel::new(sym, lat, times)?;
    let lambda = b.lambda();
    let mut u = vec![vec![0.0; lat.points]; hv.len()];
    let mut differences = Vec::new();
    let mut ratios = Vec::new();
    let mut converged = false;
    while differences.len() < max_iter {
        let j = op.apply(&map_b(b, &u));
        let next: Vec<Vec<f64>> = hv.iter().zip(&j).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect()).collect();
        let d = op.norm(&sub(&next, &u), lambda);
        if let Some(&prev) = differences.last() {
            ratios.push(if prev > 0.0 { d / prev } else { 0.0 });
        }
        differences.push(d);
        u = next;
        if d < tol {
            converged = true;
            break;
        }
    }
    if !converged {
        if let Some(&r) = ratios.last() {
            if r >= 1.0 {
                return Err(Error::NoConvergence { iterations: differences.len(), ratio: r });
            }
        }
    }
    let residual = residual_on(&op, b, &u, &hv, lambda);
    let solution = FieldSample { values: u[skip..].to_vec(), imag_residue: 0.0, ..h.clone() };
    Ok(PicardRun {
        solution,
        diagnostics: PicardDiagnostics {
            lambda,
            iterations: differences.len(),
            differences,
            ratios,
            converged,
            residual,
            clipped_mass: op.clipped_mass,
        },
    })
}

fn residual_on(op: &Duhamel, b: &Nonlinearity, hb: &[Vec<f64>], h: &[Vec<f64>], lambda: f64) -> f64 {
    let j = op.apply(&map_b(b, hb));
    let r: Vec<Vec<f64>> = hb
        .iter()
        .zip(h)
        .zip(&j)
        .map(|((a, x), y)| a.iter().zip(x).zip(y).map(|((p, q), s)| p - q - s).collect())
        .collect();
    let num = op.norm(&r, lambda);
    let den = op.norm(hb, lambda);
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

/// `‖H_b - H - J b(H_b)‖_Υ / ‖H_b‖_Υ`.
pub fn fixed_point_residual(h_b: &FieldSample, h: &FieldSample, b: &Nonlinearity, sym: &Symbol, lat: &Lattice) -> Result<f64> {
    let (times, hv, _) = padded(h, lat)?;
    let (_, hbv, _) = padded(h_b, lat)?;
    let op = Duhamel::new(sym, lat, times)?;
    Ok(residual_on(&op, b, &hbv, &hv, b.lambda()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowRow {
    pub t: f64,
    pub sup_diff: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExceedanceRow {
    pub threshold: f64,
    /// `#{|H| > c + s}`, `#{|H_b| > c}`, `#{|H| > c - s}` with `s = sup|b|·T`.
    pub inner: usize,
    pub middle: usize,
    pub outer: usize,
    pub inclusion: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ColocationReport {
    pub shift: f64,
    pub windows: Vec<WindowRow>,
    pub sup_diff: f64,
    pub bounded: bool,
    pub exceedance: Vec<ExceedanceRow>,
    /// `{|H| > c}` and `{|H_b| > c}` coincide for every threshold.
    pub identical: bool,
}

/// Sup of `|H_b - H|` per time slice and the nesting of exceedance sets.
pub fn blowup_colocation_report(h: &FieldSample, h_b: &FieldSample, b: &Nonlinearity, lat: &Lattice, thresholds: &[f64]) -> Result<ColocationReport> {
    if h.values.len() != lat.times.len() || h_b.values.len() != lat.times.len() {
        return Err(Error::InvalidArgument("samples do not match the lattice".into()));
    }
    let tmax = *lat.times.last().unwrap();
    let shift = b.bound() * tmax;
    let windows: Vec<WindowRow> = lat
        .times
        .iter()
        .zip(h.values.iter().zip(&h_b.values))
        .map(|(&t, (a, c))| WindowRow {
            t,
            sup_diff: a.iter().zip(c).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max),
            bound: b.bound() * t,
        })
        .collect();
    let sup_diff = windows.iter().map(|w| w.sup_diff).fold(0.0, f64::max);
    let bounded = windows.iter().all(|w| w.sup_diff <= w.bound + 1e-6);
    let pts = || h.values.iter().flatten().zip(h_b.values.iter().flatten());
    let mut identical = true;
    let exceedance = thresholds
        .iter()
        .map(|&c| {
            let mut row = ExceedanceRow { threshold: c, inner: 0, middle: 0, outer: 0, inclusion: true };
            for (x, y) in pts() {
                let (inner, mid, outer) = (x.abs() > c + shift, y.abs() > c, x.abs() > c - shift);
                row.inner += inner as usize;
                row.middle += mid as usize;
                row.outer += outer as usize;
                if (inner && !mid) || (mid && !outer) {
                    row.inclusion = false;
                }
                if (x.abs() > c) != mid {
                    identical = false;
                }
            }
            row
        })
        .collect();
    Ok(ColocationReport { shift, windows, sup_diff, bounded, exceedance, identical })
}
