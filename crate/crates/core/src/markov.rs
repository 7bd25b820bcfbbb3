//! Occupation measures and heat moments for a symmetric chain on the
//! circle `Z_N`, and occupation experiments for Lévy paths on the line.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::Serialize;

use crate::moments::{heat_kernel_mass, InequalityReport};
use crate::quadrature::{integrate, Integral};
use crate::rng::{mean_se, normal, stream};
use crate::symbols::{Symbol, SymbolKind};
use crate::{Error, Result};

/// Continuous-time walk on `Z_N` jumping at rate `ρ/2` to each neighbour,
/// with the uniform probability `m` as symmetrizing measure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainModel {
    pub states: usize,
    pub rate: f64,
}

impl ChainModel {
    pub fn new(states: usize, rate: f64) -> Result<Self> {
        if states < 2 || !(rate >= 0.0) {
            return Err(Error::InvalidArgument("need N >= 2 and rho >= 0".into()));
        }
        Ok(ChainModel { states, rate })
    }

    /// `μ_k = ρ(1 - cos(2πk/N))`.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let s = (PI * k as f64 / self.states as f64).sin();
        2.0 * self.rate * s * s
    }

    /// Generator matrix, row-major.
    pub fn generator(&self) -> Vec<Vec<f64>> {
        let n = self.states;
        let mut q = vec![vec![0.0; n]; n];
        for (i, row) in q.iter_mut().enumerate() {
            row[(i + 1) % n] += 0.5 * self.rate;
            row[(i + n - 1) % n] += 0.5 * self.rate;
            row[i] -= self.rate;
        }
        q
    }

    /// `φ̂_k = (φ, e_k)_m = N^{-1} Σ_j φ_j e^{-2πijk/N}`; returns `|φ̂_k|²`.
    pub fn spectrum(&self, phi: &[f64]) -> Result<Vec<f64>> {
        let n = self.states;
        if phi.len() != n {
            return Err(Error::InvalidArgument(format!("function has {} values for {n} states", phi.len())));
        }
        Ok((0..n)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (j, &v) in phi.iter().enumerate() {
                    let a = -2.0 * PI * ((j * k) % n) as f64 / n as f64;
                    re += v * a.cos();
                    im += v * a.sin();
                }
                (re * re + im * im) / (n * n) as f64
            })
            .collect())
    }

    fn weighted(&self, phi: &[f64], f: impl Fn(f64) -> f64) -> Result<f64> {
        Ok(self.spectrum(phi)?.iter().enumerate().map(|(k, p)| p * f(self.eigenvalue(k))).sum())
    }
}

/// `E|u(t, φ)|² = ∫_0^t ‖P_s φ‖²_{L²(m)} ds`.
pub fn chain_heat_variance(chain: &ChainModel, phi: &[f64], t: f64) -> Result<f64> {
    chain.weighted(phi, |mu| heat_kernel_mass(mu, t))
}

/// `G(μ, t) = (e^{-μt} - 1 + μt)/μ²`.
fn occupation_kernel(mu: f64, t: f64) -> f64 {
    let x = mu * t;
    if x < 1e-3 {
        t * t * (0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0)
    } else {
        ((-x).exp_m1() + x) / (mu * mu)
    }
}

/// `E_m|Z(t, φ)|² = 2 ∫_0^t ∫_u^t (P_{v-u} φ, φ) dv du`.
pub fn chain_occupation_second_moment(chain: &ChainModel, phi: &[f64], t: f64) -> Result<f64> {
    Ok(2.0 * chain.weighted(phi, |mu| occupation_kernel(mu, t))?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalTimeReport {
    /// `E_m|Z(t, φ)|²`.
    pub lhs: f64,
    /// `4 ∫_0^t E|u(s/2, φ)|² ds` by quadrature.
    pub rhs: f64,
    pub residual: f64,
    /// `(t/8) E|u(t)|² ≤ E_m|Z(t)|² ≤ 4t E|u(t)|²`.
    pub bounds: InequalityReport,
}

/// Occupation second moment against the time-integrated heat variance.
pub fn verify_localtime_identity(chain: &ChainModel, phi: &[f64], t: f64) -> Result<LocalTimeReport> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument("t must be > 0".into()));
    }
    let lhs = chain_occupation_second_moment(chain, phi, t)?;
    let spec = chain.spectrum(phi)?;
    let f = |s: f64| -> f64 {
        spec.iter().enumerate().map(|(k, p)| p * heat_kernel_mass(chain.eigenvalue(k), s / 2.0)).sum()
    };
    let rhs = 4.0 * integrate(f, 0.0, t, 0.0, 1e-14).value;
    let residual = (lhs - rhs).abs() / lhs.abs().max(f64::MIN_POSITIVE);
    let u = chain_heat_variance(chain, phi, t)?;
    let ex = |v: f64| Integral { value: v, error: 0.0 };
    let bounds = InequalityReport::new(
        format!("localtime(N={},rho={},t={t})", chain.states, chain.rate),
        ex(t / 8.0 * u),
        ex(lhs),
        ex(4.0 * t * u),
    );
    Ok(LocalTimeReport { lhs, rhs, residual, bounds })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OccupationResult {
    pub values: Vec<f64>,
    pub second_moment: f64,
    pub std_error: f64,
}

impl OccupationResult {
    fn from_values(values: Vec<f64>) -> Self {
        let sq: Vec<f64> = values.iter().map(|z| z * z).collect();
        let (second_moment, std_error) = mean_se(&sq);
        OccupationResult { values, second_moment, std_error }
    }
}

/// `∫_0^t φ(X_s) ds` along one path started from `m`, exact from the
/// holding times.
fn chain_path_occupation(chain: &ChainModel, phi: &[f64], t: f64, rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    let n = chain.states;
    let mut x = rng.random_range(0..n);
    if chain.rate == 0.0 {
        return t * phi[x];
    }
    let hold = Exp::new(chain.rate).unwrap();
    let mut now = 0.0;
    let mut z = 0.0;
    loop {
        let h: f64 = hold.sample(rng);
        if now + h >= t {
            return z + (t - now) * phi[x];
        }
        z += h * phi[x];
        now += h;
        x = if rng.random::<bool>() { (x + 1) % n } else { (x + n - 1) % n };
    }
}

/// `M` replicates of `Z(t, φ)` under `P_m`.
pub fn simulate_chain_occupation(chain: &ChainModel, phi: &[f64], t: f64, m: usize, seed: u64) -> Result<OccupationResult> {
    if m == 0 || phi.len() != chain.states || !(t >= 0.0) {
        return Err(Error::InvalidArgument("need M >= 1, t >= 0 and one value per state".into()));
    }
    let values: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|r| chain_path_occupation(chain, phi, t, &mut stream(seed, r as u64, 0)))
        .collect();
    Ok(OccupationResult::from_values(values))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolventReport {
    /// `(R_λ φ, φ) = Σ |φ̂_k|² / (λ + μ_k)`.
    pub resolvent: f64,
    /// Monte Carlo `E_m|Z(T_λ, φ)|²` with `T_λ` exponential of mean `1/λ`.
    pub mc_second_moment: f64,
    pub mc_std_error: f64,
    /// `(2/λ)(R_λ φ, φ)`.
    pub target: f64,
    /// `E|u(T, φ)|²` with `T` exponential of rate `2λ`, from the Laplace
    /// transform of the variance.
    pub u_side: f64,
    pub u_residual: f64,
}

pub fn chain_resolvent_identities(chain: &ChainModel, phi: &[f64], lambda: f64, m: usize, seed: u64) -> Result<ResolventReport> {
    if !(lambda > 0.0) || m == 0 {
        return Err(Error::InvalidArgument("need lambda > 0 and M >= 1".into()));
    }
    let resolvent = chain.weighted(phi, |mu| 1.0 / (lambda + mu))?;
    // 2λ ∫ e^{-2λt} (1 - e^{-2μt})/(2μ) dt = (1/(2μ))(1 - 2λ/(2λ + 2μ)).
    let u_side = chain.weighted(phi, |mu| {
        if mu == 0.0 {
            1.0 / (2.0 * lambda)
        } else {
            (1.0 - 2.0 * lambda / (2.0 * lambda + 2.0 * mu)) / (2.0 * mu)
        }
    })?;
    let horizon = Exp::new(lambda).unwrap();
    let values: Vec<f64> = (0..m)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, r as u64, 1);
            let t: f64 = horizon.sample(&mut rng);
            chain_path_occupation(chain, phi, t, &mut rng)
        })
        .collect();
    let occ = OccupationResult::from_values(values);
    Ok(ResolventReport {
        resolvent,
        mc_second_moment: occ.second_moment,
        mc_std_error: occ.std_error,
        target: 2.0 / lambda * resolvent,
        u_side,
        u_residual: (u_side - resolvent / 2.0).abs(),
    })
}

/// Step distribution of the symmetrized process `X̄ = X - X′`, whose
/// exponent is `2 Re Ψ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum PathLaw {
    /// `X̄_Δ ~ N(0, 4·scale·Δ)`.
    Gaussian { scale: f64 },
    /// `X̄_Δ = (2cΔ)^{1/α} S` with `E e^{iξS} = e^{-|ξ|^α}`.
    Stable { alpha: f64, c: f64 },
}

impl PathLaw {
    pub fn from_symbol(sym: &Symbol) -> Result<Self> {
        if sym.dim != 1 {
            return Err(Error::Unsupported("path experiments are one-dimensional".into()));
        }
        match sym.kind {
            SymbolKind::Brownian { scale } => Ok(PathLaw::Gaussian { scale: scale * sym.factor }),
            SymbolKind::Stable { alpha, skew } if skew == 0.0 => {
                if alpha == 2.0 {
                    Ok(PathLaw::Gaussian { scale: sym.factor })
                } else {
                    Ok(PathLaw::Stable { alpha, c: sym.factor })
                }
            }
            _ => Err(Error::Unsupported("path sampling covers brownian and symmetric stable symbols".into())),
        }
    }

    /// `E|X̄_Δ|`, or the scale `(2cΔ)^{1/α}` when the mean is infinite.
    pub fn step_size(&self, dt: f64) -> f64 {
        match *self {
            PathLaw::Gaussian { scale } => (2.0 * 4.0 * scale * dt / PI).sqrt(),
            PathLaw::Stable { alpha, c } => {
                let s = (2.0 * c * dt).powf(1.0 / alpha);
                if alpha > 1.0 {
                    s * 2.0 / PI * gamma(1.0 - 1.0 / alpha)
                } else {
                    s
                }
            }
        }
    }

    fn draw(&self, dt: f64, rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
        match *self {
            PathLaw::Gaussian { scale } => (4.0 * scale * dt).sqrt() * normal(rng),
            PathLaw::Stable { alpha, c } => (2.0 * c * dt).powf(1.0 / alpha) * standard_stable(alpha, rng),
        }
    }
}

/// Symmetric stable variate with `E e^{iξS} = e^{-|ξ|^α}`
/// (Chambers–Mallows–Stuck).
pub fn standard_stable(alpha: f64, rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    let v = PI * (rng.random::<f64>() - 0.5);
    let w: f64 = Exp::new(1.0).unwrap().sample(rng);
    if alpha == 1.0 {
        return v.tan();
    }
    (alpha * v).sin() / v.cos().powf(1.0 / alpha) * (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha)
}

/// Lanczos approximation of `Γ(x)` for `x > 0`.
fn gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = G[0];
    let t = x + 7.5;
    for (i, g) in G.iter().enumerate().skip(1) {
        a += g / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CauchyRow {
    pub eps: f64,
    pub next_eps: f64,
    /// Sample `E|Z(t, f_ε) - Z(t, f_δ)|²`.
    pub d: f64,
    pub se: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrendClass {
    Decreasing,
    NotDecreasing,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevyOccupation {
    pub rows: Vec<CauchyRow>,
    /// Sample mean of `Z(t, f_ε)` at the smallest `ε`, with its SE.
    pub mean_smallest: f64,
    pub mean_se: f64,
    pub class: TrendClass,
}

/// Largest step for which `E|X̄_Δ| < ε_min/10` (or the scale, when the mean
/// is infinite).
pub fn max_step(sym: &Symbol, eps_min: f64) -> Result<f64> {
    let law = PathLaw::from_symbol(sym)?;
    let (mut lo, mut hi) = (0.0, 1.0);
    while law.step_size(hi) < eps_min / 10.0 && hi < 1e6 {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if law.step_size(mid) < eps_min / 10.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Occupation of `f_ε^a = 1{|x - a| ≤ ε}/(2ε)` by the symmetrized path
/// started at 0, for each `ε`, with consecutive-pair Cauchy diagnostics.
pub fn levy_occupation_experiment(
    sym: &Symbol,
    a: f64,
    eps: &[f64],
    t: f64,
    m: usize,
    dt: f64,
    seed: u64,
) -> Result<LevyOccupation> {
    let law = PathLaw::from_symbol(sym)?;
    if eps.len() < 2 || eps.windows(2).any(|w| w[1] >= w[0]) || eps.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidArgument("need a decreasing sequence of at least two positive eps".into()));
    }
    if m < 2 || !(t > 0.0) || !(dt > 0.0) {
        return Err(Error::InvalidArgument("need M >= 2, t > 0, dt > 0".into()));
    }
    let eps_min = *eps.last().unwrap();
    if law.step_size(dt) >= eps_min / 10.0 {
        return Err(Error::StepTooCoarse(format!(
            "typical step {:.3e} is not below eps_min/10 = {:.3e}",
            law.step_size(dt),
            eps_min / 10.0
        )));
    }
    let steps = (t / dt).ceil() as usize;
    let h = t / steps as f64;
    let occ: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, r as u64, 2);
            let mut x = 0.0;
            let mut z = vec![0.0; eps.len()];
            for _ in 0..steps {
                let y = x + law.draw(h, &mut rng);
                // Midpoint of the step as the Riemann node.
                let mid = 0.5 * (x + y) - a;
                for (zi, &e) in z.iter_mut().zip(eps) {
                    if mid.abs() <= e {
                        *zi += h / (2.0 * e);
                    }
                }
                x = y;
            }
            z
        })
        .collect();
    let rows: Vec<CauchyRow> = (0..eps.len() - 1)
        .map(|i| {
            let sq: Vec<f64> = occ.iter().map(|z| (z[i] - z[i + 1]).powi(2)).collect();
            let (d, se) = mean_se(&sq);
            CauchyRow { eps: eps[i], next_eps: eps[i + 1], d, se }
        })
        .collect();
    let last: Vec<f64> = occ.iter().map(|z| *z.last().unwrap()).collect();
    let (mean_smallest, mean_se) = mean_se(&last);
    let first = &rows[0];
    let fin = rows.last().unwrap();
    let decreasing = rows.windows(2).all(|w| w[1].d < w[0].d);
    let noise = 2.0 * (first.se * first.se + fin.se * fin.se).sqrt();
    let class = if decreasing && fin.d < 0.3 * first.d {
        TrendClass::Decreasing
    } else if fin.d >= first.d - noise {
        TrendClass::NotDecreasing
    } else {
        TrendClass::Inconclusive
    };
    Ok(LevyOccupation { rows, mean_smallest, mean_se, class })
}
