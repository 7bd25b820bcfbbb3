//! Characteristic exponents of Lévy processes.
//!
//! A [`Symbol`] is the one place where Ψ, Re Ψ, Im Ψ and the lower index
//! are evaluated. For `d > 1` the exponent is radial: it is evaluated at
//! `|ξ|` and integrals pick up the sphere-surface factor from
//! [`sphere_area`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{E, PI};

use crate::{Error, Result};

/// Jump part and Gaussian part of a Lévy–Khintchine exponent
/// `Ψ(ξ) = -i b ξ + σ²ξ²/2 + ∫ (1 - e^{iξx} + iξx 1{|x|<1}) ν(dx)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevyTriplet {
    pub sigma2: f64,
    pub drift: f64,
    /// Atoms of ν as `(location, mass)`.
    pub atoms: Vec<(f64, f64)>,
    /// Piecewise-linear density of ν on a grid, `(x, value)`.
    pub density: Vec<(f64, f64)>,
}

impl LevyTriplet {
    pub fn gaussian(sigma2: f64) -> Self {
        LevyTriplet { sigma2, drift: 0.0, atoms: vec![], density: vec![] }
    }

    /// ∫ (1 ∧ x²) ν(dx), computed from the atoms and by the trapezoid rule
    /// on the tabulated density.
    pub fn small_jump_moment(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|&(x, m)| m * (x * x).min(1.0)).sum();
        let dens: f64 = self
            .density
            .windows(2)
            .map(|w| {
                let (x0, v0) = w[0];
                let (x1, v1) = w[1];
                0.5 * (x1 - x0) * (v0 * (x0 * x0).min(1.0) + v1 * (x1 * x1).min(1.0))
            })
            .sum();
        atoms + dens
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma2 >= 0.0) || !self.drift.is_finite() {
            return Err(Error::InvalidSymbol("sigma2 must be >= 0 and drift finite".into()));
        }
        if self.atoms.iter().any(|&(x, m)| !(m >= 0.0) || !x.is_finite() || x == 0.0) {
            return Err(Error::InvalidSymbol("atom masses must be >= 0 at nonzero locations".into()));
        }
        if self.density.iter().any(|&(x, v)| !(v >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidSymbol("density values must be >= 0".into()));
        }
        if self.density.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidSymbol("density grid must be strictly increasing".into()));
        }
        if !self.small_jump_moment().is_finite() {
            return Err(Error::InvalidSymbol("integral of (1 ∧ x²) against ν is not finite".into()));
        }
        Ok(())
    }

    fn is_symmetric(&self) -> bool {
        let atoms_sym = self.atoms.iter().all(|&(x, m)| {
            m == 0.0 || self.atoms.iter().any(|&(y, n)| y == -x && n == m)
        });
        let dens_sym = self.density.iter().all(|&(x, v)| {
            v == 0.0 || self.density.iter().any(|&(y, w)| y == -x && w == v)
        });
        self.drift == 0.0 && atoms_sym && dens_sym
    }

    fn psi(&self, xi: f64) -> Complex64 {
        let mut re = 0.5 * self.sigma2 * xi * xi;
        let mut im = self.drift * -xi;
        for &(x, m) in &self.atoms {
            let s = (0.5 * xi * x).sin();
            re += m * 2.0 * s * s;
            let comp = if x.abs() < 1.0 { xi * x } else { 0.0 };
            im -= m * ((xi * x).sin() - comp);
        }
        for w in self.density.windows(2) {
            let (x0, v0) = w[0];
            let (x1, v1) = w[1];
            let f = |x: f64| {
                let s = (0.5 * xi * x).sin();
                let comp = if x.abs() < 1.0 { xi * x } else { 0.0 };
                (2.0 * s * s, (xi * x).sin() - comp)
            };
            let (a0, b0) = f(x0);
            let (a1, b1) = f(x1);
            re += 0.5 * (x1 - x0) * (v0 * a0 + v1 * a1);
            im -= 0.5 * (x1 - x0) * (v0 * b0 + v1 * b1);
        }
        Complex64::new(re, im)
    }
}

/// Tabulated exponent on `0 < ξ_1 < … < ξ_n`, extended to `[0, ξ_1]` by
/// linear interpolation from `Ψ(0) = 0` and to negative frequencies by
/// Hermitian symmetry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub freq: Vec<f64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl Table {
    fn validate(&self) -> Result<()> {
        let n = self.freq.len();
        if n < 2 || self.re.len() != n || self.im.len() != n {
            return Err(Error::InvalidSymbol("table needs >= 2 rows of equal length".into()));
        }
        if self.freq[0] <= 0.0 || self.freq.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSymbol("table frequencies must be positive and increasing".into()));
        }
        if self.re.iter().any(|&r| !(r >= 0.0)) {
            return Err(Error::InvalidSymbol("tabulated Re Psi must be >= 0".into()));
        }
        Ok(())
    }

    fn max(&self) -> f64 {
        *self.freq.last().unwrap()
    }

    /// Linear interpolation in log-frequency; beyond the table the last
    /// segment is continued as a power law.
    fn eval_pos(&self, xi: f64) -> Complex64 {
        let f = &self.freq;
        if xi <= f[0] {
            let w = xi / f[0];
            return Complex64::new(w * self.re[0], w * self.im[0]);
        }
        let n = f.len();
        let j = match f.binary_search_by(|v| v.partial_cmp(&xi).unwrap()) {
            Ok(j) => return Complex64::new(self.re[j], self.im[j]),
            Err(j) => j.min(n - 1),
        };
        let (i0, i1) = (j - 1, j);
        let w = (xi.ln() - f[i0].ln()) / (f[i1].ln() - f[i0].ln());
        if xi > f[n - 1] && self.re[i0] > 0.0 && self.re[i1] > 0.0 {
            let p = (self.re[i1] / self.re[i0]).ln() / (f[i1] / f[i0]).ln();
            let scale = (xi / f[i1]).powf(p);
            return Complex64::new(self.re[i1] * scale, self.im[i1] * scale);
        }
        Complex64::new(
            self.re[i0] + w * (self.re[i1] - self.re[i0]),
            self.im[i0] + w * (self.im[i1] - self.im[i0]),
        )
    }
}

/// Catalog of exponents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SymbolKind {
    /// `Ψ(ξ) = scale·|ξ|²`. `scale = 1` gives variance `2t`, `scale = 1/2`
    /// gives standard Brownian motion.
    Brownian { scale: f64 },
    /// `Ψ(ξ) = |ξ|^α (1 - i·skew·sgn(ξ)·tan(πα/2))`, and for `α = 1`
    /// `Ψ(ξ) = |ξ| + i·skew·(2/π)·ξ·log|ξ|`.
    Stable { alpha: f64, skew: f64 },
    LevyKhintchine(LevyTriplet),
    /// `Ψ(ξ) = |ξ|·(log(e + |ξ|))^{α_p}`.
    LogPerturbed { alpha_p: f64 },
    Tabulated(Table),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Symbol {
    pub kind: SymbolKind,
    pub dim: usize,
    /// Multiplier applied after evaluation; `symmetrize` doubles it.
    pub factor: f64,
    /// When set only `factor·Re Ψ` is kept.
    pub real_only: bool,
}

impl Symbol {
    pub fn new(kind: SymbolKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSymbol("dimension must be positive".into()));
        }
        match &kind {
            SymbolKind::Brownian { scale } if !(*scale > 0.0) => {
                return Err(Error::InvalidSymbol("brownian scale must be > 0".into()))
            }
            SymbolKind::Stable { alpha, skew } => {
                if !(*alpha > 0.0 && *alpha <= 2.0) {
                    return Err(Error::InvalidSymbol("stable alpha must lie in (0, 2]".into()));
                }
                if !(skew.abs() <= 1.0) || (*alpha == 2.0 && *skew != 0.0) {
                    return Err(Error::InvalidSymbol("stable skew must lie in [-1, 1] (0 at alpha = 2)".into()));
                }
            }
            SymbolKind::LevyKhintchine(t) => t.validate()?,
            SymbolKind::LogPerturbed { alpha_p } if !alpha_p.is_finite() => {
                return Err(Error::InvalidSymbol("alpha_p must be finite".into()))
            }
            SymbolKind::Tabulated(t) => t.validate()?,
            _ => {}
        }
        if dim > 1 && !matches!(&kind, SymbolKind::Brownian { .. } | SymbolKind::LogPerturbed { .. })
            && !matches!(&kind, SymbolKind::Stable { skew, .. } if *skew == 0.0)
        {
            return Err(Error::InvalidSymbol("d > 1 needs an isotropic symmetric symbol".into()));
        }
        Ok(Symbol { kind, dim, factor: 1.0, real_only: false })
    }

    pub fn brownian(scale: f64) -> Self {
        Symbol::new(SymbolKind::Brownian { scale }, 1).unwrap()
    }

    pub fn stable(alpha: f64) -> Self {
        Symbol::new(SymbolKind::Stable { alpha, skew: 0.0 }, 1).unwrap()
    }

    pub fn log_perturbed(alpha_p: f64) -> Self {
        Symbol::new(SymbolKind::LogPerturbed { alpha_p }, 1).unwrap()
    }

    pub fn with_dim(mut self, dim: usize) -> Result<Self> {
        let s = Symbol::new(self.kind.clone(), dim)?;
        self.dim = s.dim;
        Ok(self)
    }

    pub fn is_symmetric(&self) -> bool {
        self.real_only
            || match &self.kind {
                SymbolKind::Brownian { .. } | SymbolKind::LogPerturbed { .. } => true,
                SymbolKind::Stable { skew, .. } => *skew == 0.0,
                SymbolKind::LevyKhintchine(t) => t.is_symmetric(),
                SymbolKind::Tabulated(t) => t.im.iter().all(|&v| v == 0.0),
            }
    }

    /// Largest frequency at which the exponent is data rather than
    /// extrapolation.
    pub fn frequency_limit(&self) -> f64 {
        match &self.kind {
            SymbolKind::Tabulated(t) => t.max(),
            _ => f64::INFINITY,
        }
    }

    /// The public evaluation: `(Re Ψ(ξ), Im Ψ(ξ))`.
    pub fn eval_exponent(&self, xi: f64) -> Result<(f64, f64)> {
        if xi.abs() > self.frequency_limit() {
            return Err(Error::OutOfRange { xi, max: self.frequency_limit() });
        }
        let z = self.psi(xi);
        Ok((z.re, z.im))
    }

    /// Ψ(ξ) without range checks (tabulated symbols extrapolate).
    pub fn psi(&self, xi: f64) -> Complex64 {
        if xi == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let a = xi.abs();
        let z = match &self.kind {
            SymbolKind::Brownian { scale } => Complex64::new(scale * a * a, 0.0),
            SymbolKind::Stable { alpha, skew } => {
                let m = a.powf(*alpha);
                if *skew == 0.0 {
                    Complex64::new(m, 0.0)
                } else if *alpha == 1.0 {
                    Complex64::new(a, skew * 2.0 / PI * xi * a.ln())
                } else {
                    Complex64::new(m, -skew * (PI * alpha / 2.0).tan() * xi.signum() * m)
                }
            }
            SymbolKind::LevyKhintchine(t) => t.psi(xi),
            SymbolKind::LogPerturbed { alpha_p } => Complex64::new(a * (E + a).ln().powf(*alpha_p), 0.0),
            SymbolKind::Tabulated(t) => {
                let z = t.eval_pos(a);
                if xi < 0.0 {
                    z.conj()
                } else {
                    z
                }
            }
        };
        let z = z * self.factor;
        if self.real_only {
            Complex64::new(z.re, 0.0)
        } else {
            z
        }
    }

    #[inline]
    pub fn re(&self, xi: f64) -> f64 {
        self.psi(xi).re
    }

    /// The exponent of the difference of two independent copies:
    /// `ξ ↦ 2 Re Ψ(ξ)`.
    pub fn symmetrize(&self) -> Symbol {
        Symbol { kind: self.kind.clone(), dim: self.dim, factor: 2.0 * self.factor, real_only: true }
    }

    /// Smallest frequency (a power of two, at least 1) at which
    /// `Re Ψ ≥ level`; capped at 2^200.
    pub fn knee(&self, level: f64) -> f64 {
        let mut xi = 1.0_f64;
        for _ in 0..200 {
            if self.re(xi) >= level || xi >= self.frequency_limit() {
                break;
            }
            xi *= 2.0;
        }
        xi
    }

    /// Frequency `ξ > 0` with `Re Ψ(ξ) = level`, for exponents that are
    /// increasing on `[0, ∞)`. Found by bracketing and bisection.
    pub fn invert_re(&self, level: f64) -> f64 {
        if level <= 0.0 {
            return 0.0;
        }
        let mut hi = 1.0_f64;
        while self.re(hi) < level && hi < 1e300 {
            hi *= 2.0;
        }
        let mut lo = 0.0_f64;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.re(mid) < level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Surface area of the unit sphere in `R^d`; equals 2 for `d = 1`, so that
/// `∫_R f(|ξ|) dξ = sphere_area(1)·∫_0^∞ f(r) dr`.
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma_half(d)
}

/// Γ(d/2) by the recursion from Γ(1/2) and Γ(1).
fn gamma_half(d: usize) -> f64 {
    let mut g = if d % 2 == 0 { 1.0 } else { PI.sqrt() };
    let mut x = if d % 2 == 0 { 1.0 } else { 0.5 };
    while x < d as f64 / 2.0 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Tail-minimum and fitted slope of `log Re Ψ(ξ) / log ξ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LowerIndex {
    pub estimate: f64,
    pub slope: f64,
}

/// Number of trailing grid points used for every liminf estimate.
pub const TAIL_WINDOW: usize = 10;

/// Estimate of the lower index `liminf log Re Ψ(ξ) / log |ξ|`.
pub fn lower_index(sym: &Symbol, probe: &[f64]) -> Result<LowerIndex> {
    if probe.len() < 16 {
        return Err(Error::InvalidArgument("probe grid needs at least 16 points".into()));
    }
    if probe.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("probe grid must be strictly increasing".into()));
    }
    if probe[0] <= 0.0 || (probe[probe.len() - 1] / probe[0]).log10() < 6.0 {
        return Err(Error::InvalidArgument("probe grid must be positive and span 6 decades".into()));
    }
    let tail = &probe[probe.len() - TAIL_WINDOW..];
    if tail.iter().any(|&x| x <= 1.0) {
        return Err(Error::InvalidArgument("tail window must lie above 1".into()));
    }
    let mut pts = Vec::with_capacity(TAIL_WINDOW);
    for &x in tail {
        let r = sym.re(x);
        if r > 0.0 {
            pts.push((x.ln(), r.ln()));
        }
    }
    if pts.len() < 2 {
        return Err(Error::DegenerateSymbol);
    }
    let estimate = pts.iter().map(|&(lx, lr)| lr / lx).fold(f64::INFINITY, f64::min);
    Ok(LowerIndex { estimate, slope: ls_slope(&pts) })
}

/// Least-squares slope of `y` against `x`.
pub(crate) fn ls_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Dyadic grid `2^1, …, 2^40` used for frequency-side index estimates.
pub fn dyadic_probe() -> Vec<f64> {
    (1..=40).map(|j| 2f64.powi(j)).collect()
}
