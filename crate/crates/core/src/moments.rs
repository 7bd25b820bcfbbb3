//! Exact second moments of the linear heat field `H` and wave field `W`,
//! and the inequality harness comparing them with the energy functionals.
//!
//! Every time integral is done in closed form per frequency; only the
//! frequency integral is numerical.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::functionals::{
    check_admissible, energy_e_unchecked, energy_f, h_function, spectral_integral, spectral_norm,
};
use crate::quadrature::{alternating_tail, half_line, integrate, integrate_span, Integral, QuadratureSpec};
use crate::symbols::{dyadic_probe, ls_slope, lower_index, Symbol};
use crate::testfn::{sinc, TestFunction};
use crate::{Error, Result};

const SERIES_CUTOFF: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub quantity: String,
    pub value: f64,
    pub error: f64,
}

impl MomentReport {
    fn new(quantity: String, v: Integral) -> Self {
        MomentReport { quantity, value: v.value, error: v.error }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityReport {
    pub quantity: String,
    pub lower: f64,
    pub middle: f64,
    pub upper: f64,
    pub margin_lo: f64,
    pub margin_hi: f64,
    /// Combined quadrature error of the three values.
    pub error: f64,
    pub pass: bool,
}

impl InequalityReport {
    pub fn new(quantity: String, lower: Integral, middle: Integral, upper: Integral) -> Self {
        let error = lower.error + middle.error + upper.error;
        let margin_lo = middle.value - lower.value;
        let margin_hi = upper.value - middle.value;
        InequalityReport {
            quantity,
            lower: lower.value,
            middle: middle.value,
            upper: upper.value,
            margin_lo,
            margin_hi,
            error,
            pass: margin_lo >= -error && margin_hi >= -error,
        }
    }

    /// Both margins exceed ten times the quadrature error, or all three
    /// values vanish.
    pub fn decisive(&self) -> bool {
        let degenerate = self.lower == 0.0 && self.middle == 0.0 && self.upper == 0.0;
        degenerate || (self.margin_lo > 10.0 * self.error && self.margin_hi > 10.0 * self.error)
    }
}

/// `∫_0^t e^{-2su} ds = (1 - e^{-2tu}) / (2u)`.
pub(crate) fn heat_kernel_mass(u: f64, t: f64) -> f64 {
    let x = t * u;
    if x.abs() < SERIES_CUTOFF {
        t * (1.0 - x + 2.0 / 3.0 * x * x)
    } else {
        -(-2.0 * x).exp_m1() / (2.0 * u)
    }
}

/// `|1 - e^{-z}|²` without cancellation for small `Re z`.
fn one_minus_exp_sq(z: Complex64) -> f64 {
    let (a, b) = (z.re, z.im);
    let e = (-a).exp();
    let s = (0.5 * b).sin();
    let re = -(-a).exp_m1() + e * 2.0 * s * s;
    let im = e * b.sin();
    re * re + im * im
}

fn check_time(t: f64, name: &str) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("{name} must be >= 0")));
    }
    Ok(())
}

/// `E|H(t, φ)|² = (2π)^{-d} ∫ |φ̂|² (1 - e^{-2t Re Ψ}) / (2 Re Ψ) dξ`.
pub fn heat_variance(sym: &Symbol, phi: &TestFunction, t: f64, spec: &QuadratureSpec) -> Result<MomentReport> {
    check_time(t, "t")?;
    let label = format!("heat_variance({},t={t})", phi.label());
    if t == 0.0 {
        phi.validate(sym.dim)?;
        return Ok(MomentReport { quantity: label, value: 0.0, error: 0.0 });
    }
    check_admissible(sym, phi, spec)?;
    let w = |x: f64| heat_kernel_mass(sym.re(x), t);
    let v = spectral_integral(sym, phi, &w, sym.knee(1.0 / t), spec)?.require(spec)?;
    Ok(MomentReport::new(label, v))
}

/// `E|H(t+ε, φ) - H(t, φ)|²`, split into the part driven by noise before
/// `t` (multiplier `|1 - e^{-εΨ}|²`) and the fresh noise on `[t, t+ε]`.
pub fn heat_increment_variance(
    sym: &Symbol,
    phi: &TestFunction,
    t: f64,
    eps: f64,
    spec: &QuadratureSpec,
) -> Result<MomentReport> {
    check_time(t, "t")?;
    check_time(eps, "eps")?;
    let label = format!("heat_increment_variance({},t={t},eps={eps})", phi.label());
    if eps == 0.0 {
        phi.validate(sym.dim)?;
        return Ok(MomentReport { quantity: label, value: 0.0, error: 0.0 });
    }
    check_admissible(sym, phi, spec)?;
    let w = |x: f64| {
        let z = sym.psi(x);
        one_minus_exp_sq(eps * z) * heat_kernel_mass(z.re, t) + heat_kernel_mass(z.re, eps)
    };
    let v = spectral_integral(sym, phi, &w, sym.knee(1.0 / eps), spec)?.require(spec)?;
    Ok(MomentReport::new(label, v))
}

/// `Cov(H(t, φ), H(s, ψ))` for `0 ≤ s ≤ t`.
///
/// `H(t, φ) = ∫_0^t ∫ (P*_{t-r} φ)(y) W(dr dy)` and `P*_u φ` has Fourier
/// transform `e^{-uΨ} φ̂`, so Plancherel and the isometry give
/// `(2π)^{-d} ∫ φ̂ conj(ψ̂) ∫_0^s e^{-(t-r)Ψ} e^{-(s-r) conj Ψ} dr dξ`
/// `= (2π)^{-d} ∫ φ̂ conj(ψ̂) e^{-(t-s)Ψ} (1 - e^{-2s Re Ψ}) / (2 Re Ψ) dξ`.
/// For real `φ, ψ` the integrand at `-ξ` is the conjugate of that at `ξ`,
/// so the integral is twice the real part over the half line.
pub fn heat_cross_covariance(
    sym: &Symbol,
    phi: &TestFunction,
    psi: &TestFunction,
    s: f64,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_time(s, "s")?;
    if !(t >= s) {
        return Err(Error::InvalidArgument("need 0 <= s <= t".into()));
    }
    phi.validate(sym.dim)?;
    psi.validate(sym.dim)?;
    if s == 0.0 || phi.is_zero() || psi.is_zero() {
        return Ok(0.0);
    }
    check_admissible(sym, phi, spec)?;
    check_admissible(sym, psi, spec)?;
    if phi == psi && s == t {
        return Ok(heat_variance(sym, phi, t, spec)?.value);
    }
    if s == t && (phi.oscillation().is_some() || psi.oscillation().is_some() || phi.fourier(1.0).arg() != psi.fourier(1.0).arg()) {
        return Err(Error::Unsupported("equal-time covariance of test functions with different phases".into()));
    }
    let d = sym.dim as i32;
    let f = |x: f64| {
        let z = sym.psi(x);
        let c = phi.fourier(x) * psi.fourier(x).conj() * (-(t - s) * z).exp();
        c.re * heat_kernel_mass(z.re, s) * x.powi(d - 1)
    };
    let v = half_line(&f, 0.0, sym.knee(1.0 / s).max(sym.knee(1.0 / (t - s).max(1e-300))), spec).require(spec)?;
    Ok(spectral_norm(sym.dim) * v.value)
}

/// `(1 - sinc x) / x²`.
fn one_minus_sinc_over_sq(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        1.0 / 6.0 - x2 / 120.0 + x2 * x2 / 5040.0 - x2 * x2 * x2 / 362880.0
    } else {
        (1.0 - x.sin() / x) / (x * x)
    }
}

/// Per-mode wave variance `∫_0^t sin²(a s)/a² ds` with `a = √Ψ`.
pub(crate) fn wave_mode_variance(a: f64, t: f64) -> f64 {
    2.0 * t * t * t * one_minus_sinc_over_sq(2.0 * a * t)
}

/// Per-mode wave covariance `∫_0^{t'} sin(a(t-s)) sin(a(t'-s))/a² ds`, `t' ≤ t`.
pub(crate) fn wave_mode_covariance(a: f64, t: f64, tp: f64) -> f64 {
    let d = t - tp;
    let s = sinc(a * tp);
    (a * d).cos() * wave_mode_variance(a, tp) + d * sinc(a * d) * tp * tp * s * s / 2.0
}

/// Per-mode wave increment variance: pre-`t` noise plus fresh noise.
fn wave_mode_increment(a: f64, t: f64, eps: f64) -> f64 {
    let s = sinc(0.5 * a * eps);
    let t1 = eps * eps * s * s * (0.5 * t + (a * (t + eps)).cos() * t * sinc(a * t) / 2.0);
    t1 + wave_mode_variance(a, eps)
}

#[derive(Clone, Copy, Debug)]
enum Trig {
    Smooth,
    Cos(f64),
    Sin(f64),
}

/// Large-frequency expansion term `coef(Ψ)·trig(ω√Ψ)`.
struct Term {
    coef: Box<dyn Fn(f64) -> f64>,
    trig: Trig,
}

fn term(trig: Trig, coef: impl Fn(f64) -> f64 + 'static) -> Term {
    Term { coef: Box::new(coef), trig }
}

fn require_wave_input(sym: &Symbol, phi: &TestFunction) -> Result<()> {
    if !sym.is_symmetric() {
        return Err(Error::SymmetryRequired);
    }
    phi.validate(sym.dim)?;
    if phi.oscillation().is_some() {
        return Err(Error::Unsupported("wave moments for oscillating test functions".into()));
    }
    Ok(())
}

/// `(2π)^{-d} ∫ full(√Ψ)·|φ̂|² dξ`, where past a cutoff the integrand is
/// replaced by its expansion into smooth and `cos/sin(ω√Ψ)` terms; each
/// oscillating term goes to the alternating-panel accelerator with zeros
/// found by inverting `Re Ψ`.
fn wave_integral(
    sym: &Symbol,
    phi: &TestFunction,
    full: &dyn Fn(f64) -> f64,
    terms: &[Term],
    spec: &QuadratureSpec,
) -> Result<Integral> {
    if phi.is_zero() {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    let d = sym.dim as i32;
    let m = |x: f64| phi.modulus_sq(x) * x.powi(d - 1);
    let a = |x: f64| sym.re(x).max(0.0).sqrt();
    let omega_min = terms
        .iter()
        .filter_map(|t| match t.trig {
            Trig::Cos(w) | Trig::Sin(w) if w > 0.0 => Some(w),
            _ => None,
        })
        .fold(f64::INFINITY, f64::min);
    let cut = if omega_min.is_finite() { sym.invert_re((20.0 / omega_min).powi(2)) } else { 1.0 }.max(1.0);
    let piece_rel = (spec.rel_tol * 1e-2).max(1e-14);
    let piece_abs = spec.abs_tol * 0.1;
    let mut total = integrate_span(&|x: f64| full(a(x)) * m(x), 0.0, cut, piece_abs, piece_rel);
    let a_cut = a(cut);
    for tm in terms {
        let c = |x: f64| (tm.coef)(sym.re(x)) * m(x);
        let part = match tm.trig {
            Trig::Smooth | Trig::Cos(0.0) => half_line(&c, cut, cut, spec).require(spec)?,
            Trig::Sin(0.0) => continue,
            Trig::Cos(w) | Trig::Sin(w) => {
                let shift = if matches!(tm.trig, Trig::Cos(_)) { 0.5 } else { 0.0 };
                let k0 = ((a_cut * w / PI) - shift).floor() + 1.0;
                let zero = |j: usize| {
                    let ak = (k0 + j as f64 + shift) * PI / w;
                    sym.invert_re(ak * ak)
                };
                let osc = |x: f64| match tm.trig {
                    Trig::Cos(_) => (w * a(x)).cos(),
                    _ => (w * a(x)).sin(),
                };
                let gap = integrate(|x: f64| c(x) * osc(x), cut, zero(0), piece_abs, piece_rel);
                gap + alternating_tail(&c, &osc, &zero, spec)
            }
        };
        total = total + part;
    }
    Ok(total.scale(spectral_norm(sym.dim)))
}

/// `E|W(t, φ)|²` for the wave equation driven by space-time white noise.
pub fn wave_variance(sym: &Symbol, phi: &TestFunction, t: f64, spec: &QuadratureSpec) -> Result<MomentReport> {
    check_time(t, "t")?;
    require_wave_input(sym, phi)?;
    let label = format!("wave_variance({},t={t})", phi.label());
    if t == 0.0 {
        return Ok(MomentReport { quantity: label, value: 0.0, error: 0.0 });
    }
    check_admissible(sym, phi, spec)?;
    // t/(2Ψ)·(1 - sinc(2t√Ψ)) = t/(2Ψ) - sin(2t√Ψ)/(4Ψ^{3/2}).
    let terms = [
        term(Trig::Smooth, move |p| t / (2.0 * p)),
        term(Trig::Sin(2.0 * t), |p| -0.25 / p.powf(1.5)),
    ];
    let v = wave_integral(sym, phi, &|a| wave_mode_variance(a, t), &terms, spec)?;
    Ok(MomentReport::new(label, v))
}

/// `Cov(W(t, φ), W(t', φ))`.
pub fn wave_covariance(sym: &Symbol, phi: &TestFunction, t: f64, tp: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_time(t, "t")?;
    check_time(tp, "t'")?;
    require_wave_input(sym, phi)?;
    let (t, tp) = if t >= tp { (t, tp) } else { (tp, t) };
    if tp == 0.0 {
        return Ok(0.0);
    }
    check_admissible(sym, phi, spec)?;
    let d = t - tp;
    // [t' cos(aδ) - (sin(a(t+t')) - sin(aδ))/(2a)] / (2Ψ).
    let terms = [
        term(Trig::Cos(d), move |p| tp / (2.0 * p)),
        term(Trig::Sin(t + tp), |p| -0.25 / p.powf(1.5)),
        term(Trig::Sin(d), |p| 0.25 / p.powf(1.5)),
    ];
    Ok(wave_integral(sym, phi, &|a| wave_mode_covariance(a, t, tp), &terms, spec)?.value)
}

/// `E|W(t+ε, φ) - W(t, φ)|²`.
pub fn wave_increment_variance(
    sym: &Symbol,
    phi: &TestFunction,
    t: f64,
    eps: f64,
    spec: &QuadratureSpec,
) -> Result<MomentReport> {
    check_time(t, "t")?;
    check_time(eps, "eps")?;
    require_wave_input(sym, phi)?;
    let label = format!("wave_increment_variance({},t={t},eps={eps})", phi.label());
    if eps == 0.0 {
        return Ok(MomentReport { quantity: label, value: 0.0, error: 0.0 });
    }
    check_admissible(sym, phi, spec)?;
    let c3 = |k: f64| move |p: f64| k / p.powf(1.5);
    let terms = [
        term(Trig::Smooth, move |p| (t + 0.5 * eps) / p),
        term(Trig::Cos(eps), move |p| -t / p),
        term(Trig::Sin(2.0 * t + eps), c3(0.5)),
        term(Trig::Sin(eps), c3(-0.5)),
        term(Trig::Sin(2.0 * t + 2.0 * eps), c3(-0.25)),
        term(Trig::Sin(2.0 * t), c3(-0.25)),
    ];
    let v = wave_integral(sym, phi, &|a| wave_mode_increment(a, t, eps), &terms, spec)?;
    Ok(MomentReport::new(label, v))
}

fn exact(v: f64) -> Integral {
    Integral { value: v, error: 0.0 }
}

/// `(1 - e^{-2t/λ})/2·𝓔(λ; φ) ≤ E|H(t, φ)|² ≤ e^{2t/λ}/2·𝓔(λ; φ)`.
pub fn verify_heat_quasi_isometry(
    sym: &Symbol,
    phi: &TestFunction,
    t: f64,
    lambda: f64,
    spec: &QuadratureSpec,
) -> Result<InequalityReport> {
    let mid = heat_variance(sym, phi, t, spec)?;
    let e = if t == 0.0 { exact(0.0) } else { energy_e_unchecked(sym, phi, lambda, spec)? };
    let lo = e.scale(-(-2.0 * t / lambda).exp_m1() / 2.0);
    let hi = e.scale((2.0 * t / lambda).exp() / 2.0);
    let label = format!("heat_quasi_isometry({},t={t},lambda={lambda})", phi.label());
    Ok(InequalityReport::new(label, lo, Integral { value: mid.value, error: mid.error }, hi))
}

/// `(t/4)·𝓔(t²; φ) ≤ E|W(t, φ)|² ≤ 2t·𝓔(t²; φ)`.
pub fn verify_wave_quasi_isometry(sym: &Symbol, phi: &TestFunction, t: f64, spec: &QuadratureSpec) -> Result<InequalityReport> {
    let mid = wave_variance(sym, phi, t, spec)?;
    let e = if t == 0.0 { exact(0.0) } else { energy_e_unchecked(sym, phi, t * t, spec)? };
    let label = format!("wave_quasi_isometry({},t={t})", phi.label());
    Ok(InequalityReport::new(label, e.scale(t / 4.0), Integral { value: mid.value, error: mid.error }, e.scale(2.0 * t)))
}

/// `𝓔(ε; φ)/2 ≤ E|H(t+ε, φ) - H(t, φ)|² ≤ 𝓔(ε; φ) + e^{2t}𝓕(ε; φ)`.
pub fn verify_heat_temporal_bounds(
    sym: &Symbol,
    phi: &TestFunction,
    t: f64,
    eps: f64,
    spec: &QuadratureSpec,
) -> Result<InequalityReport> {
    let mid = heat_increment_variance(sym, phi, t, eps, spec)?;
    let label = format!("heat_temporal({},t={t},eps={eps})", phi.label());
    if eps == 0.0 {
        return Ok(InequalityReport::new(label, exact(0.0), exact(0.0), exact(0.0)));
    }
    let e = energy_e_unchecked(sym, phi, eps, spec)?;
    let f = energy_f(sym, phi, eps, spec)?;
    let hi = e + f.scale((2.0 * t).exp());
    Ok(InequalityReport::new(label, e.scale(0.5), Integral { value: mid.value, error: mid.error }, hi))
}

/// `0 ≤ E|W(t+ε, φ) - W(t, φ)|² ≤ (8t + 6ε)·𝓔(ε²; φ)`.
pub fn verify_wave_temporal_bounds(
    sym: &Symbol,
    phi: &TestFunction,
    t: f64,
    eps: f64,
    spec: &QuadratureSpec,
) -> Result<InequalityReport> {
    let mid = wave_increment_variance(sym, phi, t, eps, spec)?;
    let label = format!("wave_temporal({},t={t},eps={eps})", phi.label());
    if eps == 0.0 {
        return Ok(InequalityReport::new(label, exact(0.0), exact(0.0), exact(0.0)));
    }
    let e = energy_e_unchecked(sym, phi, eps * eps, spec)?;
    Ok(InequalityReport::new(label, exact(0.0), Integral { value: mid.value, error: mid.error }, e.scale(8.0 * t + 6.0 * eps)))
}

/// `(1 - e^{-2t})·h(|x-y|) ≤ E|H(t,x) - H(t,y)|² ≤ e^{2t}·h(|x-y|)`.
pub fn verify_spatial_bounds(sym: &Symbol, t: f64, x: f64, y: f64, spec: &QuadratureSpec) -> Result<InequalityReport> {
    let h = h_function(sym, (x - y).abs(), spec)?;
    let mid = heat_variance(sym, &TestFunction::DeltaDifference { x, y }, t, spec)?;
    let label = format!("spatial(t={t},x={x},y={y})");
    Ok(InequalityReport::new(label, h.scale(-(-2.0 * t).exp_m1()), Integral { value: mid.value, error: mid.error }, h.scale((2.0 * t).exp())))
}

/// `(2/3)h(r)`, `E|H(t,x) - H(t,x+r)|²` and `8h(r)`: informational only.
pub fn spatial_constants_probe(sym: &Symbol, t: f64, r: f64, spec: &QuadratureSpec) -> Result<(f64, f64, f64)> {
    let h = h_function(sym, r, spec)?.value;
    let mid = heat_variance(sym, &TestFunction::DeltaDifference { x: 0.0, y: r }, t, spec)?.value;
    Ok((2.0 / 3.0 * h, mid, 8.0 * h))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderExponents {
    /// Lower index `β″` of `Re Ψ`.
    pub beta: f64,
    /// Exponent bound for spatial increment variances, `β″ - d`.
    pub spatial_variance: f64,
    /// Exponent bound for temporal increment variances, `(β″ - d)/β″`.
    pub temporal_variance: f64,
    /// Path exponents, half the variance exponents.
    pub spatial_path: f64,
    pub temporal_path: f64,
    /// Slopes fitted to exact increment variances at `t = 1`.
    pub fitted_spatial: f64,
    pub fitted_temporal: f64,
    /// Fitted exponents are at least the bounds minus 0.05.
    pub consistent: bool,
}

/// Joint Hölder exponents implied by the lower index of `Re Ψ`.
pub fn joint_holder_exponents(sym: &Symbol, spec: &QuadratureSpec) -> Result<HolderExponents> {
    if sym.dim != 1 {
        return Err(Error::Unsupported("joint exponents are computed for d = 1".into()));
    }
    let beta = lower_index(sym, &dyadic_probe())?.estimate;
    if beta <= 1.0 {
        return Err(Error::IndexTooSmall { beta, dim: 1 });
    }
    let spatial_variance = beta - 1.0;
    let temporal_variance = spatial_variance / beta;
    let mut sp = Vec::new();
    let mut tm = Vec::new();
    for j in 12..=20 {
        let x = 2f64.powi(-j);
        let vs = heat_variance(sym, &TestFunction::DeltaDifference { x: 0.0, y: x }, 1.0, spec)?.value;
        let vt = heat_increment_variance(sym, &TestFunction::delta(0.0), 1.0, x, spec)?.value;
        sp.push((x.ln(), vs.ln()));
        tm.push((x.ln(), vt.ln()));
    }
    let fitted_spatial = ls_slope(&sp);
    let fitted_temporal = ls_slope(&tm);
    Ok(HolderExponents {
        beta,
        spatial_variance,
        temporal_variance,
        spatial_path: spatial_variance / 2.0,
        temporal_path: temporal_variance / 2.0,
        fitted_spatial,
        fitted_temporal,
        consistent: fitted_spatial >= spatial_variance - 0.05 && fitted_temporal >= temporal_variance - 0.05,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::SymbolKind;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        (0..=n)
            .map(|i| f(a + i as f64 * h) * if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 })
            .sum::<f64>()
            * h
            / 3.0
    }

    #[test]
    fn heat_variance_examples() {
        let s = spec();
        let b = Symbol::brownian(1.0);
        let d = TestFunction::delta(0.0);
        assert_eq!(heat_variance(&b, &d, 0.0, &s).unwrap().value, 0.0);
        let v = heat_variance(&b, &d, 1.0, &s).unwrap().value;
        // Oracle: (s, ξ) quadrature of (1/2π)∫_0^1 ∫ e^{-2sξ²} dξ ds = (1/2π)∫_0^1 √(π/(2s)) ds,
        // with the inner Gaussian integral done by Simpson on [-12, 12].
        let oracle = simpson(
            |u| {
                let s = u * u; // ds = 2u du removes the s^{-1/2} singularity
                if s == 0.0 {
                    return 2.0 * (PI / 2.0).sqrt();
                }
                2.0 * u * simpson(|x| (-2.0 * s * x * x).exp(), -12.0 / s.sqrt(), 12.0 / s.sqrt(), 2000)
            },
            0.0,
            1.0,
            400,
        ) / (2.0 * PI);
        assert!((oracle - (1.0 / (2.0 * PI)).sqrt()).abs() < 1e-8, "{oracle}");
        assert!((v - 0.3989422804014327).abs() < 1e-10, "{v}");
        let g = TestFunction::gaussian(0.0, 0.5);
        let vg = heat_variance(&Symbol::stable(1.5), &g, 2.0, &s).unwrap().value;
        assert!(vg <= 2.0 * g.l2_norm_sq().unwrap());
    }

    #[test]
    fn increment_matches_bilinearity() {
        let s = spec();
        let b = Symbol::brownian(1.0);
        let d = TestFunction::delta(0.0);
        let inc = heat_increment_variance(&b, &d, 1.0, 0.1, &s).unwrap().value;
        let v1 = heat_variance(&b, &d, 1.1, &s).unwrap().value;
        let v0 = heat_variance(&b, &d, 1.0, &s).unwrap().value;
        let c = heat_cross_covariance(&b, &d, &d, 1.0, 1.1, &s).unwrap();
        assert!((inc - (v1 + v0 - 2.0 * c)).abs() < 1e-8, "{inc} {}", v1 + v0 - 2.0 * c);
        assert_eq!(heat_increment_variance(&b, &d, 1.0, 0.0, &s).unwrap().value, 0.0);
        let at0 = heat_increment_variance(&b, &d, 0.0, 0.3, &s).unwrap().value;
        assert_eq!(at0, heat_variance(&b, &d, 0.3, &s).unwrap().value);
    }

    #[test]
    fn cross_covariance_examples() {
        let s = spec();
        let b = Symbol::brownian(1.0);
        let g = TestFunction::gaussian(0.0, 1.0);
        assert_eq!(heat_cross_covariance(&b, &g, &g, 0.0, 1.0, &s).unwrap(), 0.0);
        let diag = heat_cross_covariance(&b, &g, &g, 1.0, 1.0, &s).unwrap();
        assert_eq!(diag, heat_variance(&b, &g, 1.0, &s).unwrap().value);
        // (r, ξ) brute force: (1/2π)∫_0^s ∫ e^{-ξ²} e^{-(t-r)ξ²} e^{-(s-r)ξ²} dξ dr.
        let (s0, t0) = (0.5, 1.0);
        let oracle = simpson(
            |r| simpson(|x| (-(1.0 + t0 + s0 - 2.0 * r) * x * x).exp(), -10.0, 10.0, 4000),
            0.0,
            s0,
            400,
        ) / (2.0 * PI);
        let v = heat_cross_covariance(&b, &g, &g, s0, t0, &s).unwrap();
        assert!((v - oracle).abs() < 1e-7, "{v} vs {oracle}");
    }

    #[test]
    fn asymmetric_cross_covariance_matches_brute_force() {
        let s = spec();
        let sym = Symbol::new(SymbolKind::Stable { alpha: 1.5, skew: 0.6 }, 1).unwrap();
        let phi = TestFunction::gaussian(0.3, 0.4);
        let psi = TestFunction::gaussian(-0.2, 0.6);
        let (s0, t0) = (0.4, 0.9);
        // (1/2π)∫_0^s ∫ φ̂ conj(ψ̂) e^{-(t-r)Ψ} conj(e^{-(s-r)Ψ}) dξ dr over the full line.
        let inner = |r: f64| {
            simpson(
                |x| {
                    let z = sym.psi(x);
                    let c = phi.fourier(x) * psi.fourier(x).conj() * (-(t0 - r) * z).exp() * (-(s0 - r) * z).exp().conj();
                    c.re
                },
                -12.0,
                12.0,
                6000,
            )
        };
        let oracle = simpson(inner, 0.0, s0, 200) / (2.0 * PI);
        let v = heat_cross_covariance(&sym, &phi, &psi, s0, t0, &s).unwrap();
        assert!((v - oracle).abs() < 1e-8, "{v} vs {oracle}");
    }

    #[test]
    fn wave_mode_formulas_match_time_quadrature() {
        for a in [0.0, 1e-3, 0.7, 3.0, 40.0] {
            let sa = |u: f64| if a == 0.0 { u } else { (a * u).sin() / a };
            let (t, tp, e) = (1.3, 0.8, 0.2);
            let v = simpson(|s| sa(t - s).powi(2), 0.0, t, 20000);
            assert!((wave_mode_variance(a, t) - v).abs() < 1e-10, "{a}");
            let c = simpson(|s| sa(t - s) * sa(tp - s), 0.0, tp, 20000);
            assert!((wave_mode_covariance(a, t, tp) - c).abs() < 1e-10, "{a}");
            let i = simpson(|s| (sa(t + e - s) - if s < t { sa(t - s) } else { 0.0 }).powi(2), 0.0, t, 20000)
                + simpson(|s| sa(t + e - s).powi(2), t, t + e, 20000);
            assert!((wave_mode_increment(a, t, e) - i).abs() < 1e-10, "{a}");
        }
    }

    #[test]
    fn wave_expansions_match_mode_formulas() {
        let (t, tp, e) = (1.1, 0.6, 0.15);
        for a in [25.0f64, 80.0, 300.0] {
            let p = a * a;
            let v = t / (2.0 * p) - (2.0 * t * a).sin() / (4.0 * p * a);
            assert!((v - wave_mode_variance(a, t)).abs() < 1e-14);
            let d = t - tp;
            let c = tp / (2.0 * p) * (a * d).cos() - ((a * (t + tp)).sin() - (a * d).sin()) / (4.0 * p * a);
            assert!((c - wave_mode_covariance(a, t, tp)).abs() < 1e-14);
            let i = (t + 0.5 * e) / p - t / p * (a * e).cos()
                + (0.5 * (a * (2.0 * t + e)).sin() - 0.5 * (a * e).sin() - 0.25 * (a * (2.0 * t + 2.0 * e)).sin() - 0.25 * (2.0 * a * t).sin())
                    / (p * a);
            assert!((i - wave_mode_increment(a, t, e)).abs() < 1e-14);
        }
    }

    #[test]
    fn wave_variance_examples() {
        let s = spec();
        let b = Symbol::brownian(1.0);
        let d = TestFunction::delta(0.0);
        assert_eq!(wave_variance(&b, &d, 0.0, &s).unwrap().value, 0.0);
        for t in [0.5, 1.0, 2.0] {
            let v = wave_variance(&b, &d, t, &s).unwrap().value;
            assert!((v - t * t / 4.0).abs() < 1e-9 * t * t, "{t}: {v}");
        }
        let g = TestFunction::gaussian(0.0, 0.3);
        let v = wave_variance(&Symbol::stable(1.5), &g, 1.5, &s).unwrap().value;
        assert!(v <= 1.5f64.powi(3) / 3.0 * g.l2_norm_sq().unwrap());
        let skew = Symbol::new(SymbolKind::Stable { alpha: 1.5, skew: 0.5 }, 1).unwrap();
        assert_eq!(wave_variance(&skew, &d, 1.0, &s), Err(Error::SymmetryRequired));
    }

    #[test]
    fn wave_covariance_and_increment_are_consistent() {
        let s = spec();
        let sym = Symbol::stable(1.5);
        let d = TestFunction::delta(0.0);
        let (t, e) = (1.0, 0.1);
        let inc = wave_increment_variance(&sym, &d, t, e, &s).unwrap().value;
        let v1 = wave_variance(&sym, &d, t + e, &s).unwrap().value;
        let v0 = wave_variance(&sym, &d, t, &s).unwrap().value;
        let c = wave_covariance(&sym, &d, t + e, t, &s).unwrap();
        assert!((inc - (v1 + v0 - 2.0 * c)).abs() < 1e-8, "{inc} vs {}", v1 + v0 - 2.0 * c);
        assert!((wave_covariance(&sym, &d, t, t, &s).unwrap() - v0).abs() < 1e-10);
    }

    #[test]
    fn verify_examples() {
        let s = spec();
        let b = Symbol::brownian(1.0);
        let d = TestFunction::delta(0.0);
        let r = verify_heat_quasi_isometry(&b, &d, 1.0, 1.0, &s).unwrap();
        assert!(r.pass && r.decisive() && r.margin_lo > 0.0 && r.margin_hi > 0.0);
        let r0 = verify_heat_quasi_isometry(&b, &d, 0.0, 1.0, &s).unwrap();
        assert!(r0.pass && r0.lower == 0.0 && r0.middle == 0.0 && r0.upper == 0.0);
        // λ = t: constants (1 - e^{-2})/2 ≥ 1/3 and e²/2 ≤ 4.
        let r1 = verify_heat_quasi_isometry(&b, &d, 1.0, 1.0, &s).unwrap();
        let e = energy_e_unchecked(&b, &d, 1.0, &s).unwrap().value;
        assert!(r1.middle >= e / 3.0 && r1.middle <= 4.0 * e);
        let sp = verify_spatial_bounds(&b, 1.0, 0.0, 1.0, &s).unwrap();
        let h = (1.0 - (-1.0f64).exp()) / 2.0;
        assert!(sp.pass && sp.middle >= 0.8647 * h && sp.middle <= 7.389 * h);
        let z = verify_spatial_bounds(&b, 1.0, 0.4, 0.4, &s).unwrap();
        assert!(z.pass && z.middle == 0.0 && z.upper == 0.0);
        let w = verify_wave_temporal_bounds(&Symbol::stable(1.5), &d, 1.0, 0.1, &s).unwrap();
        assert!(w.pass && w.decisive());
        let skew = Symbol::new(SymbolKind::Stable { alpha: 1.5, skew: 0.5 }, 1).unwrap();
        assert_eq!(verify_wave_quasi_isometry(&skew, &d, 1.0, &s), Err(Error::SymmetryRequired));
    }

    #[test]
    fn holder_exponents() {
        let s = spec();
        let b = joint_holder_exponents(&Symbol::brownian(1.0), &s).unwrap();
        assert!((b.spatial_path - 0.5).abs() < 1e-9 && (b.temporal_path - 0.25).abs() < 1e-9);
        assert!(b.consistent, "{b:?}");
        let st = joint_holder_exponents(&Symbol::stable(1.5), &s).unwrap();
        assert!((st.spatial_path - 0.25).abs() < 0.03 && (st.temporal_path - 1.0 / 6.0).abs() < 0.03);
        assert!(st.consistent, "{st:?}");
        assert!(matches!(joint_holder_exponents(&Symbol::stable(0.9), &s), Err(Error::IndexTooSmall { .. })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(16))]

            #[test]
            fn variances_monotone_in_t(t1 in 0.01f64..3.0, t2 in 0.01f64..3.0, w in 0.2f64..1.5) {
                let s = spec();
                let sym = Symbol::stable(1.4);
                let g = TestFunction::gaussian(0.0, w);
                let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
                let a = heat_variance(&sym, &g, lo, &s).unwrap().value;
                let b = heat_variance(&sym, &g, hi, &s).unwrap().value;
                prop_assert!(a <= b * (1.0 + 1e-10));
                let a = wave_variance(&sym, &g, lo, &s).unwrap().value;
                let b = wave_variance(&sym, &g, hi, &s).unwrap().value;
                prop_assert!(a <= b * (1.0 + 1e-9));
            }

            #[test]
            fn cross_covariance_symmetric_and_additive(s0 in 0.05f64..1.0, gap in 0.01f64..1.0, x in -1.0f64..1.0, y in -1.0f64..1.0) {
                let s = spec();
                let sym = Symbol::stable(1.6);
                let t0 = s0 + gap;
                let g = TestFunction::gaussian(0.1, 0.5);
                let dx = TestFunction::delta(x);
                let dy = TestFunction::delta(y);
                let a = heat_cross_covariance(&sym, &dx, &g, s0, t0, &s).unwrap();
                let b = heat_cross_covariance(&sym, &g, &dx, s0, t0, &s).unwrap();
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-6));
                let diff = heat_cross_covariance(&sym, &TestFunction::DeltaDifference { x, y }, &g, s0, t0, &s).unwrap();
                let c = heat_cross_covariance(&sym, &dy, &g, s0, t0, &s).unwrap();
                prop_assert!((diff - (a - c)).abs() <= 1e-9);
            }
        }
    }
}
