//! Adaptive Gauss–Kronrod quadrature on finite intervals, decade-panel
//! integration to infinity with a fitted power/log tail, and an
//! alternating-panel accelerator for oscillatory tails.

use std::collections::BinaryHeap;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077943229264335,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

/// Tolerances and truncation policy for improper spectral integrals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Cutoff, in units of the integrand's own scale, before tail fitting starts.
    pub initial_cutoff: f64,
    pub max_cutoff: f64,
    /// Largest accepted max-abs residual of the log-tail regression.
    pub fit_residual: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { abs_tol: 1e-14, rel_tol: 1e-10, initial_cutoff: 1.0, max_cutoff: 1e60, fit_residual: 1e-3 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidArgument("quadrature tolerances must be > 0".into()));
        }
        if !(self.initial_cutoff > 0.0 && self.max_cutoff > self.initial_cutoff) {
            return Err(Error::InvalidArgument("need 0 < initial_cutoff < max_cutoff".into()));
        }
        if !(self.fit_residual > 0.0) {
            return Err(Error::InvalidArgument("fit_residual must be > 0".into()));
        }
        Ok(())
    }
}

/// Value with an error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

impl std::ops::Add for Integral {
    type Output = Integral;
    fn add(self, o: Integral) -> Integral {
        Integral { value: self.value + o.value, error: self.error + o.error }
    }
}

impl std::ops::Sub for Integral {
    type Output = Integral;
    fn sub(self, o: Integral) -> Integral {
        Integral { value: self.value - o.value, error: self.error + o.error }
    }
}

impl Integral {
    pub fn scale(self, c: f64) -> Integral {
        Integral { value: c * self.value, error: c.abs() * self.error }
    }
}

/// Classification of an improper integral.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum Outcome {
    Finite { value: f64, error: f64 },
    /// Partial integrals grow like `cutoff^exponent` (exponent 0 is
    /// logarithmic growth).
    Divergent { exponent: f64 },
    Inconclusive { reason: String },
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Finite { .. } => "finite",
            Outcome::Divergent { .. } => "divergent",
            Outcome::Inconclusive { .. } => "inconclusive",
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Outcome::Finite { .. })
    }

    /// Converts to a value that must meet `spec`'s tolerance.
    pub fn require(self, spec: &QuadratureSpec) -> Result<Integral> {
        match self {
            Outcome::Finite { value, error } => {
                if error <= (spec.abs_tol.max(spec.rel_tol * value.abs())) * 1e3 {
                    Ok(Integral { value, error })
                } else {
                    Err(Error::ToleranceNotMet { value, error })
                }
            }
            Outcome::Divergent { exponent } => Err(Error::DivergenceDetected { exponent }),
            Outcome::Inconclusive { reason } => Err(Error::Inconclusive(reason)),
        }
    }
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[10];
    let mut gauss = 0.0;
    for i in 0..10 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// Globally adaptive 21-point Gauss–Kronrod quadrature on `[a, b]`:
/// the piece with the largest error estimate is bisected until the total
/// error meets `max(abs_tol, rel_tol·|value|)` or 4000 pieces exist.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Integral {
    if a == b {
        return Integral { value: 0.0, error: 0.0 };
    }
    let (v, e) = gk21(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, value: v, error: e });
    let mut total = v;
    let mut err = e;
    let mut count = 1;
    while err > abs_tol.max(rel_tol * total.abs()) && count < 4000 {
        let p = heap.pop().unwrap();
        let m = 0.5 * (p.a + p.b);
        if m <= p.a.min(p.b) || m >= p.a.max(p.b) {
            heap.push(p);
            break;
        }
        let (v1, e1) = gk21(&f, p.a, m);
        let (v2, e2) = gk21(&f, m, p.b);
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.error;
        heap.push(Piece { a: p.a, b: m, value: v1, error: e1 });
        heap.push(Piece { a: m, b: p.b, value: v2, error: e2 });
        count += 1;
    }
    // Re-sum in a fixed order so the result does not depend on heap history.
    let mut pieces = heap.into_vec();
    pieces.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = pieces.iter().map(|p| p.value).sum();
    let error = pieces.iter().map(|p| p.error).sum();
    Integral { value, error }
}

/// `∫_a^b f` for `0 ≤ a < b`, linear below 1 and in the variable `log ξ`
/// one decade at a time above 1.
pub fn integrate_span<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Integral {
    let mut out = Integral { value: 0.0, error: 0.0 };
    if b <= a {
        return out;
    }
    if a < 1.0 {
        out = out + integrate(f, a, b.min(1.0), abs_tol, rel_tol);
    }
    let mut lo = a.max(1.0);
    while lo < b {
        let hi = (lo * 10.0).min(b);
        out = out + integrate_log(f, lo, hi, abs_tol, rel_tol);
        lo = hi;
    }
    out
}

fn integrate_log<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Integral {
    integrate(
        |u: f64| {
            let x = u.exp();
            f(x) * x
        },
        a.ln(),
        b.ln(),
        abs_tol,
        rel_tol,
    )
}

/// Fitted tail model `log f(ξ) ≈ c - q·log ξ - m·log log ξ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailFit {
    pub c: f64,
    pub q: f64,
    pub m: f64,
    pub residual: f64,
}

const Q_TOL: f64 = 0.01;
const M_TOL: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Trend {
    Convergent,
    Divergent,
    Ambiguous,
}

impl TailFit {
    fn trend(&self) -> Trend {
        if self.q > 1.0 + Q_TOL || ((self.q - 1.0).abs() <= Q_TOL && self.m > 1.0 + M_TOL) {
            Trend::Convergent
        } else if self.q < 1.0 - Q_TOL || ((self.q - 1.0).abs() <= Q_TOL && self.m < 1.0 - M_TOL) {
            Trend::Divergent
        } else {
            Trend::Ambiguous
        }
    }

    /// `∫_X^∞` of the fitted model, via `u = log X · e^y`.
    fn tail_from(&self, x: f64) -> f64 {
        let q = self.q.max(1.0);
        let u0 = x.ln();
        let h = |y: f64| {
            let u = u0 * y.exp();
            (self.c + (1.0 - q) * u - self.m * u.ln()).exp() * u
        };
        let mut ymax = 1.0;
        while ymax < 700.0 && h(ymax) * ymax > 1e-18 * h(0.0).max(1e-300) {
            ymax *= 2.0;
        }
        integrate(h, 0.0, ymax, 0.0, 1e-12).value
    }
}

/// Least-squares fit of the tail model on `[x_lo, x_hi]` (both > e).
pub fn fit_tail<F: Fn(f64) -> f64>(f: &F, x_lo: f64, x_hi: f64) -> Option<TailFit> {
    let n = 31;
    let mut ata = Matrix3::zeros();
    let mut atb = Vector3::zeros();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let x = x_lo * (x_hi / x_lo).powf(i as f64 / (n - 1) as f64);
        let v = f(x);
        if !(v > 0.0) || !v.is_finite() {
            return None;
        }
        let l = x.ln();
        let r = Vector3::new(1.0, -l, -l.ln());
        ata += r * r.transpose();
        atb += r * v.ln();
        rows.push((r, v.ln()));
    }
    let sol = ata.lu().solve(&atb)?;
    let residual = rows.iter().map(|(r, y)| (r.dot(&sol) - y).abs()).fold(0.0, f64::max);
    Some(TailFit { c: sol[0], q: sol[1], m: sol[2], residual })
}

/// `∫_a^∞ f(ξ) dξ` for a nonnegative, eventually regularly varying `f`.
///
/// The range `[a, start]` is integrated directly. Beyond `start` the
/// integral advances one decade at a time; after three decades the log
/// tail model is fitted on the last three and its analytic tail is added.
/// The integral is declared finite once successive tail-corrected values
/// agree to tolerance, and divergent after three consecutive fits whose
/// exponents leave the partial integrals growing.
pub fn half_line<F: Fn(f64) -> f64>(f: &F, a: f64, start: f64, spec: &QuadratureSpec) -> Outcome {
    let piece_rel = (spec.rel_tol * 1e-2).max(1e-14);
    let piece_abs = spec.abs_tol * 0.1;
    let start = start.max(a).max(spec.initial_cutoff).max(10.0);
    let mut total = integrate_span(f, a, start, piece_abs, piece_rel);
    let mut x = start;
    let mut prev_estimate: Option<f64> = None;
    let mut divergent_run = 0;
    let mut last_fit: Option<TailFit> = None;
    let mut decades = 0;
    while x < spec.max_cutoff {
        let next = x * 10.0;
        let piece = integrate_log(f, x, next, piece_abs, piece_rel);
        total = total + piece;
        x = next;
        decades += 1;
        let fx = f(x);
        if fx == 0.0 || piece.value.abs() <= 1e-17 * total.value.abs() {
            if fx == 0.0 || f(x * 0.5) > fx {
                let dropped = if fx == 0.0 { 0.0 } else { piece.value.abs() };
                return Outcome::Finite { value: total.value, error: total.error + dropped };
            }
        }
        if total.value == 0.0 && fx == 0.0 {
            return Outcome::Finite { value: 0.0, error: 0.0 };
        }
        if decades < 3 {
            continue;
        }
        let Some(fit) = fit_tail(f, x / 1000.0, x) else {
            continue;
        };
        last_fit = Some(fit);
        match fit.trend() {
            Trend::Divergent => {
                divergent_run += 1;
                prev_estimate = None;
                if divergent_run >= 3 {
                    return Outcome::Divergent { exponent: 1.0 - fit.q };
                }
            }
            Trend::Ambiguous => {
                divergent_run = 0;
                prev_estimate = None;
            }
            Trend::Convergent => {
                divergent_run = 0;
                let tail = if fit.residual > spec.fit_residual && piece.value < 1e-6 * total.value {
                    // Not a power law but already negligible (e.g. Gaussian decay).
                    0.0
                } else {
                    fit.tail_from(x)
                };
                let estimate = total.value + tail;
                if let Some(p) = prev_estimate {
                    let err = (estimate - p).abs() + total.error;
                    if err <= spec.abs_tol.max(spec.rel_tol * estimate.abs()) {
                        return Outcome::Finite { value: estimate, error: err };
                    }
                }
                prev_estimate = Some(estimate);
            }
        }
    }
    match (last_fit, prev_estimate) {
        (Some(fit), Some(p)) if fit.trend() == Trend::Convergent => {
            let estimate = total.value + fit.tail_from(x);
            Outcome::Finite { value: estimate, error: (estimate - p).abs() + total.error }
        }
        (Some(fit), _) if fit.trend() == Trend::Divergent => Outcome::Divergent { exponent: 1.0 - fit.q },
        _ => Outcome::Inconclusive { reason: format!("no stable tail trend below cutoff {:.1e}", spec.max_cutoff) },
    }
}

/// `∫_{z_0}^∞ g(ξ)·osc(ξ) dξ`, where `z_0 < z_1 < …` are consecutive sign
/// changes of `osc`. Half-period panels are integrated directly and their
/// alternating partial sums are accelerated by repeated averaging.
pub fn alternating_tail<G, O, Z>(g: &G, osc: &O, zeros: &Z, spec: &QuadratureSpec) -> Integral
where
    G: Fn(f64) -> f64,
    O: Fn(f64) -> f64,
    Z: Fn(usize) -> f64,
{
    const DIRECT: usize = 16;
    const TOTAL: usize = 64;
    let mut partial = Vec::with_capacity(TOTAL);
    let mut sum = 0.0;
    let mut qerr = 0.0;
    let mut lo = zeros(0);
    for j in 0..TOTAL {
        let hi = zeros(j + 1);
        let p = integrate(|x| g(x) * osc(x), lo, hi, spec.abs_tol * 1e-3, 1e-13);
        sum += p.value;
        qerr += p.error;
        partial.push(sum);
        lo = hi;
    }
    let average = |v: &[f64]| {
        let mut v = v.to_vec();
        while v.len() > 1 {
            v = v.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        }
        v[0]
    };
    let full = average(&partial[DIRECT..]);
    let short = average(&partial[DIRECT..TOTAL - 1]);
    Integral { value: full, error: (full - short).abs() + qerr }
}
