//! Test functions with closed-form Fourier transforms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunction {
    /// Point mass at `x`.
    Delta { x: f64 },
    /// `δ_x - δ_y`.
    DeltaDifference { x: f64, y: f64 },
    /// Unit-mass Gaussian density with standard deviation `width`.
    Gaussian { center: f64, width: f64 },
    /// `1{|z - center| ≤ radius} / (2·radius)`.
    Box { center: f64, radius: f64 },
}

impl TestFunction {
    pub fn delta(x: f64) -> Self {
        TestFunction::Delta { x }
    }

    pub fn gaussian(center: f64, width: f64) -> Self {
        TestFunction::Gaussian { center, width }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        match *self {
            TestFunction::Gaussian { width, .. } if !(width > 0.0) => {
                return Err(Error::InvalidTestFunction("gaussian width must be > 0".into()))
            }
            TestFunction::Box { radius, .. } if !(radius > 0.0) => {
                return Err(Error::InvalidTestFunction("box radius must be > 0".into()))
            }
            _ => {}
        }
        if dim > 1 && !matches!(self, TestFunction::Delta { .. } | TestFunction::Gaussian { .. }) {
            return Err(Error::InvalidTestFunction("only delta and gaussian are radial in d > 1".into()));
        }
        Ok(())
    }

    /// `φ̂(ξ) = ∫ e^{iξz} φ(z) dz`.
    pub fn fourier(&self, xi: f64) -> Complex64 {
        let phase = |x: f64| Complex64::from_polar(1.0, xi * x);
        match *self {
            TestFunction::Delta { x } => phase(x),
            TestFunction::DeltaDifference { x, y } => phase(x) - phase(y),
            TestFunction::Gaussian { center, width } => phase(center) * (-0.5 * width * width * xi * xi).exp(),
            TestFunction::Box { center, radius } => phase(center) * sinc(radius * xi),
        }
    }

    /// `|φ̂(ξ)|²` in a cancellation-free form.
    pub fn modulus_sq(&self, xi: f64) -> f64 {
        match *self {
            TestFunction::Delta { .. } => 1.0,
            TestFunction::DeltaDifference { x, y } => {
                let s = (0.5 * xi * (x - y)).sin();
                4.0 * s * s
            }
            TestFunction::Gaussian { width, .. } => (-width * width * xi * xi).exp(),
            TestFunction::Box { radius, .. } => {
                let s = sinc(radius * xi);
                s * s
            }
        }
    }

    /// When `|φ̂(ξ)|² = envelope(ξ)·(1 - cos(rξ))`, returns `r`.
    pub fn oscillation(&self) -> Option<f64> {
        match *self {
            TestFunction::DeltaDifference { x, y } if x != y => Some((x - y).abs()),
            TestFunction::Box { radius, .. } => Some(2.0 * radius),
            _ => None,
        }
    }

    /// The smooth factor paired with [`TestFunction::oscillation`].
    pub fn envelope(&self, xi: f64) -> f64 {
        match *self {
            TestFunction::DeltaDifference { .. } => 2.0,
            TestFunction::Box { radius, .. } => 1.0 / (2.0 * radius * radius * xi * xi),
            _ => self.modulus_sq(xi),
        }
    }

    /// True for delta and delta-difference.
    pub fn is_point_mass(&self) -> bool {
        matches!(self, TestFunction::Delta { .. } | TestFunction::DeltaDifference { .. })
    }

    /// True when `φ̂ ≡ 0`.
    pub fn is_zero(&self) -> bool {
        matches!(*self, TestFunction::DeltaDifference { x, y } if x == y)
    }

    /// `‖φ‖²` in L²(R), when finite.
    pub fn l2_norm_sq(&self) -> Option<f64> {
        match *self {
            TestFunction::Gaussian { width, .. } => Some(1.0 / (2.0 * width * std::f64::consts::PI.sqrt())),
            TestFunction::Box { radius, .. } => Some(1.0 / (2.0 * radius)),
            TestFunction::DeltaDifference { x, y } if x == y => Some(0.0),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            TestFunction::Delta { x } => format!("delta({x})"),
            TestFunction::DeltaDifference { x, y } => format!("delta-difference({x},{y})"),
            TestFunction::Gaussian { center, width } => format!("gaussian({center},{width})"),
            TestFunction::Box { center, radius } => format!("box({center},{radius})"),
        }
    }
}

/// `sin(x)/x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_has_unit_modulus() {
        for xi in [-7.0, 0.0, 0.3, 1e5] {
            assert!((TestFunction::delta(2.5).fourier(xi).norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn difference_modulus_formula() {
        let f = TestFunction::DeltaDifference { x: 0.4, y: -1.1 };
        for xi in [0.2, 3.0, 40.0] {
            let direct = 2.0 * (1.0 - (xi * 1.5f64).cos());
            assert!((f.modulus_sq(xi) - direct).abs() < 1e-12);
            assert!((f.fourier(xi).norm_sqr() - direct).abs() < 1e-12);
            assert!((f.envelope(xi) * (1.0 - (f.oscillation().unwrap() * xi).cos()) - direct).abs() < 1e-12);
        }
        assert!(TestFunction::DeltaDifference { x: 1.0, y: 1.0 }.is_zero());
    }

    #[test]
    fn box_has_unit_mass() {
        let f = TestFunction::Box { center: 0.3, radius: 0.05 };
        assert!((f.fourier(0.0).re - 1.0).abs() < 1e-15);
        let xi = 7.0;
        let split = f.envelope(xi) * (1.0 - (f.oscillation().unwrap() * xi).cos());
        assert!((split - f.modulus_sq(xi)).abs() < 1e-12);
    }

    #[test]
    fn gaussian_norm_matches_riemann_sum() {
        let (c, w) = (0.2, 0.7);
        let f = TestFunction::gaussian(c, w);
        let h = 1e-3;
        let sum: f64 = (-20000..20000)
            .map(|i| {
                let z = i as f64 * h;
                let v = (-(z - c).powi(2) / (2.0 * w * w)).exp() / (w * (2.0 * std::f64::consts::PI).sqrt());
                v * v * h
            })
            .sum();
        assert!((f.l2_norm_sq().unwrap() - sum).abs() < 1e-10);
    }
}
