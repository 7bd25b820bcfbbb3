//! Experiment configuration. One TOML document per experiment; sections are
//! dotted keys (`symbol.kind`, `lattice.modes`, ...) and unknown keys are
//! rejected.

use std::path::Path;

use levy_spde::functionals::GaugeSpec;
use levy_spde::markov::ChainModel;
use levy_spde::sampler::Lattice;
use levy_spde::semilinear::Nonlinearity;
use levy_spde::symbols::Table;
use levy_spde::{LevyTriplet, QuadratureSpec, Symbol, SymbolKind, TestFunction};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
    pub symbol: Option<SymbolConfig>,
    pub phi: Option<PhiConfig>,
    pub quadrature: Option<QuadratureConfig>,
    pub lattice: Option<LatticeConfig>,
    pub chain: Option<ChainConfig>,
    pub gauge: Option<GaugeConfig>,
    pub nonlinearity: Option<NonlinearityConfig>,
    #[serde(default)]
    pub run: RunConfig,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolConfig {
    /// brownian | stable | log-perturbed | levy-khintchine | tabulated
    pub kind: String,
    pub dim: Option<usize>,
    pub scale: Option<f64>,
    pub alpha: Option<f64>,
    pub skew: Option<f64>,
    pub alpha_p: Option<f64>,
    pub sigma2: Option<f64>,
    pub drift: Option<f64>,
    pub atoms: Option<Vec<(f64, f64)>>,
    pub density: Option<Vec<(f64, f64)>>,
    pub freq: Option<Vec<f64>>,
    pub re: Option<Vec<f64>>,
    pub im: Option<Vec<f64>>,
    #[serde(default)]
    pub symmetrize: bool,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PhiConfig {
    /// delta | delta-difference | gaussian | box
    pub kind: String,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub center: Option<f64>,
    pub width: Option<f64>,
    pub radius: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub initial_cutoff: Option<f64>,
    pub max_cutoff: Option<f64>,
    pub fit_residual: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub length: f64,
    pub modes: usize,
    pub points: Option<usize>,
    pub times: Option<Vec<f64>>,
    /// Uniform grid `dt, 2dt, ..., t_max` when `times` is absent.
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ChainConfig {
    pub states: usize,
    pub rate: f64,
    /// Function values on the states; several functions as rows.
    pub functions: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeConfig {
    /// log-power | power | constant
    pub kind: String,
    pub exponent: Option<f64>,
    pub value: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearityConfig {
    /// zero | constant | tanh | clipped-sine
    pub kind: String,
    pub c: Option<f64>,
}

/// Subcommand parameters; each subcommand reads the keys it needs.
#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub t: Option<f64>,
    pub times: Option<Vec<f64>>,
    pub theta: Option<f64>,
    pub lambda: Option<Vec<f64>>,
    pub eps: Option<Vec<f64>>,
    pub r: Option<Vec<f64>>,
    pub center: Option<f64>,
    pub dt: Option<f64>,
    pub base_modes: Option<usize>,
    pub levels: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub thresholds: Option<Vec<f64>>,
    /// Expected classification (finite, divergent, converges, diverges,
    /// gauge, not-gauge, decreasing, not-decreasing), asserted when set.
    pub expect: Option<String>,
    /// Field CSV written by `simulate-heat`, read by `semilinear`.
    pub input: Option<String>,
}

pub type ConfigResult<T> = std::result::Result<T, String>;

pub fn load(path: Option<&Path>) -> ConfigResult<ExperimentConfig> {
    match path {
        None => Ok(ExperimentConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?;
            toml::from_str(&text).map_err(|e| format!("invalid config {}: {}", p.display(), e.message()))
        }
    }
}

fn need<T: Copy>(v: Option<T>, key: &str) -> ConfigResult<T> {
    v.ok_or_else(|| format!("missing key `{key}`"))
}

impl SymbolConfig {
    pub fn build(&self) -> ConfigResult<Symbol> {
        let kind = match self.kind.as_str() {
            "brownian" => SymbolKind::Brownian { scale: self.scale.unwrap_or(1.0) },
            "stable" => SymbolKind::Stable { alpha: need(self.alpha, "symbol.alpha")?, skew: self.skew.unwrap_or(0.0) },
            "log-perturbed" => SymbolKind::LogPerturbed { alpha_p: need(self.alpha_p, "symbol.alpha_p")? },
            "levy-khintchine" => SymbolKind::LevyKhintchine(LevyTriplet {
                sigma2: self.sigma2.unwrap_or(0.0),
                drift: self.drift.unwrap_or(0.0),
                atoms: self.atoms.clone().unwrap_or_default(),
                density: self.density.clone().unwrap_or_default(),
            }),
            "tabulated" => {
                let freq = self.freq.clone().ok_or("missing key `symbol.freq`")?;
                let n = freq.len();
                SymbolKind::Tabulated(Table {
                    freq,
                    re: self.re.clone().ok_or("missing key `symbol.re`")?,
                    im: self.im.clone().unwrap_or_else(|| vec![0.0; n]),
                })
            }
            other => return Err(format!("unknown symbol.kind `{other}`")),
        };
        let sym = Symbol::new(kind, self.dim.unwrap_or(1)).map_err(|e| e.to_string())?;
        Ok(if self.symmetrize { sym.symmetrize() } else { sym })
    }

    pub fn label(&self) -> String {
        match self.kind.as_str() {
            "stable" => format!("stable({})", self.alpha.unwrap_or(f64::NAN)),
            "log-perturbed" => format!("log-perturbed({})", self.alpha_p.unwrap_or(f64::NAN)),
            "brownian" => format!("brownian({})", self.scale.unwrap_or(1.0)),
            k => k.to_string(),
        }
    }
}

impl PhiConfig {
    pub fn build(&self) -> ConfigResult<TestFunction> {
        let phi = match self.kind.as_str() {
            "delta" => TestFunction::Delta { x: self.x.unwrap_or(0.0) },
            "delta-difference" => TestFunction::DeltaDifference { x: self.x.unwrap_or(0.0), y: need(self.y, "phi.y")? },
            "gaussian" => TestFunction::Gaussian { center: self.center.unwrap_or(0.0), width: need(self.width, "phi.width")? },
            "box" => TestFunction::Box { center: self.center.unwrap_or(0.0), radius: need(self.radius, "phi.radius")? },
            other => return Err(format!("unknown phi.kind `{other}`")),
        };
        Ok(phi)
    }
}

impl ExperimentConfig {
    pub fn symbol(&self) -> ConfigResult<Symbol> {
        self.symbol.as_ref().ok_or("missing key `symbol`")?.build()
    }

    pub fn symbol_label(&self) -> String {
        self.symbol.as_ref().map(|s| s.label()).unwrap_or_default()
    }

    /// Configured test function, or `default`.
    pub fn phi_or(&self, default: TestFunction) -> ConfigResult<TestFunction> {
        self.phi.as_ref().map(|p| p.build()).unwrap_or(Ok(default))
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        let mut q = QuadratureSpec::default();
        if let Some(c) = &self.quadrature {
            q.abs_tol = c.abs_tol.unwrap_or(q.abs_tol);
            q.rel_tol = c.rel_tol.unwrap_or(q.rel_tol);
            q.initial_cutoff = c.initial_cutoff.unwrap_or(q.initial_cutoff);
            q.max_cutoff = c.max_cutoff.unwrap_or(q.max_cutoff);
            q.fit_residual = c.fit_residual.unwrap_or(q.fit_residual);
        }
        q
    }

    /// Configured lattice, or `default` as `(L, K, times)`.
    pub fn lattice_or(&self, default: (f64, usize, Vec<f64>)) -> ConfigResult<Lattice> {
        let Some(c) = &self.lattice else {
            return Lattice::minimal(default.0, default.1, default.2).map_err(|e| e.to_string());
        };
        let times = match (&c.times, c.t_max, c.dt) {
            (Some(t), _, _) => t.clone(),
            (None, Some(tm), Some(dt)) if tm > 0.0 && dt > 0.0 => {
                let n = (tm / dt).round() as usize;
                (1..=n).map(|i| i as f64 * dt).collect()
            }
            _ => default.2,
        };
        Lattice::new(c.length, c.modes, c.points.unwrap_or(2 * c.modes + 1), times).map_err(|e| e.to_string())
    }

    pub fn chain_or(&self, states: usize, rate: f64) -> ConfigResult<ChainModel> {
        let (n, r) = self.chain.as_ref().map(|c| (c.states, c.rate)).unwrap_or((states, rate));
        ChainModel::new(n, r).map_err(|e| e.to_string())
    }

    pub fn gauge(&self) -> ConfigResult<GaugeSpec> {
        let g = self.gauge.as_ref().ok_or("missing key `gauge`")?;
        match g.kind.as_str() {
            "log-power" => Ok(GaugeSpec::log_power(need(g.exponent, "gauge.exponent")?)),
            "power" => Ok(GaugeSpec::power(need(g.exponent, "gauge.exponent")?)),
            "constant" => Ok(GaugeSpec::constant(g.value.unwrap_or(1.0))),
            other => Err(format!("unknown gauge.kind `{other}`")),
        }
    }

    pub fn nonlinearity(&self) -> ConfigResult<Nonlinearity> {
        let Some(b) = &self.nonlinearity else {
            return Ok(Nonlinearity::Tanh { c: 1.0 });
        };
        let c = b.c.unwrap_or(1.0);
        match b.kind.as_str() {
            "zero" => Ok(Nonlinearity::Zero),
            "constant" => Ok(Nonlinearity::Constant { c }),
            "tanh" => Ok(Nonlinearity::Tanh { c }),
            "clipped-sine" => Ok(Nonlinearity::ClippedSine { c }),
            other => Err(format!("unknown nonlinearity.kind `{other}`")),
        }
    }
}
