//! Run configuration: a TOML file with one table per section, every key
//! optional, and command-line overrides applied on top.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use voc_core::{ControlProblem, KernelFamily, KernelSpec};

use crate::Failure;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub kernel: KernelSection,
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub approx: ApproxSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub mc: McSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub family: String,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub degree: Option<u32>,
    pub exponent: Option<f64>,
    pub rate: Option<f64>,
    pub coeffs: Option<Vec<f64>>,
    pub times: Option<Vec<f64>>,
    pub values: Option<Vec<f64>>,
    pub holder_h: Option<f64>,
    #[serde(rename = "holder_H")]
    pub holder_big_h: Option<f64>,
}

impl Default for KernelSection {
    fn default() -> Self {
        KernelSection {
            family: "monomial".into(),
            horizon: 2.0,
            degree: Some(2),
            exponent: None,
            rate: None,
            coeffs: None,
            times: None,
            values: None,
            holder_h: None,
            holder_big_h: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemSection {
    pub alpha: f64,
    pub beta: f64,
    pub sigma: f64,
    pub a1: f64,
    pub a2: f64,
    pub x0: f64,
}

impl Default for ProblemSection {
    fn default() -> Self {
        ProblemSection {
            alpha: 1.0,
            beta: 1.0,
            sigma: 1.0,
            a1: 1.0,
            a2: 1.0,
            x0: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Order {
    Fixed(usize),
    Named(AutoOrder),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoOrder {
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LiftKind {
    Bernstein,
    Exact,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ApproxSection {
    pub n: usize,
    #[serde(rename = "M")]
    pub order: Order,
    pub tol: f64,
    pub lift: LiftKind,
    pub n_list: Option<Vec<usize>>,
}

impl Default for ApproxSection {
    fn default() -> Self {
        ApproxSection {
            n: 20,
            order: Order::Fixed(50),
            tol: 1e-6,
            lift: LiftKind::Bernstein,
            n_list: None,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub dt: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { dt: 0.05 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McSection {
    pub n_paths: usize,
    pub seed: u64,
}

impl Default for McSection {
    fn default() -> Self {
        McSection {
            n_paths: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
        }
    }
}

/// Command-line values that replace config keys when present.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub order: Option<Order>,
    pub dt: Option<f64>,
    pub n_paths: Option<usize>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        match path {
            None => Ok(RunConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Failure::config(format!("cannot read {}: {e}", p.display())))?;
                Self::parse(&text)
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self, Failure> {
        toml::from_str(text).map_err(|e| Failure::config(format!("bad config: {e}")))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(dir) = &o.output_dir {
            self.output.dir = dir.clone();
        }
        if let Some(seed) = o.seed {
            self.mc.seed = seed;
        }
        if let Some(n) = o.n {
            self.approx.n = n;
            self.approx.n_list = None;
        }
        if let Some(order) = o.order {
            self.approx.order = order;
        }
        if let Some(dt) = o.dt {
            self.grid.dt = dt;
        }
        if let Some(n_paths) = o.n_paths {
            self.mc.n_paths = n_paths;
        }
    }

    pub fn kernel_spec(&self) -> Result<KernelSpec, Failure> {
        let k = &self.kernel;
        let need = |name: &str| {
            Failure::config(format!(
                "kernel.{name} is required for family \"{}\"",
                k.family
            ))
        };
        let family = match k.family.as_str() {
            "constant" => KernelFamily::Monomial { degree: 0 },
            "monomial" => KernelFamily::Monomial {
                degree: k.degree.ok_or_else(|| need("degree"))?,
            },
            "fractional" => KernelFamily::Fractional {
                exponent: k.exponent.ok_or_else(|| need("exponent"))?,
            },
            "gamma" => KernelFamily::Gamma {
                rate: k.rate.ok_or_else(|| need("rate"))?,
                exponent: k.exponent.ok_or_else(|| need("exponent"))?,
            },
            "polynomial" => KernelFamily::Polynomial {
                coeffs: k.coeffs.clone().ok_or_else(|| need("coeffs"))?,
            },
            "tabulated" => KernelFamily::Tabulated {
                times: k.times.clone().ok_or_else(|| need("times"))?,
                values: k.values.clone().ok_or_else(|| need("values"))?,
            },
            other => {
                return Err(Failure::config(format!(
                    "unknown kernel family \"{other}\""
                )))
            }
        };
        let holder = match (k.holder_h, k.holder_big_h) {
            (Some(h), Some(big_h)) => Some((h, big_h)),
            (None, None) => None,
            _ => {
                return Err(Failure::config(
                    "holder_h and holder_H must be given together",
                ))
            }
        };
        Ok(KernelSpec::new(family, k.horizon, holder)?)
    }

    pub fn problem(&self) -> Result<ControlProblem, Failure> {
        let p = &self.problem;
        let problem = ControlProblem {
            alpha: p.alpha,
            beta: p.beta,
            sigma: p.sigma,
            cost_weight: p.a1,
            terminal_weight: p.a2,
            initial_goodwill: p.x0,
            kernel: self.kernel_spec()?,
        };
        problem.validate_dynamics()?;
        Ok(problem)
    }

    /// Lift degrees to run: `n_list` when given, otherwise `[n]`.
    pub fn degrees(&self) -> Vec<usize> {
        self.approx
            .n_list
            .clone()
            .unwrap_or_else(|| vec![self.approx.n])
    }

    pub fn exact_lift(&self) -> bool {
        self.approx.lift == LiftKind::Exact
    }
}

/// Parses `--m`: an integer or `auto`.
pub fn parse_order(s: &str) -> Result<Order, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Order::Named(AutoOrder::Auto));
    }
    s.parse::<usize>()
        .map(Order::Fixed)
        .map_err(|_| format!("expected a non-negative integer or \"auto\", got \"{s}\""))
}
