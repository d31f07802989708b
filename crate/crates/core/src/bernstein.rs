//! Bernstein polynomial approximation `K_n` of a Hölder kernel.
//!
//! `K_n(t) = Σ_k K(kT/n) C(n,k) (t/T)^k (1 - t/T)^{n-k} = Σ_k κ_{n,k} t^k`.
//! The monomial coefficients are what the lift consumes; they are computed
//! from forward differences `κ_{n,k} = C(n,k) Δ^k K(0) / T^k` with step `T/n`,
//! which is the same quantity as the alternating double-binomial sum but
//! with a single binomial weight per term.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::numeric::{binomial, CompensatedSum};

/// Largest degree accepted in double precision.
pub const N_CAP: usize = 25;

/// Default number of uniform points for error reports.
pub const DEFAULT_GRID_POINTS: usize = 400;

#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinKernel {
    degree: usize,
    kappa: Vec<f64>,
    /// `K(kT/n)`, `k = 0..=n`.
    nodes: Vec<f64>,
    source: KernelSpec,
}

impl BernsteinKernel {
    /// Degree-`n` approximation of `spec`.
    pub fn new(spec: &KernelSpec, n: usize) -> Result<Self> {
        if n > N_CAP {
            return Err(Error::range(format!(
                "degree {n} exceeds numerically stable cap {N_CAP}"
            )));
        }
        let horizon = spec.horizon();
        let nodes: Vec<f64> = if n == 0 {
            vec![spec.evaluate(0.0)?]
        } else {
            (0..=n)
                .map(|i| spec.evaluate(i as f64 * horizon / n as f64))
                .collect::<Result<_>>()?
        };
        let kappa = (0..=n)
            .map(|k| {
                let mut diff = CompensatedSum::default();
                for (i, &v) in nodes.iter().enumerate().take(k + 1) {
                    let sign = if (k - i) % 2 == 0 { 1.0 } else { -1.0 };
                    diff.add_product(sign * binomial(k, i), v);
                }
                binomial(n, k) * diff.value() / horizon.powi(k as i32)
            })
            .collect::<Vec<_>>();
        if kappa.iter().any(|c| !c.is_finite()) {
            return Err(Error::range("non-finite Bernstein coefficient"));
        }
        Ok(BernsteinKernel {
            degree: n,
            kappa,
            nodes,
            source: spec.clone(),
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Monomial coefficients `κ_{n,0..=n}`.
    pub fn kappa(&self) -> &[f64] {
        &self.kappa
    }

    pub fn source(&self) -> &KernelSpec {
        &self.source
    }

    pub fn horizon(&self) -> f64 {
        self.source.horizon()
    }

    /// `K_n(t)` in the Bernstein basis (de Casteljau).
    pub fn evaluate(&self, t: f64) -> Result<f64> {
        let horizon = self.horizon();
        let slack = 1e-12 * horizon.max(1.0);
        if !(t >= -slack && t <= horizon + slack) {
            return Err(Error::Domain(format!("t = {t} outside [0, {horizon}]")));
        }
        let x = (t / horizon).clamp(0.0, 1.0);
        let mut b = self.nodes.clone();
        for r in 1..=self.degree {
            for k in 0..=(self.degree - r) {
                b[k] = b[k] * (1.0 - x) + b[k + 1] * x;
            }
        }
        Ok(b[0])
    }

    /// `Σ κ_k t^k` by Horner. Agrees with [`Self::evaluate`] up to the
    /// cancellation in the monomial coefficients.
    pub fn evaluate_monomial(&self, t: f64) -> f64 {
        self.kappa.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }
}

/// Measured uniform error against the Hölder bound `H T^h 2^{-h} n^{-h/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorReport {
    pub n: usize,
    pub sup_error: f64,
    /// Point of the grid where the sup is attained.
    pub argmax: f64,
    pub bound: f64,
}

pub fn theoretical_bound(spec: &KernelSpec, n: usize) -> f64 {
    let h = spec.holder_exponent();
    spec.holder_constant() * spec.horizon().powf(h) * 2f64.powf(-h) * (n as f64).powf(-h / 2.0)
}

pub fn uniform_error_report(
    spec: &KernelSpec,
    n: usize,
    grid_points: usize,
) -> Result<ErrorReport> {
    if grid_points < 2 {
        return Err(Error::invalid("grid_points must be >= 2"));
    }
    let bk = BernsteinKernel::new(spec, n)?;
    let step = spec.horizon() / (grid_points - 1) as f64;
    let mut sup_error = 0.0_f64;
    let mut argmax = 0.0;
    for i in 0..grid_points {
        let t = i as f64 * step;
        let err = (spec.evaluate(t)? - bk.evaluate(t)?).abs();
        if err > sup_error {
            sup_error = err;
            argmax = t;
        }
    }
    Ok(ErrorReport {
        n,
        sup_error,
        argmax,
        bound: theoretical_bound(spec, n),
    })
}
