//! Near-optimal control `û_{n,M}` and the closed-form value function.
//!
//! The optimal control of the lifted problem is
//! `û(t) = (α a2 / 2 a1) <g, e^{(T-t)Ā} ν>`. Truncating the exponential at
//! order `M` and expanding `Ā^k ν` in `γ(i,k)` gives a polynomial in `T - t`:
//!
//! ```text
//! û_{n,M}(t) = scale · Σ_{k<=M} c_k (T-t)^k,   c_k = Σ_{i<=min(k,n)} g_i γ(i,k) / k!
//! ```

use serde::Serialize;

use crate::bernstein::BernsteinKernel;
use crate::error::{Error, Result};
use crate::kernel::{KernelFamily, KernelSpec};
use crate::lift::{GammaTable, LiftedKernel};
use crate::mittag_leffler::{mittag_leffler, MLParams};
use crate::numeric::{factorial, simpson};

/// Largest truncation order [`choose_m`] will consider.
pub const M_MAX: usize = 200;

/// Simpson subintervals for the value-function constant.
pub const VALUE_QUADRATURE_INTERVALS: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct ControlProblem {
    /// Advertising effectiveness α.
    pub alpha: f64,
    /// Forgetting rate β.
    pub beta: f64,
    /// Noise scale σ.
    pub sigma: f64,
    /// Quadratic cost weight a1.
    pub cost_weight: f64,
    /// Terminal reward weight a2.
    pub terminal_weight: f64,
    /// Initial goodwill X(0).
    pub initial_goodwill: f64,
    pub kernel: KernelSpec,
}

impl ControlProblem {
    /// Problem with α = β = a1 = a2 = σ = 1 and X(0) = 0.
    pub fn unit(kernel: KernelSpec) -> Self {
        ControlProblem {
            alpha: 1.0,
            beta: 1.0,
            sigma: 1.0,
            cost_weight: 1.0,
            terminal_weight: 1.0,
            initial_goodwill: 0.0,
            kernel,
        }
    }

    pub fn horizon(&self) -> f64 {
        self.kernel.horizon()
    }

    /// `α a2 / (2 a1)`.
    pub fn scale(&self) -> f64 {
        self.alpha * self.terminal_weight / (2.0 * self.cost_weight)
    }

    /// Checks the control problem: everything of [`Self::validate_dynamics`]
    /// plus `β > 0`, which the lift requires.
    pub fn validate(&self) -> Result<()> {
        self.validate_dynamics()?;
        if !(self.beta > 0.0) {
            return Err(Error::invalid(format!(
                "beta must be > 0, got {}",
                self.beta
            )));
        }
        Ok(())
    }

    /// Checks what the forward dynamics need; `β = 0` (no forgetting) is
    /// allowed here.
    pub fn validate_dynamics(&self) -> Result<()> {
        let positive = [
            ("alpha", self.alpha),
            ("a1", self.cost_weight),
            ("a2", self.terminal_weight),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be > 0, got {v}")));
            }
        }
        for (name, v) in [("beta", self.beta), ("sigma", self.sigma)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !self.initial_goodwill.is_finite() {
            return Err(Error::invalid("X0 must be finite"));
        }
        Ok(())
    }
}

/// Lift used for `problem`: exact for polynomial and monomial families
/// when `exact` is set (and always for `Polynomial`), Bernstein of degree `n`
/// otherwise.
pub fn build_lift(problem: &ControlProblem, n: usize, exact: bool) -> Result<LiftedKernel> {
    match problem.kernel.family() {
        KernelFamily::Polynomial { coeffs } => LiftedKernel::exact(coeffs, problem.beta),
        KernelFamily::Monomial { degree } if exact => {
            LiftedKernel::monomial(*degree as usize, problem.beta)
        }
        _ if exact => Err(Error::invalid(format!(
            "no exact lift for {} kernels",
            problem.kernel.family().name()
        ))),
        _ => {
            let bk = BernsteinKernel::new(&problem.kernel, n)?;
            LiftedKernel::from_bernstein(&bk, problem.beta)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlPolynomial {
    scale: f64,
    coeffs: Vec<f64>,
    horizon: f64,
    lift: LiftedKernel,
    /// Scaled truncation bound over `[0, T]`; `None` when
    /// `M < T ||Ā_n||` and the bound does not apply.
    trunc_bound: Option<f64>,
}

impl ControlPolynomial {
    pub fn from_lift(problem: &ControlProblem, lift: LiftedKernel, order: usize) -> Result<Self> {
        problem.validate()?;
        let gt = GammaTable::new(&lift, order)?;
        let g = lift.coefficients();
        let coeffs: Vec<f64> = (0..=order)
            .map(|k| {
                let inner: f64 = g.iter().zip(gt.column(k)).map(|(g, gm)| g * gm).sum();
                inner / factorial(k)
            })
            .collect();
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::range("control coefficients overflow"));
        }
        let horizon = problem.horizon();
        let scale = problem.scale();
        let trunc_bound = truncation_error_bound(&lift, horizon, 0.0, order)
            .ok()
            .map(|b| scale * b);
        Ok(ControlPolynomial {
            scale,
            coeffs,
            horizon,
            lift,
            trunc_bound,
        })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `c_0..=c_M`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn degree(&self) -> usize {
        self.lift.degree()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn lift(&self) -> &LiftedKernel {
        &self.lift
    }

    pub fn trunc_bound(&self) -> Option<f64> {
        self.trunc_bound
    }

    /// False when the truncation order is below `T ||Ā_n||`.
    pub fn bound_admissible(&self) -> bool {
        self.trunc_bound.is_some()
    }

    /// Scaled truncation bound at time `t`, if admissible there.
    pub fn trunc_bound_at(&self, t: f64) -> Option<f64> {
        truncation_error_bound(&self.lift, self.horizon, t, self.order())
            .ok()
            .map(|b| self.scale * b)
    }

    pub fn evaluate(&self, t: f64) -> Result<f64> {
        let slack = 1e-12 * self.horizon.max(1.0);
        if !(t >= -slack && t <= self.horizon + slack) {
            return Err(Error::Domain(format!(
                "t = {t} outside [0, {}]",
                self.horizon
            )));
        }
        Ok(self.eval_unchecked(t.clamp(0.0, self.horizon)))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> f64 {
        let s = self.horizon - t;
        self.scale * self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }
}

/// `û_{n,M}` for `problem`, with the Bernstein lift of degree `n`
/// (polynomial kernels use their exact coefficients).
pub fn optimal_control_poly(
    problem: &ControlProblem,
    n: usize,
    order: usize,
) -> Result<ControlPolynomial> {
    let lift = build_lift(problem, n, false)?;
    ControlPolynomial::from_lift(problem, lift, order)
}

/// Unscaled bound `||g|| e^{sL} (1 - e^{-sL/(M+1)})` on the truncation error
/// of `<g, e^{sĀ} ν>` with `s = T - t` and `L` the operator-norm bound.
pub fn truncation_error_bound(
    lk: &LiftedKernel,
    horizon: f64,
    t: f64,
    order: usize,
) -> Result<f64> {
    let s = (horizon - t).max(0.0);
    let norm = lk.operator_norm_bound();
    if (order as f64) < s * norm {
        return Err(Error::range(format!(
            "M = {order} below operator-norm threshold {:.6}",
            s * norm
        )));
    }
    let x = s * norm;
    Ok(lk.g_norm() * x.exp() * -(-x / (order as f64 + 1.0)).exp_m1())
}

/// Smallest admissible `M` whose bound over `[0, T]` is at most `tol`.
pub fn choose_m(lk: &LiftedKernel, horizon: f64, tol: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tol must be > 0, got {tol}")));
    }
    let start = (horizon * lk.operator_norm_bound()).ceil() as usize;
    (start..=M_MAX)
        .find(|&m| truncation_error_bound(lk, horizon, 0.0, m).is_ok_and(|b| b <= tol))
        .ok_or_else(|| Error::range(format!("tolerance {tol} unreachable at M <= {M_MAX}")))
}

/// `scale · N! (T-t)^N E_{N+1,N+1}(-β N! (T-t)^{N+1})` for `K(t) = t^N`.
pub fn monomial_closed_form(degree: u32, problem: &ControlProblem, t: f64) -> Result<f64> {
    match problem.kernel.family() {
        KernelFamily::Monomial { degree: d } if *d == degree => {}
        _ => {
            return Err(Error::invalid(format!(
                "closed form undefined for {} kernel with N = {degree}",
                problem.kernel.family().name()
            )))
        }
    }
    let horizon = problem.horizon();
    let slack = 1e-12 * horizon.max(1.0);
    if !(t >= -slack && t <= horizon + slack) {
        return Err(Error::Domain(format!("t = {t} outside [0, {horizon}]")));
    }
    let s = (horizon - t).max(0.0);
    let n = degree as i32;
    let nf = factorial(degree as usize);
    let a = degree as f64 + 1.0;
    let ml = mittag_leffler(&MLParams::new(a, a)?, -problem.beta * nf * s.powi(n + 1))?;
    Ok(problem.scale() * nf * s.powi(n) * ml)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValueFunctionReport {
    /// `c(0)`, the value of the sign-flipped (minimization) problem at the
    /// origin of the lifted state.
    pub c0: f64,
    pub predicted_optimal_j: f64,
}

/// Value function constant for `û_{n,M}`, see [`value_function_for`].
pub fn value_function(
    problem: &ControlProblem,
    n: usize,
    order: usize,
) -> Result<ValueFunctionReport> {
    let cp = optimal_control_poly(problem, n, order)?;
    value_function_for(problem, &cp)
}

/// `c(0) = -∫_0^T (β X0 <w,ν> + α²/(4 a1) <w,ν>²) ds` with
/// `<w(s),ν> = -(2 a1 / α) û(s)`, and the optimal value `a2 X0 - c(0)` of
/// the maximization problem.
pub fn value_function_for(
    problem: &ControlProblem,
    cp: &ControlPolynomial,
) -> Result<ValueFunctionReport> {
    problem.validate()?;
    let (a1, alpha) = (problem.cost_weight, problem.alpha);
    let drift = 2.0 * a1 * problem.beta * problem.initial_goodwill / alpha;
    let c0 = simpson(
        |s| {
            let u = cp.eval_unchecked(s);
            drift * u - a1 * u * u
        },
        0.0,
        cp.horizon(),
        VALUE_QUADRATURE_INTERVALS,
    );
    if !c0.is_finite() {
        return Err(Error::range("value function integral overflow"));
    }
    Ok(ValueFunctionReport {
        c0,
        predicted_optimal_j: problem.terminal_weight * problem.initial_goodwill - c0,
    })
}
