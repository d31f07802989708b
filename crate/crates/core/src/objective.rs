//! Performance functional `J(u) = E[-a1 ∫ u² + a2 X(T)]` and a discretized
//! linear-quadratic oracle.
//!
//! The oracle works on the same trapezoidal discretization as
//! [`deterministic_mean`](crate::volterra_sim::deterministic_mean): with the
//! lower-triangular quadrature operator `A` (`A_ij = dt w_ij K(t_i - t_j)`)
//! the mean is `m = (I + βA)^{-1} (X0 1 + α A u)`, so
//!
//! ```text
//! J_d(u) = -a1 dt Σ w_i u_i² + a2 e_N^T (I + βA)^{-1} (X0 1 + α A u)
//! ```
//!
//! is strictly concave in the node values `u`, and its maximizer solves
//! `2 a1 dt diag(w) u = α a2 A^T (I + βA)^{-T} e_N`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::control::ControlProblem;
use crate::error::{Error, Result};
use crate::volterra_sim::{
    kernel_table, mean_from_nodes, sample_control, simulate_terminal, TimeGrid,
};

/// Largest grid the dense oracle accepts.
pub const ORACLE_MAX_STEPS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    MonteCarlo { n_paths: usize, seed: u64 },
    Deterministic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObjectiveReport {
    pub j_estimate: f64,
    /// Zero for the deterministic method.
    pub std_error: f64,
    #[serde(flatten)]
    pub method: Method,
}

fn control_cost(problem: &ControlProblem, grid: &TimeGrid, u: &[f64]) -> f64 {
    let w = grid.trapezoid_weights();
    problem.cost_weight * grid.dt() * w.iter().zip(u).map(|(w, u)| w * u * u).sum::<f64>()
}

/// Deterministic `J` of a control given by its grid values.
pub fn evaluate_j_nodes(
    problem: &ControlProblem,
    grid: &TimeGrid,
    u: &[f64],
) -> Result<ObjectiveReport> {
    let m = mean_from_nodes(problem, grid, u)?;
    let j = -control_cost(problem, grid, u) + problem.terminal_weight * m[grid.steps()];
    Ok(ObjectiveReport {
        j_estimate: j,
        std_error: 0.0,
        method: Method::Deterministic,
    })
}

/// `-a1 ∫ u² + a2 m(T)` with the trapezoidal mean; the noise is centered
/// so `σ` does not enter.
pub fn evaluate_j_deterministic<F: Fn(f64) -> f64>(
    problem: &ControlProblem,
    control: F,
    grid: &TimeGrid,
) -> Result<ObjectiveReport> {
    let u = sample_control(control, grid)?;
    evaluate_j_nodes(problem, grid, &u)
}

/// Monte-Carlo `J` with `a2 · sd(X(T)) / sqrt(n_paths)` as standard error.
pub fn evaluate_j_mc<F: Fn(f64) -> f64 + Copy>(
    problem: &ControlProblem,
    control: F,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
) -> Result<ObjectiveReport> {
    if n_paths < 2 {
        return Err(Error::invalid("Monte-Carlo needs n_paths >= 2"));
    }
    let u = sample_control(control, grid)?;
    let terminal = simulate_terminal(problem, control, grid, n_paths, seed)?;
    let n = n_paths as f64;
    let mean = terminal.iter().sum::<f64>() / n;
    let var = terminal.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(ObjectiveReport {
        j_estimate: -control_cost(problem, grid, &u) + problem.terminal_weight * mean,
        std_error: problem.terminal_weight * var.sqrt() / n.sqrt(),
        method: Method::MonteCarlo { n_paths, seed },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub grid: TimeGrid,
    pub u_values: Vec<f64>,
    pub j_opt: f64,
}

impl OracleSolution {
    /// Piecewise-linear interpolation of the node values.
    pub fn control_at(&self, t: f64) -> f64 {
        let dt = self.grid.dt();
        let n = self.grid.steps();
        let x = (t / dt).clamp(0.0, n as f64);
        let i = (x.floor() as usize).min(n - 1);
        let w = x - i as f64;
        self.u_values[i] * (1.0 - w) + self.u_values[i + 1] * w
    }
}

/// Stationarity system `H u = r` of the discretized problem, with `H`
/// returned by its diagonal `2 a1 dt w_i` (the reward is linear in the
/// mean, so no Gram term enters the Hessian).
pub fn stationarity_system(
    problem: &ControlProblem,
    grid: &TimeGrid,
) -> Result<(DVector<f64>, DVector<f64>)> {
    problem.validate_dynamics()?;
    let n = grid.steps();
    if n > ORACLE_MAX_STEPS {
        return Err(Error::invalid(format!(
            "oracle grid has {n} steps, limit is {ORACLE_MAX_STEPS}"
        )));
    }
    let k = kernel_table(&problem.kernel, grid)?;
    let dt = grid.dt();
    let quad = DMatrix::from_fn(n + 1, n + 1, |i, j| {
        if i == 0 || j > i {
            0.0
        } else if j == 0 || j == i {
            0.5 * dt * k[i - j]
        } else {
            dt * k[i - j]
        }
    });
    let system = DMatrix::identity(n + 1, n + 1) + &quad * problem.beta;
    let mut e_last = DVector::zeros(n + 1);
    e_last[n] = 1.0;
    let y = system
        .transpose()
        .solve_upper_triangular(&e_last)
        .ok_or_else(|| Error::range("singular mean operator"))?;
    let rhs = quad.transpose() * y * (problem.alpha * problem.terminal_weight);
    let hessian = DVector::from_vec(
        grid.trapezoid_weights()
            .into_iter()
            .map(|w| 2.0 * problem.cost_weight * dt * w)
            .collect(),
    );
    Ok((hessian, rhs))
}

/// Brute-force maximizer of the discretized functional over grid controls.
pub fn lq_oracle(problem: &ControlProblem, grid: &TimeGrid) -> Result<OracleSolution> {
    let (hessian, rhs) = stationarity_system(problem, grid)?;
    if hessian.iter().any(|&h| !(h > 0.0)) {
        return Err(Error::range("stationarity matrix not positive definite"));
    }
    let u_values: Vec<f64> = rhs.iter().zip(hessian.iter()).map(|(r, h)| r / h).collect();
    let j_opt = evaluate_j_nodes(problem, grid, &u_values)?.j_estimate;
    Ok(OracleSolution {
        grid: *grid,
        u_values,
        j_opt,
    })
}
