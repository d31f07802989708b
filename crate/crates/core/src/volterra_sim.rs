//! Sample paths and mean of the controlled Volterra Ornstein-Uhlenbeck
//! process on a uniform grid.
//!
//! Stochastic scheme (left endpoint, strictly lower triangular so each node
//! is explicit):
//!
//! ```text
//! X_i = X0 + Σ_{j<i} K(t_i - t_j) [ (α u_j - β X_j) dt + σ ΔW_j ]
//! ```
//!
//! Gaussian increments for path `p` come from a ChaCha8 stream keyed by
//! `(seed, p)` and consumed in step order, so a path never depends on which
//! worker computed it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::control::ControlProblem;
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    /// Uniform grid of mesh `dt`; `T / dt` must be an integer up to 1e-12.
    pub fn new(horizon: f64, dt: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) || !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!(
                "grid needs T > 0 and dt > 0, got T={horizon}, dt={dt}"
            )));
        }
        let steps = (horizon / dt).round();
        if steps < 1.0 || (steps * dt - horizon).abs() > 1e-12 * horizon.max(1.0) {
            return Err(Error::invalid(format!(
                "dt = {dt} does not divide T = {horizon}"
            )));
        }
        Ok(TimeGrid {
            horizon,
            steps: steps as usize,
        })
    }

    pub fn with_steps(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) || steps == 0 {
            return Err(Error::invalid("grid needs T > 0 and at least one step"));
        }
        Ok(TimeGrid { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.steps {
            self.horizon
        } else {
            i as f64 * self.dt()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.steps).map(|i| self.node(i)).collect()
    }

    /// Trapezoidal weights `w_i` (so `∫ f ≈ dt Σ w_i f(t_i)`).
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let mut w = vec![1.0; self.steps + 1];
        w[0] = 0.5;
        w[self.steps] = 0.5;
        w
    }
}

/// `n_paths × (steps + 1)` goodwill values, row-major by path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBatch {
    values: Vec<f64>,
    n_paths: usize,
    seed: u64,
    grid: TimeGrid,
}

impl PathBatch {
    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn path(&self, p: usize) -> &[f64] {
        let width = self.grid.steps + 1;
        &self.values[p * width..(p + 1) * width]
    }

    pub fn terminal_values(&self) -> Vec<f64> {
        (0..self.n_paths)
            .map(|p| self.path(p)[self.grid.steps])
            .collect()
    }

    /// Sample mean at each node.
    pub fn mean_path(&self) -> Vec<f64> {
        let width = self.grid.steps + 1;
        let mut mean = vec![0.0; width];
        for p in 0..self.n_paths {
            for (m, x) in mean.iter_mut().zip(self.path(p)) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= self.n_paths as f64);
        mean
    }
}

/// `K(j dt)` for `j = 0..=steps`.
pub fn kernel_table(kernel: &KernelSpec, grid: &TimeGrid) -> Result<Vec<f64>> {
    if (kernel.horizon() - grid.horizon()).abs() > 1e-12 * grid.horizon().max(1.0) {
        return Err(Error::invalid(format!(
            "kernel horizon {} differs from grid horizon {}",
            kernel.horizon(),
            grid.horizon()
        )));
    }
    (0..=grid.steps())
        .map(|j| kernel.evaluate(grid.node(j)))
        .collect()
}

/// Control sampled at the grid nodes.
pub fn sample_control<F: Fn(f64) -> f64>(control: F, grid: &TimeGrid) -> Result<Vec<f64>> {
    let u: Vec<f64> = grid.nodes().into_iter().map(control).collect();
    if let Some(i) = u.iter().position(|v| !v.is_finite()) {
        return Err(Error::Simulation(format!(
            "non-finite control value at t = {}",
            grid.node(i)
        )));
    }
    Ok(u)
}

struct Scheme<'a> {
    problem: &'a ControlProblem,
    kernel: Vec<f64>,
    controls: Vec<f64>,
    grid: TimeGrid,
    seed: u64,
}

impl<'a> Scheme<'a> {
    fn new<F: Fn(f64) -> f64>(
        problem: &'a ControlProblem,
        control: F,
        grid: &TimeGrid,
        n_paths: usize,
        seed: u64,
    ) -> Result<Self> {
        problem.validate_dynamics()?;
        if n_paths == 0 {
            return Err(Error::invalid("n_paths must be >= 1"));
        }
        Ok(Scheme {
            problem,
            kernel: kernel_table(&problem.kernel, grid)?,
            controls: sample_control(control, grid)?,
            grid: *grid,
            seed,
        })
    }

    fn noise(&self, path: usize) -> impl Iterator<Item = f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(path as u64);
        let sd = self.grid.dt().sqrt();
        (0..self.grid.steps).map(move |_| sd * rng.sample::<f64, _>(StandardNormal))
    }

    fn increment(&self, j: usize, x: f64, dw: f64) -> f64 {
        let p = self.problem;
        (p.alpha * self.controls[j] - p.beta * x) * self.grid.dt() + p.sigma * dw
    }

    fn full_path(&self, path: usize) -> Vec<f64> {
        let n = self.grid.steps;
        let x0 = self.problem.initial_goodwill;
        let mut x = vec![x0; n + 1];
        let mut inc = Vec::with_capacity(n);
        for (i, dw) in (1..=n).zip(self.noise(path)) {
            inc.push(self.increment(i - 1, x[i - 1], dw));
            let mut acc = x0;
            for (j, v) in inc.iter().enumerate() {
                acc += self.kernel[i - j] * v;
            }
            x[i] = acc;
        }
        x
    }

    fn terminal(&self, path: usize) -> f64 {
        if self.problem.beta != 0.0 {
            return self.full_path(path)[self.grid.steps];
        }
        // without feedback the increments do not depend on the state
        let n = self.grid.steps;
        let mut acc = self.problem.initial_goodwill;
        for (j, dw) in self.noise(path).enumerate() {
            acc += self.kernel[n - j] * self.increment(j, 0.0, dw);
        }
        acc
    }
}

pub fn simulate_paths<F: Fn(f64) -> f64>(
    problem: &ControlProblem,
    control: F,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
) -> Result<PathBatch> {
    let scheme = Scheme::new(problem, control, grid, n_paths, seed)?;
    let rows: Vec<Vec<f64>> = (0..n_paths)
        .into_par_iter()
        .map(|p| scheme.full_path(p))
        .collect();
    let values: Vec<f64> = rows.into_iter().flatten().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Simulation("non-finite goodwill value".into()));
    }
    Ok(PathBatch {
        values,
        n_paths,
        seed,
        grid: *grid,
    })
}

/// `X(T)` of each path, identical to the last column of [`simulate_paths`]
/// with the same inputs but without storing the paths.
pub fn simulate_terminal<F: Fn(f64) -> f64>(
    problem: &ControlProblem,
    control: F,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let scheme = Scheme::new(problem, control, grid, n_paths, seed)?;
    let out: Vec<f64> = (0..n_paths)
        .into_par_iter()
        .map(|p| scheme.terminal(p))
        .collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Simulation("non-finite goodwill value".into()));
    }
    Ok(out)
}

/// Mean `m = E[X]` from the trapezoidal product rule applied to
/// `m(t) = X0 + ∫_0^t K(t-s) (α u(s) - β m(s)) ds`.
pub fn deterministic_mean<F: Fn(f64) -> f64>(
    problem: &ControlProblem,
    control: F,
    grid: &TimeGrid,
) -> Result<Vec<f64>> {
    let u = sample_control(control, grid)?;
    mean_from_nodes(problem, grid, &u)
}

/// [`deterministic_mean`] for a control given by its node values.
pub fn mean_from_nodes(problem: &ControlProblem, grid: &TimeGrid, u: &[f64]) -> Result<Vec<f64>> {
    problem.validate_dynamics()?;
    let n = grid.steps();
    if u.len() != n + 1 {
        return Err(Error::invalid(format!(
            "expected {} control nodes, got {}",
            n + 1,
            u.len()
        )));
    }
    let k = kernel_table(&problem.kernel, grid)?;
    let dt = grid.dt();
    let (alpha, beta, x0) = (problem.alpha, problem.beta, problem.initial_goodwill);
    let diag = 1.0 + beta * k[0] * dt / 2.0;
    if diag == 0.0 {
        return Err(Error::range("singular trapezoidal step"));
    }
    let mut m = vec![x0; n + 1];
    let mut f = vec![0.0; n + 1];
    f[0] = alpha * u[0] - beta * x0;
    for i in 1..=n {
        let mut acc = 0.5 * k[i] * f[0];
        for j in 1..i {
            acc += k[i - j] * f[j];
        }
        let known = x0 + dt * (acc + 0.5 * k[0] * alpha * u[i]);
        m[i] = known / diag;
        f[i] = alpha * u[i] - beta * m[i];
    }
    Ok(m)
}

/// Exact mean of the left-endpoint stochastic scheme:
/// `m_i = X0 + dt Σ_{j<i} K(t_i - t_j) (α u_j - β m_j)`.
pub fn left_endpoint_mean<F: Fn(f64) -> f64>(
    problem: &ControlProblem,
    control: F,
    grid: &TimeGrid,
) -> Result<Vec<f64>> {
    problem.validate_dynamics()?;
    let u = sample_control(control, grid)?;
    let k = kernel_table(&problem.kernel, grid)?;
    let n = grid.steps();
    let dt = grid.dt();
    let x0 = problem.initial_goodwill;
    let mut m = vec![x0; n + 1];
    let mut f = Vec::with_capacity(n);
    for i in 1..=n {
        f.push(problem.alpha * u[i - 1] - problem.beta * m[i - 1]);
        let acc: f64 = f.iter().enumerate().map(|(j, v)| k[i - j] * v).sum();
        m[i] = x0 + dt * acc;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelFamily;
    use approx::assert_relative_eq;

    fn problem(kernel: KernelSpec, beta: f64, sigma: f64, x0: f64) -> ControlProblem {
        ControlProblem {
            alpha: 1.0,
            beta,
            sigma,
            cost_weight: 1.0,
            terminal_weight: 1.0,
            initial_goodwill: x0,
            kernel,
        }
    }

    fn constant_kernel(horizon: f64) -> KernelSpec {
        KernelSpec::monomial(0, horizon).unwrap()
    }

    fn zero_feedback(kernel: KernelSpec, sigma: f64, x0: f64) -> ControlProblem {
        problem(kernel, 0.0, sigma, x0)
    }

    #[test]
    fn grid_construction() {
        let g = TimeGrid::new(2.0, 0.05).unwrap();
        assert_eq!(g.steps(), 40);
        assert_eq!(g.node(40), 2.0);
        assert!(TimeGrid::new(2.0, 0.3).is_err());
        assert!(TimeGrid::new(2.0, 0.0).is_err());
        let w = g.trapezoid_weights();
        assert_relative_eq!(w.iter().sum::<f64>() * g.dt(), 2.0);
    }

    #[test]
    fn zero_feedback_paths() {
        let p = zero_feedback(KernelSpec::fractional(0.3, 1.0).unwrap(), 0.0, 0.7);
        let g = TimeGrid::new(1.0, 0.1).unwrap();
        let batch = simulate_paths(&p, |_| 0.0, &g, 3, 1).unwrap();
        for i in 0..3 {
            assert!(batch.path(i).iter().all(|&x| x == 0.7));
        }

        // K ≡ 1, u ≡ 1: X(t_i) = X0 + t_i
        let p = zero_feedback(constant_kernel(1.0), 0.0, 0.25);
        let batch = simulate_paths(&p, |_| 1.0, &g, 2, 1).unwrap();
        for (i, x) in batch.path(1).iter().enumerate() {
            assert_relative_eq!(*x, 0.25 + g.node(i), epsilon = 1e-14);
        }
    }

    #[test]
    fn starts_at_initial_value_and_is_reproducible() {
        let p = problem(KernelSpec::gamma(1.0, 0.3, 2.0).unwrap(), 1.0, 1.0, -0.4);
        let g = TimeGrid::new(2.0, 0.05).unwrap();
        let a = simulate_paths(&p, |t| t, &g, 16, 99).unwrap();
        let b = simulate_paths(&p, |t| t, &g, 16, 99).unwrap();
        assert_eq!(a, b);
        assert!((0..16).all(|i| a.path(i)[0] == -0.4));
        let c = simulate_paths(&p, |t| t, &g, 16, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn result_independent_of_thread_count() {
        let p = problem(KernelSpec::fractional(0.3, 2.0).unwrap(), 1.5, 1.0, 0.0);
        let g = TimeGrid::new(2.0, 0.05).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate_paths(&p, |t| 0.3 * t, &g, 37, 5).unwrap())
        };
        assert_eq!(run(1), run(3));
        // prefix of a larger batch is the same paths
        let big = simulate_paths(&p, |t| 0.3 * t, &g, 50, 5).unwrap();
        assert_eq!(big.path(36), run(1).path(36));
    }

    #[test]
    fn terminal_matches_batch_last_column() {
        let g = TimeGrid::new(2.0, 0.05).unwrap();
        for beta in [0.0, 1.0] {
            let p = problem(KernelSpec::monomial(1, 2.0).unwrap(), beta, 1.0, 0.3);
            let batch = simulate_paths(&p, |t| 1.0 - t, &g, 20, 8).unwrap();
            let term = simulate_terminal(&p, |t| 1.0 - t, &g, 20, 8).unwrap();
            assert_eq!(batch.terminal_values(), term);
        }
    }

    #[test]
    fn non_finite_control_is_an_error() {
        let p = problem(KernelSpec::monomial(1, 1.0).unwrap(), 1.0, 1.0, 0.0);
        let g = TimeGrid::new(1.0, 0.1).unwrap();
        assert!(matches!(
            simulate_paths(&p, |t| 1.0 / (t - 0.5), &g, 2, 0),
            Err(Error::Simulation(_))
        ));
    }

    #[test]
    fn mean_examples() {
        let g = TimeGrid::new(1.0, 0.01).unwrap();
        let p = zero_feedback(KernelSpec::fractional(0.3, 1.0).unwrap(), 1.0, 0.4);
        let m = deterministic_mean(&p, |_| 0.0, &g).unwrap();
        assert!(m.iter().all(|&v| v == 0.4));

        // K ≡ 1, β = 1: m' = -m -> e^{-t}, trapezoid error O(dt²)
        let p = problem(constant_kernel(1.0), 1.0, 1.0, 1.0);
        let m = deterministic_mean(&p, |_| 0.0, &g).unwrap();
        for (i, v) in m.iter().enumerate() {
            assert!((v - (-g.node(i)).exp()).abs() < 1e-4);
        }
    }

    #[test]
    fn mean_converges_at_first_order() {
        let kernels = [
            KernelSpec::fractional(0.3, 2.0).unwrap(),
            KernelSpec::fractional(1.1, 2.0).unwrap(),
            KernelSpec::gamma(1.0, 0.3, 2.0).unwrap(),
        ];
        for k in kernels {
            let p = problem(k, 1.0, 1.0, 0.0);
            let end = |dt: f64| {
                let g = TimeGrid::new(2.0, dt).unwrap();
                *deterministic_mean(&p, |t| 1.0 + t, &g)
                    .unwrap()
                    .last()
                    .unwrap()
            };
            let (a, b) = (end(0.02), end(0.01));
            assert!((a - b).abs() < 0.02, "{a} vs {b}");
        }
    }

    #[test]
    fn zero_noise_paths_track_mean() {
        let p = problem(KernelSpec::gamma(1.0, 0.3, 2.0).unwrap(), 1.0, 0.0, 0.5);
        let u = |t: f64| 0.5 * (2.0 - t);
        let coarse = TimeGrid::new(2.0, 0.01).unwrap();
        let fine = TimeGrid::new(2.0, 0.001).unwrap();
        let path = simulate_paths(&p, u, &coarse, 1, 3).unwrap();
        let left = left_endpoint_mean(&p, u, &coarse).unwrap();
        let reference = deterministic_mean(&p, u, &fine).unwrap();
        for i in 0..=coarse.steps() {
            assert_relative_eq!(path.path(0)[i], left[i], epsilon = 1e-12);
            assert!((path.path(0)[i] - reference[i * 10]).abs() < 0.05);
        }
    }

    #[test]
    fn tabulated_kernel_runs() {
        let fam = KernelFamily::Tabulated {
            times: vec![0.0, 0.5, 1.0],
            values: vec![0.0, 1.0, 0.5],
        };
        let k = KernelSpec::new(fam, 1.0, Some((1.0, 2.0))).unwrap();
        let p = problem(k, 1.0, 1.0, 0.0);
        let g = TimeGrid::new(1.0, 0.1).unwrap();
        assert!(simulate_paths(&p, |_| 1.0, &g, 4, 0).is_ok());
    }
}
