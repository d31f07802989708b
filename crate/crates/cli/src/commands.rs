//! The five pipeline commands. Each reads a [`RunConfig`] and writes its
//! artifacts into the output directory.

use serde::Serialize;
use voc_core::bernstein::{uniform_error_report, BernsteinKernel, DEFAULT_GRID_POINTS};
use voc_core::control::{build_lift, choose_m, monomial_closed_form, value_function_for};
use voc_core::objective::{evaluate_j_deterministic, lq_oracle};
use voc_core::volterra_sim::{simulate_paths, PathBatch, TimeGrid};
use voc_core::{ControlPolynomial, ControlProblem, KernelFamily};

use crate::config::{Order, RunConfig};
use crate::output::{float, floats, Output};
use crate::Failure;

/// Points on which controls are tabulated.
pub const CONTROL_POINTS: usize = 200;

fn points(horizon: f64, count: usize) -> Vec<f64> {
    let last = (count - 1) as f64;
    (0..count)
        .map(|i| {
            if i + 1 == count {
                horizon
            } else {
                horizon * i as f64 / last
            }
        })
        .collect()
}

/// File name for a per-degree artifact; plain `stem.ext` for single runs.
fn artifact(stem: &str, ext: &str, n: usize, many: bool) -> String {
    if many {
        format!("{stem}_n{n}.{ext}")
    } else {
        format!("{stem}.{ext}")
    }
}

fn monomial_degree(problem: &ControlProblem) -> Option<u32> {
    match problem.kernel.family() {
        KernelFamily::Monomial { degree } => Some(*degree),
        _ => None,
    }
}

fn control_for(
    cfg: &RunConfig,
    problem: &ControlProblem,
    n: usize,
) -> Result<ControlPolynomial, Failure> {
    problem.validate()?;
    let lift = build_lift(problem, n, cfg.exact_lift())?;
    let order = match cfg.approx.order {
        Order::Fixed(m) => m,
        Order::Named(_) => choose_m(&lift, problem.horizon(), cfg.approx.tol)?,
    };
    Ok(ControlPolynomial::from_lift(problem, lift, order)?)
}

fn evaluator(cp: &ControlPolynomial) -> impl Fn(f64) -> f64 + Copy + '_ {
    // grid nodes lie in [0, T] by construction
    move |t| cp.evaluate(t).unwrap_or(f64::NAN)
}

#[derive(Serialize)]
struct KernelSummary {
    family: &'static str,
    #[serde(rename = "T")]
    horizon: f64,
    holder_h: f64,
    #[serde(rename = "holder_H")]
    holder_big_h: f64,
    n: usize,
    sup_error: f64,
    argmax: f64,
    bound: f64,
}

pub fn kernel_approx(cfg: &RunConfig, out: &Output) -> Result<(), Failure> {
    let spec = cfg.kernel_spec()?;
    let degrees = cfg.degrees();
    let many = degrees.len() > 1;
    for n in degrees {
        let bk = BernsteinKernel::new(&spec, n)?;
        let mut rows = Vec::with_capacity(DEFAULT_GRID_POINTS);
        for t in points(spec.horizon(), DEFAULT_GRID_POINTS) {
            let (k, kn) = (spec.evaluate(t)?, bk.evaluate(t)?);
            rows.push(floats(&[t, k, kn, (k - kn).abs()]));
        }
        out.csv(
            &artifact("kernel_approx", "csv", n, many),
            &["t", "K", "K_n", "abs_error"],
            &rows,
        )?;
        let report = uniform_error_report(&spec, n, DEFAULT_GRID_POINTS)?;
        let summary = KernelSummary {
            family: spec.family().name(),
            horizon: spec.horizon(),
            holder_h: spec.holder_exponent(),
            holder_big_h: spec.holder_constant(),
            n,
            sup_error: report.sup_error,
            argmax: report.argmax,
            bound: report.bound,
        };
        out.json(&artifact("kernel_approx", "json", n, many), &summary)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ControlSummary {
    n: usize,
    #[serde(rename = "M")]
    order: usize,
    lift: &'static str,
    scale: f64,
    coeffs: Vec<f64>,
    trunc_bound: Option<f64>,
    c0: f64,
    #[serde(rename = "predicted_optimal_J")]
    predicted_optimal_j: f64,
}

pub fn control(cfg: &RunConfig, out: &Output) -> Result<(), Failure> {
    let problem = cfg.problem()?;
    let degrees = cfg.degrees();
    let many = degrees.len() > 1;
    let ts = points(problem.horizon(), CONTROL_POINTS);
    for n in degrees {
        let cp = control_for(cfg, &problem, n)?;
        let vf = value_function_for(&problem, &cp)?;
        let summary = ControlSummary {
            n: cp.degree(),
            order: cp.order(),
            lift: if cfg.exact_lift() {
                "exact"
            } else {
                "bernstein"
            },
            scale: cp.scale(),
            coeffs: cp.coeffs().to_vec(),
            trunc_bound: cp.trunc_bound(),
            c0: vf.c0,
            predicted_optimal_j: vf.predicted_optimal_j,
        };
        out.json(&artifact("control", "json", n, many), &summary)?;
        let rows = ts
            .iter()
            .map(|&t| Ok(floats(&[t, cp.evaluate(t)?])))
            .collect::<Result<Vec<_>, Failure>>()?;
        out.csv(&artifact("control", "csv", n, many), &["t", "u_hat"], &rows)?;
    }
    if let Some(degree) = monomial_degree(&problem) {
        let rows = ts
            .iter()
            .map(|&t| Ok(floats(&[t, monomial_closed_form(degree, &problem, t)?])))
            .collect::<Result<Vec<_>, Failure>>()?;
        out.csv("control_reference.csv", &["t", "u_exact"], &rows)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct PathSummary {
    #[serde(rename = "mean_XT")]
    mean_xt: f64,
    #[serde(rename = "var_XT")]
    var_xt: f64,
    n_paths: usize,
    seed: u64,
}

#[derive(Serialize)]
struct SimulateSummary {
    dt: f64,
    controlled: PathSummary,
    zero: PathSummary,
}

fn write_paths(out: &Output, name: &str, batch: &PathBatch) -> Result<PathSummary, Failure> {
    let grid = batch.grid();
    let mut header = vec!["t".to_string()];
    header.extend((0..batch.n_paths()).map(|p| format!("path_{p}")));
    let rows: Vec<Vec<String>> = (0..=grid.steps())
        .map(|i| {
            let mut row = vec![float(grid.node(i))];
            row.extend((0..batch.n_paths()).map(|p| float(batch.path(p)[i])));
            row
        })
        .collect();
    out.csv(name, &header, &rows)?;
    let xt = batch.terminal_values();
    let n = xt.len() as f64;
    let mean = xt.iter().sum::<f64>() / n;
    let var = if xt.len() > 1 {
        xt.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(PathSummary {
        mean_xt: mean,
        var_xt: var,
        n_paths: batch.n_paths(),
        seed: batch.seed(),
    })
}

pub fn simulate(cfg: &RunConfig, out: &Output) -> Result<(), Failure> {
    let problem = cfg.problem()?;
    let grid = TimeGrid::new(problem.horizon(), cfg.grid.dt)?;
    let cp = control_for(cfg, &problem, cfg.approx.n)?;
    let (n_paths, seed) = (cfg.mc.n_paths, cfg.mc.seed);
    let controlled = simulate_paths(&problem, evaluator(&cp), &grid, n_paths, seed)?;
    let zero = simulate_paths(&problem, |_| 0.0, &grid, n_paths, seed)?;
    let summary = SimulateSummary {
        dt: grid.dt(),
        controlled: write_paths(out, "paths_controlled.csv", &controlled)?,
        zero: write_paths(out, "paths_zero.csv", &zero)?,
    };
    out.json("simulate.json", &summary)
}

pub fn convergence(cfg: &RunConfig, out: &Output) -> Result<(), Failure> {
    let problem = cfg.problem()?;
    problem.validate()?;
    let grid = TimeGrid::new(problem.horizon(), cfg.grid.dt)?;
    let j_oracle = lq_oracle(&problem, &grid)?.j_opt;
    let h = problem.kernel.holder_exponent();
    let degree = monomial_degree(&problem);
    let ts = points(problem.horizon(), CONTROL_POINTS);
    let mut rows = Vec::new();
    for n in cfg.degrees() {
        let cp = control_for(cfg, &problem, n)?;
        let j_det = evaluate_j_deterministic(&problem, evaluator(&cp), &grid)?.j_estimate;
        let gap = j_oracle - j_det;
        let sup = match degree {
            Some(d) => {
                let mut sup = 0.0_f64;
                for &t in &ts {
                    sup = sup.max((cp.evaluate(t)? - monomial_closed_form(d, &problem, t)?).abs());
                }
                float(sup)
            }
            None => String::new(),
        };
        let rate = (n.max(1) as f64).powf(-h / 2.0);
        let mut row = vec![n.to_string(), cp.order().to_string()];
        row.extend(floats(&[j_det, j_oracle, gap, gap / rate]));
        row.push(sup);
        rows.push(row);
    }
    let header = [
        "n",
        "M",
        "J_det",
        "J_oracle",
        "gap_proxy",
        "gap_over_rate",
        "sup_dist_closed_form",
    ];
    out.csv("convergence.csv", &header, &rows)
}

#[derive(Serialize)]
struct OracleSummary {
    #[serde(rename = "J_opt_oracle")]
    j_opt_oracle: f64,
    #[serde(rename = "J_hat")]
    j_hat: f64,
    sup_diff: f64,
    n: usize,
    #[serde(rename = "M")]
    order: usize,
    dt: f64,
}

pub fn oracle(cfg: &RunConfig, out: &Output) -> Result<(), Failure> {
    let problem = cfg.problem()?;
    let grid = TimeGrid::new(problem.horizon(), cfg.grid.dt)?;
    let cp = control_for(cfg, &problem, cfg.approx.n)?;
    let solution = lq_oracle(&problem, &grid)?;
    let j_hat = evaluate_j_deterministic(&problem, evaluator(&cp), &grid)?.j_estimate;
    let mut sup_diff = 0.0_f64;
    let mut rows = Vec::with_capacity(grid.steps() + 1);
    for (i, &u_star) in solution.u_values.iter().enumerate() {
        let t = grid.node(i);
        let u_hat = cp.evaluate(t)?;
        let diff = (u_star - u_hat).abs();
        sup_diff = sup_diff.max(diff);
        rows.push(floats(&[t, u_star, u_hat, diff]));
    }
    out.csv(
        "oracle.csv",
        &["t", "u_star", "u_hat_nM", "abs_diff"],
        &rows,
    )?;
    let summary = OracleSummary {
        j_opt_oracle: solution.j_opt,
        j_hat,
        sup_diff,
        n: cp.degree(),
        order: cp.order(),
        dt: grid.dt(),
    };
    out.json("oracle.json", &summary)
}
