//! Two-parameter Mittag-Leffler function `E_{a,b}(z) = Σ_p z^p / Γ(ap + b)`
//! for real arguments, by direct power series.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Hard cap on `|z|` for slowly decaying series (`a <= 1`).
pub const Z_MAX: f64 = 50.0;
pub const DEFAULT_TOL: f64 = 1e-12;

const MAX_TERMS: usize = 20_000;
const STOP_RUN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLParams {
    pub a: f64,
    pub b: f64,
    pub tol: f64,
}

impl MLParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        Self::with_tol(a, b, DEFAULT_TOL)
    }

    pub fn with_tol(a: f64, b: f64, tol: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) || !(b > 0.0 && b.is_finite()) {
            return Err(Error::invalid(format!(
                "need a > 0 and b > 0, got a={a}, b={b}"
            )));
        }
        if !(tol > 0.0) {
            return Err(Error::invalid(format!("tol must be > 0, got {tol}")));
        }
        Ok(MLParams { a, b, tol })
    }
}

fn log_term(params: &MLParams, log_abs_z: f64, p: usize) -> f64 {
    p as f64 * log_abs_z - ln_gamma(params.a * p as f64 + params.b)
}

/// Whether the series can be summed without losing the result to
/// cancellation: either `|z| <= Z_MAX`, or no term exceeds one in magnitude
/// (up to a factor e; the case for the large `a` arising from monomial
/// kernels).
pub fn in_stable_range(params: &MLParams, z: f64) -> bool {
    if !z.is_finite() {
        return false;
    }
    if z.abs() <= Z_MAX {
        return true;
    }
    let log_abs_z = z.abs().ln();
    // log-terms are concave in p, so stop once they start decreasing
    let mut prev = f64::NEG_INFINITY;
    for p in 0..MAX_TERMS {
        let lt = log_term(params, log_abs_z, p);
        if lt > 1.0 {
            return false;
        }
        if lt < prev {
            return true;
        }
        prev = lt;
    }
    false
}

pub fn mittag_leffler(params: &MLParams, z: f64) -> Result<f64> {
    if !in_stable_range(params, z) {
        return Err(Error::range(format!(
            "argument {z} outside series-stable range for E_{{{},{}}}",
            params.a, params.b
        )));
    }
    if z == 0.0 {
        return Ok((-ln_gamma(params.b)).exp());
    }
    let log_abs_z = z.abs().ln();
    let negative = z < 0.0;
    let mut sum = CompensatedSum::default();
    let mut small_run = 0;
    for p in 0..MAX_TERMS {
        let magnitude = log_term(params, log_abs_z, p).exp();
        let term = if negative && p % 2 == 1 {
            -magnitude
        } else {
            magnitude
        };
        sum.add(term);
        if magnitude < params.tol * sum.value().abs().max(1.0) {
            small_run += 1;
            if small_run >= STOP_RUN {
                return Ok(sum.value());
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::range(format!(
        "series for E_{{{},{}}}({z}) did not converge",
        params.a, params.b
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use statrs::function::gamma::gamma;

    fn ml(a: f64, b: f64, z: f64) -> f64 {
        mittag_leffler(&MLParams::new(a, b).unwrap(), z).unwrap()
    }

    #[test]
    fn exponential_case() {
        assert_relative_eq!(ml(1.0, 1.0, 1.0), std::f64::consts::E, epsilon = 1e-12);
        for i in 0..100 {
            let x = -5.0 + 10.0 * i as f64 / 99.0;
            assert!((ml(1.0, 1.0, x) - x.exp()).abs() < 1e-10, "x={x}");
        }
    }

    #[test]
    fn zero_argument() {
        for a in [0.5, 1.0, 2.0, 3.0] {
            for b in [0.5, 1.0, 2.0, 3.0] {
                assert!((ml(a, b, 0.0) * gamma(b) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hyperbolic_sine_case() {
        // E_{2,2}(z) = sinh(√z)/√z
        assert_relative_eq!(ml(2.0, 2.0, 1.0), 1f64.sinh(), epsilon = 1e-12);
        // brute-force factorial series for E_{2,2}(1) = Σ 1/(2p+1)!
        let mut brute = 0.0;
        let mut fact = 1.0;
        for p in 0..20 {
            if p > 0 {
                fact *= (2 * p) as f64 * (2 * p + 1) as f64;
            }
            brute += 1.0 / fact;
        }
        assert_relative_eq!(ml(2.0, 2.0, 1.0), brute, epsilon = 1e-14);
    }

    #[test]
    fn cosine_case() {
        // E_{2,1}(-x^2) = cos(x)
        for x in [0.3_f64, 1.0, 2.5, 4.0] {
            assert!((ml(2.0, 1.0, -x * x) - x.cos()).abs() < 1e-11);
        }
    }

    #[test]
    fn tolerance_refinement_is_stable() {
        for (a, b, z) in [
            (1.0, 1.0, -3.0),
            (3.0, 3.0, -16.0),
            (0.5, 1.0, 2.0),
            (2.0, 2.0, -20.0),
        ] {
            let tol = 1e-10;
            let coarse = mittag_leffler(&MLParams::with_tol(a, b, tol).unwrap(), z).unwrap();
            let fine = mittag_leffler(&MLParams::with_tol(a, b, tol / 2.0).unwrap(), z).unwrap();
            assert!((coarse - fine).abs() < 10.0 * tol, "({a},{b},{z})");
        }
    }

    #[test]
    fn range_rules() {
        let p = MLParams::new(1.0, 1.0).unwrap();
        assert!(matches!(
            mittag_leffler(&p, -60.0),
            Err(Error::NumericRange(_))
        ));
        // terms of E_{4,4}(-96) never exceed one
        let p = MLParams::new(4.0, 4.0).unwrap();
        assert!(mittag_leffler(&p, -96.0).is_ok());
        assert!(MLParams::new(0.0, 1.0).is_err());
        assert!(MLParams::with_tol(1.0, 1.0, 0.0).is_err());
    }
}
