//! Volterra kernels `K` on `[0, T]` with their Hölder metadata.

use crate::error::{Error, Result};

/// Points per axis of the sampled Hölder check.
pub const HOLDER_CHECK_POINTS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub enum KernelFamily {
    /// `t^N`, with `0^0 = 1`.
    Monomial { degree: u32 },
    /// `t^h`.
    Fractional { exponent: f64 },
    /// `e^{-λt} t^h`.
    Gamma { rate: f64, exponent: f64 },
    /// `Σ c_k t^k`, coefficients in increasing power order.
    Polynomial { coeffs: Vec<f64> },
    /// Piecewise-linear interpolation through `(times[i], values[i])`.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

impl KernelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::Monomial { .. } => "monomial",
            KernelFamily::Fractional { .. } => "fractional",
            KernelFamily::Gamma { .. } => "gamma",
            KernelFamily::Polynomial { .. } => "polynomial",
            KernelFamily::Tabulated { .. } => "tabulated",
        }
    }
}

/// A validated kernel together with its horizon and Hölder pair `(h, H)`
/// such that `|K(t) - K(s)| <= H |t - s|^h` on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    horizon: f64,
    holder_exponent: f64,
    holder_constant: f64,
}

impl KernelSpec {
    /// Builds a kernel. When `holder` is `None` the family defaults from
    /// [`default_holder_metadata`] are used; supplied pairs are verified on a
    /// sampled grid.
    pub fn new(family: KernelFamily, horizon: f64, holder: Option<(f64, f64)>) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::invalid(format!(
                "horizon must be > 0, got {horizon}"
            )));
        }
        validate_family(&family, horizon)?;
        let (h, big_h) = match holder {
            Some(pair) => pair,
            None => default_metadata(&family, horizon)?,
        };
        if !(h > 0.0 && h <= 1.0) {
            return Err(Error::invalid(format!(
                "holder_h must lie in (0, 1], got {h}"
            )));
        }
        if !(big_h.is_finite() && big_h > 0.0) {
            return Err(Error::invalid(format!("holder_H must be > 0, got {big_h}")));
        }
        let spec = KernelSpec {
            family,
            horizon,
            holder_exponent: h,
            holder_constant: big_h,
        };
        let worst = spec.holder_ratio(HOLDER_CHECK_POINTS);
        if worst > 1.0 + 1e-9 {
            return Err(Error::invalid(format!(
                "Hölder pair (h={h}, H={big_h}) violated on sampled grid (ratio {worst:.6})"
            )));
        }
        Ok(spec)
    }

    pub fn monomial(degree: u32, horizon: f64) -> Result<Self> {
        Self::new(KernelFamily::Monomial { degree }, horizon, None)
    }

    pub fn fractional(exponent: f64, horizon: f64) -> Result<Self> {
        Self::new(KernelFamily::Fractional { exponent }, horizon, None)
    }

    pub fn gamma(rate: f64, exponent: f64, horizon: f64) -> Result<Self> {
        Self::new(KernelFamily::Gamma { rate, exponent }, horizon, None)
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn holder_exponent(&self) -> f64 {
        self.holder_exponent
    }

    pub fn holder_constant(&self) -> f64 {
        self.holder_constant
    }

    /// `K(t)` for `t ∈ [0, T]`. Points within rounding distance of the
    /// endpoints are clamped.
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
        match &self.family {
            KernelFamily::Monomial { degree } => t.powi(*degree as i32),
            KernelFamily::Fractional { exponent } => t.powf(*exponent),
            KernelFamily::Gamma { rate, exponent } => (-rate * t).exp() * t.powf(*exponent),
            KernelFamily::Polynomial { coeffs } => {
                coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
            }
            KernelFamily::Tabulated { times, values } => interpolate(times, values, t),
        }
    }

    /// Largest `|K(t) - K(s)| / (H |t - s|^h)` over pairs of a uniform grid.
    /// Values `<= 1` mean the metadata holds on the sample.
    pub fn holder_ratio(&self, points: usize) -> f64 {
        let points = points.max(2);
        let step = self.horizon / (points - 1) as f64;
        let vals: Vec<f64> = (0..points)
            .map(|i| self.eval_unchecked(i as f64 * step))
            .collect();
        let mut worst = 0.0_f64;
        for i in 0..points {
            for j in (i + 1)..points {
                let dt = (j - i) as f64 * step;
                let allowed = self.holder_constant * dt.powf(self.holder_exponent);
                // absolute slack for rounding in the kernel values themselves
                let diff = ((vals[j] - vals[i]).abs() - 1e-12).max(0.0);
                worst = worst.max(diff / allowed);
            }
        }
        worst
    }
}

/// Default `(h, H)` for the analytic families.
pub fn default_holder_metadata(spec: &KernelSpec) -> Result<(f64, f64)> {
    default_metadata(&spec.family, spec.horizon)
}

fn default_metadata(family: &KernelFamily, horizon: f64) -> Result<(f64, f64)> {
    match *family {
        KernelFamily::Monomial { degree: 0 } => Ok((1.0, 1.0)),
        KernelFamily::Monomial { degree } => {
            let n = degree as f64;
            Ok((1.0, n * horizon.powi(degree as i32 - 1)))
        }
        KernelFamily::Fractional { exponent } if exponent <= 1.0 => Ok((exponent, 1.0)),
        // smooth powers: Lipschitz with the derivative bound p T^{p-1}
        KernelFamily::Fractional { exponent } => Ok((1.0, exponent * horizon.powf(exponent - 1.0))),
        KernelFamily::Gamma { rate, exponent } => {
            // |e^{-λt}(t^h - s^h)| + s^h |e^{-λt} - e^{-λs}| <= (1 + λT) |t - s|^h
            Ok((exponent.min(1.0), 1.0 + rate * horizon))
        }
        KernelFamily::Polynomial { .. } | KernelFamily::Tabulated { .. } => {
            Err(Error::MetadataRequired(format!(
                "{} kernels need explicit holder_h and holder_H",
                family.name()
            )))
        }
    }
}

fn validate_family(family: &KernelFamily, horizon: f64) -> Result<()> {
    match family {
        KernelFamily::Monomial { .. } => Ok(()),
        KernelFamily::Fractional { exponent } => {
            if exponent.is_finite() && *exponent > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(format!(
                    "fractional exponent must be > 0, got {exponent}"
                )))
            }
        }
        KernelFamily::Gamma { rate, exponent } => {
            if !(rate.is_finite() && *rate > 0.0) {
                return Err(Error::invalid(format!(
                    "gamma rate must be > 0, got {rate}"
                )));
            }
            if !(*exponent > 0.0 && *exponent < 1.0) {
                return Err(Error::invalid(format!(
                    "gamma exponent must lie in (0, 1), got {exponent}"
                )));
            }
            Ok(())
        }
        KernelFamily::Polynomial { coeffs } => {
            if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
                return Err(Error::invalid(
                    "polynomial needs at least one finite coefficient",
                ));
            }
            Ok(())
        }
        KernelFamily::Tabulated { times, values } => {
            if times.len() < 2 || times.len() != values.len() {
                return Err(Error::invalid(
                    "tabulated kernel needs matching times/values with at least 2 nodes",
                ));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("tabulated values must be finite"));
            }
            if times.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::invalid(
                    "tabulated times must be strictly increasing",
                ));
            }
            let last = times[times.len() - 1];
            if times[0] != 0.0 || (last - horizon).abs() > 1e-12 * horizon.max(1.0) {
                return Err(Error::invalid(format!(
                    "tabulated times must start at 0 and end at T = {horizon}"
                )));
            }
            Ok(())
        }
    }
}

fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    let idx = times.partition_point(|&x| x <= t);
    if idx == 0 {
        return values[0];
    }
    if idx >= times.len() {
        return values[values.len() - 1];
    }
    let (t0, t1) = (times[idx - 1], times[idx]);
    let w = (t - t0) / (t1 - t0);
    values[idx - 1] * (1.0 - w) + values[idx] * w
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn evaluates_families() {
        let k = KernelSpec::monomial(2, 2.0).unwrap();
        assert_eq!(k.evaluate(1.5).unwrap(), 2.25);

        let k = KernelSpec::fractional(0.3, 2.0).unwrap();
        assert_eq!(k.evaluate(0.0).unwrap(), 0.0);

        let k = KernelSpec::gamma(1.0, 0.3, 2.0).unwrap();
        assert_relative_eq!(
            k.evaluate(1.0).unwrap(),
            0.367_879_441_171_442_3,
            epsilon = 1e-12
        );
    }

    #[test]
    fn zero_degree_monomial_is_constant() {
        let k = KernelSpec::monomial(0, 2.0).unwrap();
        assert_eq!(k.evaluate(0.0).unwrap(), 1.0);
        assert_eq!(k.evaluate(1.3).unwrap(), 1.0);
    }

    #[test]
    fn rejects_points_outside_horizon() {
        let k = KernelSpec::monomial(1, 1.0).unwrap();
        assert!(matches!(k.evaluate(1.5), Err(Error::Domain(_))));
        assert!(matches!(k.evaluate(-0.1), Err(Error::Domain(_))));
        assert!(k.evaluate(1.0 + 1e-15).is_ok());
    }

    #[test]
    fn default_metadata_values() {
        let k = KernelSpec::fractional(0.3, 2.0).unwrap();
        assert_eq!(default_holder_metadata(&k).unwrap(), (0.3, 1.0));
        let k = KernelSpec::monomial(1, 2.0).unwrap();
        assert_eq!(default_holder_metadata(&k).unwrap(), (1.0, 1.0));
        let k = KernelSpec::monomial(2, 2.0).unwrap();
        assert_eq!(default_holder_metadata(&k).unwrap(), (1.0, 4.0));
    }

    #[test]
    fn polynomial_and_tabulated_need_metadata() {
        let fam = KernelFamily::Polynomial {
            coeffs: vec![0.0, 1.0],
        };
        assert!(matches!(
            KernelSpec::new(fam.clone(), 1.0, None),
            Err(Error::MetadataRequired(_))
        ));
        let k = KernelSpec::new(fam, 1.0, Some((1.0, 1.0))).unwrap();
        assert_eq!(k.evaluate(0.25).unwrap(), 0.25);

        let fam = KernelFamily::Tabulated {
            times: vec![0.0, 1.0, 2.0],
            values: vec![0.0, 1.0, 0.5],
        };
        assert!(matches!(
            KernelSpec::new(fam, 2.0, None),
            Err(Error::MetadataRequired(_))
        ));
    }

    #[test]
    fn tabulated_interpolates_linearly() {
        let fam = KernelFamily::Tabulated {
            times: vec![0.0, 1.0, 2.0],
            values: vec![0.0, 1.0, 0.5],
        };
        let k = KernelSpec::new(fam, 2.0, Some((1.0, 1.0))).unwrap();
        assert_relative_eq!(k.evaluate(0.5).unwrap(), 0.5);
        assert_relative_eq!(k.evaluate(1.5).unwrap(), 0.75);
        assert_relative_eq!(k.evaluate(2.0).unwrap(), 0.5);
    }

    #[test]
    fn tabulated_validation() {
        let bad = [
            (vec![0.0, 2.0, 1.0], vec![0.0, 1.0, 2.0]),
            (vec![0.1, 2.0], vec![0.0, 1.0]),
            (vec![0.0, 1.5], vec![0.0, 1.0]),
            (vec![0.0, 2.0], vec![0.0]),
        ];
        for (times, values) in bad {
            let fam = KernelFamily::Tabulated { times, values };
            assert!(matches!(
                KernelSpec::new(fam, 2.0, Some((1.0, 10.0))),
                Err(Error::InvalidParameter(_))
            ));
        }
    }

    #[test]
    fn wrong_metadata_is_rejected() {
        let fam = KernelFamily::Monomial { degree: 2 };
        assert!(KernelSpec::new(fam, 2.0, Some((1.0, 1.0))).is_err());
    }

    #[test]
    fn shipped_kernels_satisfy_sampled_holder() {
        let kernels = [
            KernelSpec::monomial(0, 2.0).unwrap(),
            KernelSpec::monomial(1, 2.0).unwrap(),
            KernelSpec::monomial(3, 2.0).unwrap(),
            KernelSpec::fractional(0.3, 2.0).unwrap(),
            KernelSpec::fractional(1.1, 2.0).unwrap(),
            KernelSpec::gamma(1.0, 0.3, 2.0).unwrap(),
            KernelSpec::gamma(2.5, 0.7, 1.0).unwrap(),
        ];
        for k in &kernels {
            assert!(k.holder_ratio(HOLDER_CHECK_POINTS) <= 1.0, "{k:?}");
        }
    }

    #[test]
    fn continuous_families_have_small_increments() {
        let kernels = [
            KernelSpec::fractional(0.3, 2.0).unwrap(),
            KernelSpec::gamma(1.0, 0.3, 2.0).unwrap(),
            KernelSpec::monomial(2, 2.0).unwrap(),
        ];
        for k in &kernels {
            for i in 0..100 {
                let t = i as f64 * 0.0199;
                let d = (k.evaluate(t).unwrap() - k.evaluate(t + 1e-6).unwrap()).abs();
                let allowed = k.holder_constant() * 1e-6_f64.powf(k.holder_exponent());
                assert!(d <= allowed + 1e-12, "{k:?} jump {d} at {t}");
            }
        }
    }
}
