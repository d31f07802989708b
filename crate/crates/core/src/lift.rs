//! Markovian lift of a polynomial kernel in indicator-basis coordinates.
//!
//! With `H = L^2(R)`, the shift `(A f)(x) = f(x + 1)` maps `1_[-i,-i+1]` to
//! `1_[-i-1,-i]`, so in the orthonormal basis `e_i = 1_[-i,-i+1]` it is the
//! index shift `e_i -> e_{i+1}`. A polynomial kernel `Σ κ_i t^i` is then
//! `<g, e^{tA} ν>` with `ν = e_0` and `g = Σ i! κ_i e_i`. The mean-reverting
//! generator is `Ā z = A z - β <g, z> ν`, and powers of `Ā` applied to `ν`
//! stay in `span{e_0..e_k}`, with coordinates `γ(i, k)`.

use crate::bernstein::BernsteinKernel;
use crate::error::{Error, Result};
use crate::numeric::factorial;

#[derive(Debug, Clone, PartialEq)]
pub struct LiftedKernel {
    /// `g_i = i! κ_i`.
    g: Vec<f64>,
    beta: f64,
}

impl LiftedKernel {
    /// Lift of a Bernstein approximation.
    pub fn from_bernstein(bk: &BernsteinKernel, beta: f64) -> Result<Self> {
        Self::exact(bk.kappa(), beta)
    }

    /// Lift of a kernel given directly by monomial coefficients `κ`.
    pub fn exact(kappa: &[f64], beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid(format!("beta must be > 0, got {beta}")));
        }
        if kappa.is_empty() {
            return Err(Error::invalid("empty coefficient sequence"));
        }
        let g: Vec<f64> = kappa
            .iter()
            .enumerate()
            .map(|(i, &k)| factorial(i) * k)
            .collect();
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::range("lift coefficients overflow"));
        }
        Ok(LiftedKernel { g, beta })
    }

    /// Exact lift of `t^N`: `g = N! e_N`.
    pub fn monomial(degree: usize, beta: f64) -> Result<Self> {
        let mut kappa = vec![0.0; degree + 1];
        kappa[degree] = 1.0;
        Self::exact(&kappa, beta)
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.g
    }

    /// Polynomial degree `n`.
    pub fn degree(&self) -> usize {
        self.g.len() - 1
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn g_norm(&self) -> f64 {
        self.g.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `Σ g_i t^i / i!`, i.e. `<g, e^{tA} ν>`.
    pub fn reconstruct(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        let mut w = 1.0;
        for (i, &gi) in self.g.iter().enumerate() {
            if i > 0 {
                w *= t / i as f64;
            }
            acc += gi * w;
        }
        acc
    }

    /// `Ā z`: the input shifted up by one index, with `-β <g, z>` at index 0.
    pub fn apply_abar(&self, z: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; z.len() + 1];
        out[1..].copy_from_slice(z);
        let inner: f64 = self.g.iter().zip(z).map(|(g, z)| g * z).sum();
        out[0] = -self.beta * inner;
        out
    }

    /// `1 + β ||g||`, an upper bound on `||Ā||`: the shift is an isometry and
    /// the rank-one part has norm `β ||g|| ||ν||` with `||ν|| = 1`.
    pub fn operator_norm_bound(&self) -> f64 {
        1.0 + self.beta * self.g_norm()
    }
}

/// Coordinates `γ(i, k)` of `Ā^k ν`, `0 <= i <= k <= M`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaTable {
    /// `columns[k][i] = γ(i, k)`.
    columns: Vec<Vec<f64>>,
}

impl GammaTable {
    /// Runs the recursion `γ(0,0) = 1`, `γ(i,k) = γ(i-1,k-1)` for `i >= 1`
    /// and `γ(0,k) = -β Σ_{j <= min(k-1, n)} g_j γ(j,k-1)`.
    pub fn new(lk: &LiftedKernel, order: usize) -> Result<Self> {
        let mut columns: Vec<Vec<f64>> = Vec::with_capacity(order + 1);
        columns.push(vec![1.0]);
        for k in 1..=order {
            let prev = &columns[k - 1];
            let head = -lk.beta
                * lk.g
                    .iter()
                    .zip(prev)
                    .map(|(g, gamma)| g * gamma)
                    .sum::<f64>();
            if !head.is_finite() {
                return Err(Error::range(format!(
                    "gamma overflow at k = {k}; reduce M or n"
                )));
            }
            let mut col = Vec::with_capacity(k + 1);
            col.push(head);
            col.extend_from_slice(prev);
            columns.push(col);
        }
        Ok(GammaTable { columns })
    }

    /// Truncation order `M`.
    pub fn order(&self) -> usize {
        self.columns.len() - 1
    }

    /// `γ(i, k)`; zero outside the triangle.
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.columns
            .get(k)
            .and_then(|c| c.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    /// Coordinates of `Ā^k ν`.
    pub fn column(&self, k: usize) -> &[f64] {
        &self.columns[k]
    }
}

/// `<g, Σ_{k <= M} s^k/k! Ā^k ν>`.
pub fn truncated_exp_inner(
    lk: &LiftedKernel,
    gt: &GammaTable,
    s: f64,
    order: usize,
) -> Result<f64> {
    if order > gt.order() {
        return Err(Error::invalid(format!(
            "order {order} exceeds table order {}",
            gt.order()
        )));
    }
    if !(s >= 0.0) {
        return Err(Error::invalid(format!("s must be >= 0, got {s}")));
    }
    let mut weight = 1.0;
    let mut acc = 0.0;
    for k in 0..=order {
        if k > 0 {
            weight *= s / k as f64;
        }
        let inner: f64 =
            lk.g.iter()
                .zip(gt.column(k))
                .map(|(g, gamma)| g * gamma)
                .sum();
        acc += weight * inner;
    }
    if !acc.is_finite() {
        return Err(Error::range("truncated exponential overflow"));
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelSpec;
    use crate::mittag_leffler::{mittag_leffler, MLParams};
    use approx::assert_relative_eq;

    #[test]
    fn lift_coefficients() {
        let lk = LiftedKernel::exact(&[2.5], 1.0).unwrap();
        assert_eq!(lk.coefficients(), &[2.5]);
        let lk = LiftedKernel::monomial(2, 1.0).unwrap();
        assert_eq!(lk.coefficients(), &[0.0, 0.0, 2.0]);
        let k = KernelSpec::monomial(1, 1.0).unwrap();
        let bk = BernsteinKernel::new(&k, 1).unwrap();
        let lk = LiftedKernel::from_bernstein(&bk, 1.0).unwrap();
        assert_eq!(lk.coefficients(), &[0.0, 1.0]);
        assert!(LiftedKernel::exact(&[1.0], 0.0).is_err());
    }

    #[test]
    fn overflowing_coefficients_rejected() {
        let mut kappa = vec![0.0; 200];
        kappa[199] = 1.0;
        assert!(matches!(
            LiftedKernel::exact(&kappa, 1.0),
            Err(Error::NumericRange(_))
        ));
    }

    #[test]
    fn reconstruction_matches_bernstein() {
        let k = KernelSpec::gamma(1.0, 0.3, 2.0).unwrap();
        let bk = BernsteinKernel::new(&k, 12).unwrap();
        let lk = LiftedKernel::from_bernstein(&bk, 1.0).unwrap();
        for i in 0..=20 {
            let t = i as f64 * 0.1;
            assert!((lk.reconstruct(t) - bk.evaluate(t).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn abar_examples() {
        let c = 1.7;
        let lk = LiftedKernel::exact(&[c], 1.0).unwrap();
        assert_eq!(lk.apply_abar(&[1.0]), vec![-c, 1.0]);
        assert_eq!(lk.apply_abar(&[0.0, 0.0]), vec![0.0, 0.0, 0.0]);
        let lk = LiftedKernel::monomial(2, 1.0).unwrap();
        assert_eq!(lk.apply_abar(&[1.0]), vec![0.0, 1.0]);
    }

    #[test]
    fn norm_bound_examples() {
        assert_eq!(
            LiftedKernel::exact(&[0.0], 1.0)
                .unwrap()
                .operator_norm_bound(),
            1.0
        );
        assert_eq!(
            LiftedKernel::exact(&[1.0], 1.0)
                .unwrap()
                .operator_norm_bound(),
            2.0
        );
        assert_eq!(
            LiftedKernel::monomial(2, 1.0)
                .unwrap()
                .operator_norm_bound(),
            3.0
        );
    }

    #[test]
    fn gamma_examples() {
        let beta = 0.7;
        let kappa0 = 1.3;
        let lk = LiftedKernel::exact(&[kappa0, 0.4], beta).unwrap();
        let gt = GammaTable::new(&lk, 3).unwrap();
        assert_eq!(gt.get(0, 0), 1.0);
        assert_eq!(gt.get(1, 1), 1.0);
        assert_relative_eq!(gt.get(0, 1), -beta * kappa0);

        let lk = LiftedKernel::monomial(2, 1.0).unwrap();
        let gt = GammaTable::new(&lk, 6).unwrap();
        assert_eq!(gt.get(0, 1), 0.0);
        assert_eq!(gt.get(0, 2), 0.0);
        assert_eq!(gt.get(0, 3), -2.0);
    }

    #[test]
    fn shift_identity_holds_exactly() {
        let k = KernelSpec::fractional(0.3, 2.0).unwrap();
        let bk = BernsteinKernel::new(&k, 10).unwrap();
        let lk = LiftedKernel::from_bernstein(&bk, 1.5).unwrap();
        let gt = GammaTable::new(&lk, 40).unwrap();
        for k in 0..=40 {
            for i in 1..=k {
                assert_eq!(gt.get(i, k), gt.get(0, k - i));
            }
        }
    }

    #[test]
    fn matches_repeated_abar() {
        let k = KernelSpec::gamma(1.0, 0.3, 2.0).unwrap();
        let bk = BernsteinKernel::new(&k, 6).unwrap();
        let lk = LiftedKernel::from_bernstein(&bk, 1.0).unwrap();
        let gt = GammaTable::new(&lk, 12).unwrap();
        let mut z = vec![1.0];
        for k in 0..=12 {
            for (i, v) in z.iter().enumerate() {
                assert_relative_eq!(gt.get(i, k), *v, max_relative = 1e-12);
            }
            z = lk.apply_abar(&z);
        }
    }

    #[test]
    fn truncated_inner_examples() {
        let lk = LiftedKernel::exact(&[0.8, 0.3], 1.0).unwrap();
        let gt = GammaTable::new(&lk, 10).unwrap();
        assert_eq!(truncated_exp_inner(&lk, &gt, 0.0, 10).unwrap(), 0.8);

        // constant kernel: c e^{-βcs}
        let (c, beta, s) = (1.5, 0.8, 1.2);
        let lk = LiftedKernel::exact(&[c], beta).unwrap();
        let gt = GammaTable::new(&lk, 40).unwrap();
        let v = truncated_exp_inner(&lk, &gt, s, 40).unwrap();
        assert_relative_eq!(v, c * (-beta * c * s).exp(), epsilon = 1e-13);

        // t^2 exact lift: 2 E_{3,3}(-2) at s = 1
        let lk = LiftedKernel::monomial(2, 1.0).unwrap();
        let gt = GammaTable::new(&lk, 20).unwrap();
        let v = truncated_exp_inner(&lk, &gt, 1.0, 20).unwrap();
        let e33 = mittag_leffler(&MLParams::new(3.0, 3.0).unwrap(), -2.0).unwrap();
        assert_relative_eq!(v, 2.0 * e33, epsilon = 1e-13);
        assert!(truncated_exp_inner(&lk, &gt, 1.0, 21).is_err());
    }

    #[test]
    fn converges_to_mittag_leffler_for_monomials() {
        for n in 0..=3usize {
            let beta = 1.0;
            let lk = LiftedKernel::monomial(n, beta).unwrap();
            let gt = GammaTable::new(&lk, 60).unwrap();
            let nf = factorial(n);
            let p = MLParams::new(n as f64 + 1.0, n as f64 + 1.0).unwrap();
            for s in [0.0, 0.5, 1.0, 1.5, 2.0] {
                let v = truncated_exp_inner(&lk, &gt, s, 60).unwrap();
                let exact = nf
                    * s.powi(n as i32)
                    * mittag_leffler(&p, -beta * nf * s.powi(n as i32 + 1)).unwrap();
                assert!((v - exact).abs() < 1e-8, "N={n} s={s}: {v} vs {exact}");
            }
        }
    }
}
