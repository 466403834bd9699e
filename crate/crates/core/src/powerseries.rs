//! Truncated power series over `f64`.
//!
//! Convention: `c[k]` is the coefficient of `t^k`, so `c[k] = g^(k)(0) / k!`
//! for the function `g` the series represents. All binary operations require
//! both operands to have the same order; nothing is padded implicitly.
//!
//! The transcendental operations (`recip`, `exp`, `powf`, `ln`) use the
//! usual O(N²) recurrences obtained from the differential equation each
//! function satisfies, e.g. `a·b' = p·a'·b` for `b = a^p`.

use std::ops::Index;

use crate::error::{Error, Result};

/// Constant terms with magnitude below this are treated as zero by the
/// operations that divide by them.
pub const SINGULARITY_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    coeffs: Vec<f64>,
}

impl TruncatedSeries {
    /// Builds a series from its coefficients, rejecting empty or non-finite input.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptySeries);
        }
        check_finite(&coeffs)?;
        Ok(Self { coeffs })
    }

    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![0.0; order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(1.0, order)
    }

    pub fn constant(value: f64, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = value;
        s
    }

    /// The series of `value + t`, i.e. the independent variable expanded about `value`.
    pub fn variable(value: f64, order: usize) -> Self {
        let mut s = Self::constant(value, order);
        if order >= 1 {
            s.coeffs[1] = 1.0;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Same series re-truncated (or zero-extended) to `order`.
    pub fn with_order(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order + 1, 0.0);
        Self { coeffs }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.same_order(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Self::finished(coeffs)
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.same_order(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Self::finished(coeffs)
    }

    pub fn scale(&self, factor: f64) -> Result<Self> {
        Self::finished(self.coeffs.iter().map(|c| c * factor).collect())
    }

    /// Adds `value` to the constant term.
    pub fn offset(&self, value: f64) -> Result<Self> {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] += value;
        Self::finished(coeffs)
    }

    /// Cauchy product truncated at the common order.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.same_order(other)?;
        let a = &self.coeffs;
        let b = &other.coeffs;
        let coeffs = (0..a.len())
            .map(|k| (0..=k).map(|m| a[m] * b[k - m]).sum())
            .collect();
        Self::finished(coeffs)
    }

    /// Non-negative integer power by repeated squaring. Unlike [`powf`](Self::powf)
    /// this has no restriction on the constant term.
    pub fn powi(&self, exponent: u32) -> Result<Self> {
        let mut result = Self::one(self.order());
        let mut base = self.clone();
        let mut e = exponent;
        while e > 0 {
            if e & 1 == 1 {
                result = result.checked_mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.checked_mul(&base)?;
            }
        }
        Ok(result)
    }

    pub fn recip(&self) -> Result<Self> {
        let a = &self.coeffs;
        let a0 = a[0];
        if a0.abs() < SINGULARITY_FLOOR {
            return Err(Error::Singular { value: a0 });
        }
        let mut b = Vec::with_capacity(a.len());
        b.push(1.0 / a0);
        for k in 1..a.len() {
            let s: f64 = (1..=k).map(|j| a[j] * b[k - j]).sum();
            b.push(-s / a0);
        }
        Self::finished(b)
    }

    pub fn exp(&self) -> Result<Self> {
        let a = &self.coeffs;
        let e0 = a[0].exp();
        if !e0.is_finite() {
            return Err(Error::Range(format!("exp({}) overflows", a[0])));
        }
        let mut e = Vec::with_capacity(a.len());
        e.push(e0);
        for k in 1..a.len() {
            let s: f64 = (1..=k).map(|j| j as f64 * a[j] * e[k - j]).sum();
            e.push(s / k as f64);
        }
        Self::finished(e)
    }

    /// Real power `a^p`; requires a positive constant term.
    pub fn powf(&self, p: f64) -> Result<Self> {
        let a = &self.coeffs;
        let a0 = a[0];
        if !(a0 > 0.0) || a0 < SINGULARITY_FLOOR {
            return Err(Error::Domain(format!(
                "real power needs a positive constant term, got {a0}"
            )));
        }
        let mut b = Vec::with_capacity(a.len());
        b.push(a0.powf(p));
        for k in 1..a.len() {
            let s: f64 = (1..=k)
                .map(|j| (p * j as f64 - (k - j) as f64) * a[j] * b[k - j])
                .sum();
            b.push(s / (k as f64 * a0));
        }
        Self::finished(b)
    }

    pub fn ln(&self) -> Result<Self> {
        let a = &self.coeffs;
        let a0 = a[0];
        if !(a0 > 0.0) || a0 < SINGULARITY_FLOOR {
            return Err(Error::Domain(format!(
                "logarithm needs a positive constant term, got {a0}"
            )));
        }
        let mut l = Vec::with_capacity(a.len());
        l.push(a0.ln());
        for k in 1..a.len() {
            let s: f64 = (1..k).map(|j| j as f64 * l[j] * a[k - j]).sum();
            l.push((a[k] - s / k as f64) / a0);
        }
        Self::finished(l)
    }

    /// Horner evaluation of `Σ c_k x^k`.
    pub fn eval(&self, x: f64) -> f64 {
        horner(&self.coeffs, x)
    }

    /// Term-wise derivative; the result has order `N - 1`.
    pub fn derivative(&self) -> Result<Self> {
        if self.order() == 0 {
            return Err(Error::Usage(
                "cannot differentiate an order-0 truncated series".into(),
            ));
        }
        Self::finished(derivative_coeffs(&self.coeffs))
    }

    /// Multiplies by `t`, keeping the order (the top coefficient drops out).
    pub fn shift_up(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        coeffs.push(0.0);
        coeffs.extend_from_slice(&self.coeffs[..self.coeffs.len() - 1]);
        Self { coeffs }
    }

    /// Substitutes `t = x²`, returning a series in `x` of the given order.
    pub fn substitute_square(&self, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            if 2 * k > order {
                break;
            }
            coeffs[2 * k] = *c;
        }
        Self { coeffs }
    }

    /// Re-expands the polynomial about `t = h`: returns the coefficients of
    /// `p(h + s)` in powers of `s` (Taylor shift by repeated synthetic division).
    pub fn taylor_shift(&self, h: f64) -> Result<Self> {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for k in (i..n - 1).rev() {
                c[k] += h * c[k + 1];
            }
        }
        Self::finished(c)
    }

    fn same_order(&self, other: &Self) -> Result<()> {
        if self.coeffs.len() != other.coeffs.len() {
            return Err(Error::OrderMismatch {
                left: self.order(),
                right: other.order(),
            });
        }
        Ok(())
    }

    fn finished(coeffs: Vec<f64>) -> Result<Self> {
        check_finite(&coeffs)?;
        Ok(Self { coeffs })
    }
}

impl Index<usize> for TruncatedSeries {
    type Output = f64;

    fn index(&self, k: usize) -> &f64 {
        &self.coeffs[k]
    }
}

fn check_finite(coeffs: &[f64]) -> Result<()> {
    match coeffs.iter().position(|c| !c.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// Horner evaluation of a raw coefficient slice.
pub fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Coefficients of the derivative polynomial, `k·c[k]` shifted down by one.
pub fn derivative_coeffs(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| k as f64 * c)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(c: &[f64]) -> TruncatedSeries {
        TruncatedSeries::new(c.to_vec()).unwrap()
    }

    fn assert_close(a: &TruncatedSeries, b: &TruncatedSeries, tol: f64) {
        assert_eq!(a.order(), b.order());
        for (k, (x, y)) in a.coeffs().iter().zip(b.coeffs()).enumerate() {
            assert!((x - y).abs() <= tol, "coefficient {k}: {x} vs {y}");
        }
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert_eq!(TruncatedSeries::new(vec![]), Err(Error::EmptySeries));
        assert_eq!(
            TruncatedSeries::new(vec![1.0, f64::NAN]),
            Err(Error::NonFinite { index: 1 })
        );
    }

    #[test]
    fn addition() {
        assert_eq!(s(&[1.0, 2.0]).checked_add(&s(&[3.0, 4.0])).unwrap(), s(&[4.0, 6.0]));
        let a = s(&[0.3, -1.2, 7.0]);
        assert_eq!(a.checked_add(&TruncatedSeries::zero(2)).unwrap(), a);
        assert_eq!(s(&[1.0, -1.0]).checked_add(&s(&[-1.0, 1.0])).unwrap(), s(&[0.0, 0.0]));
        assert_eq!(
            s(&[1.0]).checked_add(&s(&[1.0, 2.0])),
            Err(Error::OrderMismatch { left: 0, right: 1 })
        );
    }

    #[test]
    fn multiplication() {
        let p = s(&[1.0, 1.0, 0.0]);
        assert_eq!(p.checked_mul(&p).unwrap(), s(&[1.0, 2.0, 1.0]));
        let a = s(&[0.5, 2.0, -3.0, 4.0]);
        assert_eq!(a.checked_mul(&TruncatedSeries::one(3)).unwrap(), a);
        let t = s(&[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(t.checked_mul(&t).unwrap(), s(&[0.0, 0.0, 1.0, 0.0]));
        assert!(matches!(
            t.checked_mul(&p),
            Err(Error::OrderMismatch { .. })
        ));
    }

    #[test]
    fn reciprocal() {
        assert_eq!(s(&[1.0, 1.0, 0.0, 0.0]).recip().unwrap(), s(&[1.0, -1.0, 1.0, -1.0]));
        assert_eq!(s(&[2.0, 0.0, 0.0]).recip().unwrap(), s(&[0.5, 0.0, 0.0]));
        let a = s(&[1.0, 0.3, -0.2]);
        assert_close(&a.recip().unwrap().recip().unwrap(), &a, 1e-12);
        assert!(matches!(s(&[0.0, 1.0]).recip(), Err(Error::Singular { .. })));
        assert!(matches!(s(&[1e-301, 1.0]).recip(), Err(Error::Singular { .. })));
    }

    #[test]
    fn exponential() {
        let e = s(&[0.0, 1.0, 0.0, 0.0, 0.0]).exp().unwrap();
        assert_close(&e, &s(&[1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0]), 1e-15);
        let c = s(&[0.7, 0.0, 0.0]).exp().unwrap();
        assert_eq!(c, s(&[0.7f64.exp(), 0.0, 0.0]));
        assert!(matches!(s(&[800.0, 0.0]).exp(), Err(Error::Range(_))));
    }

    #[test]
    fn real_power() {
        let sq = s(&[1.0, 1.0, 0.0, 0.0]).powf(2.0).unwrap();
        assert_close(&sq, &s(&[1.0, 2.0, 1.0, 0.0]), 1e-15);

        // (1 + t/3)^(-1/2), the isothermal gas sphere profile in t = x².
        let mut c = vec![0.0; 4];
        c[0] = 1.0;
        c[1] = 1.0 / 3.0;
        let p = s(&c).powf(-0.5).unwrap();
        assert_close(&p, &s(&[1.0, -1.0 / 6.0, 1.0 / 24.0, -5.0 / 432.0]), 1e-15);

        assert_eq!(s(&[2.5, -1.0, 3.0]).powf(0.0).unwrap(), TruncatedSeries::one(2));
        assert!(matches!(s(&[-1.0, 1.0]).powf(0.5), Err(Error::Domain(_))));
        assert!(matches!(s(&[0.0, 1.0]).powf(0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn integer_power_allows_negative_base() {
        let a = s(&[-1.0, 1.0, 0.0]);
        let direct = a.checked_mul(&a).unwrap().checked_mul(&a).unwrap();
        assert_eq!(a.powi(3).unwrap(), direct);
        assert_eq!(a.powi(0).unwrap(), TruncatedSeries::one(2));
    }

    #[test]
    fn logarithm() {
        let l = s(&[1.0, 1.0, 0.0, 0.0]).ln().unwrap();
        assert_close(&l, &s(&[0.0, 1.0, -0.5, 1.0 / 3.0]), 1e-15);
        let c = s(&[3.0, 0.0, 0.0]).ln().unwrap();
        assert_eq!(c, s(&[3.0f64.ln(), 0.0, 0.0]));
        assert!(matches!(s(&[0.0, 1.0]).ln(), Err(Error::Domain(_))));
    }

    #[test]
    fn evaluation_and_derivative() {
        assert_eq!(s(&[1.0, 0.0, -1.0 / 6.0]).eval(0.0), 1.0);
        assert_eq!(s(&[1.0, 2.0, 3.0]).eval(1.0), 6.0);
        assert_eq!(s(&[4.0, 0.0, 0.0]).derivative().unwrap(), s(&[0.0, 0.0]));
        assert_eq!(s(&[0.0, 0.0, 1.0]).derivative().unwrap(), s(&[0.0, 2.0]));
        assert!(matches!(s(&[1.0]).derivative(), Err(Error::Usage(_))));
    }

    #[test]
    fn taylor_shift_matches_evaluation() {
        let a = s(&[0.5, -1.0, 2.0, 0.25]);
        let shifted = a.taylor_shift(0.3).unwrap();
        assert!((shifted[0] - a.eval(0.3)).abs() < 1e-15);
        assert!((shifted[1] - a.derivative().unwrap().eval(0.3)).abs() < 1e-14);
    }

    #[test]
    fn square_substitution() {
        let a = s(&[1.0, 2.0, 3.0]);
        assert_eq!(a.substitute_square(4), s(&[1.0, 0.0, 2.0, 0.0, 3.0]));
        assert_eq!(a.substitute_square(3), s(&[1.0, 0.0, 2.0, 0.0]));
    }

    // Finite-difference check of the constant-term maps: perturbing a[0] by h
    // should move F(a)[0] by about F'(a[0])·h.
    #[test]
    fn constant_term_derivatives_by_finite_difference() {
        let h = 1e-7;
        let a = s(&[0.8, 0.2, -0.1, 0.05]);
        let ah = a.offset(h).unwrap();
        type Op = Box<dyn Fn(&TruncatedSeries) -> TruncatedSeries>;
        let cases: Vec<(&str, Op, f64)> = vec![
            ("recip", Box::new(|x| x.recip().unwrap()), -1.0 / (0.8f64 * 0.8)),
            ("exp", Box::new(|x| x.exp().unwrap()), 0.8f64.exp()),
            ("powf", Box::new(|x| x.powf(1.7).unwrap()), 1.7 * 0.8f64.powf(0.7)),
            ("ln", Box::new(|x| x.ln().unwrap()), 1.0 / 0.8),
        ];
        for (name, op, analytic) in cases {
            let fd = (op(&ah)[0] - op(&a)[0]) / h;
            assert!((fd - analytic).abs() < 1e-6, "{name}: {fd} vs {analytic}");
        }
    }

    fn series(order: usize) -> impl Strategy<Value = TruncatedSeries> {
        prop::collection::vec(-1.0f64..1.0, order + 1).prop_map(|c| TruncatedSeries::new(c).unwrap())
    }

    fn positive_series(order: usize) -> impl Strategy<Value = TruncatedSeries> {
        (0.5f64..2.0, prop::collection::vec(-0.5f64..0.5, order)).prop_map(|(c0, rest)| {
            let mut c = vec![c0];
            c.extend(rest);
            TruncatedSeries::new(c).unwrap()
        })
    }

    fn small_series(order: usize) -> impl Strategy<Value = TruncatedSeries> {
        prop::collection::vec(-0.3f64..0.3, order + 1).prop_map(|c| TruncatedSeries::new(c).unwrap())
    }

    proptest! {
        #[test]
        fn ring_axioms(n in 0usize..=20, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            let mut draw = || TruncatedSeries::new((0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
            let (a, b, c) = (draw(), draw(), draw());
            let ab_c = a.checked_mul(&b).unwrap().checked_mul(&c).unwrap();
            let a_bc = a.checked_mul(&b.checked_mul(&c).unwrap()).unwrap();
            assert_close(&ab_c, &a_bc, 1e-12);
            assert_close(&a.checked_mul(&b).unwrap(), &b.checked_mul(&a).unwrap(), 1e-12);
            assert_close(&a.checked_add(&b).unwrap(), &b.checked_add(&a).unwrap(), 0.0);
            let lhs = a.checked_mul(&b.checked_add(&c).unwrap()).unwrap();
            let rhs = a.checked_mul(&b).unwrap().checked_add(&a.checked_mul(&c).unwrap()).unwrap();
            assert_close(&lhs, &rhs, 1e-12);
        }

        #[test]
        fn reciprocal_inverts(a in (0.1f64..1.0, any::<bool>(), prop::collection::vec(-1.0f64..1.0, 12))) {
            let (m, neg, rest) = a;
            let mut c = vec![if neg { -m } else { m }];
            c.extend(rest);
            let a = TruncatedSeries::new(c).unwrap();
            let b = a.recip().unwrap();
            let prod = a.checked_mul(&b).unwrap();
            // Each product coefficient is a cancelling sum; measure it against
            // the magnitude of its summands.
            for k in 0..=12 {
                let mass: f64 = (0..=k).map(|m| (a[m] * b[k - m]).abs()).sum();
                let want = if k == 0 { 1.0 } else { 0.0 };
                prop_assert!((prod[k] - want).abs() <= 1e-10 * mass.max(1.0), "k={} {} mass {}", k, prod[k], mass);
            }
        }

        #[test]
        fn exponent_law(a in small_series(10), b in small_series(10)) {
            let lhs = a.checked_add(&b).unwrap().exp().unwrap();
            let rhs = a.exp().unwrap().checked_mul(&b.exp().unwrap()).unwrap();
            assert_close(&lhs, &rhs, 1e-12);
        }

        #[test]
        fn power_law(a in positive_series(10), p in -2.0f64..2.0, q in -2.0f64..2.0) {
            let lhs = a.powf(p + q).unwrap();
            let rhs = a.powf(p).unwrap().checked_mul(&a.powf(q).unwrap()).unwrap();
            let scale = lhs.coeffs().iter().fold(1.0f64, |m, c| m.max(c.abs()));
            assert_close(&lhs, &rhs, 1e-10 * scale);
        }

        #[test]
        fn log_inverts_exp(a in small_series(12)) {
            assert_close(&a.exp().unwrap().ln().unwrap(), &a, 1e-12);
        }

        #[test]
        fn derivative_is_a_derivation(a in series(15), b in series(15)) {
            // d(ab) at order N-1 only sees a, b through order N.
            let lhs = a.checked_mul(&b).unwrap().derivative().unwrap();
            let da = a.derivative().unwrap();
            let db = b.derivative().unwrap();
            let a_low = a.with_order(14);
            let b_low = b.with_order(14);
            let rhs = da.checked_mul(&b_low).unwrap().checked_add(&a_low.checked_mul(&db).unwrap()).unwrap();
            assert_close(&lhs, &rhs, 1e-12);
        }
    }
}
