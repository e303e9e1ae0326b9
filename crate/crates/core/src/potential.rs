//! Edge potentials and the integrals of them the solvers need.

use crate::scalar::{rf, Real};
use crate::{Error, Result};

/// Potential `q` on one edge, expressed in the edge's local coordinate
/// `x` running over `[0, a]`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EdgePotential<R> {
    /// `q = 0`.
    Zero,
    /// `q = c`.
    Constant { c: R },
    /// `q(x) = coeffs[0] + coeffs[1] x + coeffs[2] x^2 + ...`
    Polynomial { coeffs: Vec<R> },
    /// Piecewise-linear interpolation of the nodes `(xs[k], qs[k])`.
    /// The grid must start at `0`, be strictly increasing, and reach the
    /// edge length.
    Sampled { xs: Vec<R>, qs: Vec<R> },
}

impl<R: Real> EdgePotential<R> {
    pub fn constant(c: R) -> Self {
        EdgePotential::Constant { c }
    }

    pub fn polynomial(coeffs: Vec<R>) -> Self {
        EdgePotential::Polynomial { coeffs }
    }

    /// Builds a sampled potential, rejecting grids that do not start at `0`
    /// or are not strictly increasing.
    pub fn sampled(xs: Vec<R>, qs: Vec<R>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != qs.len() || xs[0] != R::zero() {
            return Err(Error::BadSampleGrid);
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::BadSampleGrid);
        }
        Ok(EdgePotential::Sampled { xs, qs })
    }

    /// Checks the potential is usable on an edge of length `a`
    /// (only sampled grids carry their own domain).
    pub fn validate(&self, a: R) -> Result<()> {
        if let EdgePotential::Sampled { xs, .. } = self {
            let end = *xs.last().expect("validated non-empty");
            // Tolerate the rounding slack a parsed decimal length can carry.
            let tol = rf::<R>(1e-12) * a.abs().max(R::one());
            if (end - a).abs() > tol {
                return Err(Error::BadSampleGrid);
            }
        }
        Ok(())
    }

    /// True when the potential is identically zero as written.
    pub fn is_zero(&self) -> bool {
        match self {
            EdgePotential::Zero => true,
            EdgePotential::Constant { c } => *c == R::zero(),
            EdgePotential::Polynomial { coeffs } => coeffs.iter().all(|c| *c == R::zero()),
            EdgePotential::Sampled { qs, .. } => qs.iter().all(|q| *q == R::zero()),
        }
    }

    /// Like [`Self::eval`] but rejects coordinates outside `[0, a]`.
    pub fn eval_checked(&self, x: R, a: R) -> Result<R> {
        if x < R::zero() || x > a {
            return Err(Error::OutsideDomain {
                x: x.to_f64().unwrap_or(f64::NAN),
                len: a.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(self.eval(x))
    }

    /// Evaluates `q(x)`. Sampled potentials clamp `x` to their grid; the
    /// integrators only ever ask for points inside the edge.
    pub fn eval(&self, x: R) -> R {
        match self {
            EdgePotential::Zero => R::zero(),
            EdgePotential::Constant { c } => *c,
            EdgePotential::Polynomial { coeffs } => {
                let mut acc = R::zero();
                for &c in coeffs.iter().rev() {
                    acc = acc * x + c;
                }
                acc
            }
            EdgePotential::Sampled { xs, qs } => {
                let n = xs.len();
                if x <= xs[0] {
                    return qs[0];
                }
                if x >= xs[n - 1] {
                    return qs[n - 1];
                }
                // last k with xs[k] <= x; the guards above keep k+1 in range
                let k = xs.partition_point(|&t| t <= x) - 1;
                let t = (x - xs[k]) / (xs[k + 1] - xs[k]);
                qs[k] + t * (qs[k + 1] - qs[k])
            }
        }
    }

    /// `K = (1/2) * integral of q over [0, a]`, exactly for every variant
    /// (trapezoid rule is exact on piecewise-linear data).
    pub fn half_integral(&self, a: R) -> R {
        let half = rf::<R>(0.5);
        match self {
            EdgePotential::Zero => R::zero(),
            EdgePotential::Constant { c } => half * *c * a,
            EdgePotential::Polynomial { coeffs } => {
                // integral = sum c_k a^{k+1} / (k+1), evaluated Horner-style
                let mut acc = R::zero();
                for (k, &c) in coeffs.iter().enumerate().rev() {
                    acc = acc * a + c / rf::<R>((k + 1) as f64);
                }
                half * acc * a
            }
            EdgePotential::Sampled { xs, qs } => {
                let mut s = R::zero();
                for k in 0..xs.len() - 1 {
                    s += (xs[k + 1] - xs[k]) * (qs[k] + qs[k + 1]);
                }
                half * half * s
            }
        }
    }

    /// Upper bound for `sup |q|` on `[0, a]`. Exact for all variants except
    /// `Polynomial`, which uses the coefficient bound `sum |c_k| a^k`
    /// (an overestimate is harmless where this is used).
    pub fn sup_abs(&self, a: R) -> R {
        match self {
            EdgePotential::Zero => R::zero(),
            EdgePotential::Constant { c } => c.abs(),
            EdgePotential::Polynomial { coeffs } => {
                let mut acc = R::zero();
                for &c in coeffs.iter().rev() {
                    acc = acc * a + c.abs();
                }
                acc
            }
            EdgePotential::Sampled { qs, .. } => {
                qs.iter().fold(R::zero(), |m, q| m.max(q.abs()))
            }
        }
    }

    /// The potential seen from the other end of the edge:
    /// `reversed(a).eval(x) == eval(a - x)`.
    pub fn reversed(&self, a: R) -> Self {
        match self {
            EdgePotential::Zero => EdgePotential::Zero,
            EdgePotential::Constant { c } => EdgePotential::Constant { c: *c },
            EdgePotential::Polynomial { coeffs } => {
                // q(a - x) = sum_k c_k (a - x)^k expanded back into monomials
                let n = coeffs.len();
                let mut out = vec![R::zero(); n];
                for (k, &c) in coeffs.iter().enumerate() {
                    // binomial row for (a - x)^k
                    let mut binom = R::one();
                    let mut apow = a.powi(k as i32);
                    for j in 0..=k {
                        let sign = if j % 2 == 0 { R::one() } else { -R::one() };
                        out[j] += c * sign * binom * apow;
                        if j < k {
                            binom = binom * rf::<R>((k - j) as f64) / rf::<R>((j + 1) as f64);
                            apow = apow / a;
                        }
                    }
                }
                EdgePotential::Polynomial { coeffs: out }
            }
            EdgePotential::Sampled { xs, qs } => {
                let end = *xs.last().expect("validated non-empty");
                // keep the stored end exactly equal to the grid span
                let mut rx: Vec<R> = xs.iter().rev().map(|&x| end - x).collect();
                rx[0] = R::zero();
                let _ = a;
                let rq: Vec<R> = qs.iter().rev().copied().collect();
                EdgePotential::Sampled { xs: rx, qs: rq }
            }
        }
    }
}

/// One potential per edge, indexed by edge id.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PotentialVector<R>(pub Vec<EdgePotential<R>>);

impl<R: Real> PotentialVector<R> {
    /// All-zero assignment for `n` edges.
    pub fn zero(n: usize) -> Self {
        PotentialVector(vec![EdgePotential::Zero; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, edge: usize) -> &EdgePotential<R> {
        &self.0[edge]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, EdgePotential<R>> {
        self.0.iter()
    }

    /// True when every edge carries a potential that is identically zero.
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|q| q.is_zero())
    }

    /// Checks the count against the edge lengths and validates each entry.
    pub fn validate(&self, lengths: &[R]) -> Result<()> {
        if self.0.len() != lengths.len() {
            return Err(Error::PotentialCount { got: self.0.len(), want: lengths.len() });
        }
        for (q, &a) in self.0.iter().zip(lengths) {
            q.validate(a)?;
        }
        Ok(())
    }

    /// `sum_i K_i` with `K_i = (1/2) * integral of q_i` over edge `i`.
    pub fn sum_half_integrals(&self, lengths: &[R]) -> R {
        self.0
            .iter()
            .zip(lengths)
            .fold(R::zero(), |s, (q, &a)| s + q.half_integral(a))
    }

    /// Upper bound for `max_i sup |q_i|`.
    pub fn sup_abs(&self, lengths: &[R]) -> R {
        self.0
            .iter()
            .zip(lengths)
            .fold(R::zero(), |m, (q, &a)| m.max(q.sup_abs(a)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_half_integral(q: &EdgePotential<f64>, a: f64) -> f64 {
        // plain trapezoid on a fine grid, good to ~1e-10 for smooth q
        let n = 200_000;
        let h = a / n as f64;
        let mut s = 0.5 * (q.eval(0.0) + q.eval(a));
        for k in 1..n {
            s += q.eval(k as f64 * h);
        }
        0.5 * s * h
    }

    #[test]
    fn polynomial_eval_is_horner() {
        let q = EdgePotential::polynomial(vec![1.0, -2.0, 3.0]);
        assert_eq!(q.eval(0.5), 1.0 - 2.0 * 0.5 + 3.0 * 0.25);
    }

    #[test]
    fn half_integral_closed_forms() {
        let a = 1.75;
        assert_eq!(EdgePotential::<f64>::Zero.half_integral(a), 0.0);
        assert_eq!(EdgePotential::constant(4.0).half_integral(a), 0.5 * 4.0 * a);

        let q = EdgePotential::polynomial(vec![1.0, -2.0, 3.0, 0.25]);
        let want = dense_half_integral(&q, a);
        assert!((q.half_integral(a) - want).abs() < 1e-9);
    }

    #[test]
    fn sampled_half_integral_is_exact_trapezoid() {
        let q: EdgePotential<f64> =
            EdgePotential::sampled(vec![0.0, 0.5, 2.0], vec![1.0, 4.0, 9.0]).unwrap();
        // 0.5 * [0.5*(1+4)/2 + 1.5*(4+9)/2]
        let want = 0.5 * (0.5 * 2.5 + 1.5 * 6.5);
        assert!((q.half_integral(2.0) - want).abs() < 1e-15);
    }

    #[test]
    fn sampled_eval_interpolates_and_clamps() {
        let q = EdgePotential::sampled(vec![0.0, 1.0, 2.0], vec![0.0, 10.0, 4.0]).unwrap();
        assert_eq!(q.eval(0.25), 2.5);
        assert_eq!(q.eval(1.5), 7.0);
        assert_eq!(q.eval(-0.1), 0.0);
        assert_eq!(q.eval(2.1), 4.0);
    }

    #[test]
    fn sampled_grid_validation() {
        assert!(EdgePotential::sampled(vec![0.0, 0.0, 1.0], vec![1.0, 2.0, 3.0]).is_err());
        assert!(EdgePotential::sampled(vec![0.1, 1.0], vec![1.0, 2.0]).is_err());
        assert!(EdgePotential::sampled(vec![0.0], vec![1.0]).is_err());
        let q = EdgePotential::sampled(vec![0.0, 1.0], vec![1.0, 2.0]).unwrap();
        assert!(q.validate(1.0).is_ok());
        assert!(q.validate(2.0).is_err());
    }

    #[test]
    fn polynomial_reversal_matches_pointwise() {
        let a = 2.0;
        let q: EdgePotential<f64> = EdgePotential::polynomial(vec![1.0, 2.0, 3.0]);
        let r = q.reversed(a);
        // q(2 - x) = 17 - 14 x + 3 x^2
        match &r {
            EdgePotential::Polynomial { coeffs } => {
                assert!((coeffs[0] - 17.0).abs() < 1e-12);
                assert!((coeffs[1] + 14.0).abs() < 1e-12);
                assert!((coeffs[2] - 3.0).abs() < 1e-12);
            }
            other => panic!("unexpected variant {other:?}"),
        }
        for k in 0..=20 {
            let x = a * k as f64 / 20.0;
            assert!((r.eval(x) - q.eval(a - x)).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_reversal_matches_pointwise() {
        let a = 2.0;
        let q = EdgePotential::sampled(vec![0.0, 0.5, 2.0], vec![1.0, 4.0, 9.0]).unwrap();
        let r = q.reversed(a);
        for k in 0..=40 {
            let x = a * k as f64 / 40.0;
            assert!((r.eval(x) - q.eval(a - x)).abs() < 1e-12);
        }
        // reversing twice gives the original nodes back
        assert_eq!(r.reversed(a), q);
    }

    #[test]
    fn sup_abs_bounds() {
        assert_eq!(EdgePotential::constant(-3.0f64).sup_abs(1.0), 3.0);
        let q = EdgePotential::polynomial(vec![1.0, -2.0]);
        // true sup on [0,2] is 3 at x=2; bound gives 1 + 2*2 = 5
        assert!(q.sup_abs(2.0) >= 3.0);
        let s = EdgePotential::sampled(vec![0.0, 1.0], vec![-7.0, 2.0]).unwrap();
        assert_eq!(s.sup_abs(1.0), 7.0);
    }

    #[test]
    fn vector_sums_and_zero_checks() {
        let v: PotentialVector<f64> = PotentialVector(vec![
            EdgePotential::Zero,
            EdgePotential::constant(2.0),
            EdgePotential::polynomial(vec![0.0, 1.0]),
        ]);
        let lengths = [1.0, 1.0, 2.0];
        assert!(v.validate(&lengths).is_ok());
        assert!(v.validate(&lengths[..2]).is_err());
        // K = 0 + 1 + (1/2)(2^2/2) = 0 + 1 + 1
        assert!((v.sum_half_integrals(&lengths) - 2.0).abs() < 1e-15);
        assert!(!v.is_zero());
        assert!(PotentialVector::<f64>::zero(3).is_zero());
        let w = PotentialVector(vec![EdgePotential::polynomial(vec![0.0, 0.0])]);
        assert!(w.is_zero());
    }
}
