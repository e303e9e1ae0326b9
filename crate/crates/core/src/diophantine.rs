//! Simultaneous rational approximation of the length ratios α_i = a_i/L by
//! the pigeonhole construction: among the n^I+1 fractional-part vectors
//! ({p·α_1}, …, {p·α_I}) for p = 0..n^I, two fall in the same 1/n-subcube of
//! the unit cube; their index difference m and the integer drifts k_i give
//! |α_i − k_i/m| < 1/(n·m) ≤ m^(−1−1/I).
//!
//! The scan runs in double-double arithmetic: cell classification needs the
//! fractional part of products as large as 10^7·α to well below one part in
//! n, which plain f64 cannot deliver near subcube boundaries. Exactly
//! rational ratio vectors are recognized first and answered directly, so
//! ratios like (1/3, 2/3) return their true denominator instead of whatever
//! rounding noise the scan would classify.

use crate::dd::Dd;
use crate::scalar::Real;
use crate::tree::{LengthExpr, LengthToken, MetricTree};
use crate::{Error, Result};

/// Scan-point ceiling for [`simultaneous_approx`]; one point per p, table of
/// the same size.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// One pigeonhole approximation: a common denominator `m` with numerators
/// `k_i` so that every |α_i − k_i/m| is below `bound` = m^(−1−1/I).
#[derive(Debug, Clone, PartialEq)]
pub struct SimultaneousApprox {
    pub n: u32,
    pub m: u64,
    pub k: Vec<u64>,
    /// Realized |α_i − k_i/m|.
    pub errors: Vec<f64>,
    pub bound: f64,
}

pub fn simultaneous_approx(alphas: &[f64], n: u32) -> Result<SimultaneousApprox> {
    simultaneous_approx_budget(alphas, n, DEFAULT_BUDGET)
}

pub fn simultaneous_approx_budget(
    alphas: &[f64],
    n: u32,
    budget: u64,
) -> Result<SimultaneousApprox> {
    let dd: Vec<Dd> = alphas.iter().map(|&a| Dd::from_f64(a)).collect();
    approx_dd(&dd, n, budget)
}

/// Ratios α_i = a_i/L evaluated through the symbolic length expressions
/// (√2, √3, π tokens) at double precision for display and rational checks.
pub fn tree_alphas<R: Real>(tree: &MetricTree<R>) -> Vec<f64> {
    tree_alphas_dd(tree).iter().map(|a| a.to_f64()).collect()
}

/// Pigeonhole approximation of a tree's length ratios, keeping the extended
/// precision of symbolic lengths all the way into the scan.
pub fn simultaneous_approx_tree<R: Real>(
    tree: &MetricTree<R>,
    n: u32,
    budget: u64,
) -> Result<SimultaneousApprox> {
    approx_dd(&tree_alphas_dd(tree), n, budget)
}

fn expr_dd(expr: &LengthExpr) -> Dd {
    match *expr {
        LengthExpr::Decimal(x) => Dd::from_f64(x),
        LengthExpr::Scaled { num, den, token } => {
            let t = match token {
                LengthToken::One => Dd::from_f64(1.0),
                LengthToken::Sqrt2 => Dd::SQRT2,
                LengthToken::Sqrt3 => Dd::SQRT3,
                LengthToken::Pi => Dd::PI,
            };
            t.mul_f64(num as f64).div(Dd::from_i64(den))
        }
    }
}

fn tree_alphas_dd<R: Real>(tree: &MetricTree<R>) -> Vec<Dd> {
    let lens: Vec<Dd> = tree.edges().iter().map(|e| expr_dd(&e.expr)).collect();
    let total = lens.iter().fold(Dd::ZERO, |s, &l| s.add(l));
    lens.into_iter().map(|l| l.div(total)).collect()
}

/// Smallest common denominator p ≤ `max_denominator` with α_i = q_i/p for
/// natural numbers q_i summing to p, within 1e-12; `None` when no such p
/// exists in range.
pub fn detect_rational(alphas: &[f64], max_denominator: u64) -> Option<(u64, Vec<u64>)> {
    'outer: for p in 1..=max_denominator {
        let mut qs = Vec::with_capacity(alphas.len());
        let mut sum = 0u64;
        for &a in alphas {
            let q = (a * p as f64).round();
            if q < 1.0 || (a - q / p as f64).abs() > 1e-12 {
                continue 'outer;
            }
            sum += q as u64;
            qs.push(q as u64);
        }
        if sum == p {
            return Some((p, qs));
        }
    }
    None
}

/// Approximations for each n in `n_list`. For rational ratios q_i/p the
/// entries are scaled to (m, k) = (n·p, n·q) so that m grows without bound
/// along the sequence, matching the construction's use downstream; the
/// per-call [`simultaneous_approx`] always reports the unscaled denominator.
pub fn m_sequence(alphas: &[f64], n_list: &[u32]) -> Result<Vec<SimultaneousApprox>> {
    assert!(n_list.windows(2).all(|w| w[0] < w[1]), "n_list must increase");
    let i = alphas.len() as u32;
    let dd: Vec<Dd> = alphas.iter().map(|&a| Dd::from_f64(a)).collect();
    let mut out = Vec::with_capacity(n_list.len());
    for &n in n_list {
        validate_alphas(alphas)?;
        let cap = pow_checked(n, i.saturating_sub(1)).unwrap_or(u64::MAX);
        let scaled = if n >= 1 {
            detect_rational(alphas, cap.min(DEFAULT_BUDGET))
        } else {
            None
        };
        let approx = match scaled {
            Some((p, q)) => {
                let m = u64::from(n) * p;
                let k: Vec<u64> = q.iter().map(|&qi| u64::from(n) * qi).collect();
                finish(&dd, n, m, k)
            }
            None => approx_dd(&dd, n, DEFAULT_BUDGET)?,
        };
        out.push(approx);
    }
    Ok(out)
}

fn validate_alphas(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::BadAlphas);
    }
    let sum: f64 = alphas.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::BadAlphas);
    }
    if alphas.len() == 1 {
        return Ok(()); // the single ratio is 1 by the sum check
    }
    if alphas.iter().any(|&a| !(a > 0.0 && a < 1.0)) {
        return Err(Error::BadAlphas);
    }
    Ok(())
}

fn pow_checked(n: u32, e: u32) -> Option<u64> {
    let mut acc = 1u64;
    for _ in 0..e {
        acc = acc.checked_mul(u64::from(n))?;
    }
    Some(acc)
}

fn approx_dd(alphas: &[Dd], n: u32, budget: u64) -> Result<SimultaneousApprox> {
    let plain: Vec<f64> = alphas.iter().map(|a| a.to_f64()).collect();
    validate_alphas(&plain)?;
    if n == 0 {
        return Err(Error::BadAlphas);
    }
    let i = alphas.len() as u32;
    if i == 1 {
        // α = 1: k/m = 1/1 is exact
        return Ok(finish(alphas, n, 1, vec![1]));
    }

    let table = match pow_checked(n, i) {
        Some(t) if t.saturating_add(1) <= budget => t,
        _ => {
            let feasible = largest_feasible(budget, i);
            return Err(Error::BudgetExceeded {
                budget,
                n,
                needed: pow_checked(n, i).map_or(u64::MAX, |t| t + 1),
                feasible,
            });
        }
    };

    // exactly rational ratios: answer with the true denominator, provided it
    // respects the m ≤ n^I invariant
    if let Some((p, q)) = detect_rational(&plain, table) {
        return Ok(finish(alphas, n, p, q));
    }

    let mut cells = vec![0u32; table as usize];
    let mut candidates: Vec<(u64, u64)> = Vec::new();
    for p in 0..=table {
        let mut idx = 0usize;
        let mut stride = 1usize;
        for a in alphas {
            idx += cell_of(*a, p, n) * stride;
            stride *= n as usize;
        }
        match cells[idx] {
            0 => cells[idx] = (p + 1) as u32,
            u32::MAX => {}
            prev => {
                candidates.push((u64::from(prev) - 1, p));
                cells[idx] = u32::MAX;
            }
        }
    }
    let (p1, p2) = candidates
        .into_iter()
        .min()
        .expect("pigeonhole: n^I + 1 points in n^I cells must collide");

    let m = p2 - p1;
    let k: Vec<u64> = alphas
        .iter()
        .map(|a| {
            let hi = a.mul_f64(p2 as f64).floor().to_f64();
            let lo = a.mul_f64(p1 as f64).floor().to_f64();
            (hi - lo) as u64
        })
        .collect();
    Ok(finish(alphas, n, m, k))
}

/// Subcube coordinate of {p·α} on the 1/n grid; boundary hits go to the
/// lower cell, which is why the ceiling has to be exact.
fn cell_of(alpha: Dd, p: u64, n: u32) -> usize {
    let scaled = alpha.mul_f64(p as f64).frac().mul_f64(f64::from(n));
    let ceil = scaled.neg().floor().neg().to_f64();
    if ceil < 1.0 {
        0
    } else {
        (ceil - 1.0) as usize
    }
}

fn largest_feasible(budget: u64, i: u32) -> u32 {
    if budget == 0 {
        return 0;
    }
    let mut n = ((budget - 1) as f64).powf(1.0 / f64::from(i)).floor() as u64;
    // float powf can land one off on either side; settle it exactly
    while pow_checked((n + 1) as u32, i).is_some_and(|t| t + 1 <= budget) {
        n += 1;
    }
    while n > 0 && pow_checked(n as u32, i).is_none_or(|t| t + 1 > budget) {
        n -= 1;
    }
    n as u32
}

/// Assembles the result and enforces the construction's guarantees; these
/// hold by the mathematics, so violations indicate precision loss and must
/// abort rather than propagate bad numbers.
fn finish(alphas: &[Dd], n: u32, m: u64, k: Vec<u64>) -> SimultaneousApprox {
    let i = alphas.len() as u32;
    assert!(m >= 1);
    if let Some(ni) = pow_checked(n, i) {
        assert!(m <= ni, "denominator {m} exceeds n^I = {ni}");
    }
    let bound = (m as f64).powf(-(1.0 + 1.0 / f64::from(i)));
    let errors: Vec<f64> = alphas
        .iter()
        .zip(&k)
        .map(|(a, &ki)| {
            a.sub(Dd::from_u64(ki).div(Dd::from_u64(m)))
                .abs()
                .to_f64()
        })
        .collect();
    for (pos, &e) in errors.iter().enumerate() {
        assert!(e < bound, "|α_{pos} − k/m| = {e:e} not below m^(−1−1/I) = {bound:e}");
    }
    if u64::from(n) >= u64::from(i) {
        let sum: u64 = k.iter().sum();
        assert_eq!(sum, m, "Σk_i must equal m for n ≥ I");
    }
    SimultaneousApprox { n, m, k, errors, bound }
}
