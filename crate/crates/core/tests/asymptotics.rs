//! End-to-end asymptotics on a tree whose junction really branches: the free
//! characteristic functions decay along the reference abscissas, the nearby
//! zeros localize, and the mass estimator evaluated at those zeros recovers
//! ½·∫q. (On a degree-2 "junction" these sequences degenerate to exact
//! zeros; see the acceptance suite for that fixture.)

use std::f64::consts::PI;

use sltree::charfn::{sum_k_estimate, CharEvaluator};
use sltree::diophantine::{m_sequence, tree_alphas};
use sltree::potential::{EdgePotential, PotentialVector};
use sltree::spectrum::{mu_sequence, rho_near_mu};
use sltree::tree::{LengthExpr, LengthToken, MetricTree, TreeBuilder};

fn star_1_sqrt2_sqrt3() -> MetricTree<f64> {
    TreeBuilder::new(0)
        .edge_expr(0, 1, 0, LengthExpr::Scaled { num: 1, den: 1, token: LengthToken::One })
        .edge_expr(1, 2, 0, LengthExpr::Scaled { num: 1, den: 1, token: LengthToken::Sqrt2 })
        .edge_expr(2, 3, 0, LengthExpr::Scaled { num: 1, den: 1, token: LengthToken::Sqrt3 })
        .build()
        .unwrap()
}

fn reference_mus(tree: &MetricTree<f64>) -> Vec<f64> {
    let ns = [3u32, 5, 6, 8, 16, 32, 40];
    let approx = m_sequence(&tree_alphas(tree), &ns).unwrap();
    let ms: Vec<u64> = approx.iter().map(|a| a.m).collect();
    mu_sequence(tree, &ms).mu_values
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[test]
fn free_functions_decay_along_the_reference_ladder() {
    let tree = star_1_sqrt2_sqrt3();
    let mus = reference_mus(&tree);
    assert!(mus.len() >= 5, "ladder too short: {mus:?}");
    let q = PotentialVector::zero(3);
    let ev = CharEvaluator::new(&tree, &q, None).unwrap();
    let mut n_pts = Vec::new();
    let mut d_pts = Vec::new();
    for &mu in &mus {
        let pair = ev.psi_pair_at_rho(mu);
        assert!(pair.phi_n.abs() > 0.0 && (pair.phi_d - 1.0).abs() > 0.0);
        n_pts.push((mu.ln(), pair.phi_n.abs().ln()));
        d_pts.push((mu.ln(), (pair.phi_d - 1.0).abs().ln()));
    }
    // three edges: expected decay exponent −1/3, slack 0.15
    let need = -1.0 / 3.0 + 0.15;
    let sn = slope(&n_pts);
    let sd = slope(&d_pts);
    assert!(sn <= need, "|ψ_N| slope {sn:+.3} exceeds {need:+.3}");
    assert!(sd <= need, "|ψ_D − 1| slope {sd:+.3} exceeds {need:+.3}");
}

#[test]
fn located_zeros_stay_close_to_the_references() {
    let tree = star_1_sqrt2_sqrt3();
    let mus = reference_mus(&tree);
    let q = PotentialVector::zero(3);
    let ev = CharEvaluator::new(&tree, &q, None).unwrap();
    let mut weighted = Vec::new();
    for &mu in &mus {
        let rho = rho_near_mu(&tree, mu).unwrap();
        let residual = ev.psi_pair_at_rho(rho).phi_n.abs();
        assert!(residual <= 1e-10, "|ψ_N(ρ)| = {residual:.3e} near μ = {mu:.4}");
        weighted.push((rho - mu).abs() * mu.powf(1.0 / 3.0));
    }
    // |ρ − μ|·μ^{1/3} should stay of one size along the ladder
    let max = weighted.iter().cloned().fold(0.0, f64::max);
    let mut sorted = weighted.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = sorted[sorted.len() / 2];
    assert!(
        max <= 20.0 * median.max(1e-12),
        "weighted defects scatter: max {max:.3e}, median {median:.3e}"
    );
}

#[test]
fn constant_mass_is_recovered_along_the_ladder() {
    let tree = star_1_sqrt2_sqrt3();
    let mus = reference_mus(&tree);
    let c = 0.6;
    let q = PotentialVector(vec![
        EdgePotential::constant(c),
        EdgePotential::constant(c),
        EdgePotential::constant(c),
    ]);
    let truth = 0.5 * c * tree.total_length();
    let mut errs = Vec::new();
    for &mu in &mus {
        // the estimator wants a zero of ψ_N, not the reference itself
        let rho = rho_near_mu(&tree, mu).unwrap();
        let est = sum_k_estimate(&tree, &q, rho).unwrap();
        errs.push((est - truth).abs());
    }
    let first = errs[0];
    let last = *errs.last().unwrap();
    assert!(last < first, "estimator error grew along the ladder: {errs:?}");
    assert!(
        last <= 0.02 * truth.abs().max(1.0),
        "estimator ends {last:.3e} from ½·c·L = {truth:.6} (2π·m/L reaches {:.1})",
        mus.last().unwrap() / (2.0 * PI) * tree.total_length()
    );
}
