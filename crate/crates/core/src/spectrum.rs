//! Eigenvalue location: scan a window for zeros of a characteristic
//! function, refine them, detect even-order (multiple) zeros, and check the
//! count against the length-based eigenvalue density.
//!
//! The scan grid is uniform in ρ = √λ above zero (step π/(4L), a quarter of
//! the mean eigenvalue spacing) and uniform in λ below zero with the matching
//! step. Sign changes are refined by bisection. Even-order zeros never change
//! sign; they are caught as deep local minima of |f|, refined by golden
//! section and then by bisecting the symmetric difference f(λ+d) − f(λ−d),
//! which crosses zero at the minimum. Multiplicity comes from a local order
//! fit: near a zero of order k, |f| shrinks by 2^k when the distance halves.

use crate::charfn::{det_char, CharEvaluator};
use crate::potential::PotentialVector;
use crate::scalar::{rf, Real};
use crate::tree::MetricTree;
use crate::{Error, Result};
use rayon::prelude::*;

/// Which function the scanner finds the zeros of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroSource {
    /// Leaf-peeling recursion (fast; the default).
    #[default]
    Recursion,
    /// Full 2I×2I boundary/matching determinant (independent oracle).
    Determinant,
}

#[derive(Debug, Clone)]
pub struct ScanOptions<R> {
    /// Scan step in ρ units; default π/(4L).
    pub rho_step: Option<R>,
    pub oracle: ZeroSource,
    /// Fail with [`Error::WindowTooCoarse`] when the eigenvalue count
    /// (with multiplicity) leaves the admissible length-based range. Only
    /// enforced when the window provably contains the whole spectrum bottom,
    /// i.e. λ_lo ≤ −sup|q| − 1/2.
    pub weyl_guard: bool,
    /// Scan the problem with this pendant switched to Dirichlet instead of
    /// the all-Neumann problem.
    pub dirichlet_leaf: Option<usize>,
}

impl<R> Default for ScanOptions<R> {
    fn default() -> Self {
        ScanOptions { rho_step: None, oracle: ZeroSource::Recursion, weyl_guard: true, dirichlet_leaf: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumEntry<R> {
    pub lambda: R,
    pub multiplicity: usize,
}

/// Sorted eigenvalues found in a window, with multiplicities.
#[derive(Debug, Clone)]
pub struct Spectrum<R> {
    pub entries: Vec<SpectrumEntry<R>>,
    pub window: (R, R),
    /// Relative λ accuracy of the refinement.
    pub tolerance: R,
}

impl<R: Real> Spectrum<R> {
    pub fn total_multiplicity(&self) -> usize {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    /// Eigenvalues repeated according to multiplicity.
    pub fn expanded(&self) -> Vec<R> {
        let mut out = Vec::with_capacity(self.total_multiplicity());
        for e in &self.entries {
            out.extend(std::iter::repeat(e.lambda).take(e.multiplicity));
        }
        out
    }
}

/// Admissible range for the number of eigenvalues (with multiplicity) below
/// `lambda_hi`, from the leading eigenvalue-count asymptotics N(λ) ≈ L√λ/π.
/// The boundary conditions shift the count by O(1), so the slack is ±I.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WeylCount {
    pub expected: usize,
    pub min: usize,
    pub max: usize,
}

pub fn weyl_count<R: Real>(tree: &MetricTree<R>, lambda_hi: R) -> WeylCount {
    let i = tree.edge_count();
    let expected = if lambda_hi > R::zero() {
        (tree.total_length() * lambda_hi.sqrt() / R::PI())
            .floor()
            .to_usize()
            .unwrap_or(usize::MAX)
    } else {
        0
    };
    WeylCount { expected, min: expected.saturating_sub(i), max: expected + i }
}

/// Lower window edge that provably covers every eigenvalue: the quadratic
/// form is bounded below by −sup|q|.
pub fn default_lambda_lo<R: Real>(tree: &MetricTree<R>, q: &PotentialVector<R>) -> R {
    -(q.sup_abs(&tree.lengths()) + R::one())
}

/// Locates all zeros of the characteristic function in `window`.
pub fn scan_spectrum<R: Real>(
    tree: &MetricTree<R>,
    q: &PotentialVector<R>,
    window: (R, R),
    options: &ScanOptions<R>,
) -> Result<Spectrum<R>> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::BadWindow {
            lo: lo.to_f64().unwrap_or(f64::NAN),
            hi: hi.to_f64().unwrap_or(f64::NAN),
        });
    }

    let ev = CharEvaluator::new(tree, q, options.dirichlet_leaf)?;
    let want_dirichlet = options.dirichlet_leaf.is_some();
    let f = |lam: R| -> Result<R> {
        match options.oracle {
            ZeroSource::Recursion => {
                let p = ev.char_pair(lam)?;
                Ok(if want_dirichlet { p.phi_d } else { p.phi_n })
            }
            ZeroSource::Determinant => det_char(tree, q, lam, options.dirichlet_leaf),
        }
    };

    let grid = build_grid(tree, window, options.rho_step);
    let values: Vec<R> = grid.par_iter().map(|&lam| f(lam)).collect::<Result<_>>()?;

    let candidates = find_candidates(&grid, &values, &f)?;
    let mut located: Vec<Located<R>> = candidates
        .par_iter()
        .map(|c| locate_candidate(&f, c))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    located.sort_by(|a, b| a.lambda.partial_cmp(&b.lambda).expect("finite eigenvalues"));
    // The same zero reached through two detectors collapses to one site; a
    // claim of even order wins because it carries the dip evidence.
    let mut sites: Vec<Located<R>> = Vec::with_capacity(located.len());
    for l in located {
        match sites.last_mut() {
            Some(last)
                if (l.lambda - last.lambda).abs()
                    <= rf::<R>(1e-9) * l.lambda.abs().max(R::one()) =>
            {
                last.odd = last.odd && l.odd;
            }
            _ => sites.push(l),
        }
    }
    // Order probes must stay clear of the neighboring zeros, or a close
    // split pair reads as one high-order zero.
    let refined: Vec<SpectrumEntry<R>> = sites
        .par_iter()
        .enumerate()
        .map(|(j, site)| {
            let mut d = probe_distance(site.lambda);
            if j > 0 {
                d = d.min(rf::<R>(0.3) * (site.lambda - sites[j - 1].lambda));
            }
            if j + 1 < sites.len() {
                d = d.min(rf::<R>(0.3) * (sites[j + 1].lambda - site.lambda));
            }
            let multiplicity = fit_order(&f, site.lambda, site.odd, d)?;
            Ok(SpectrumEntry { lambda: site.lambda, multiplicity })
        })
        .collect::<Result<_>>()?;

    let entries = merge_entries(refined, window);
    let spectrum = Spectrum { entries, window, tolerance: rf(1e-10) };

    if options.weyl_guard && hi > R::zero() && lo <= -(q.sup_abs(&tree.lengths()) + rf(0.5)) {
        let admissible = weyl_count(tree, hi);
        let found = spectrum.total_multiplicity();
        if found < admissible.min || found > admissible.max {
            return Err(Error::WindowTooCoarse {
                found,
                lo: lo.to_f64().unwrap_or(f64::NAN),
                hi: hi.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(spectrum)
}

fn build_grid<R: Real>(tree: &MetricTree<R>, (lo, hi): (R, R), rho_step: Option<R>) -> Vec<R> {
    let drho = rho_step.unwrap_or_else(|| R::PI() / (rf::<R>(4.0) * tree.total_length()));
    let mut grid = Vec::new();
    let neg_top = hi.min(R::zero());
    if lo < neg_top {
        // match the positive-side resolution: dλ = (dρ)² spans the same
        // fraction of the lowest oscillation
        let dneg = drho * drho;
        let mut k = 0usize;
        loop {
            let lam = lo + rf::<R>(k as f64) * dneg;
            if lam >= neg_top {
                break;
            }
            grid.push(lam);
            k += 1;
        }
        if hi < R::zero() {
            grid.push(hi);
        }
    }
    if hi > R::zero() {
        let rho_lo = lo.max(R::zero()).sqrt();
        let rho_hi = hi.sqrt();
        let mut k = 0usize;
        loop {
            let rho = rho_lo + rf::<R>(k as f64) * drho;
            if rho >= rho_hi {
                break;
            }
            grid.push(rho * rho);
            k += 1;
        }
        grid.push(hi);
    }
    grid
}

#[derive(Debug, Clone, Copy)]
enum Candidate<R> {
    /// Grid point whose value is exactly zero; parity read just off the grid.
    Exact { lam: R, odd: bool },
    /// Sign change between two (possibly nudged) abscissas.
    Bracket { a: R, fa: R, b: R },
    /// Same-sign local minimum of |f| over [a, b], one grid cell each way.
    Dip { a: R, fa: R, b: R, fb: R },
}

/// A zero whose position is settled but whose order is not yet fitted.
#[derive(Debug, Clone, Copy)]
struct Located<R> {
    lambda: R,
    odd: bool,
}

/// An exact grid zero defeats the sign test in both adjacent cells, so each
/// one is replaced by readings a sliver off the grid point; the same readings
/// settle the parity of the exact zero itself.
fn find_candidates<R: Real, F>(grid: &[R], values: &[R], f: &F) -> Result<Vec<Candidate<R>>>
where
    F: Fn(R) -> Result<R> + ?Sized,
{
    let n = grid.len();
    // effective (abscissa, value) seen from the right resp. left of point i
    let mut right: Vec<(R, R)> = Vec::with_capacity(n);
    let mut left: Vec<(R, R)> = Vec::with_capacity(n);
    for i in 0..n {
        if values[i] != R::zero() {
            right.push((grid[i], values[i]));
            left.push((grid[i], values[i]));
            continue;
        }
        let cell_r = if i + 1 < n { grid[i + 1] - grid[i] } else { R::zero() };
        let cell_l = if i > 0 { grid[i] - grid[i - 1] } else { R::zero() };
        let xr = grid[i] + rf::<R>(1e-3) * if cell_r > R::zero() { cell_r } else { cell_l };
        let xl = grid[i] - rf::<R>(1e-3) * if cell_l > R::zero() { cell_l } else { cell_r };
        right.push((xr, f(xr)?));
        left.push((xl, f(xl)?));
    }
    let mut out = Vec::new();
    for i in 0..n {
        if values[i] == R::zero() {
            let (lv, rv) = (left[i].1, right[i].1);
            let odd = if lv != R::zero() && rv != R::zero() {
                (lv > R::zero()) != (rv > R::zero())
            } else {
                true // unreadable flanks: call it a simple crossing
            };
            out.push(Candidate::Exact { lam: grid[i], odd });
        }
    }
    for i in 0..n.saturating_sub(1) {
        let (xa, va) = right[i];
        let (xb, vb) = left[i + 1];
        if va != R::zero() && vb != R::zero() && (va > R::zero()) != (vb > R::zero()) {
            out.push(Candidate::Bracket { a: xa, fa: va, b: xb });
        }
    }
    for i in 1..n.saturating_sub(1) {
        let (a, b, c) = (values[i - 1], values[i], values[i + 1]);
        if a == R::zero() || b == R::zero() || c == R::zero() {
            continue;
        }
        let same_sign = (a > R::zero()) == (b > R::zero()) && (b > R::zero()) == (c > R::zero());
        if same_sign && b.abs() < a.abs() && b.abs() <= c.abs() {
            out.push(Candidate::Dip { a: grid[i - 1], fa: a, b: grid[i + 1], fb: c });
        }
    }
    Ok(out)
}

fn locate_candidate<R: Real, F>(f: &F, c: &Candidate<R>) -> Result<Vec<Located<R>>>
where
    F: Fn(R) -> Result<R> + Sync,
{
    match *c {
        Candidate::Exact { lam, odd } => Ok(vec![Located { lambda: lam, odd }]),
        Candidate::Bracket { a, fa, b } => {
            let lam = bisect(f, a, fa, b, rf(1e-10))?;
            Ok(vec![Located { lambda: lam, odd: true }])
        }
        Candidate::Dip { a, fa, b, fb } => {
            let (x, fx) = golden_min_abs(f, a, b)?;
            if fx > rf::<R>(1e-6) * fa.abs().max(fb.abs()) {
                return Ok(Vec::new()); // the dip does not reach zero
            }
            // A dip is either an even-order touch or a pair of crossings
            // whose middle sample happened to sit between them; the signs a
            // probe away from the minimum tell the two apart.
            let d = probe_distance(x).min(rf::<R>(0.1) * (b - a));
            let (sm, sp) = (f(x - d)?, f(x + d)?);
            if sm != R::zero() && sp != R::zero() && (sm > R::zero()) != (sp > R::zero()) {
                let mut out = vec![Located { lambda: x, odd: true }];
                if (fa > R::zero()) != (sm > R::zero()) {
                    let partner = bisect(f, a, fa, x - d, rf(1e-10))?;
                    out.push(Located { lambda: partner, odd: true });
                } else if (fb > R::zero()) != (sp > R::zero()) {
                    let partner = bisect(f, x + d, sp, b, rf(1e-10))?;
                    out.push(Located { lambda: partner, odd: true });
                }
                return Ok(out);
            }
            let lam = refine_even_zero(f, x, b - a)?;
            Ok(vec![Located { lambda: lam, odd: false }])
        }
    }
}

/// Bisection on a sign change; `fa` is the value at `a`. Refines until the
/// bracket is below `tol_rel`·max(1,|λ|) or floating-point resolution.
fn bisect<R: Real, F>(f: &F, mut a: R, fa: R, mut b: R, tol_rel: R) -> Result<R>
where
    F: Fn(R) -> Result<R> + ?Sized,
{
    let positive_left = fa > R::zero();
    for _ in 0..300 {
        let mid = (a + b) * rf(0.5);
        if mid <= a || mid >= b || b - a <= tol_rel * mid.abs().max(R::one()) {
            break;
        }
        let fm = f(mid)?;
        if fm == R::zero() {
            return Ok(mid);
        }
        if (fm > R::zero()) == positive_left {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok((a + b) * rf(0.5))
}

/// Golden-section minimum of |f| on [a, b]; returns (argmin, min).
fn golden_min_abs<R: Real, F>(f: &F, mut a: R, mut b: R) -> Result<(R, R)>
where
    F: Fn(R) -> Result<R> + ?Sized,
{
    let g = rf::<R>(0.618_033_988_749_894_8);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c)?.abs();
    let mut fd = f(d)?.abs();
    for _ in 0..150 {
        if b - a <= rf::<R>(1e-12) * b.abs().max(R::one()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?.abs();
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?.abs();
        }
    }
    let x = (a + b) * rf(0.5);
    Ok((x, f(x)?.abs()))
}

/// Probe distance for order fitting and even-zero refinement: far enough
/// from λ* that f is dominated by its leading term, well inside a grid cell.
fn probe_distance<R: Real>(lam: R) -> R {
    if lam.abs() > R::one() {
        rf::<R>(2e-3) * lam.abs().sqrt()
    } else {
        rf(1e-3)
    }
}

/// An even-order zero is a zero of the symmetric difference
/// g(λ) = f(λ+d) − f(λ−d), which does change sign; bisect that.
fn refine_even_zero<R: Real, F>(f: &F, x: R, cell: R) -> Result<R>
where
    F: Fn(R) -> Result<R> + Sync,
{
    let d = probe_distance(x);
    let g = |lam: R| -> Result<R> { Ok(f(lam + d)? - f(lam - d)?) };
    let w = (d * rf(4.0)).min(cell);
    let (a, b) = (x - w, x + w);
    let (ga, gb) = (g(a)?, g(b)?);
    if ga != R::zero() && gb != R::zero() && (ga > R::zero()) != (gb > R::zero()) {
        bisect(&g, a, ga, b, rf(1e-11))
    } else {
        // curvature too shallow for the symmetric difference; keep the
        // golden-section location
        Ok(x)
    }
}

/// Order of the zero at λ* from the shrink rate of |f|: |f(λ*±2d)/f(λ*±d)|
/// ≈ 2^k. Snapped to the parity the detector established, capped at 4.
/// The probe distance `d` is supplied by the caller so it can be kept short
/// of the neighboring zeros.
fn fit_order<R: Real, F>(f: &F, lam: R, odd: bool, d: R) -> Result<usize>
where
    F: Fn(R) -> Result<R> + ?Sized,
{
    let fallback = if odd { 1 } else { 2 };
    let two = rf::<R>(2.0);
    let f1p = f(lam + d)?.abs();
    let f2p = f(lam + two * d)?.abs();
    let f1m = f(lam - d)?.abs();
    let f2m = f(lam - two * d)?.abs();
    if f1p == R::zero() || f1m == R::zero() {
        return Ok(fallback);
    }
    let k = ((f2p / f1p).log2() + (f2m / f1m).log2()) * rf(0.5);
    let k = k.to_f64().unwrap_or(f64::NAN);
    if !k.is_finite() {
        return Ok(fallback);
    }
    Ok(match (odd, k) {
        (true, k) if k < 2.0 => 1,
        (true, _) => 3,
        (false, k) if k < 3.0 => 2,
        (false, _) => 4,
    })
}

fn merge_entries<R: Real>(
    mut entries: Vec<SpectrumEntry<R>>,
    (lo, hi): (R, R),
) -> Vec<SpectrumEntry<R>> {
    entries.retain(|e| {
        let slack = rf::<R>(1e-9) * e.lambda.abs().max(R::one());
        e.lambda >= lo - slack && e.lambda <= hi + slack
    });
    for e in &mut entries {
        e.lambda = e.lambda.max(lo).min(hi);
    }
    entries.sort_by(|a, b| a.lambda.partial_cmp(&b.lambda).expect("finite eigenvalues"));
    let mut out: Vec<SpectrumEntry<R>> = Vec::with_capacity(entries.len());
    for e in entries {
        match out.last_mut() {
            Some(last)
                if (e.lambda - last.lambda).abs()
                    <= rf::<R>(1e-9) * e.lambda.abs().max(R::one()) =>
            {
                // the same zero reached through two detectors; keep the
                // richer description
                last.multiplicity = last.multiplicity.max(e.multiplicity);
            }
            _ => out.push(e),
        }
    }
    out
}

/// Reference abscissas μ_n = 2π·m_n/L. Input m values are sorted and
/// deduplicated so the sequence is strictly increasing.
#[derive(Debug, Clone)]
pub struct MuSequence<R> {
    pub m_values: Vec<u64>,
    pub mu_values: Vec<R>,
}

pub fn mu_sequence<R: Real>(tree: &MetricTree<R>, m_values: &[u64]) -> MuSequence<R> {
    let mut ms: Vec<u64> = m_values.to_vec();
    ms.sort_unstable();
    ms.dedup();
    let l = tree.total_length();
    let mu = ms
        .iter()
        .map(|&m| rf::<R>(2.0) * R::PI() * rf::<R>(m as f64) / l)
        .collect();
    MuSequence { m_values: ms, mu_values: mu }
}

/// The zero ρ_n of ψ_N nearest to `mu`. Because dψ_N/dρ ≈ L near the large
/// reference abscissas, the zero lies within about |ψ_N(μ)|/L of μ; the
/// bracket starts at twice that and grows geometrically up to 10× before
/// giving up.
pub fn rho_near_mu<R: Real>(tree: &MetricTree<R>, mu: R) -> Result<R> {
    debug_assert!(mu > R::zero());
    let zero_q = PotentialVector::zero(tree.edge_count());
    let ev = CharEvaluator::new(tree, &zero_q, None)?;
    let f = |rho: R| -> Result<R> { Ok(ev.psi_pair_at_rho(rho).phi_n) };

    let f0 = f(mu)?;
    if f0 == R::zero() {
        return Ok(mu);
    }
    let eps = R::epsilon();
    let delta = (rf::<R>(2.0) * f0.abs() / tree.total_length())
        .max(rf::<R>(64.0) * eps * mu.abs().max(R::one()));
    let tol = rf::<R>(4.0) * eps;
    let positive = f0 > R::zero();
    for mult in [1.0, 2.0, 4.0, 8.0, 10.0] {
        let r = delta * rf(mult);
        let (a, b) = (mu - r, mu + r);
        let fa = f(a)?;
        if fa == R::zero() {
            return Ok(a);
        }
        if (fa > R::zero()) != positive {
            return bisect(&f, a, fa, mu, tol);
        }
        let fb = f(b)?;
        if fb == R::zero() {
            return Ok(b);
        }
        if (fb > R::zero()) != positive {
            return bisect(&f, mu, f0, b, tol);
        }
    }
    // ψ_N may only touch zero here (even-order zero, e.g. equal-length
    // stars); fall back to minimizing |ψ_N|
    let r = delta * rf(10.0);
    let (x, fx) = golden_min_abs(&f, mu - r, mu + r)?;
    if fx <= rf::<R>(1e-8) * (tree.total_length() * mu).max(R::one()) {
        return Ok(x);
    }
    Err(Error::NoZeroNearMu {
        mu: mu.to_f64().unwrap_or(f64::NAN),
        dist: (delta * rf::<R>(10.0)).to_f64().unwrap_or(f64::NAN),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::EdgePotential;
    use crate::tree::TreeBuilder;

    const PI: f64 = std::f64::consts::PI;

    fn interval(a: f64) -> MetricTree<f64> {
        TreeBuilder::new(0).edge(0, 1, 0, a).build().unwrap()
    }

    fn star3(a: [f64; 3]) -> MetricTree<f64> {
        TreeBuilder::new(0)
            .edge(0, 1, 0, a[0])
            .edge(1, 2, 0, a[1])
            .edge(2, 3, 0, a[2])
            .build()
            .unwrap()
    }

    fn assert_spectrum(got: &Spectrum<f64>, want: &[(f64, usize)], rel: f64) {
        assert_eq!(
            got.entries.len(),
            want.len(),
            "expected {want:?}, got {:?}",
            got.entries
        );
        for (e, &(lam, mult)) in got.entries.iter().zip(want) {
            assert!(
                (e.lambda - lam).abs() <= rel * lam.abs().max(1.0),
                "eigenvalue {} vs {}",
                e.lambda,
                lam
            );
            assert_eq!(e.multiplicity, mult, "multiplicity at λ = {lam}");
        }
    }

    #[test]
    fn interval_neumann_spectrum() {
        let t = interval(1.0);
        let q = PotentialVector::zero(1);
        let s = scan_spectrum(&t, &q, (-1.0, 100.0), &ScanOptions::default()).unwrap();
        let want: Vec<(f64, usize)> =
            (0..4).map(|k| ((k as f64 * PI).powi(2), 1)).collect();
        assert_spectrum(&s, &want, 1e-9);
    }

    #[test]
    fn equilateral_star_multiplicities() {
        let t = star3([1.0; 3]);
        let q = PotentialVector::zero(3);
        let s = scan_spectrum(&t, &q, (-1.0, 25.0), &ScanOptions::default()).unwrap();
        let want = [
            (0.0, 1),
            ((PI / 2.0).powi(2), 2),
            (PI.powi(2), 1),
            ((1.5 * PI).powi(2), 2),
        ];
        assert_spectrum(&s, &want, 1e-8);
    }

    #[test]
    fn junction_of_degree_two_is_invisible() {
        // a (1,2)-path carries the Neumann spectrum of the length-3 interval
        let t = TreeBuilder::new(0).edge(0, 1, 2, 1.0).edge(1, 2, 0, 2.0).build().unwrap();
        let q = PotentialVector::zero(2);
        let s = scan_spectrum(&t, &q, (-1.0, 30.0), &ScanOptions::default()).unwrap();
        let want: Vec<(f64, usize)> =
            (0..6).map(|k| ((k as f64 * PI / 3.0).powi(2), 1)).collect();
        assert_spectrum(&s, &want, 1e-9);
    }

    #[test]
    fn constant_potential_shifts_the_spectrum() {
        let t = interval(1.0);
        let zero = PotentialVector::zero(1);
        let shifted = PotentialVector(vec![EdgePotential::constant(-4.0)]);
        let base = scan_spectrum(&t, &zero, (-1.0, 54.0), &ScanOptions::default()).unwrap();
        let s = scan_spectrum(&t, &shifted, (-5.0, 50.0), &ScanOptions::default()).unwrap();
        assert_eq!(s.entries.len(), base.entries.len());
        assert!(s.entries[0].lambda < 0.0, "lowest eigenvalue must be −4");
        for (a, b) in s.entries.iter().zip(&base.entries) {
            assert!(
                (a.lambda - (b.lambda - 4.0)).abs() <= 1e-8 * b.lambda.abs().max(1.0),
                "{} vs {}",
                a.lambda,
                b.lambda - 4.0
            );
        }
    }

    #[test]
    fn determinant_oracle_agrees_with_recursion() {
        let t = star3([1.0, 1.4, 0.8]);
        let q = PotentialVector(vec![
            EdgePotential::constant(2.0),
            EdgePotential::constant(-1.5),
            EdgePotential::constant(0.3),
        ]);
        let win = (-4.0, 60.0);
        let a = scan_spectrum(&t, &q, win, &ScanOptions::default()).unwrap();
        let b = scan_spectrum(
            &t,
            &q,
            win,
            &ScanOptions { oracle: ZeroSource::Determinant, ..ScanOptions::default() },
        )
        .unwrap();
        assert_eq!(a.entries.len(), b.entries.len());
        for (x, y) in a.entries.iter().zip(&b.entries) {
            assert!((x.lambda - y.lambda).abs() <= 1e-8 * x.lambda.abs().max(1.0));
            assert_eq!(x.multiplicity, y.multiplicity);
        }
    }

    #[test]
    fn dirichlet_marked_interval() {
        // Dirichlet at the far pendant, Neumann at the root:
        // eigenvalues ((k+1/2)π)²
        let t = interval(1.0);
        let q = PotentialVector::zero(1);
        let opts = ScanOptions { dirichlet_leaf: Some(1), ..ScanOptions::default() };
        let s = scan_spectrum(&t, &q, (-1.0, 30.0), &opts).unwrap();
        let want = [((PI / 2.0).powi(2), 1), ((1.5 * PI).powi(2), 1)];
        assert_spectrum(&s, &want, 1e-9);
    }

    #[test]
    fn halving_the_step_never_loses_roots() {
        let t = star3([1.0, 1.4, 0.8]);
        let q = PotentialVector(vec![
            EdgePotential::polynomial(vec![1.0, -2.0]),
            EdgePotential::constant(3.0),
            EdgePotential::Zero,
        ]);
        let default_step = PI / (4.0 * t.total_length());
        let coarse = scan_spectrum(&t, &q, (-5.0, 80.0), &ScanOptions::default()).unwrap();
        let fine = scan_spectrum(
            &t,
            &q,
            (-5.0, 80.0),
            &ScanOptions { rho_step: Some(default_step / 2.0), ..ScanOptions::default() },
        )
        .unwrap();
        assert!(fine.total_multiplicity() >= coarse.total_multiplicity());
        assert_eq!(fine.entries.len(), coarse.entries.len());
    }

    #[test]
    fn weyl_count_examples() {
        let t = interval(1.0);
        let w = weyl_count(&t, 100.0);
        assert_eq!((w.expected, w.min, w.max), (3, 2, 4));
        // actual count including λ=0 is 4, inside the slack
        let star = star3([1.0; 3]);
        let w = weyl_count(&star, 25.0);
        assert_eq!(w.expected, 4);
        assert!(w.min <= 6 && 6 <= w.max, "range [{}, {}]", w.min, w.max);
    }

    #[test]
    fn coarse_scan_trips_the_guard() {
        let t = interval(1.0);
        let q = PotentialVector::zero(1);
        let opts = ScanOptions { rho_step: Some(7.0), ..ScanOptions::default() };
        let err = scan_spectrum(&t, &q, (-1.0, 400.0), &opts).unwrap_err();
        assert!(matches!(err, Error::WindowTooCoarse { .. }), "got {err:?}");
    }

    #[test]
    fn rejects_bad_windows() {
        let t = interval(1.0);
        let q = PotentialVector::zero(1);
        for (lo, hi) in [(2.0, 2.0), (5.0, -5.0), (f64::NAN, 1.0)] {
            let err = scan_spectrum(&t, &q, (lo, hi), &ScanOptions::default()).unwrap_err();
            assert!(matches!(err, Error::BadWindow { .. }));
        }
    }

    #[test]
    fn mu_sequence_formula() {
        let t: MetricTree<f64> =
            TreeBuilder::new(0).edge(0, 1, 2, 1.0).edge(1, 2, 0, 2.0).build().unwrap();
        let mu = mu_sequence(&t, &[3, 6, 3]);
        assert_eq!(mu.m_values, vec![3, 6]);
        assert!((mu.mu_values[0] - 2.0 * PI).abs() < 1e-14);
        assert!((mu.mu_values[1] - 4.0 * PI).abs() < 1e-14);

        let s: MetricTree<f64> = TreeBuilder::new(0)
            .edge(0, 1, 0, 1.0)
            .edge(1, 2, 0, std::f64::consts::SQRT_2)
            .build()
            .unwrap();
        let mu = mu_sequence(&s, &[29]);
        let want = 58.0 * PI / (1.0 + std::f64::consts::SQRT_2);
        assert!((mu.mu_values[0] - want).abs() < 1e-12 * want);
        assert!((want - 75.47).abs() < 0.02);
    }

    #[test]
    fn rho_near_mu_rational_cases() {
        // single edge: ψ_N = sin ρ, zeros at nπ; μ = 2nπ hits them
        let t = interval(1.0);
        for n in [1u64, 4, 9] {
            let mu = 2.0 * PI * n as f64;
            let rho = rho_near_mu(&t, mu).unwrap();
            assert!((rho - mu).abs() < 5e-12 * mu, "{rho} vs {mu}");
        }
        // (1,2)-path: ψ_N = sin 3ρ; μ = 2πm/3 are zeros
        let p = TreeBuilder::new(0).edge(0, 1, 2, 1.0).edge(1, 2, 0, 2.0).build().unwrap();
        for m in [3u64, 7, 20] {
            let mu = 2.0 * PI * m as f64 / 3.0;
            let rho = rho_near_mu(&p, mu).unwrap();
            assert!((rho - mu).abs() < 5e-12 * mu);
        }
    }

    #[test]
    fn rho_near_mu_touch_zero_fallback() {
        // the equilateral star's ψ_N only touches zero at odd multiples of
        // π/2; the sign-change hunt fails and the minimizer takes over
        let t = star3([1.0; 3]);
        let mu = PI / 2.0 + 1e-9;
        let rho = rho_near_mu(&t, mu).unwrap();
        assert!((rho - PI / 2.0).abs() < 1e-6, "{rho}");
    }

    #[test]
    fn rho_near_mu_off_zero_converges_to_nearest() {
        let t = interval(1.0);
        // ψ_N(μ) small but nonzero: μ slightly off 5π
        let mu = 5.0 * PI + 1e-3;
        let rho = rho_near_mu(&t, mu).unwrap();
        assert!((rho - 5.0 * PI).abs() < 1e-11);
    }
}
