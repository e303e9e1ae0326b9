//! Finite-volume discretization of the tree operator, used as an
//! independent check on the characteristic-function spectra.
//!
//! Each edge is cut into `round(len/h)` equal cells. Cell averages give a
//! symmetric generalized pencil `A y = lambda B y` with diagonal `B`:
//! interior nodes carry the usual three-point stencil, vertex nodes carry
//! one half-cell per incident edge, which encodes the reflecting condition
//! at pendants and the flux balance at junctions without ghost points.
//! Eigenvalues come from Sturm bisection: the mesh graph is a tree, so the
//! `L D L^T` factorization of `A~ - tau I` (with `A~ = B^{-1/2} A B^{-1/2}`)
//! eliminates leaves first with no fill-in, and the sign count of `D` gives
//! the number of eigenvalues below `tau` in `O(n)` per probe. That makes
//! the solver deterministic and lets it report exact multiplicities.

use crate::error::{Error, Result};
use crate::potential::PotentialVector;
use crate::spectrum::{Spectrum, SpectrumEntry};
use crate::tree::MetricTree;

const NO_PARENT: usize = usize::MAX;

/// Mesh of the whole tree in symmetrized form. `parent[j]` points one node
/// toward the root vertex; `off[j]` is the matrix entry coupling `j` to it.
struct Mesh {
    diag: Vec<f64>,
    off: Vec<f64>,
    parent: Vec<usize>,
    /// Elimination order: every node appears before its parent.
    order: Vec<usize>,
    /// Pivot floor, scaled to the matrix norm.
    pivmin: f64,
}

fn build_mesh(tree: &MetricTree<f64>, q: &PotentialVector<f64>, h: f64) -> Result<Mesh> {
    let mut cells = Vec::with_capacity(tree.edge_count());
    for e in tree.edges() {
        let n = (e.len / h).round();
        let n = if n.is_finite() && n > 0.0 { n as usize } else { 0 };
        if n < 9 {
            return Err(Error::MeshTooCoarse {
                edge: e.id,
                nodes: n.saturating_sub(1),
            });
        }
        cells.push(n);
    }

    let mut node_of = std::collections::BTreeMap::new();
    for v in tree.vertices() {
        let id = node_of.len();
        node_of.insert(v, id);
    }
    let mut nn = node_of.len();
    for &n in &cells {
        nn += n - 1;
    }

    let mut diag_a = vec![0.0; nn];
    let mut diag_b = vec![0.0; nn];
    let mut off_a = vec![0.0; nn];
    let mut parent = vec![NO_PARENT; nn];

    let mut next = node_of.len();
    for (pos, e) in tree.edges().iter().enumerate() {
        let n = cells[pos];
        let he = e.len / n as f64;
        let qe = q.get(pos);
        // Node chain along the edge, child vertex first (local x = 0).
        let mut chain = Vec::with_capacity(n + 1);
        chain.push(node_of[&e.child]);
        for _ in 1..n {
            chain.push(next);
            next += 1;
        }
        chain.push(node_of[&e.parent]);

        for (j, &nd) in chain.iter().enumerate() {
            let x = he * j as f64;
            let w = if j == 0 || j == n { 0.5 * he } else { he };
            diag_a[nd] += qe.eval(x) * w;
            diag_b[nd] += w;
        }
        for w in chain.windows(2) {
            diag_a[w[0]] += 1.0 / he;
            diag_a[w[1]] += 1.0 / he;
            // The chain runs child -> parent, i.e. toward the root.
            parent[w[0]] = w[1];
            off_a[w[0]] = -1.0 / he;
        }
    }
    debug_assert_eq!(next, nn);
    debug_assert_eq!(parent[node_of[&tree.root()]], NO_PARENT);

    let mut diag = vec![0.0; nn];
    let mut off = vec![0.0; nn];
    for j in 0..nn {
        diag[j] = diag_a[j] / diag_b[j];
        if parent[j] != NO_PARENT {
            off[j] = off_a[j] / (diag_b[j] * diag_b[parent[j]]).sqrt();
        }
    }

    // Children-before-parents order: reverse of a root-first traversal.
    let mut kids = vec![Vec::new(); nn];
    for j in 0..nn {
        if parent[j] != NO_PARENT {
            kids[parent[j]].push(j);
        }
    }
    let mut order = Vec::with_capacity(nn);
    let mut stack = vec![node_of[&tree.root()]];
    while let Some(j) = stack.pop() {
        order.push(j);
        stack.extend_from_slice(&kids[j]);
    }
    order.reverse();

    let mut gmax = 0.0f64;
    for j in 0..nn {
        let mut row = diag[j].abs() + off[j].abs();
        for &c in &kids[j] {
            row += off[c].abs();
        }
        gmax = gmax.max(row);
    }

    Ok(Mesh {
        diag,
        off,
        parent,
        order,
        pivmin: f64::EPSILON * gmax.max(f64::MIN_POSITIVE),
    })
}

impl Mesh {
    fn len(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues below `tau`, by Sylvester's law applied to the
    /// leaf-first `L D L^T` factorization of `A~ - tau I`.
    fn count_below(&self, tau: f64) -> usize {
        let mut acc = vec![0.0; self.len()];
        let mut neg = 0;
        for &j in &self.order {
            let mut d = self.diag[j] - tau - acc[j];
            if d.abs() < self.pivmin {
                d = -self.pivmin;
            }
            if d < 0.0 {
                neg += 1;
            }
            let p = self.parent[j];
            if p != NO_PARENT {
                acc[p] += self.off[j] * self.off[j] / d;
            }
        }
        neg
    }
}

/// Smallest `count` eigenvalues of the discretized problem at mesh step `h`,
/// clustered into multiplicities. Deterministic in all inputs.
pub fn fd_eigenvalues(
    tree: &MetricTree<f64>,
    q: &PotentialVector<f64>,
    h: f64,
    count: usize,
) -> Result<Spectrum<f64>> {
    let lengths = tree.lengths();
    q.validate(&lengths)?;
    let mesh = build_mesh(tree, q, h)?;
    if count > mesh.len() {
        return Err(Error::Eigensolver(format!(
            "requested {count} eigenvalues from a mesh with only {} nodes",
            mesh.len()
        )));
    }

    // The discrete Rayleigh quotient is bounded below by -sup|q|; widen the
    // bracket anyway in case a sampled potential undershoots its table.
    let mut lo = -(q.sup_abs(&lengths) + 1.0);
    while mesh.count_below(lo) > 0 {
        lo = 2.0 * lo - 1.0;
    }
    let window_lo = lo;
    if count == 0 {
        return Ok(Spectrum {
            entries: Vec::new(),
            window: (window_lo, window_lo),
            tolerance: 0.0,
        });
    }
    let mut hi = lo.abs().max(1.0);
    while mesh.count_below(hi) < count {
        hi *= 2.0;
        if hi > 1e15 {
            return Err(Error::Eigensolver(
                "upper bracket for the requested eigenvalues diverged".into(),
            ));
        }
    }

    let tol = 1e-12;
    let mut raw = Vec::with_capacity(count);
    for k in 0..count {
        // Invariant: count_below(a) <= k < count_below(b).
        let (mut a, mut b) = (lo, hi);
        while b - a > tol * b.abs().max(1.0) {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if mesh.count_below(mid) > k {
                b = mid;
            } else {
                a = mid;
            }
        }
        raw.push(0.5 * (a + b));
        lo = a; // still a valid lower bracket for every later k
    }

    let mut entries: Vec<SpectrumEntry<f64>> = Vec::new();
    for lam in raw {
        match entries.last_mut() {
            Some(e) if (lam - e.lambda).abs() <= 1e-9 * lam.abs().max(1.0) => {
                e.multiplicity += 1;
            }
            _ => entries.push(SpectrumEntry {
                lambda: lam,
                multiplicity: 1,
            }),
        }
    }
    let window_hi = entries.last().map_or(window_lo, |e| e.lambda);
    Ok(Spectrum {
        entries,
        window: (window_lo, window_hi),
        tolerance: tol,
    })
}
