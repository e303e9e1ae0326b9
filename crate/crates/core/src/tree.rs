//! Rooted metric trees: orientation, validation, and the leaf-peeling
//! structural operations the characteristic-function recursion is built on.
//!
//! Every edge carries a local coordinate running from its *child* endpoint
//! (the one farther from the root, coordinate `0`) to its *parent* endpoint
//! (coordinate `a_i`). Depth is counted in hops from the root.

use std::collections::BTreeMap;

use crate::scalar::{rf, Real};
use crate::{Error, Result};

/// Exact form of an edge length as written in a tree description.
///
/// Irrational fixtures keep their symbolic form so that length *ratios* can
/// later be evaluated to better than `f64` precision.
#[derive(Debug, Clone, PartialEq)]
pub enum LengthExpr {
    Decimal(f64),
    /// `num/den * token` with `den > 0`.
    Scaled { num: i64, den: i64, token: LengthToken },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LengthToken {
    One,
    Sqrt2,
    Sqrt3,
    Pi,
}

impl LengthToken {
    pub fn value(self) -> f64 {
        match self {
            LengthToken::One => 1.0,
            LengthToken::Sqrt2 => std::f64::consts::SQRT_2,
            LengthToken::Sqrt3 => 3.0f64.sqrt(),
            LengthToken::Pi => std::f64::consts::PI,
        }
    }
}

impl LengthExpr {
    pub fn value(&self) -> f64 {
        match *self {
            LengthExpr::Decimal(x) => x,
            LengthExpr::Scaled { num, den, token } => num as f64 / den as f64 * token.value(),
        }
    }
}

/// Directed edge of a rooted tree; the child endpoint carries local
/// coordinate `0`, the parent endpoint carries coordinate `len`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge<R> {
    pub id: usize,
    pub child: usize,
    pub parent: usize,
    pub len: R,
    pub expr: LengthExpr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Neumann,
    Dirichlet,
}

/// Boundary condition attached to a pendant vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryMark {
    pub vertex: usize,
    pub kind: BoundaryKind,
}

#[derive(Debug, Clone)]
struct VertexInfo {
    /// Edge ids whose parent endpoint is this vertex, ascending.
    child_edges: Vec<usize>,
    /// Edge id whose child endpoint is this vertex (`None` at the root).
    parent_edge: Option<usize>,
    /// Hop distance from the root.
    depth: usize,
}

/// Rooted metric tree. Vertex and edge ids are arbitrary distinct integers;
/// trees produced by [`MetricTree::peel`] keep the ids of the original.
#[derive(Debug, Clone)]
pub struct MetricTree<R> {
    edges: Vec<Edge<R>>,
    root: usize,
    idx: BTreeMap<usize, usize>,
    verts: BTreeMap<usize, VertexInfo>,
}

impl<R: Real> MetricTree<R> {
    /// Builds and validates a tree from oriented edges.
    ///
    /// A root of degree 1 is accepted (single edges and path endpoints both
    /// occur as recursion base cases); see [`Self::is_degenerate_root`].
    pub fn new(root: usize, edges: Vec<Edge<R>>) -> Result<Self> {
        Self::assemble(root, edges)
    }

    pub(crate) fn assemble(root: usize, mut edges: Vec<Edge<R>>) -> Result<Self> {
        edges.sort_by_key(|e| e.id);
        let mut idx = BTreeMap::new();
        for (i, e) in edges.iter().enumerate() {
            if idx.insert(e.id, i).is_some() {
                return Err(Error::DuplicateEdgeId(e.id));
            }
            if e.child == e.parent {
                return Err(Error::CycleDetected);
            }
            if !(e.len > R::zero()) || !e.len.is_finite() {
                return Err(Error::NonpositiveLength {
                    edge: Some(e.id),
                    len: e.len.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        if edges.is_empty() {
            return Err(Error::Disconnected);
        }

        // undirected adjacency: vertex -> (neighbour, edge index)
        let mut adj: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
        for (i, e) in edges.iter().enumerate() {
            adj.entry(e.child).or_default().push((e.parent, i));
            adj.entry(e.parent).or_default().push((e.child, i));
        }
        let nv = adj.len();
        if edges.len() + 1 > nv {
            return Err(Error::CycleDetected);
        }
        if edges.len() + 1 < nv {
            return Err(Error::Disconnected);
        }
        if !adj.contains_key(&root) {
            return Err(Error::UnknownVertex(root));
        }

        // breadth-first from the root fixes depths and checks connectivity
        let mut depth: BTreeMap<usize, usize> = BTreeMap::new();
        depth.insert(root, 0);
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            let d = depth[&v];
            for &(w, _) in &adj[&v] {
                if !depth.contains_key(&w) {
                    depth.insert(w, d + 1);
                    queue.push_back(w);
                }
            }
        }
        if depth.len() < nv {
            return Err(Error::Disconnected);
        }

        // stated orientation must agree with the one the root forces
        for e in &edges {
            if depth[&e.child] != depth[&e.parent] + 1 {
                return Err(Error::Parse {
                    line: 0,
                    msg: format!(
                        "edge {}: child/parent orientation disagrees with root {}",
                        e.id, root
                    ),
                });
            }
        }

        let mut verts: BTreeMap<usize, VertexInfo> = depth
            .iter()
            .map(|(&v, &d)| {
                (v, VertexInfo { child_edges: Vec::new(), parent_edge: None, depth: d })
            })
            .collect();
        for e in &edges {
            verts.get_mut(&e.parent).unwrap().child_edges.push(e.id);
            let slot = &mut verts.get_mut(&e.child).unwrap().parent_edge;
            debug_assert!(slot.is_none());
            *slot = Some(e.id);
        }
        for info in verts.values_mut() {
            info.child_edges.sort_unstable();
        }

        Ok(MetricTree { edges, root, idx, verts })
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.verts.len()
    }

    /// Edges in ascending id order.
    pub fn edges(&self) -> &[Edge<R>] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> Result<&Edge<R>> {
        self.idx.get(&id).map(|&i| &self.edges[i]).ok_or(Error::UnknownEdge(id))
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.verts.keys().copied()
    }

    /// Edge lengths indexed like [`Self::edges`].
    pub fn lengths(&self) -> Vec<R> {
        self.edges.iter().map(|e| e.len).collect()
    }

    /// Total length `L`, the sum of all edge lengths.
    pub fn total_length(&self) -> R {
        self.edges.iter().fold(R::zero(), |s, e| s + e.len)
    }

    pub fn degree(&self, v: usize) -> usize {
        let info = &self.verts[&v];
        info.child_edges.len() + usize::from(info.parent_edge.is_some())
    }

    pub fn is_pendant(&self, v: usize) -> bool {
        self.degree(v) == 1
    }

    /// True when the root has degree 1 (single-edge base case or a peel
    /// remainder); the root condition degenerates to Neumann there.
    pub fn is_degenerate_root(&self) -> bool {
        self.degree(self.root) == 1
    }

    pub fn depth_of(&self, v: usize) -> Result<usize> {
        self.verts.get(&v).map(|i| i.depth).ok_or(Error::UnknownVertex(v))
    }

    /// Edge ids hanging below `v` (their parent endpoint is `v`), ascending.
    pub fn child_edges_of(&self, v: usize) -> &[usize] {
        &self.verts[&v].child_edges
    }

    pub fn parent_edge_of(&self, v: usize) -> Option<usize> {
        self.verts[&v].parent_edge
    }

    pub fn pendant_vertices(&self) -> Vec<usize> {
        self.vertices().filter(|&v| self.is_pendant(v)).collect()
    }

    /// Edges whose child endpoint is pendant; exactly the edges the peeling
    /// recursion may remove.
    pub fn boundary_edges(&self) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|e| self.is_pendant(e.child))
            .map(|e| e.id)
            .collect()
    }

    /// Removes a boundary edge, returning the remainder (same root, now with
    /// a Neumann condition at the attachment vertex if its degree dropped
    /// to 1) and the components obtained by additionally splitting the
    /// remainder at the attachment vertex, each marked Dirichlet there.
    pub fn peel(&self, leaf_edge: usize) -> Result<PeelStep<R>> {
        if self.edge_count() < 2 {
            return Err(Error::PeelSingleEdge);
        }
        let e = self.edge(leaf_edge)?;
        if !self.is_pendant(e.child) {
            return Err(Error::NotBoundaryEdge(leaf_edge));
        }
        let v = e.parent;

        let rest: Vec<Edge<R>> =
            self.edges.iter().filter(|f| f.id != leaf_edge).cloned().collect();
        let remainder = Self::assemble(self.root, rest.clone())?;

        let mut subtrees = Vec::new();
        for &stub in remainder.verts[&v].child_edges.iter() {
            // component hanging below v: reroot it at the stub's child, which
            // reverses the stub edge (callers must reverse its potential too)
            let comp = remainder.collect_below(stub);
            let stub_child = remainder.edge(stub)?.child;
            let mut edges: Vec<Edge<R>> = comp
                .iter()
                .map(|&id| remainder.edge(id).unwrap().clone())
                .collect();
            for f in edges.iter_mut() {
                if f.id == stub {
                    std::mem::swap(&mut f.child, &mut f.parent);
                }
            }
            subtrees.push(DirichletSubtree {
                tree: Self::assemble(stub_child, edges)?,
                mark: BoundaryMark { vertex: v, kind: BoundaryKind::Dirichlet },
                flipped_edges: vec![stub],
            });
        }
        if v != self.root {
            // the component through v's parent edge keeps the original root
            let below: std::collections::BTreeSet<usize> = remainder.verts[&v]
                .child_edges
                .iter()
                .flat_map(|&stub| remainder.collect_below(stub))
                .collect();
            let up: Vec<Edge<R>> =
                rest.iter().filter(|f| !below.contains(&f.id)).cloned().collect();
            subtrees.push(DirichletSubtree {
                tree: Self::assemble(self.root, up)?,
                mark: BoundaryMark { vertex: v, kind: BoundaryKind::Dirichlet },
                flipped_edges: Vec::new(),
            });
        }
        subtrees.sort_by_key(|s| s.tree.edges[0].id);

        Ok(PeelStep {
            removed_edge: leaf_edge,
            attachment_vertex: v,
            neumann_remainder: remainder,
            dirichlet_subtrees: subtrees,
        })
    }

    /// Edge ids of `stub` and everything below it.
    fn collect_below(&self, stub: usize) -> Vec<usize> {
        let mut acc = Vec::new();
        let mut stack = vec![stub];
        while let Some(id) = stack.pop() {
            acc.push(id);
            let child = self.edge(id).unwrap().child;
            stack.extend(self.verts[&child].child_edges.iter().copied());
        }
        acc.sort_unstable();
        acc
    }

    /// Deterministic peeling sequence: repeatedly remove the boundary edge
    /// whose pendant is deepest (ties to the smallest edge id) until a single
    /// edge remains.
    pub fn peel_order(&self) -> Vec<usize> {
        let mut alive: BTreeMap<usize, &Edge<R>> =
            self.edges.iter().map(|e| (e.id, e)).collect();
        let mut order = Vec::with_capacity(self.edge_count().saturating_sub(1));
        while alive.len() > 1 {
            let has_children: std::collections::BTreeSet<usize> =
                alive.values().map(|e| e.parent).collect();
            let pick = alive
                .values()
                .filter(|e| !has_children.contains(&e.child))
                .max_by(|a, b| {
                    let da = self.verts[&a.child].depth;
                    let db = self.verts[&b.child].depth;
                    da.cmp(&db).then(b.id.cmp(&a.id))
                })
                .expect("a tree with >1 edge has a peelable boundary edge")
                .id;
            alive.remove(&pick);
            order.push(pick);
        }
        order
    }

    /// Reorients the tree around `new_root`, which must be internal.
    /// Returns the reoriented tree and the ids of edges whose direction
    /// (and therefore local coordinate) flipped; potentials on those edges
    /// must be reversed to describe the same operator.
    pub fn rerooted(&self, new_root: usize) -> Result<(Self, Vec<usize>)> {
        if !self.verts.contains_key(&new_root) {
            return Err(Error::UnknownVertex(new_root));
        }
        if self.degree(new_root) < 2 && self.edge_count() > 1 {
            return Err(Error::RootIsPendant(new_root));
        }
        // an edge flips exactly when the new root lies on its child side,
        // i.e. the edge is on the path from the old root to the new one
        let mut flipped = Vec::new();
        let mut edges = self.edges.clone();
        let mut cur = new_root;
        while cur != self.root {
            let pe = self.verts[&cur].parent_edge.expect("non-root has a parent edge");
            flipped.push(pe);
            cur = self.edge(pe).unwrap().parent;
        }
        for f in edges.iter_mut() {
            if flipped.contains(&f.id) {
                std::mem::swap(&mut f.child, &mut f.parent);
            }
        }
        flipped.sort_unstable();
        let tree = Self::assemble(new_root, edges)?;
        Ok((tree, flipped))
    }
}

/// Result of removing one boundary edge.
#[derive(Debug, Clone)]
pub struct PeelStep<R> {
    pub removed_edge: usize,
    pub attachment_vertex: usize,
    pub neumann_remainder: MetricTree<R>,
    pub dirichlet_subtrees: Vec<DirichletSubtree<R>>,
}

/// One component of the remainder split at the attachment vertex, carrying a
/// Dirichlet condition there. `flipped_edges` lists edges whose orientation
/// was reversed so that the Dirichlet vertex sits at a child endpoint.
#[derive(Debug, Clone)]
pub struct DirichletSubtree<R> {
    pub tree: MetricTree<R>,
    pub mark: BoundaryMark,
    pub flipped_edges: Vec<usize>,
}

/// Convenience constructor that orients edges automatically from the root.
pub struct TreeBuilder {
    root: usize,
    edges: Vec<(usize, usize, usize, LengthExpr)>,
}

impl TreeBuilder {
    pub fn new(root: usize) -> Self {
        TreeBuilder { root, edges: Vec::new() }
    }

    /// Adds an edge between `u` and `v`; which endpoint becomes the child is
    /// decided by the root when building.
    pub fn edge(self, id: usize, u: usize, v: usize, len: f64) -> Self {
        self.edge_expr(id, u, v, LengthExpr::Decimal(len))
    }

    pub fn edge_expr(mut self, id: usize, u: usize, v: usize, expr: LengthExpr) -> Self {
        self.edges.push((id, u, v, expr));
        self
    }

    pub fn build<R: Real>(self) -> Result<MetricTree<R>> {
        let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &(_, u, v, _) in &self.edges {
            adj.entry(u).or_default().push(v);
            adj.entry(v).or_default().push(u);
        }
        let mut depth: BTreeMap<usize, usize> = BTreeMap::new();
        depth.insert(self.root, 0);
        let mut queue = std::collections::VecDeque::from([self.root]);
        while let Some(v) = queue.pop_front() {
            for &w in adj.get(&v).into_iter().flatten() {
                if !depth.contains_key(&w) {
                    depth.insert(w, depth[&v] + 1);
                    queue.push_back(w);
                }
            }
        }
        let edges = self
            .edges
            .into_iter()
            .map(|(id, u, v, expr)| {
                let (du, dv) = (depth.get(&u), depth.get(&v));
                // unreachable vertices surface as Disconnected in assemble
                let (child, parent) = match (du, dv) {
                    (Some(a), Some(b)) if a > b => (u, v),
                    (Some(_), Some(_)) => (v, u),
                    _ => (u, v),
                };
                Edge { id, child, parent, len: rf::<R>(expr.value()), expr }
            })
            .collect();
        MetricTree::new(self.root, edges)
    }
}
