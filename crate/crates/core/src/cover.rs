//! The universal covering tree of a graph, as non-backtracking paths from a
//! fixed basepoint, with its metric realisation and cube lifting.
//!
//! Points of the metric tree are either cover vertices or interior points of
//! a cover edge `(parent, child)`, recorded by the child path and the exact
//! rational distance from the parent.

use std::collections::VecDeque;
use std::fmt;

use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::cube::SingularCube;
use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};

pub type Rational = Ratio<i64>;

/// Basepoint of the cover used by [`lift_cube`].
pub const ROOT_BASEPOINT: Vertex = 0;

/// A vertex of the universal cover: a non-backtracking path `(v₀, …, v_k)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoverVertex(Vec<Vertex>);

impl fmt::Debug for CoverVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "⟩")
    }
}

impl CoverVertex {
    pub fn root(basepoint: Vertex) -> Self {
        CoverVertex(vec![basepoint])
    }

    /// Validates a path: consecutive vertices adjacent, no immediate reversal.
    pub fn new(path: Vec<Vertex>, g: &Graph) -> Result<Self> {
        if path.is_empty() {
            return Err(Error::domain("empty cover path"));
        }
        if let Some(&v) = path.iter().find(|&&v| v as usize >= g.vertex_count()) {
            return Err(Error::domain(format!("vertex {v} out of range")));
        }
        for w in path.windows(2) {
            if !g.is_adjacent(w[0], w[1]) {
                return Err(Error::domain(format!(
                    "{} and {} are not adjacent",
                    w[0], w[1]
                )));
            }
        }
        if path.windows(3).any(|w| w[0] == w[2]) {
            return Err(Error::domain("path backtracks"));
        }
        Ok(CoverVertex(path))
    }

    pub fn path(&self) -> &[Vertex] {
        &self.0
    }

    pub fn basepoint(&self) -> Vertex {
        self.0[0]
    }

    /// The covering map: last entry of the path.
    pub fn project(&self) -> Vertex {
        *self.0.last().expect("nonempty path")
    }

    pub fn depth(&self) -> usize {
        self.0.len() - 1
    }

    pub fn parent(&self) -> Option<CoverVertex> {
        (self.0.len() > 1).then(|| CoverVertex(self.0[..self.0.len() - 1].to_vec()))
    }

    /// Extends by `v`; the caller guarantees adjacency and no reversal.
    fn child_unchecked(&self, v: Vertex) -> CoverVertex {
        let mut p = self.0.clone();
        p.push(v);
        CoverVertex(p)
    }

    pub fn child(&self, v: Vertex, g: &Graph) -> Result<CoverVertex> {
        let mut p = self.0.clone();
        p.push(v);
        CoverVertex::new(p, g)
    }

    /// Adjacent in the cover: one is the parent of the other.
    pub fn is_adjacent(&self, other: &CoverVertex) -> bool {
        let (a, b) = (&self.0, &other.0);
        (a.len() + 1 == b.len() && b.starts_with(a)) || (b.len() + 1 == a.len() && a.starts_with(b))
    }
}

/// A point of the metric universal cover.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum TreePoint {
    Vertex(CoverVertex),
    /// Interior of the edge from `child.parent()` to `child`, at distance
    /// `offset ∈ (0,1)` from the parent.
    Edge {
        child: CoverVertex,
        offset: Rational,
    },
}

impl fmt::Debug for TreePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreePoint::Vertex(v) => write!(f, "{v:?}"),
            TreePoint::Edge { child, offset } => write!(f, "{child:?}-{offset}"),
        }
    }
}

impl From<CoverVertex> for TreePoint {
    fn from(v: CoverVertex) -> Self {
        TreePoint::Vertex(v)
    }
}

impl TreePoint {
    /// Point on the edge ending at `child`; offsets 0 and 1 give the endpoints.
    pub fn on_edge(child: CoverVertex, offset: Rational) -> Result<TreePoint> {
        if offset < Rational::zero() || offset > Rational::one() {
            return Err(Error::domain(format!("offset {offset} outside [0,1]")));
        }
        if offset.is_zero() {
            return child
                .parent()
                .map(TreePoint::Vertex)
                .ok_or_else(|| Error::domain("root has no parent edge"));
        }
        if offset.is_one() {
            return Ok(TreePoint::Vertex(child));
        }
        if child.parent().is_none() {
            return Err(Error::domain("root has no parent edge"));
        }
        Ok(TreePoint::Edge { child, offset })
    }

    /// The deepest cover vertex whose root path contains this point.
    fn carrier(&self) -> &CoverVertex {
        match self {
            TreePoint::Vertex(v) => v,
            TreePoint::Edge { child, .. } => child,
        }
    }

    pub fn depth(&self) -> Rational {
        match self {
            TreePoint::Vertex(v) => Rational::from_integer(v.depth() as i64),
            TreePoint::Edge { child, offset } => {
                Rational::from_integer(child.depth() as i64 - 1) + offset
            }
        }
    }

    pub fn as_vertex(&self) -> Option<&CoverVertex> {
        match self {
            TreePoint::Vertex(v) => Some(v),
            TreePoint::Edge { .. } => None,
        }
    }

    /// The point at depth `t ≤ depth(self)` on the path from the root.
    fn ancestor_at(&self, t: Rational) -> TreePoint {
        debug_assert!(t >= Rational::zero() && t <= self.depth());
        let path = self.carrier().path();
        let k = t.to_integer() as usize;
        let frac = t - Rational::from_integer(k as i64);
        if frac.is_zero() {
            TreePoint::Vertex(CoverVertex(path[..k + 1].to_vec()))
        } else {
            TreePoint::Edge {
                child: CoverVertex(path[..k + 2].to_vec()),
                offset: frac,
            }
        }
    }
}

fn meet_depth(x: &TreePoint, y: &TreePoint) -> Rational {
    let (p, q) = (x.carrier().path(), y.carrier().path());
    let lcp = p.iter().zip(q).take_while(|(a, b)| a == b).count();
    debug_assert!(lcp > 0, "points of different covers");
    let common = Rational::from_integer(lcp as i64 - 1);
    x.depth().min(y.depth()).min(common)
}

/// Length of the tree geodesic between two points.
pub fn tree_distance(x: &TreePoint, y: &TreePoint) -> Rational {
    let m = meet_depth(x, y);
    x.depth() + y.depth() - m * 2
}

/// The point `p` on the geodesic from `x` to `y` with `d(x,p) = α·d(x,y)`.
pub fn convex_combination(x: &TreePoint, y: &TreePoint, alpha: Rational) -> Result<TreePoint> {
    if alpha < Rational::zero() || alpha > Rational::one() {
        return Err(Error::domain(format!("weight {alpha} outside [0,1]")));
    }
    let m = meet_depth(x, y);
    let up = x.depth() - m;
    let t = alpha * (up + y.depth() - m);
    Ok(if t <= up {
        x.ancestor_at(x.depth() - t)
    } else {
        y.ancestor_at(m + (t - up))
    })
}

/// Interior edge points go to the endpoint nearer the root.
pub fn round_toward_root(x: &TreePoint) -> CoverVertex {
    match x {
        TreePoint::Vertex(v) => v.clone(),
        TreePoint::Edge { child, .. } => child.parent().expect("edge points have a parent"),
    }
}

pub fn project(x: &CoverVertex) -> Vertex {
    x.project()
}

/// A lift `σ̃ : Q_d → U(G)` of a singular cube.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedCube {
    dim: usize,
    labels: Vec<CoverVertex>,
    /// Set when no anchor path of the requested depth exists.
    shallow: bool,
}

impl LiftedCube {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[CoverVertex] {
        &self.labels
    }

    pub fn anchor(&self) -> &CoverVertex {
        &self.labels[0]
    }

    pub fn is_shallow(&self) -> bool {
        self.shallow
    }

    pub fn project(&self) -> Vec<Vertex> {
        self.labels.iter().map(CoverVertex::project).collect()
    }
}

/// Lexicographically least non-backtracking walk from `root` to `target`
/// whose length lies in `[min_len, min_len + |V|]`, a walk being smaller than
/// its extensions. Falls back to the longest walk of length at most the
/// window's end when none is long enough; the flag reports the fallback.
pub fn anchor_path(
    g: &Graph,
    root: Vertex,
    target: Vertex,
    min_len: usize,
) -> Result<(CoverVertex, bool)> {
    let n = g.vertex_count();
    if root as usize >= n || target as usize >= n {
        return Err(Error::domain("anchor endpoint out of range"));
    }
    if g.distance(root, target).is_none() {
        return Err(Error::domain(format!(
            "vertex {target} is not reachable from {root}"
        )));
    }
    let max_len = min_len + n;
    // Directed edge states u→v, indexed through the sorted adjacency lists.
    let mut offsets = vec![0usize; n + 1];
    for v in 0..n {
        offsets[v + 1] = offsets[v] + g.degree(v as Vertex);
    }
    let state = |u: Vertex, v: Vertex| -> usize {
        offsets[u as usize] + g.neighbors(u).binary_search(&v).expect("adjacent")
    };
    let states = offsets[n];
    // ok[s][e]: from state e (standing at its head) the target is reachable
    // with exactly s more non-backtracking steps.
    let mut ok = vec![vec![false; states]; max_len + 1];
    for u in 0..n as Vertex {
        for &v in g.neighbors(u) {
            ok[0][state(u, v)] = v == target;
        }
    }
    for s in 1..=max_len {
        for u in 0..n as Vertex {
            for &v in g.neighbors(u) {
                let e = state(u, v);
                ok[s][e] = g
                    .neighbors(v)
                    .iter()
                    .any(|&w| w != u && ok[s - 1][state(v, w)]);
            }
        }
    }
    // Completion from state e after `taken` steps lands in [lo, hi].
    let feasible = |e: usize, taken: usize, lo: usize, hi: usize| -> bool {
        (lo.saturating_sub(taken)..=hi.saturating_sub(taken)).any(|s| taken <= hi && ok[s][e])
    };
    let greedy = |lo: usize, hi: usize| -> Option<Vec<Vertex>> {
        if lo == 0 && root == target {
            return Some(vec![root]);
        }
        let mut path = vec![root];
        let first = g
            .neighbors(root)
            .iter()
            .copied()
            .find(|&v| feasible(state(root, v), 1, lo, hi))?;
        path.push(first);
        loop {
            let len = path.len() - 1;
            let (u, v) = (path[len - 1], path[len]);
            if v == target && len >= lo {
                return Some(path);
            }
            let next = g
                .neighbors(v)
                .iter()
                .copied()
                .find(|&w| w != u && feasible(state(v, w), len + 1, lo, hi))?;
            path.push(next);
        }
    };
    if let Some(p) = greedy(min_len, max_len) {
        return Ok((CoverVertex(p), false));
    }
    // Shallow graphs (trees and the like): take the longest walk available.
    for len in (0..min_len).rev() {
        if let Some(p) = greedy(len, len) {
            return Ok((CoverVertex(p), true));
        }
    }
    Err(Error::Internal("no walk to a reachable vertex".into()))
}

/// Lifts `σ` to the universal cover rooted at [`ROOT_BASEPOINT`], placing the
/// image of the origin at depth at least `anchor_depth`.
pub fn lift_cube(sigma: &SingularCube, g: &Graph, anchor_depth: usize) -> Result<LiftedCube> {
    if !g.is_connected() {
        return Err(Error::domain("lifting needs a connected graph"));
    }
    let labels = sigma.labels();
    if let Some(&v) = labels.iter().find(|&&v| v as usize >= g.vertex_count()) {
        return Err(Error::InvalidCube(format!("label {v} is not a vertex")));
    }
    let (anchor, shallow) = anchor_path(g, ROOT_BASEPOINT, labels[0], anchor_depth)?;
    lift_from(sigma, g, anchor, shallow)
}

/// Lifts `σ` with the origin sent to a given cover vertex.
pub fn lift_with_anchor(
    sigma: &SingularCube,
    g: &Graph,
    anchor: CoverVertex,
) -> Result<LiftedCube> {
    if anchor.project() != sigma.labels()[0] {
        return Err(Error::domain(
            "anchor does not project to the image of the origin",
        ));
    }
    lift_from(sigma, g, anchor, false)
}

fn lift_from(
    sigma: &SingularCube,
    g: &Graph,
    anchor: CoverVertex,
    shallow: bool,
) -> Result<LiftedCube> {
    let d = sigma.dim();
    let labels = sigma.labels();
    let mut lifted: Vec<Option<CoverVertex>> = vec![None; labels.len()];
    lifted[0] = Some(anchor);
    let mut queue = VecDeque::from([0usize]);
    while let Some(p) = queue.pop_front() {
        let here = lifted[p].clone().expect("visited");
        for axis in 0..d {
            let q = p ^ (1 << axis);
            if lifted[q].is_some() {
                continue;
            }
            let t = labels[q];
            let next = if t == labels[p] {
                here.clone()
            } else if !g.is_adjacent(labels[p], t) {
                return Err(Error::InvalidCube(format!(
                    "Q_{d} edge ({},{}) maps to non-adjacent vertices",
                    p.min(q),
                    p.max(q)
                )));
            } else {
                match here.parent() {
                    Some(par) if par.project() == t => par,
                    _ => here.child_unchecked(t),
                }
            };
            lifted[q] = Some(next);
            queue.push_back(q);
        }
    }
    let lifted: Vec<CoverVertex> = lifted
        .into_iter()
        .map(|x| x.expect("Q_d is connected"))
        .collect();
    for p in 0..lifted.len() {
        for axis in 0..d {
            let q = p | (1 << axis);
            if q == p {
                continue;
            }
            let consistent = if labels[p] == labels[q] {
                lifted[p] == lifted[q]
            } else {
                lifted[p].is_adjacent(&lifted[q])
            };
            if !consistent {
                return Err(Error::LiftObstruction { cycle: (p, q) });
            }
        }
    }
    Ok(LiftedCube {
        dim: d,
        labels: lifted,
        shallow,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn cv(p: &[Vertex]) -> CoverVertex {
        CoverVertex(p.to_vec())
    }

    #[test]
    fn distances() {
        let root: TreePoint = cv(&[0]).into();
        assert_eq!(tree_distance(&root, &root), r(0, 1));
        assert_eq!(tree_distance(&root, &cv(&[0, 1, 2]).into()), r(2, 1));
        let a = TreePoint::on_edge(cv(&[0, 1]), r(1, 2)).unwrap();
        let b = TreePoint::on_edge(cv(&[0, 4]), r(1, 2)).unwrap();
        assert_eq!(tree_distance(&a, &b), r(1, 1));
        let c = TreePoint::on_edge(cv(&[0, 1]), r(1, 5)).unwrap();
        assert_eq!(tree_distance(&a, &c), r(3, 10));
    }

    #[test]
    fn combinations() {
        let x: TreePoint = cv(&[0, 1, 2]).into();
        let y: TreePoint = cv(&[0, 4]).into();
        assert_eq!(convex_combination(&x, &y, r(0, 1)).unwrap(), x);
        assert_eq!(convex_combination(&x, &y, r(1, 1)).unwrap(), y);
        let mid = convex_combination(&x, &y, r(1, 2)).unwrap();
        assert_eq!(tree_distance(&x, &mid), r(3, 2));
        assert_eq!(mid, TreePoint::on_edge(cv(&[0, 1]), r(1, 2)).unwrap());
        let e: TreePoint = cv(&[0, 1]).into();
        let third = convex_combination(&cv(&[0]).into(), &e, r(1, 3)).unwrap();
        assert_eq!(third, TreePoint::on_edge(cv(&[0, 1]), r(1, 3)).unwrap());
    }

    #[test]
    fn rounding() {
        let v: TreePoint = cv(&[0, 1]).into();
        assert_eq!(round_toward_root(&v), cv(&[0, 1]));
        let p = TreePoint::on_edge(cv(&[0, 1, 2]), r(9, 10)).unwrap();
        assert_eq!(round_toward_root(&p), cv(&[0, 1]));
    }

    #[test]
    fn anchors_on_cycles_run_forward() {
        let z5 = Graph::cycle(5).unwrap();
        let (a, shallow) = anchor_path(&z5, 0, 3, 4).unwrap();
        assert!(!shallow);
        assert_eq!(a.path(), &[0, 1, 2, 3, 4, 0, 1, 2, 3]);
        let (b, _) = anchor_path(&z5, 0, 4, 4).unwrap();
        assert_eq!(b.path(), &[0, 1, 2, 3, 4]);
    }

    #[test]
    fn anchors_on_trees_are_shallow() {
        let p = Graph::path(4).unwrap();
        let (a, shallow) = anchor_path(&p, 0, 2, 5).unwrap();
        assert!(shallow);
        assert_eq!(a.path(), &[0, 1, 2]);
    }

    #[test]
    fn lifts_on_the_pentagon() {
        let z5 = Graph::cycle(5).unwrap();
        for labels in [[1, 2, 2, 3], [4, 0, 0, 1]] {
            let s = SingularCube::from_labels(labels.to_vec()).unwrap();
            let l = lift_cube(&s, &z5, 4).unwrap();
            assert_eq!(l.project(), labels.to_vec());
            let t = l.labels()[0].depth();
            let depths: Vec<usize> = l.labels().iter().map(CoverVertex::depth).collect();
            assert_eq!(depths, vec![t, t + 1, t + 1, t + 2]);
        }
    }

    #[test]
    fn triangle_obstruction() {
        let k3 = Graph::cycle(3).unwrap();
        let wrap = SingularCube::from_labels(vec![0, 1, 0, 2]).unwrap();
        assert!(matches!(
            lift_cube(&wrap, &k3, 4),
            Err(Error::LiftObstruction { .. })
        ));
    }
}
