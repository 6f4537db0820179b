//! Singular cubes `Q_d → G` and enumeration of the non-degenerate ones.
//!
//! A d-cube is stored as its `2^d` labels in colexicographic vertex order:
//! position `p` holds the value on the Q_d vertex whose coordinate `k`
//! (1-based) is bit `k-1` of `p`.

use std::fmt;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{CoveringFamily, Graph, Vertex};

/// Largest cube dimension the enumerator accepts.
pub const MAX_CUBE_DIM: usize = 10;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SingularCube {
    dim: usize,
    labels: Vec<Vertex>,
}

impl fmt::Debug for SingularCube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, l) in self.labels.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn bit(self) -> usize {
        match self {
            Sign::Minus => 0,
            Sign::Plus => 1,
        }
    }
}

/// Inserts bit `eps` at position `axis` (0-based) of `a`.
#[inline]
pub(crate) fn insert_bit(a: usize, axis: usize, eps: usize) -> usize {
    let low = a & ((1 << axis) - 1);
    low | (eps << axis) | ((a >> axis) << (axis + 1))
}

impl SingularCube {
    /// Wraps labels without checking the graph-map condition. The length must
    /// be a power of two.
    pub fn from_labels(labels: Vec<Vertex>) -> Result<Self> {
        let len = labels.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::InvalidCube(format!(
                "label count {len} is not a power of two"
            )));
        }
        Ok(SingularCube {
            dim: len.trailing_zeros() as usize,
            labels,
        })
    }

    pub(crate) fn from_labels_unchecked(labels: Vec<Vertex>) -> Self {
        debug_assert!(labels.len().is_power_of_two());
        SingularCube {
            dim: labels.len().trailing_zeros() as usize,
            labels,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn labels(&self) -> &[Vertex] {
        &self.labels
    }

    pub fn into_labels(self) -> Vec<Vertex> {
        self.labels
    }

    /// Face `f_i^±` for `i` in `1..=dim`.
    pub fn face(&self, i: usize, sign: Sign) -> Result<SingularCube> {
        if i == 0 || i > self.dim {
            return Err(Error::InvalidCube(format!(
                "face index {i} outside 1..={}",
                self.dim
            )));
        }
        Ok(SingularCube::from_labels_unchecked(face_labels(
            &self.labels,
            self.dim,
            i - 1,
            sign.bit(),
        )))
    }

    pub fn is_degenerate(&self) -> bool {
        is_degenerate_labels(&self.labels, self.dim)
    }

    /// Number of distinct labels.
    pub fn image_size(&self) -> usize {
        let mut v = self.labels.clone();
        v.sort_unstable();
        v.dedup();
        v.len()
    }

    pub fn image(&self) -> Vec<Vertex> {
        let mut v = self.labels.clone();
        v.sort_unstable();
        v.dedup();
        v
    }
}

pub(crate) fn face_labels(labels: &[Vertex], dim: usize, axis: usize, eps: usize) -> Vec<Vertex> {
    (0..1usize << (dim - 1))
        .map(|a| labels[insert_bit(a, axis, eps)])
        .collect()
}

pub(crate) fn is_degenerate_labels(labels: &[Vertex], dim: usize) -> bool {
    (0..dim).any(|axis| {
        let bit = 1 << axis;
        (0..labels.len())
            .filter(|p| p & bit == 0)
            .all(|p| labels[p] == labels[p | bit])
    })
}

/// Checks the graph-map condition on every edge of Q_d.
pub fn validate_cube(labels: &[Vertex], d: usize, g: &Graph) -> Result<SingularCube> {
    if d > MAX_CUBE_DIM || labels.len() != 1 << d {
        return Err(Error::InvalidCube(format!(
            "expected {} labels for a {d}-cube, got {}",
            1usize << d.min(63),
            labels.len()
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l as usize >= g.vertex_count()) {
        return Err(Error::InvalidCube(format!("label {bad} is not a vertex")));
    }
    for p in 0..labels.len() {
        for axis in 0..d {
            let q = p | (1 << axis);
            if q != p && !g.adjacent_or_equal(labels[p], labels[q]) {
                return Err(Error::InvalidCube(format!(
                    "Q_{d} edge ({p},{q}) maps to non-adjacent vertices {} and {}",
                    labels[p], labels[q]
                )));
            }
        }
    }
    Ok(SingularCube {
        dim: d,
        labels: labels.to_vec(),
    })
}

/// Which cubes a basis keeps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Restriction {
    All,
    /// `|image| <= 2`.
    TwoPoint,
    /// Image inside the vertex set of some member.
    Subgraphs(CoveringFamily),
    /// Image inside the given vertex set.
    Subset(Vec<Vertex>),
}

impl Restriction {
    pub fn tag(&self) -> &'static str {
        match self {
            Restriction::All => "all",
            Restriction::TwoPoint => "two_point",
            Restriction::Subgraphs(_) => "subgraph_list",
            Restriction::Subset(_) => "subset",
        }
    }

    /// Hash of the tag and contents, used as a cache key.
    pub fn key(&self) -> u64 {
        let mut h = Sha256::new();
        h.update(self.tag().as_bytes());
        match self {
            Restriction::Subgraphs(family) => {
                for m in &family.members {
                    h.update([0xff]);
                    for v in &m.vertices {
                        h.update(v.to_le_bytes());
                    }
                }
            }
            Restriction::Subset(vs) => {
                for v in vs {
                    h.update(v.to_le_bytes());
                }
            }
            _ => {}
        }
        let digest = h.finalize();
        u64::from_le_bytes(digest[..8].try_into().expect("digest length"))
    }

    /// Whether a cube satisfies the restriction.
    pub fn admits(&self, labels: &[Vertex]) -> bool {
        match self {
            Restriction::All => true,
            Restriction::TwoPoint => {
                let first = labels[0];
                let other = labels.iter().find(|&&l| l != first);
                match other {
                    None => true,
                    Some(&o) => labels.iter().all(|&l| l == first || l == o),
                }
            }
            Restriction::Subgraphs(family) => family
                .members
                .iter()
                .any(|m| labels.iter().all(|l| m.vertices.binary_search(l).is_ok())),
            Restriction::Subset(vs) => labels.iter().all(|l| vs.binary_search(l).is_ok()),
        }
    }
}

/// Sorted list of non-degenerate d-cubes, stored flat.
#[derive(Clone, PartialEq, Eq)]
pub struct CubeBasis {
    dim: usize,
    flat: Vec<Vertex>,
}

impl fmt::Debug for CubeBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CubeBasis")
            .field("dim", &self.dim)
            .field("len", &self.len())
            .finish()
    }
}

impl CubeBasis {
    /// Builds a basis from flat labels that are already sorted and unique.
    pub fn from_sorted_flat(dim: usize, flat: Vec<Vertex>) -> Result<Self> {
        let basis = CubeBasis { dim, flat };
        if !basis.flat.len().is_multiple_of(basis.stride()) {
            return Err(Error::Internal(
                "flat basis length is not a multiple of 2^d".into(),
            ));
        }
        if (1..basis.len()).any(|i| basis.get(i - 1) >= basis.get(i)) {
            return Err(Error::Internal("basis is not strictly sorted".into()));
        }
        Ok(basis)
    }

    pub fn from_cubes(dim: usize, mut cubes: Vec<Vec<Vertex>>) -> Self {
        cubes.sort_unstable();
        cubes.dedup();
        CubeBasis {
            dim,
            flat: cubes.concat(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn stride(&self) -> usize {
        1 << self.dim
    }

    pub fn len(&self) -> usize {
        self.flat.len() / self.stride()
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    pub fn get(&self, i: usize) -> &[Vertex] {
        let s = self.stride();
        &self.flat[i * s..(i + 1) * s]
    }

    pub fn cube(&self, i: usize) -> SingularCube {
        SingularCube::from_labels_unchecked(self.get(i).to_vec())
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Vertex]> + '_ {
        self.flat.chunks_exact(self.stride())
    }

    pub fn index_of(&self, labels: &[Vertex]) -> Option<usize> {
        if labels.len() != self.stride() {
            return None;
        }
        let n = self.len();
        let pos = partition_point(n, |i| self.get(i) < labels);
        (pos < n && self.get(pos) == labels).then_some(pos)
    }

    pub fn flat(&self) -> &[Vertex] {
        &self.flat
    }
}

fn partition_point(n: usize, mut pred: impl FnMut(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (0, n);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumOptions {
    /// Abort once more than this many cubes have been produced.
    pub max_cubes: u64,
}

impl EnumOptions {
    /// Cap derived from a memory budget in bytes.
    pub fn with_memory_budget(bytes: u64, d: usize) -> Self {
        let per = (std::mem::size_of::<Vertex>() as u64) << d;
        EnumOptions {
            max_cubes: bytes / per.max(1),
        }
    }
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            max_cubes: u64::MAX,
        }
    }
}

/// Default memory budget for enumerated bases: 8 GiB.
pub const DEFAULT_MEMORY_BUDGET: u64 = 8 << 30;

/// All non-degenerate singular d-cubes on `g` that satisfy `restriction`,
/// in lexicographic order of their label sequences.
pub fn enumerate_cubes(
    g: &Graph,
    d: usize,
    restriction: &Restriction,
    opts: EnumOptions,
) -> Result<CubeBasis> {
    if d > MAX_CUBE_DIM {
        return Err(Error::Resource {
            what: format!("cube dimension {d}"),
            estimate: 1 << d,
        });
    }
    match restriction {
        Restriction::All => enumerate_masked(g, d, None, false, opts),
        Restriction::TwoPoint => enumerate_masked(g, d, None, true, opts),
        Restriction::Subset(vs) => {
            let mut mask = vec![false; g.vertex_count()];
            for &v in vs {
                if v as usize >= g.vertex_count() {
                    return Err(Error::domain(format!("subset vertex {v} out of range")));
                }
                mask[v as usize] = true;
            }
            enumerate_masked(g, d, Some(&mask), false, opts)
        }
        Restriction::Subgraphs(family) => {
            let mut cubes: Vec<Vec<Vertex>> = Vec::new();
            for member in &family.members {
                let mut mask = vec![false; g.vertex_count()];
                for &v in &member.vertices {
                    mask[v as usize] = true;
                }
                let part = enumerate_masked(g, d, Some(&mask), false, opts)?;
                cubes.extend(part.iter().map(<[Vertex]>::to_vec));
                if cubes.len() as u64 > opts.max_cubes {
                    return Err(Error::Resource {
                        what: format!("{d}-cube basis"),
                        estimate: cubes.len() as u64,
                    });
                }
            }
            Ok(CubeBasis::from_cubes(d, cubes))
        }
    }
}

struct Search<'a, F: FnMut(&[Vertex]) -> bool> {
    g: &'a Graph,
    d: usize,
    mask: Option<&'a [bool]>,
    two_point: bool,
    closed: &'a [Vec<Vertex>],
    labels: Vec<Vertex>,
    /// Receives each non-degenerate cube; returning `false` stops the search.
    sink: F,
    stopped: bool,
}

impl<F: FnMut(&[Vertex]) -> bool> Search<'_, F> {
    fn allowed(&self, v: Vertex) -> bool {
        self.mask.is_none_or(|m| m[v as usize])
    }

    fn run(&mut self, start: Vertex) {
        self.labels.fill(start);
        if self.d == 0 {
            self.stopped = !(self.sink)(&self.labels);
        } else {
            self.recurse(1);
        }
    }

    fn recurse(&mut self, pos: usize) {
        if pos == self.labels.len() {
            if !is_degenerate_labels(&self.labels, self.d) && !(self.sink)(&self.labels) {
                self.stopped = true;
            }
            return;
        }
        // Neighbours already assigned are those with one set bit of `pos` cleared.
        let low = pos & pos.wrapping_neg();
        let anchor = self.labels[pos ^ low];
        let first = self.labels[0];
        let second = if self.two_point {
            self.labels[..pos].iter().copied().find(|&l| l != first)
        } else {
            None
        };
        let closed = self.closed;
        for &c in &closed[anchor as usize] {
            if self.stopped {
                return;
            }
            if !self.allowed(c) {
                continue;
            }
            if let Some(s) = second {
                if c != first && c != s {
                    continue;
                }
            }
            let mut rest = pos ^ low;
            let mut ok = true;
            while rest != 0 {
                let b = rest & rest.wrapping_neg();
                rest ^= b;
                if !self.g.adjacent_or_equal(c, self.labels[pos ^ b]) {
                    ok = false;
                    break;
                }
            }
            if ok {
                self.labels[pos] = c;
                self.recurse(pos + 1);
            }
        }
    }
}

fn closed_neighborhoods(g: &Graph) -> Vec<Vec<Vertex>> {
    (0..g.vertex_count() as Vertex)
        .map(|v| g.closed_neighborhood(v))
        .collect()
}

fn enumerate_masked(
    g: &Graph,
    d: usize,
    mask: Option<&[bool]>,
    two_point: bool,
    opts: EnumOptions,
) -> Result<CubeBasis> {
    let closed = closed_neighborhoods(g);
    let counter = AtomicU64::new(0);
    let abort = AtomicBool::new(false);
    let starts: Vec<Vertex> = (0..g.vertex_count() as Vertex)
        .filter(|&v| mask.is_none_or(|m| m[v as usize]))
        .collect();
    let branch = |start: Vertex| -> Vec<Vertex> {
        let mut out = Vec::new();
        let mut s = Search {
            g,
            d,
            mask,
            two_point,
            closed: &closed,
            labels: vec![start; 1 << d],
            sink: |labels: &[Vertex]| {
                out.extend_from_slice(labels);
                let over = counter.fetch_add(1, Ordering::Relaxed) + 1 > opts.max_cubes;
                if over {
                    abort.store(true, Ordering::Relaxed);
                }
                !over && !abort.load(Ordering::Relaxed)
            },
            stopped: false,
        };
        if !abort.load(Ordering::Relaxed) {
            s.run(start);
        }
        out
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<Vec<Vertex>> = {
        use rayon::prelude::*;
        starts.par_iter().map(|&v| branch(v)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Vec<Vertex>> = starts.iter().map(|&v| branch(v)).collect();

    let total = counter.load(Ordering::Relaxed);
    if abort.load(Ordering::Relaxed) || total > opts.max_cubes {
        return Err(Error::Resource {
            what: format!("{d}-cube basis"),
            estimate: total,
        });
    }
    // Branches are produced in increasing first label and each branch is in
    // lexicographic order, so concatenation is already sorted.
    let flat = parts.concat();
    debug_assert!(CubeBasis::from_sorted_flat(d, flat.clone()).is_ok());
    Ok(CubeBasis { dim: d, flat })
}

/// Streams the cubes of [`enumerate_cubes`] to `visit` without storing them,
/// single-threaded. Under `Subgraphs` a cube is reported once, for the first
/// member containing its image, so the order is lexicographic only within a
/// member. Returning `false` from `visit` ends the walk early.
pub fn visit_cubes(
    g: &Graph,
    d: usize,
    restriction: &Restriction,
    mut visit: impl FnMut(&[Vertex]) -> bool,
) -> Result<()> {
    if d > MAX_CUBE_DIM {
        return Err(Error::Resource {
            what: format!("cube dimension {d}"),
            estimate: 1 << d,
        });
    }
    let closed = closed_neighborhoods(g);
    let n = g.vertex_count();
    let walk = |mask: Option<&[bool]>,
                two_point: bool,
                visit: &mut dyn FnMut(&[Vertex]) -> bool|
     -> bool {
        let mut s = Search {
            g,
            d,
            mask,
            two_point,
            closed: &closed,
            labels: vec![0; 1 << d],
            sink: visit,
            stopped: false,
        };
        for v in 0..n as Vertex {
            if mask.is_none_or(|m| m[v as usize]) {
                s.run(v);
                if s.stopped {
                    return false;
                }
            }
        }
        true
    };
    let vertex_mask = |vs: &[Vertex]| -> Result<Vec<bool>> {
        let mut mask = vec![false; n];
        for &v in vs {
            *mask
                .get_mut(v as usize)
                .ok_or_else(|| Error::domain(format!("vertex {v} out of range")))? = true;
        }
        Ok(mask)
    };
    match restriction {
        Restriction::All => {
            walk(None, false, &mut visit);
        }
        Restriction::TwoPoint => {
            walk(None, true, &mut visit);
        }
        Restriction::Subset(vs) => {
            let mask = vertex_mask(vs)?;
            walk(Some(&mask), false, &mut visit);
        }
        Restriction::Subgraphs(family) => {
            for (i, member) in family.members.iter().enumerate() {
                let mask = vertex_mask(&member.vertices)?;
                let earlier = &family.members[..i];
                let mut filtered = |labels: &[Vertex]| {
                    let seen = earlier
                        .iter()
                        .any(|m| labels.iter().all(|l| m.vertices.binary_search(l).is_ok()));
                    seen || visit(labels)
                };
                if !walk(Some(&mask), false, &mut filtered) {
                    break;
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube(l: &[Vertex]) -> SingularCube {
        SingularCube::from_labels(l.to_vec()).unwrap()
    }

    #[test]
    fn validate_examples() {
        let path = Graph::path(3).unwrap();
        assert!(validate_cube(&[1, 2, 2, 1, 2, 3, 3, 2], 3, &path).is_ok());
        let z5 = Graph::cycle(5).unwrap();
        assert!(validate_cube(&[1, 3], 1, &z5).is_err());
        assert!(validate_cube(&[1, 2, 2, 3], 2, &z5).is_ok());
        assert!(validate_cube(&[1, 2, 2], 2, &z5).is_err());
        assert!(validate_cube(&[1, 9], 1, &z5).is_err());
    }

    #[test]
    fn face_examples() {
        let s = cube(&[2, 3, 1, 2]);
        assert_eq!(s.face(1, Sign::Minus).unwrap(), cube(&[2, 1]));
        assert_eq!(s.face(1, Sign::Plus).unwrap(), cube(&[3, 2]));
        assert_eq!(s.face(2, Sign::Minus).unwrap(), cube(&[2, 3]));
        assert_eq!(s.face(2, Sign::Plus).unwrap(), cube(&[1, 2]));
        let t = cube(&[1, 2, 1, 2]);
        assert_eq!(
            t.face(2, Sign::Minus).unwrap(),
            t.face(2, Sign::Plus).unwrap()
        );
        let e = cube(&[1, 2]);
        assert_eq!(e.face(1, Sign::Minus).unwrap(), cube(&[1]));
        assert_eq!(e.face(1, Sign::Plus).unwrap(), cube(&[2]));
        assert!(e.face(2, Sign::Plus).is_err());
        assert!(e.face(0, Sign::Plus).is_err());
    }

    #[test]
    fn degeneracy_examples() {
        assert!(cube(&[1, 2, 1, 2]).is_degenerate());
        assert!(!cube(&[1, 2, 2, 3]).is_degenerate());
        assert!(!cube(&[4]).is_degenerate());
        assert!(cube(&[3, 3]).is_degenerate());
    }

    #[test]
    fn cubical_face_identities() {
        let g = Graph::petersen();
        let basis = enumerate_cubes(&g, 3, &Restriction::All, EnumOptions::default()).unwrap();
        for labels in basis.iter().step_by(7) {
            let s = SingularCube::from_labels(labels.to_vec()).unwrap();
            for j in 2..=3 {
                for i in 1..j {
                    for eps in [Sign::Minus, Sign::Plus] {
                        for delta in [Sign::Minus, Sign::Plus] {
                            let lhs = s.face(j, delta).unwrap().face(i, eps).unwrap();
                            let rhs = s.face(i, eps).unwrap().face(j - 1, delta).unwrap();
                            assert_eq!(lhs, rhs);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn small_counts() {
        let z5 = Graph::cycle(5).unwrap();
        let all = Restriction::All;
        assert_eq!(
            enumerate_cubes(&z5, 0, &all, EnumOptions::default())
                .unwrap()
                .len(),
            5
        );
        assert_eq!(
            enumerate_cubes(&z5, 1, &all, EnumOptions::default())
                .unwrap()
                .len(),
            10
        );
        let k1 = Graph::complete(1).unwrap();
        assert_eq!(
            enumerate_cubes(&k1, 3, &all, EnumOptions::default())
                .unwrap()
                .len(),
            0
        );
    }

    #[test]
    fn cap_is_enforced() {
        let g = Graph::petersen();
        let err =
            enumerate_cubes(&g, 2, &Restriction::All, EnumOptions { max_cubes: 10 }).unwrap_err();
        assert!(matches!(err, Error::Resource { .. }));
    }

    #[test]
    fn index_lookup() {
        let z5 = Graph::cycle(5).unwrap();
        let b = enumerate_cubes(&z5, 2, &Restriction::All, EnumOptions::default()).unwrap();
        for i in 0..b.len() {
            assert_eq!(b.index_of(b.get(i)), Some(i));
        }
        assert_eq!(b.index_of(&[0, 0, 0, 0]), None);
    }
}
