//! Finite simple graphs: parsing, generators and structural queries.
//!
//! Vertices are `u32` indices in `0..vertex_count`. Adjacency lists are kept
//! sorted, and a dense bit matrix backs the constant-time adjacency test used
//! by the cube enumerator.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type Vertex = u32;

/// Largest hypercube dimension accepted by [`Graph::hypercube`].
pub const MAX_HYPERCUBE_DIM: usize = 16;
/// Largest vertex count accepted by any constructor.
pub const MAX_VERTICES: usize = 1 << 20;

#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
    adj: Vec<Vec<Vertex>>,
    bits: Vec<u64>,
    words: usize,
    poles: Option<(Vertex, Vertex)>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Graph")
            .field("vertices", &self.n)
            .field("edges", &self.edges)
            .field("poles", &self.poles)
            .finish()
    }
}

impl Graph {
    /// Builds a graph, rejecting loops, duplicates and out-of-range endpoints.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (Vertex, Vertex)>) -> Result<Self> {
        if n > MAX_VERTICES {
            return Err(Error::Resource {
                what: "vertex count".into(),
                estimate: n as u64,
            });
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::domain(format!(
                    "edge ({u},{v}) out of range for {n} vertices"
                )));
            }
            if u == v {
                return Err(Error::domain(format!("loop at vertex {u}")));
            }
            if !set.insert((u.min(v), u.max(v))) {
                return Err(Error::domain(format!("duplicate edge ({u},{v})")));
            }
        }
        Ok(Self::from_sorted_set(n, set))
    }

    fn from_sorted_set(n: usize, set: BTreeSet<(Vertex, Vertex)>) -> Self {
        let words = n.div_ceil(64).max(1);
        let mut bits = vec![0u64; n * words];
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &set {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
            bits[u as usize * words + v as usize / 64] |= 1 << (v % 64);
            bits[v as usize * words + u as usize / 64] |= 1 << (u % 64);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Graph {
            n,
            edges: set.into_iter().collect(),
            adj,
            bits,
            words,
            poles: None,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v as usize].len()
    }

    #[inline]
    pub fn is_adjacent(&self, u: Vertex, v: Vertex) -> bool {
        self.bits[u as usize * self.words + v as usize / 64] >> (v % 64) & 1 == 1
    }

    /// The graph-map condition for a single edge of the domain.
    #[inline]
    pub fn adjacent_or_equal(&self, u: Vertex, v: Vertex) -> bool {
        u == v || self.is_adjacent(u, v)
    }

    /// Sorted closed neighbourhood `{v} ∪ N(v)`.
    pub fn closed_neighborhood(&self, v: Vertex) -> Vec<Vertex> {
        let mut out = self.adj[v as usize].clone();
        let pos = out.partition_point(|&w| w < v);
        out.insert(pos, v);
        out
    }

    /// Poles `(0̄, N̄)` recorded by [`Graph::times`].
    pub fn poles(&self) -> Option<(Vertex, Vertex)> {
        self.poles
    }

    /// Stable content hash of the vertex count and edge list.
    pub fn content_hash(&self) -> u64 {
        let mut h = Sha256::new();
        h.update((self.n as u64).to_le_bytes());
        for &(u, v) in &self.edges {
            h.update(u.to_le_bytes());
            h.update(v.to_le_bytes());
        }
        let digest = h.finalize();
        u64::from_le_bytes(digest[..8].try_into().expect("sha256 digest has 32 bytes"))
    }

    /// Serialises in the edge-list format accepted by [`parse_graph`].
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.edges.len());
        for &(u, v) in &self.edges {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }

    // ----- generators -------------------------------------------------------

    pub fn cycle(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::domain(format!(
                "cycle needs at least 3 vertices, got {n}"
            )));
        }
        Self::from_edges(n, (0..n).map(|i| (i as Vertex, ((i + 1) % n) as Vertex)))
    }

    /// The discrete d-cube Q_d. Vertex `i` is the tuple whose coordinate `k`
    /// (1-based) is bit `k-1` of `i`, so indices follow colexicographic order.
    pub fn hypercube(d: usize) -> Result<Self> {
        if d > MAX_HYPERCUBE_DIM {
            return Err(Error::Resource {
                what: format!("hypercube dimension {d}"),
                estimate: 1 << d.min(63),
            });
        }
        let n = 1usize << d;
        let edges = (0..n).flat_map(|i| {
            (0..d).filter_map(move |k| {
                let j = i ^ (1 << k);
                (i < j).then_some((i as Vertex, j as Vertex))
            })
        });
        Self::from_edges(n, edges)
    }

    /// Path with vertices `0..=len`.
    pub fn path(len: usize) -> Result<Self> {
        Self::from_edges(len + 1, (0..len).map(|i| (i as Vertex, i as Vertex + 1)))
    }

    pub fn complete(n: usize) -> Result<Self> {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i as Vertex, j as Vertex)));
        Self::from_edges(n, edges)
    }

    /// Hub vertex 0 joined to every vertex of the rim cycle `1..=rim`.
    pub fn wheel(rim: usize) -> Result<Self> {
        if rim < 3 {
            return Err(Error::domain(format!(
                "wheel rim needs at least 3 vertices, got {rim}"
            )));
        }
        let mut edges = Vec::new();
        for i in 0..rim {
            edges.push((0, 1 + i as Vertex));
            edges.push((1 + i as Vertex, 1 + ((i + 1) % rim) as Vertex));
        }
        Self::from_edges(rim + 1, edges)
    }

    /// K_{2,2,2}; antipodal pairs are (0,1), (2,3), (4,5).
    pub fn octahedron() -> Self {
        let edges = (0..6u32)
            .flat_map(|i| (i + 1..6).map(move |j| (i, j)))
            .filter(|&(i, j)| i / 2 != j / 2);
        Self::from_edges(6, edges).expect("octahedron is simple")
    }

    /// Outer 5-cycle `0..5`, inner pentagram `5..10`, spokes `i ~ i+5`.
    pub fn petersen() -> Self {
        let mut edges = Vec::new();
        for i in 0..5u32 {
            edges.push((i, (i + 1) % 5));
            edges.push((i, i + 5));
            edges.push((i + 5, (i + 2) % 5 + 5));
        }
        Self::from_edges(10, edges).expect("petersen is simple")
    }

    /// Cartesian product; vertex `(g, h)` has index `g * |H| + h`.
    pub fn box_product(g: &Graph, h: &Graph) -> Result<Self> {
        if g.n == 0 || h.n == 0 {
            return Err(Error::domain("box product of an empty graph"));
        }
        let hn = h.n as Vertex;
        let mut edges = Vec::new();
        for a in 0..g.n as Vertex {
            for &(u, v) in &h.edges {
                edges.push((a * hn + u, a * hn + v));
            }
        }
        for &(a, b) in &g.edges {
            for x in 0..hn {
                edges.push((a * hn + x, b * hn + x));
            }
        }
        Self::from_edges(g.n * h.n, edges)
    }

    /// `(G □ I_N) / ~` with the end layers collapsed to the poles 0̄ (index 0)
    /// and N̄ (last index). Layer `k` in `1..N` occupies indices
    /// `1 + (k-1)|G| ..`.
    pub fn times(g: &Graph, layers: usize) -> Result<Self> {
        if layers < 2 {
            return Err(Error::domain(format!(
                "times construction needs N >= 2, got {layers}"
            )));
        }
        if !g.is_connected() {
            return Err(Error::domain("times construction needs a connected graph"));
        }
        let gn = g.n as Vertex;
        let inner = layers - 1;
        let n = g.n * inner + 2;
        let top = (n - 1) as Vertex;
        let at = |layer: usize, v: Vertex| 1 + (layer as Vertex - 1) * gn + v;
        let mut edges = Vec::new();
        for v in 0..gn {
            edges.push((0, at(1, v)));
            edges.push((at(inner, v), top));
            for layer in 1..inner {
                edges.push((at(layer, v), at(layer + 1, v)));
            }
        }
        for layer in 1..=inner {
            for &(u, v) in &g.edges {
                edges.push((at(layer, u), at(layer, v)));
            }
        }
        let mut out = Self::from_edges(n, edges)?;
        out.poles = Some((0, top));
        Ok(out)
    }

    /// Random connected graph: a random spanning tree plus each remaining pair
    /// with probability `p`.
    pub fn random_connected<R: Rng>(n: usize, p: f64, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("random graph needs at least one vertex"));
        }
        let mut edges = BTreeSet::new();
        for v in 1..n {
            let u = rng.gen_range(0..v);
            edges.insert((u as Vertex, v as Vertex));
        }
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p) {
                    edges.insert((u as Vertex, v as Vertex));
                }
            }
        }
        Ok(Self::from_sorted_set(n, edges))
    }

    /// Induced subgraph on `keep` (sorted, deduplicated); vertices are
    /// renumbered in increasing order.
    pub fn induced(&self, keep: &[Vertex]) -> Self {
        let mut map = vec![u32::MAX; self.n];
        for (i, &v) in keep.iter().enumerate() {
            map[v as usize] = i as Vertex;
        }
        let set = self
            .edges
            .iter()
            .filter(|(u, v)| map[*u as usize] != u32::MAX && map[*v as usize] != u32::MAX)
            .map(|&(u, v)| (map[u as usize], map[v as usize]))
            .collect();
        Self::from_sorted_set(keep.len(), set)
    }

    // ----- structure --------------------------------------------------------

    pub fn bfs_distances(&self, source: Vertex) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        let mut queue = VecDeque::new();
        dist[source as usize] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u as usize].unwrap();
            for &w in self.neighbors(u) {
                if dist[w as usize].is_none() {
                    dist[w as usize] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn distance(&self, u: Vertex, v: Vertex) -> Option<usize> {
        self.bfs_distances(u)[v as usize]
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.bfs_distances(0).iter().all(Option::is_some)
    }

    pub fn has_short_cycles(&self) -> ShortCycles {
        let has_triangle = self.edges.iter().any(|&(u, v)| {
            self.neighbors(u)
                .iter()
                .any(|&w| w != v && self.is_adjacent(w, v))
        });
        // A 4-cycle exists iff two distinct vertices share two neighbours.
        let mut has_square = false;
        'outer: for u in 0..self.n as Vertex {
            let mut seen = vec![false; self.n];
            for &a in self.neighbors(u) {
                for &w in self.neighbors(a) {
                    if w == u {
                        continue;
                    }
                    if seen[w as usize] {
                        has_square = true;
                        break 'outer;
                    }
                    seen[w as usize] = true;
                }
            }
        }
        ShortCycles {
            has_triangle,
            has_square,
        }
    }

    /// Triangles `[a, b, c]` with `a < b < c`.
    pub fn triangles(&self) -> Vec<[Vertex; 3]> {
        let mut out = Vec::new();
        for &(a, b) in &self.edges {
            for &c in self.neighbors(b) {
                if c > b && self.is_adjacent(a, c) {
                    out.push([a, b, c]);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Induced (chordless) 4-cycles as `[v0, v1, v2, v3]` in cyclic order, with
    /// `v0` the least vertex and `v1 < v3`.
    pub fn chordless_squares(&self) -> Vec<[Vertex; 4]> {
        let mut out = Vec::new();
        for u in 0..self.n as Vertex {
            for w in u + 1..self.n as Vertex {
                if self.is_adjacent(u, w) {
                    continue;
                }
                let common: Vec<Vertex> = self
                    .neighbors(u)
                    .iter()
                    .copied()
                    .filter(|&x| x > u && self.is_adjacent(x, w))
                    .collect();
                for (i, &a) in common.iter().enumerate() {
                    for &b in &common[i + 1..] {
                        if !self.is_adjacent(a, b) {
                            out.push([u, a, w, b]);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Edges, triangles and chordless 4-cycles.
    pub fn covering_by_short_cycles(&self) -> CoveringFamily {
        let mut members: Vec<CoverMember> = self
            .edges
            .iter()
            .map(|&(u, v)| CoverMember::new(MemberKind::Edge, vec![u, v]))
            .collect();
        members.extend(
            self.triangles()
                .into_iter()
                .map(|t| CoverMember::new(MemberKind::Triangle, t.to_vec())),
        );
        members.extend(
            self.chordless_squares()
                .into_iter()
                .map(|q| CoverMember::new(MemberKind::Quad, q.to_vec())),
        );
        CoveringFamily { members }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShortCycles {
    pub has_triangle: bool,
    pub has_square: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MemberKind {
    Edge,
    Triangle,
    Quad,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverMember {
    pub kind: MemberKind,
    /// Vertices in cyclic order (for an edge, its two endpoints).
    pub cycle: Vec<Vertex>,
    /// Same vertices, sorted.
    pub vertices: Vec<Vertex>,
    /// Edges of the induced subgraph, `(u, v)` with `u < v`.
    pub edges: Vec<(Vertex, Vertex)>,
}

impl CoverMember {
    fn new(kind: MemberKind, cycle: Vec<Vertex>) -> Self {
        let mut vertices = cycle.clone();
        vertices.sort_unstable();
        let k = cycle.len();
        let mut edges: Vec<_> = if k == 2 {
            vec![(vertices[0], vertices[1])]
        } else {
            (0..k)
                .map(|i| {
                    (
                        cycle[i].min(cycle[(i + 1) % k]),
                        cycle[i].max(cycle[(i + 1) % k]),
                    )
                })
                .collect()
        };
        edges.sort_unstable();
        CoverMember {
            kind,
            cycle,
            vertices,
            edges,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoveringFamily {
    pub members: Vec<CoverMember>,
}

impl CoveringFamily {
    pub fn count(&self, kind: MemberKind) -> usize {
        self.members.iter().filter(|m| m.kind == kind).count()
    }
}

/// Parses the edge-list format: a header line `n m` followed by `m` lines `u v`.
/// Blank lines and lines starting with `#` are ignored.
pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "missing header".into(),
    })?;
    let [n, m] = parse_pair(hline, header)?;
    if n > MAX_VERTICES {
        return Err(Error::Resource {
            what: "vertex count".into(),
            estimate: n as u64,
        });
    }
    let mut set = BTreeSet::new();
    for (line, body) in lines.by_ref() {
        let [u, v] = parse_pair(line, body)?;
        let err = |message: String| Error::Parse { line, message };
        if u >= n || v >= n {
            return Err(err(format!("vertex index out of range 0..{n}")));
        }
        if u == v {
            return Err(err(format!("loop at vertex {u}")));
        }
        if !set.insert((u.min(v) as Vertex, u.max(v) as Vertex)) {
            return Err(err(format!("duplicate edge {u} {v}")));
        }
    }
    if set.len() != m {
        return Err(Error::Parse {
            line: 1,
            message: format!("header declares {m} edges, found {}", set.len()),
        });
    }
    Ok(Graph::from_sorted_set(n, set))
}

fn parse_pair(line: usize, body: &str) -> Result<[usize; 2]> {
    let fields: Vec<&str> = body.split_whitespace().collect();
    let err = |message: String| Error::Parse { line, message };
    if fields.len() != 2 {
        return Err(err(format!("expected two integers, got {:?}", body)));
    }
    let a = fields[0]
        .parse()
        .map_err(|_| err(format!("not an integer: {}", fields[0])))?;
    let b = fields[1]
        .parse()
        .map_err(|_| err(format!("not an integer: {}", fields[1])))?;
    Ok([a, b])
}

/// Builds a graph from a generator token such as `cycle:5`, `hypercube:3`,
/// `octahedron`, `petersen`, `path:4`, `complete:4`, `wheel:5` or
/// `times:cycle:5:4`.
pub fn from_token(token: &str) -> Result<Graph> {
    let num = |s: &str| -> Result<usize> {
        s.parse()
            .map_err(|_| Error::domain(format!("bad number {s:?} in generator {token:?}")))
    };
    if let Some(rest) = token.strip_prefix("times:") {
        let (inner, n) = rest
            .rsplit_once(':')
            .ok_or_else(|| Error::domain(format!("expected times:<graph>:<N>, got {token:?}")))?;
        return Graph::times(&from_token(inner)?, num(n)?);
    }
    let (name, arg) = token.split_once(':').unwrap_or((token, ""));
    match (name, arg) {
        ("octahedron", "") => Ok(Graph::octahedron()),
        ("petersen", "") => Ok(Graph::petersen()),
        ("cycle", a) => Graph::cycle(num(a)?),
        ("hypercube", a) => Graph::hypercube(num(a)?),
        ("path", a) => Graph::path(num(a)?),
        ("complete", a) => Graph::complete(num(a)?),
        ("wheel", a) => Graph::wheel(num(a)?),
        _ => Err(Error::domain(format!("unknown generator {token:?}"))),
    }
}
