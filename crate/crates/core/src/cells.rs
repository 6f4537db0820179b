//! The 2-complex obtained by filling every triangle and chordless square of
//! a graph, its cellular homology, and comparisons against the cubical
//! homology of the covering subcomplex.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::cube::{visit_cubes, Restriction};
use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};
use crate::homology::{homology_of, AssembleOptions, HomologyResult, Ring};
use crate::linalg::dense_snf;

/// A 2-dimensional cell complex: vertices, edges oriented from the smaller
/// to the larger endpoint, and 2-cells given by signed boundary words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellComplex2 {
    pub vertices: usize,
    pub edges: Vec<(Vertex, Vertex)>,
    /// Each word lists `(edge index, ±1)` along a closed walk.
    pub two_cells: Vec<Vec<(usize, i8)>>,
}

impl CellComplex2 {
    /// Vertex sequence traced by a boundary word.
    pub fn boundary_walk(&self, cell: usize) -> Vec<Vertex> {
        self.two_cells[cell]
            .iter()
            .map(|&(e, s)| {
                let (t, h) = self.edges[e];
                if s > 0 {
                    t
                } else {
                    h
                }
            })
            .collect()
    }

    /// `V − E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices as i64 - self.edges.len() as i64 + self.two_cells.len() as i64
    }

    fn boundary_dense(&self, d: usize) -> Vec<Vec<BigInt>> {
        match d {
            1 => {
                let mut m = vec![vec![BigInt::zero(); self.edges.len()]; self.vertices];
                for (j, &(t, h)) in self.edges.iter().enumerate() {
                    m[h as usize][j] += 1;
                    m[t as usize][j] -= 1;
                }
                m
            }
            2 => {
                let mut m = vec![vec![BigInt::zero(); self.two_cells.len()]; self.edges.len()];
                for (j, word) in self.two_cells.iter().enumerate() {
                    for &(e, s) in word {
                        m[e][j] += s as i64;
                    }
                }
                m
            }
            _ => Vec::new(),
        }
    }

    fn cells(&self, d: usize) -> usize {
        match d {
            0 => self.vertices,
            1 => self.edges.len(),
            2 => self.two_cells.len(),
            _ => 0,
        }
    }
}

/// Rotates a cycle to start at its least vertex, heading to the smaller neighbour.
fn canonical_cycle(cycle: &[Vertex]) -> Vec<Vertex> {
    let k = cycle.len();
    let start = (0..k).min_by_key(|&i| cycle[i]).expect("nonempty cycle");
    let fwd: Vec<Vertex> = (0..k).map(|i| cycle[(start + i) % k]).collect();
    let bwd: Vec<Vertex> = (0..k).map(|i| cycle[(start + k - i) % k]).collect();
    if fwd[1] <= bwd[1] {
        fwd
    } else {
        bwd
    }
}

/// Fills every 3-cycle and every chordless 4-cycle with a 2-cell.
pub fn build_filled_complex(g: &Graph) -> CellComplex2 {
    let edges = g.edges().to_vec();
    let edge_index = |a: Vertex, b: Vertex| -> (usize, i8) {
        let key = (a.min(b), a.max(b));
        let i = edges
            .binary_search(&key)
            .expect("cycle edges belong to the graph");
        (i, if a < b { 1 } else { -1 })
    };
    let mut cycles: Vec<Vec<Vertex>> = g.triangles().iter().map(|t| canonical_cycle(t)).collect();
    cycles.extend(g.chordless_squares().iter().map(|q| canonical_cycle(q)));
    let two_cells = cycles
        .iter()
        .map(|c| {
            (0..c.len())
                .map(|i| edge_index(c[i], c[(i + 1) % c.len()]))
                .collect()
        })
        .collect();
    CellComplex2 {
        vertices: g.vertex_count(),
        edges,
        two_cells,
    }
}

fn invariants_to_parts(inv: &[BigInt]) -> Result<(usize, Vec<u64>)> {
    let torsion = inv
        .iter()
        .filter(|x| !x.is_one())
        .map(|x| {
            x.to_u64()
                .ok_or_else(|| Error::Internal(format!("torsion coefficient {x} exceeds u64")))
        })
        .collect::<Result<_>>()?;
    Ok((inv.len(), torsion))
}

/// Cellular homology in degree `d ≤ 2`.
pub fn cellular_homology(x: &CellComplex2, d: usize, ring: Ring) -> Result<HomologyResult> {
    if d > 2 {
        return Err(Error::OutOfRange {
            requested: d,
            assembled: 2,
        });
    }
    let start = std::time::Instant::now();
    let rank_and_torsion = |k: usize| -> Result<(usize, Vec<u64>)> {
        if k == 0 || k > 2 {
            return Ok((0, Vec::new()));
        }
        let m = x.boundary_dense(k);
        match ring {
            Ring::Integers | Ring::Rationals => {
                let (rank, torsion) = invariants_to_parts(&dense_snf(m))?;
                Ok((
                    rank,
                    if ring == Ring::Integers {
                        torsion
                    } else {
                        Vec::new()
                    },
                ))
            }
            Ring::PrimeField(p) => Ok((rank_mod_p_dense(m, p), Vec::new())),
        }
    };
    let (rank_d, _) = rank_and_torsion(d)?;
    let (rank_up, torsion) = rank_and_torsion(d + 1)?;
    Ok(HomologyResult {
        graph: String::new(),
        restriction: "cellular".into(),
        dim: d,
        ring: ring.to_string(),
        betti: x.cells(d) - rank_d - rank_up,
        torsion,
        basis_sizes: (d.saturating_sub(1)..=d + 1).map(|k| x.cells(k)).collect(),
        ranks: vec![rank_d, rank_up],
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

/// Rank over GF(p) by plain row reduction; the cellular matrices are small.
#[allow(clippy::needless_range_loop)]
fn rank_mod_p_dense(m: Vec<Vec<BigInt>>, p: u32) -> usize {
    let p = p as i64;
    let pb = BigInt::from(p);
    let mut a: Vec<Vec<i64>> = m
        .iter()
        .map(|row| {
            row.iter()
                .map(|x| ((x % &pb + &pb) % &pb).to_i64().expect("reduced"))
                .collect()
        })
        .collect();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(r) = (rank..a.len()).find(|&r| a[r][c] != 0) else {
            continue;
        };
        a.swap(rank, r);
        let inv = mod_inverse(a[rank][c], p);
        for j in 0..cols {
            a[rank][j] = a[rank][j] * inv % p;
        }
        for i in 0..a.len() {
            if i != rank && a[i][c] != 0 {
                let f = a[i][c];
                for j in 0..cols {
                    a[i][j] = (a[i][j] - f * a[rank][j]).rem_euclid(p);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn mod_inverse(a: i64, p: i64) -> i64 {
    let (mut t, mut new_t, mut r, mut new_r) = (0i64, 1i64, p, a.rem_euclid(p));
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    t.rem_euclid(p)
}

/// Cubical homology of the complex of cubes whose image lies in one edge,
/// triangle or chordless square.
pub fn covering_complex_homology(g: &Graph, d: usize, ring: Ring) -> Result<HomologyResult> {
    let family = g.covering_by_short_cycles();
    homology_of(
        g,
        d,
        &Restriction::Subgraphs(family),
        ring,
        &AssembleOptions::default(),
    )
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub dim: usize,
    pub cubical_betti: usize,
    pub cubical_torsion: Vec<u64>,
    pub cellular_betti: usize,
    pub cellular_torsion: Vec<u64>,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
    pub all_match: bool,
}

/// Integer homology of the covering subcomplex against cellular homology of
/// the filled complex, for `d ≤ d_max`. Beyond degree 2 the cellular side is 0.
pub fn compare_covering(g: &Graph, d_max: usize) -> Result<ComparisonReport> {
    let x = build_filled_complex(g);
    let mut rows = Vec::new();
    for d in 0..=d_max {
        let cub = covering_complex_homology(g, d, Ring::Integers)?;
        let (cb, ct) = if d <= 2 {
            let c = cellular_homology(&x, d, Ring::Integers)?;
            (c.betti, c.torsion)
        } else {
            (0, Vec::new())
        };
        let matches = cub.betti == cb && cub.torsion == ct;
        rows.push(ComparisonRow {
            dim: d,
            cubical_betti: cub.betti,
            cubical_torsion: cub.torsion,
            cellular_betti: cb,
            cellular_torsion: ct,
            matches,
        });
    }
    let all_match = rows.iter().all(|r| r.matches);
    Ok(ComparisonReport { rows, all_match })
}

/// Whether every non-degenerate k-cube misses one of the two poles.
pub fn mv_span_check(g: &Graph, k: usize) -> Result<bool> {
    let (south, north) = g
        .poles()
        .ok_or_else(|| Error::domain("graph has no marked poles"))?;
    let mut ok = true;
    visit_cubes(g, k, &Restriction::All, |labels| {
        ok = !(labels.contains(&south) && labels.contains(&north));
        ok
    })?;
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filled_octahedron() {
        let x = build_filled_complex(&Graph::octahedron());
        assert_eq!((x.vertices, x.edges.len(), x.two_cells.len()), (6, 12, 11));
        let h2 = cellular_homology(&x, 2, Ring::Integers).unwrap();
        assert_eq!(h2.betti, 4);
    }

    #[test]
    fn filled_cube_is_a_sphere() {
        let x = build_filled_complex(&Graph::hypercube(3).unwrap());
        assert_eq!(x.two_cells.len(), 6);
        let b: Vec<usize> = (0..=2)
            .map(|d| cellular_homology(&x, d, Ring::Integers).unwrap().betti)
            .collect();
        assert_eq!(b, vec![1, 0, 1]);
    }

    #[test]
    fn pentagon_has_no_cells() {
        let x = build_filled_complex(&Graph::cycle(5).unwrap());
        assert!(x.two_cells.is_empty());
        assert_eq!(cellular_homology(&x, 1, Ring::Rationals).unwrap().betti, 1);
        assert_eq!(cellular_homology(&x, 2, Ring::Rationals).unwrap().betti, 0);
        assert!(cellular_homology(&x, 3, Ring::Rationals).is_err());
    }

    #[test]
    fn boundary_words_are_closed() {
        let g = Graph::octahedron();
        let x = build_filled_complex(&g);
        for c in 0..x.two_cells.len() {
            let walk = x.boundary_walk(c);
            for i in 0..walk.len() {
                assert!(g.is_adjacent(walk[i], walk[(i + 1) % walk.len()]));
            }
            assert_eq!(walk[0], *walk.iter().min().unwrap());
        }
    }

    #[test]
    fn mv_examples() {
        let t4 = crate::graph::from_token("times:cycle:5:4").unwrap();
        assert!(mv_span_check(&t4, 0).unwrap());
        let t2 = crate::graph::from_token("times:cycle:5:2").unwrap();
        assert!(!mv_span_check(&t2, 2).unwrap());
        assert!(mv_span_check(&Graph::cycle(5).unwrap(), 1).is_err());
    }

    #[test]
    fn prime_field_rank() {
        let m = vec![
            vec![BigInt::from(2), BigInt::from(0)],
            vec![BigInt::from(0), BigInt::from(3)],
        ];
        assert_eq!(rank_mod_p_dense(m.clone(), 2), 1);
        assert_eq!(rank_mod_p_dense(m, 5), 2);
    }
}
