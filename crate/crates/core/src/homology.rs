//! Cubical chain complexes and their homology.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cache::enumerate_cached;
use crate::chain::for_each_face;
use crate::cube::{
    is_degenerate_labels, visit_cubes, CubeBasis, EnumOptions, Restriction, DEFAULT_MEMORY_BUDGET,
};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{
    integer_reduction, integer_reduction_streamed, rank_mod_p, rank_mod_p_streamed, SparseMatrix,
    DEFAULT_PRIME,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ring {
    Integers,
    Rationals,
    PrimeField(u32),
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ring::Integers => write!(f, "Z"),
            Ring::Rationals => write!(f, "Q"),
            Ring::PrimeField(p) => write!(f, "GF({p})"),
        }
    }
}

impl FromStr for Ring {
    type Err = Error;

    /// Accepts `z`, `q`, `gf:P` / `gfP` / `p:P` (case-insensitive).
    fn from_str(s: &str) -> Result<Ring> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "z" | "int" | "integers" => return Ok(Ring::Integers),
            "q" | "rat" | "rationals" => return Ok(Ring::Rationals),
            _ => {}
        }
        let digits = t
            .strip_prefix("gf:")
            .or_else(|| t.strip_prefix("gf"))
            .or_else(|| t.strip_prefix("p:"));
        let p: u32 = digits
            .and_then(|d| d.trim_matches(|c| c == '(' || c == ')').parse().ok())
            .ok_or_else(|| Error::domain(format!("unknown ring '{s}'")))?;
        if !(2..1 << 31).contains(&p)
            || (2..)
                .take_while(|d| d * d <= p)
                .any(|d| p.is_multiple_of(d))
        {
            return Err(Error::domain(format!("{p} is not a prime below 2^31")));
        }
        Ok(Ring::PrimeField(p))
    }
}

#[derive(Debug, Clone, Default)]
pub struct AssembleOptions {
    pub enumeration: Option<EnumOptions>,
    pub cache_dir: Option<PathBuf>,
}

/// Bases `C_0 … C_{d_max}` and boundary matrices `∂_1 … ∂_{d_max}`.
#[derive(Debug, Clone)]
pub struct ChainComplex {
    restriction: Restriction,
    bases: Vec<CubeBasis>,
    /// `boundaries[d]` is `∂_d`; entry 0 is the zero map to the trivial module.
    boundaries: Vec<SparseMatrix>,
}

impl ChainComplex {
    pub fn d_max(&self) -> usize {
        self.bases.len() - 1
    }

    pub fn basis(&self, d: usize) -> &CubeBasis {
        &self.bases[d]
    }

    pub fn boundary_matrix(&self, d: usize) -> &SparseMatrix {
        &self.boundaries[d]
    }

    pub fn restriction(&self) -> &Restriction {
        &self.restriction
    }

    pub fn basis_sizes(&self) -> Vec<usize> {
        self.bases.iter().map(CubeBasis::len).collect()
    }

    /// Checks `∂_d ∘ ∂_{d+1} = 0` for every assembled pair.
    pub fn boundary_squares_to_zero(&self) -> bool {
        (1..self.d_max()).all(|d| {
            self.boundaries[d]
                .checked_mul(&self.boundaries[d + 1])
                .is_some_and(|m| m.is_zero())
        })
    }
}

fn boundary_column(labels: &[u32], d: usize, lower: &CubeBasis) -> Result<Vec<(u32, i64)>> {
    let mut col = Vec::with_capacity(2 * d);
    let mut missing = None;
    for_each_face(labels, d, |face, s| {
        if is_degenerate_labels(&face, d - 1) {
            return;
        }
        match lower.index_of(&face) {
            Some(i) => col.push((i as u32, s)),
            None => missing = Some(face),
        }
    });
    if let Some(face) = missing {
        return Err(Error::Internal(format!(
            "face {face:?} of {labels:?} left the restricted complex"
        )));
    }
    Ok(col)
}

fn boundary_matrix(upper: &CubeBasis, lower: &CubeBasis) -> Result<SparseMatrix> {
    let d = upper.dim();
    #[cfg(feature = "parallel")]
    let cols: Vec<Vec<(u32, i64)>> = {
        use rayon::prelude::*;
        (0..upper.len())
            .into_par_iter()
            .map(|j| boundary_column(upper.get(j), d, lower))
            .collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let cols: Vec<Vec<(u32, i64)>> = (0..upper.len())
        .map(|j| boundary_column(upper.get(j), d, lower))
        .collect::<Result<_>>()?;
    Ok(SparseMatrix::from_columns(lower.len(), cols))
}

/// Enumerates bases through `d_max` and builds the boundary matrices.
pub fn assemble_complex(
    g: &Graph,
    d_max: usize,
    restriction: &Restriction,
    opts: &AssembleOptions,
) -> Result<ChainComplex> {
    let mut bases = Vec::with_capacity(d_max + 1);
    for d in 0..=d_max {
        let eo = opts
            .enumeration
            .unwrap_or_else(|| EnumOptions::with_memory_budget(DEFAULT_MEMORY_BUDGET, d));
        bases.push(enumerate_cached(
            g,
            d,
            restriction,
            eo,
            opts.cache_dir.as_deref(),
        )?);
    }
    let mut boundaries = vec![SparseMatrix::new(0)];
    for d in 1..=d_max {
        boundaries.push(boundary_matrix(&bases[d], &bases[d - 1])?);
    }
    // ∂_0 maps onto the trivial module: zero rows, one column per vertex cube.
    boundaries[0] = SparseMatrix::from_columns(0, vec![Vec::new(); bases[0].len()]);
    Ok(ChainComplex {
        restriction: restriction.clone(),
        bases,
        boundaries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HomologyOptions {
    /// Over ℚ, confirm the GF(32003) ranks by exact integer elimination.
    pub confirm_exact: bool,
}

impl Default for HomologyOptions {
    fn default() -> Self {
        HomologyOptions {
            confirm_exact: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyResult {
    pub graph: String,
    pub restriction: String,
    pub dim: usize,
    pub ring: String,
    pub betti: usize,
    pub torsion: Vec<u64>,
    /// Sizes of `C_{d-1}` (omitted when d = 0), `C_d`, and `C_{d+1}` when that
    /// basis was assembled rather than streamed.
    pub basis_sizes: Vec<usize>,
    /// `[rank ∂_d, rank ∂_{d+1}]`.
    pub ranks: Vec<usize>,
    pub elapsed_ms: u64,
}

fn torsion_u64(t: &[num_bigint::BigInt]) -> Result<Vec<u64>> {
    t.iter()
        .map(|x| {
            u64::try_from(x)
                .map_err(|_| Error::Internal(format!("torsion coefficient {x} exceeds u64")))
        })
        .collect()
}

struct RankInfo {
    rank: usize,
    torsion: Vec<u64>,
}

fn rank_over(
    m: &SparseMatrix,
    ring: Ring,
    opts: HomologyOptions,
    bound: Option<usize>,
) -> Result<RankInfo> {
    match ring {
        Ring::PrimeField(p) => Ok(RankInfo {
            rank: rank_mod_p(m, p, bound),
            torsion: Vec::new(),
        }),
        Ring::Rationals if !opts.confirm_exact => Ok(RankInfo {
            rank: rank_mod_p(m, DEFAULT_PRIME, bound),
            torsion: Vec::new(),
        }),
        Ring::Rationals | Ring::Integers => {
            let r = integer_reduction(m, bound);
            let torsion = if ring == Ring::Integers {
                torsion_u64(&r.torsion)?
            } else {
                Vec::new()
            };
            Ok(RankInfo {
                rank: r.rank,
                torsion,
            })
        }
    }
}

/// `H_d` of an assembled complex. Requires `∂_{d+1}`.
pub fn homology(
    x: &ChainComplex,
    d: usize,
    ring: Ring,
    opts: HomologyOptions,
) -> Result<HomologyResult> {
    if d + 1 > x.d_max() {
        return Err(Error::OutOfRange {
            requested: d + 1,
            assembled: x.d_max(),
        });
    }
    let start = Instant::now();
    let n_d = x.bases[d].len();
    let rank_d = if d == 0 {
        0
    } else {
        rank_over(&x.boundaries[d], ring, opts, None)?.rank
    };
    // Pivots found up to dim ker ∂_d certify the whole image.
    let up = rank_over(&x.boundaries[d + 1], ring, opts, Some(n_d - rank_d))?;
    let betti = n_d - rank_d - up.rank;
    let mut basis_sizes = Vec::new();
    if d > 0 {
        basis_sizes.push(x.bases[d - 1].len());
    }
    basis_sizes.push(n_d);
    basis_sizes.push(x.bases[d + 1].len());
    Ok(HomologyResult {
        graph: String::new(),
        restriction: x.restriction.tag().to_string(),
        dim: d,
        ring: ring.to_string(),
        betti,
        torsion: up.torsion,
        basis_sizes,
        ranks: vec![rank_d, up.rank],
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

fn rank_of_stream(
    rows: usize,
    ring: Ring,
    opts: HomologyOptions,
    bound: Option<usize>,
    source: impl FnMut(&mut dyn FnMut(&[(u32, i64)]) -> bool) -> Result<()>,
) -> Result<RankInfo> {
    match ring {
        Ring::PrimeField(p) => Ok(RankInfo {
            rank: rank_mod_p_streamed(rows, p, bound, source)?,
            torsion: Vec::new(),
        }),
        Ring::Rationals if !opts.confirm_exact => Ok(RankInfo {
            rank: rank_mod_p_streamed(rows, DEFAULT_PRIME, bound, source)?,
            torsion: Vec::new(),
        }),
        Ring::Rationals | Ring::Integers => {
            let r = integer_reduction_streamed(rows, bound, source)?;
            let torsion = if ring == Ring::Integers {
                torsion_u64(&r.torsion)?
            } else {
                Vec::new()
            };
            Ok(RankInfo {
                rank: r.rank,
                torsion,
            })
        }
    }
}

/// Assembles through `d` and computes `H_d`, streaming the (d+1)-cubes
/// straight into the elimination so `C_{d+1}` is never stored. Streaming stops
/// as soon as the rank of `∂_{d+1}` reaches `dim ker ∂_d`.
pub fn homology_of(
    g: &Graph,
    d: usize,
    restriction: &Restriction,
    ring: Ring,
    opts: &AssembleOptions,
) -> Result<HomologyResult> {
    homology_of_with(g, d, restriction, ring, opts, HomologyOptions::default())
}

pub fn homology_of_with(
    g: &Graph,
    d: usize,
    restriction: &Restriction,
    ring: Ring,
    opts: &AssembleOptions,
    hopts: HomologyOptions,
) -> Result<HomologyResult> {
    let start = Instant::now();
    let x = assemble_complex(g, d, restriction, opts)?;
    let n_d = x.bases[d].len();
    let rank_d = if d == 0 {
        0
    } else {
        rank_over(&x.boundaries[d], ring, hopts, None)?.rank
    };
    let lower = &x.bases[d];
    let up = rank_of_stream(n_d, ring, hopts, Some(n_d - rank_d), |push| {
        let mut failure = None;
        visit_cubes(g, d + 1, restriction, |labels| {
            match boundary_column(labels, d + 1, lower) {
                Ok(col) => push(&col),
                Err(e) => {
                    failure = Some(e);
                    false
                }
            }
        })?;
        failure.map_or(Ok(()), Err)
    })?;
    let mut basis_sizes = Vec::new();
    if d > 0 {
        basis_sizes.push(x.bases[d - 1].len());
    }
    basis_sizes.push(n_d);
    Ok(HomologyResult {
        graph: String::new(),
        restriction: restriction.tag().to_string(),
        dim: d,
        ring: ring.to_string(),
        betti: n_d - rank_d - up.rank,
        torsion: up.torsion,
        basis_sizes,
        ranks: vec![rank_d, up.rank],
        elapsed_ms: start.elapsed().as_millis() as u64,
    })
}

/// `H_d` of the complex of cubes with at most two image points.
pub fn homology_two_point(g: &Graph, d: usize, ring: Ring) -> Result<HomologyResult> {
    homology_of(
        g,
        d,
        &Restriction::TwoPoint,
        ring,
        &AssembleOptions::default(),
    )
}
