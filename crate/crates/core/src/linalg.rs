//! Exact linear algebra on sparse integer matrices: rank over GF(p), rank and
//! torsion over ℤ, and Smith normal form.
//!
//! Elimination is column-oriented Gauss–Jordan restricted to unit pivots.
//! Every pivot column is kept reduced against every other pivot row, so a new
//! column is cleared in one pass. Columns without a unit entry after
//! reduction are set aside and finished by a dense Smith normal form over
//! arbitrary-precision integers.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Column-sparse integer matrix. Row indices inside a column are strictly
/// increasing and entries are nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SparseMatrix {
    rows: usize,
    cols: Vec<Vec<(u32, i64)>>,
}

impl SparseMatrix {
    pub fn new(rows: usize) -> Self {
        SparseMatrix {
            rows,
            cols: Vec::new(),
        }
    }

    pub fn from_columns(rows: usize, cols: Vec<Vec<(u32, i64)>>) -> Self {
        let mut m = SparseMatrix::new(rows);
        for c in cols {
            m.push_column(c);
        }
        m
    }

    pub fn from_dense(rows: &[Vec<i64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let cols = (0..ncols)
            .map(|j| {
                (0..nrows)
                    .filter(|&i| rows[i][j] != 0)
                    .map(|i| (i as u32, rows[i][j]))
                    .collect()
            })
            .collect();
        SparseMatrix::from_columns(nrows, cols)
    }

    /// Adds a column; entries are sorted and merged, zeros dropped.
    pub fn push_column(&mut self, col: Vec<(u32, i64)>) {
        let merged = normalize_column(col);
        if let Some(&(r, _)) = merged.last() {
            assert!((r as usize) < self.rows, "row {r} out of range");
        }
        self.cols.push(merged);
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn column(&self, j: usize) -> &[(u32, i64)] {
        &self.cols[j]
    }

    pub fn columns(&self) -> &[Vec<(u32, i64)>] {
        &self.cols
    }

    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        let mut d = vec![vec![0; self.ncols()]; self.rows];
        for (j, c) in self.cols.iter().enumerate() {
            for &(i, v) in c {
                d[i as usize][j] = v;
            }
        }
        d
    }

    /// `self · other`, or `None` if any entry overflows `i64`.
    pub fn checked_mul(&self, other: &SparseMatrix) -> Option<SparseMatrix> {
        assert_eq!(self.ncols(), other.nrows(), "dimension mismatch");
        let mut out = SparseMatrix::new(self.rows);
        let mut acc = vec![0i64; self.rows];
        let mut touched = Vec::new();
        for col in &other.cols {
            for &(k, b) in col {
                for &(i, a) in &self.cols[k as usize] {
                    let slot = &mut acc[i as usize];
                    if *slot == 0 {
                        touched.push(i);
                    }
                    *slot = slot.checked_add(a.checked_mul(b)?)?;
                }
            }
            touched.sort_unstable();
            touched.dedup();
            let c: Vec<(u32, i64)> = touched
                .iter()
                .map(|&i| (i, std::mem::take(&mut acc[i as usize])))
                .filter(|e| e.1 != 0)
                .collect();
            touched.clear();
            out.cols.push(c);
        }
        Some(out)
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(Vec::is_empty)
    }
}

/// Sorts by row, merges repeated rows and drops zeros.
pub fn normalize_column(mut col: Vec<(u32, i64)>) -> Vec<(u32, i64)> {
    col.sort_unstable_by_key(|e| e.0);
    let mut merged: Vec<(u32, i64)> = Vec::with_capacity(col.len());
    for (r, v) in col {
        match merged.last_mut() {
            Some(last) if last.0 == r => last.1 += v,
            _ => merged.push((r, v)),
        }
    }
    merged.retain(|e| e.1 != 0);
    merged
}

/// Coefficient ring for the elimination engine. Operations that can overflow
/// return `None`.
pub trait EliminationRing {
    type Elem: Clone + Debug + PartialEq;

    fn embed(&self, x: i64) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn is_unit(&self, a: &Self::Elem) -> bool;
    /// `a / u` for a unit `u`.
    fn div_unit(&self, a: &Self::Elem, u: &Self::Elem) -> Self::Elem;
    /// `a − k·b`.
    fn sub_mul(&self, a: &Self::Elem, k: &Self::Elem, b: &Self::Elem) -> Option<Self::Elem>;
    fn neg(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn to_bigint(&self, a: &Self::Elem) -> BigInt;
}

/// Integers in `i64` with overflow detection.
#[derive(Debug, Clone, Copy, Default)]
pub struct CheckedI64;

impl EliminationRing for CheckedI64 {
    type Elem = i64;

    fn embed(&self, x: i64) -> i64 {
        x
    }
    fn is_zero(&self, a: &i64) -> bool {
        *a == 0
    }
    fn is_unit(&self, a: &i64) -> bool {
        *a == 1 || *a == -1
    }
    fn div_unit(&self, a: &i64, u: &i64) -> i64 {
        a * u
    }
    fn sub_mul(&self, a: &i64, k: &i64, b: &i64) -> Option<i64> {
        a.checked_sub(k.checked_mul(*b)?)
    }
    fn neg(&self, a: &i64) -> Option<i64> {
        a.checked_neg()
    }
    fn to_bigint(&self, a: &i64) -> BigInt {
        BigInt::from(*a)
    }
}

/// Arbitrary-precision integers.
#[derive(Debug, Clone, Copy, Default)]
pub struct BigIntegers;

impl EliminationRing for BigIntegers {
    type Elem = BigInt;

    fn embed(&self, x: i64) -> BigInt {
        BigInt::from(x)
    }
    fn is_zero(&self, a: &BigInt) -> bool {
        a.is_zero()
    }
    fn is_unit(&self, a: &BigInt) -> bool {
        a.abs().is_one()
    }
    fn div_unit(&self, a: &BigInt, u: &BigInt) -> BigInt {
        a * u
    }
    fn sub_mul(&self, a: &BigInt, k: &BigInt, b: &BigInt) -> Option<BigInt> {
        Some(a - k * b)
    }
    fn neg(&self, a: &BigInt) -> Option<BigInt> {
        Some(-a)
    }
    fn to_bigint(&self, a: &BigInt) -> BigInt {
        a.clone()
    }
}

/// The prime field GF(p), `p < 2^31`.
#[derive(Debug, Clone, Copy)]
pub struct PrimeField {
    p: u64,
}

/// Default prime for the fast rank path.
pub const DEFAULT_PRIME: u32 = 32003;

impl PrimeField {
    pub fn new(p: u32) -> Self {
        assert!((2..(1 << 31)).contains(&p), "modulus out of range");
        assert!(
            (2..)
                .take_while(|d| d * d <= p)
                .all(|d| !p.is_multiple_of(d)),
            "modulus {p} is not prime"
        );
        PrimeField { p: p as u64 }
    }

    fn inv(&self, a: u64) -> u64 {
        // Fermat: a^(p-2)
        let (mut base, mut e, mut r) = (a % self.p, self.p - 2, 1u64);
        while e > 0 {
            if e & 1 == 1 {
                r = r * base % self.p;
            }
            base = base * base % self.p;
            e >>= 1;
        }
        r
    }
}

impl EliminationRing for PrimeField {
    type Elem = u64;

    fn embed(&self, x: i64) -> u64 {
        x.rem_euclid(self.p as i64) as u64
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn is_unit(&self, a: &u64) -> bool {
        *a != 0
    }
    fn div_unit(&self, a: &u64, u: &u64) -> u64 {
        a * self.inv(*u) % self.p
    }
    fn sub_mul(&self, a: &u64, k: &u64, b: &u64) -> Option<u64> {
        Some((a + self.p - k * b % self.p) % self.p)
    }
    fn neg(&self, a: &u64) -> Option<u64> {
        Some((self.p - a) % self.p)
    }
    fn to_bigint(&self, a: &u64) -> BigInt {
        BigInt::from(*a)
    }
}

type SparseVec<E> = Vec<(u32, E)>;

/// Outcome of unit-pivot elimination.
#[derive(Debug, Clone)]
pub struct Elimination<E> {
    /// Number of unit pivots found.
    pub pivots: usize,
    /// Reduced columns with no unit entry, supported on non-pivot rows.
    pub residual: Vec<SparseVec<E>>,
    /// Whether elimination stopped because the pivot count reached the bound.
    pub stopped_early: bool,
}

struct Engine<'r, R: EliminationRing> {
    ring: &'r R,
    pivot_of_row: Vec<Option<u32>>,
    /// (pivot row, unit entry, reduced column)
    pivots: Vec<(u32, R::Elem, SparseVec<R::Elem>)>,
    /// Pivot columns that may hold a nonzero entry in each row. May be stale.
    row_users: Vec<Vec<u32>>,
}

/// `a − k·b` on sparse vectors; also reports rows that are new in the result.
fn sparse_sub_mul<R: EliminationRing>(
    ring: &R,
    a: &[(u32, R::Elem)],
    k: &R::Elem,
    b: &[(u32, R::Elem)],
    new_rows: &mut Vec<u32>,
) -> Option<SparseVec<R::Elem>> {
    let zero = ring.embed(0);
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ra = a.get(i).map_or(u32::MAX, |e| e.0);
        let rb = b.get(j).map_or(u32::MAX, |e| e.0);
        if ra < rb {
            out.push(a[i].clone());
            i += 1;
        } else if rb < ra {
            let v = ring.sub_mul(&zero, k, &b[j].1)?;
            if !ring.is_zero(&v) {
                new_rows.push(rb);
                out.push((rb, v));
            }
            j += 1;
        } else {
            let v = ring.sub_mul(&a[i].1, k, &b[j].1)?;
            if !ring.is_zero(&v) {
                out.push((ra, v));
            }
            i += 1;
            j += 1;
        }
    }
    Some(out)
}

fn entry<E>(v: &[(u32, E)], row: u32) -> Option<&E> {
    v.binary_search_by_key(&row, |e| e.0).ok().map(|i| &v[i].1)
}

impl<'r, R: EliminationRing> Engine<'r, R> {
    fn new(ring: &'r R, rows: usize) -> Self {
        Engine {
            ring,
            pivot_of_row: vec![None; rows],
            pivots: Vec::new(),
            row_users: vec![Vec::new(); rows],
        }
    }

    /// Clears every pivot row from `v`.
    fn reduce(&self, mut v: SparseVec<R::Elem>) -> Option<SparseVec<R::Elem>> {
        let hits: Vec<(u32, R::Elem)> = v
            .iter()
            .filter(|e| self.pivot_of_row[e.0 as usize].is_some())
            .cloned()
            .collect();
        let mut scratch = Vec::new();
        for (row, a) in hits {
            let p = self.pivot_of_row[row as usize].expect("pivot row") as usize;
            let (_, u, col) = &self.pivots[p];
            let k = self.ring.div_unit(&a, u);
            v = sparse_sub_mul(self.ring, &v, &k, col, &mut scratch)?;
            scratch.clear();
        }
        Some(v)
    }

    /// Installs `v` (already reduced) as a pivot column at `row`.
    fn install(&mut self, row: u32, v: SparseVec<R::Elem>) -> Option<()> {
        let u = entry(&v, row).expect("pivot entry").clone();
        let idx = self.pivots.len() as u32;
        let users = std::mem::take(&mut self.row_users[row as usize]);
        let mut new_rows = Vec::new();
        for q in users {
            let q = q as usize;
            let Some(a) = entry(&self.pivots[q].2, row).cloned() else {
                continue;
            };
            let k = self.ring.div_unit(&a, &u);
            let updated = sparse_sub_mul(self.ring, &self.pivots[q].2, &k, &v, &mut new_rows)?;
            self.pivots[q].2 = updated;
            for &r in &new_rows {
                self.row_users[r as usize].push(q as u32);
            }
            new_rows.clear();
        }
        for &(r, _) in &v {
            if r != row {
                self.row_users[r as usize].push(idx);
            }
        }
        self.pivot_of_row[row as usize] = Some(idx);
        self.pivots.push((row, u, v));
        Some(())
    }

    /// Unit entry of a reduced column whose row is used by the fewest pivots.
    fn choose_pivot(&self, v: &[(u32, R::Elem)]) -> Option<u32> {
        v.iter()
            .filter(|e| self.ring.is_unit(&e.1))
            .min_by_key(|e| (self.row_users[e.0 as usize].len(), e.0))
            .map(|e| e.0)
    }

    /// Reduces and either installs or returns the leftover column.
    fn absorb(&mut self, v: SparseVec<R::Elem>) -> Option<Option<SparseVec<R::Elem>>> {
        let v = self.reduce(v)?;
        if v.is_empty() {
            return Some(None);
        }
        match self.choose_pivot(&v) {
            Some(row) => {
                self.install(row, v)?;
                Some(None)
            }
            None => Some(Some(v)),
        }
    }
}

/// Incremental unit-pivot elimination: columns are pushed one at a time, so
/// a matrix can be streamed without being stored.
pub struct Eliminator<'r, R: EliminationRing> {
    engine: Engine<'r, R>,
    residual: Vec<SparseVec<R::Elem>>,
    bound: usize,
    overflow: bool,
}

impl<'r, R: EliminationRing> Eliminator<'r, R> {
    /// With `rank_bound = Some(b)`, columns are ignored once `b` pivots exist.
    pub fn new(ring: &'r R, rows: usize, rank_bound: Option<usize>) -> Self {
        Eliminator {
            engine: Engine::new(ring, rows),
            residual: Vec::new(),
            bound: rank_bound.unwrap_or(usize::MAX).min(rows),
            overflow: false,
        }
    }

    /// Feeds one column (any order, repeated rows allowed). Returns `false`
    /// once further columns cannot change the outcome (bound reached, or
    /// arithmetic overflow).
    pub fn push(&mut self, col: &[(u32, i64)]) -> bool {
        if !self.wants_more() {
            return false;
        }
        let ring = self.engine.ring;
        let sorted = col.windows(2).all(|w| w[0].0 < w[1].0) && col.iter().all(|e| e.1 != 0);
        let v: SparseVec<R::Elem> = if sorted {
            col.iter().map(|&(r, x)| (r, ring.embed(x))).collect()
        } else {
            normalize_column(col.to_vec())
                .into_iter()
                .map(|(r, x)| (r, ring.embed(x)))
                .collect()
        };
        let v: SparseVec<R::Elem> = v.into_iter().filter(|e| !ring.is_zero(&e.1)).collect();
        match self.engine.absorb(v) {
            Some(Some(left)) => self.residual.push(left),
            Some(None) => {}
            None => self.overflow = true,
        }
        self.wants_more()
    }

    pub fn wants_more(&self) -> bool {
        !self.overflow && self.engine.pivots.len() < self.bound
    }

    pub fn pivots(&self) -> usize {
        self.engine.pivots.len()
    }

    /// Finishes the elimination; `None` if arithmetic overflowed.
    pub fn finish(mut self) -> Option<Elimination<R::Elem>> {
        if self.overflow {
            return None;
        }
        // Leftovers may gain unit entries once later pivots are known.
        loop {
            let before = self.engine.pivots.len();
            for v in std::mem::take(&mut self.residual) {
                if let Some(left) = self.engine.absorb(v)? {
                    self.residual.push(left);
                }
            }
            if self.engine.pivots.len() == before {
                break;
            }
        }
        let stopped_early = self.engine.pivots.len() >= self.bound;
        if stopped_early {
            // Unit pivots spanning a lattice of maximal rank leave nothing over.
            self.residual.clear();
        }
        Some(Elimination {
            pivots: self.engine.pivots.len(),
            residual: self.residual,
            stopped_early,
        })
    }
}

/// Unit-pivot elimination of `m` over `ring`. Returns `None` on arithmetic
/// overflow. With `rank_bound = Some(b)`, stops once `b` pivots are found.
pub fn eliminate<R: EliminationRing>(
    ring: &R,
    m: &SparseMatrix,
    rank_bound: Option<usize>,
) -> Option<Elimination<R::Elem>> {
    let mut el = Eliminator::new(ring, m.nrows(), rank_bound);
    // Short columns first keeps early pivots sparse; ties keep input order.
    let mut order: Vec<usize> = (0..m.ncols()).collect();
    order.sort_by_key(|&j| m.column(j).len());
    for j in order {
        if !el.push(m.column(j)) {
            break;
        }
    }
    el.finish()
}

/// Rank over GF(p).
pub fn rank_mod_p(m: &SparseMatrix, p: u32, rank_bound: Option<usize>) -> usize {
    let field = PrimeField::new(p);
    eliminate(&field, m, rank_bound)
        .expect("field arithmetic cannot overflow")
        .pivots
}

/// Rank and torsion invariants (entries > 1 of the Smith form) over ℤ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerReduction {
    pub rank: usize,
    pub torsion: Vec<BigInt>,
    pub unit_pivots: usize,
    pub stopped_early: bool,
    /// Whether `i64` overflowed and the computation was redone with big integers.
    pub used_bigint: bool,
}

pub fn integer_reduction(m: &SparseMatrix, rank_bound: Option<usize>) -> IntegerReduction {
    integer_reduction_streamed(m.nrows(), rank_bound, |push| {
        let mut order: Vec<usize> = (0..m.ncols()).collect();
        order.sort_by_key(|&j| m.column(j).len());
        for j in order {
            if !push(m.column(j)) {
                break;
            }
        }
        Ok::<(), std::convert::Infallible>(())
    })
    .unwrap_or_else(|e| match e {})
}

/// Integer reduction of a matrix given as a column stream. `source` is called
/// with a sink and must push every column until the sink returns `false`; it
/// is called a second time if `i64` arithmetic overflows.
pub fn integer_reduction_streamed<E>(
    rows: usize,
    rank_bound: Option<usize>,
    mut source: impl FnMut(&mut dyn FnMut(&[(u32, i64)]) -> bool) -> Result<(), E>,
) -> Result<IntegerReduction, E> {
    let mut small = Eliminator::new(&CheckedI64, rows, rank_bound);
    source(&mut |c| small.push(c))?;
    let (pivots, residual, stopped_early, used_bigint) = match small.finish() {
        Some(e) => {
            let res: Vec<Vec<(u32, BigInt)>> = e
                .residual
                .into_iter()
                .map(|c| c.into_iter().map(|(r, x)| (r, BigInt::from(x))).collect())
                .collect();
            (e.pivots, res, e.stopped_early, false)
        }
        None => {
            let mut big = Eliminator::new(&BigIntegers, rows, rank_bound);
            source(&mut |c| big.push(c))?;
            let e = big.finish().expect("big integers do not overflow");
            (e.pivots, e.residual, e.stopped_early, true)
        }
    };
    let invariants = dense_snf(residual_to_dense(&residual));
    let torsion: Vec<BigInt> = invariants.iter().filter(|x| !x.is_one()).cloned().collect();
    Ok(IntegerReduction {
        rank: pivots + invariants.len(),
        torsion,
        unit_pivots: pivots,
        stopped_early,
        used_bigint,
    })
}

/// Rank over GF(p) of a column stream.
pub fn rank_mod_p_streamed<E>(
    rows: usize,
    p: u32,
    rank_bound: Option<usize>,
    source: impl FnOnce(&mut dyn FnMut(&[(u32, i64)]) -> bool) -> Result<(), E>,
) -> Result<usize, E> {
    let field = PrimeField::new(p);
    let mut el = Eliminator::new(&field, rows, rank_bound);
    source(&mut |c| el.push(c))?;
    Ok(el
        .finish()
        .expect("field arithmetic cannot overflow")
        .pivots)
}

fn residual_to_dense(cols: &[Vec<(u32, BigInt)>]) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<u32> = cols.iter().flat_map(|c| c.iter().map(|e| e.0)).collect();
    rows.sort_unstable();
    rows.dedup();
    let mut dense = vec![vec![BigInt::zero(); cols.len()]; rows.len()];
    for (j, c) in cols.iter().enumerate() {
        for (r, x) in c {
            let i = rows.binary_search(r).expect("row present");
            dense[i][j] = x.clone();
        }
    }
    dense
}

/// Nonzero Smith invariants `d₁ | d₂ | …` of a sparse integer matrix.
pub fn smith_normal_form(m: &SparseMatrix) -> Vec<BigInt> {
    let e = match eliminate(&CheckedI64, m, None) {
        Some(e) => Elimination {
            pivots: e.pivots,
            residual: e
                .residual
                .into_iter()
                .map(|c| c.into_iter().map(|(r, x)| (r, BigInt::from(x))).collect())
                .collect(),
            stopped_early: false,
        },
        None => eliminate(&BigIntegers, m, None).expect("big integers do not overflow"),
    };
    let mut out = vec![BigInt::one(); e.pivots];
    out.extend(dense_snf(residual_to_dense(&e.residual)));
    out
}

/// Nonzero Smith invariants of a dense matrix, in divisibility order.
#[allow(clippy::needless_range_loop)]
pub fn dense_snf(mut a: Vec<Vec<BigInt>>) -> Vec<BigInt> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // Smallest nonzero magnitude in the trailing block.
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[i][j].is_zero() && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut changed = false;
            for i in t + 1..rows {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                for j in t..cols {
                    let s = &q * &a[t][j];
                    a[i][j] -= s;
                }
                if !a[i][t].is_zero() {
                    a.swap(t, i);
                    changed = true;
                }
            }
            for j in t + 1..cols {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                for i in t..rows {
                    let s = &q * &a[i][t];
                    a[i][j] -= s;
                }
                if !a[t][j].is_zero() {
                    for row in a.iter_mut() {
                        row.swap(t, j);
                    }
                    changed = true;
                }
            }
            if changed {
                continue;
            }
            // Row and column t are clear; enforce divisibility of the rest.
            let p = a[t][t].clone();
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !a[i][j].is_multiple_of(&p)));
            match bad {
                Some(i) => {
                    for j in t..cols {
                        let x = a[i][j].clone();
                        a[t][j] += x;
                    }
                }
                None => break,
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    diag
}
