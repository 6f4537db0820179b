//! Subdivision of singular cubes through the universal cover, the prism
//! chain homotopy, and an integer-line version of the same construction for
//! cycles.

use num_integer::Integer;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::chain::{boundary, Chain};
use crate::cover::{
    convex_combination, lift_cube, round_toward_root, tree_distance, LiftedCube, Rational,
    TreePoint,
};
use crate::cube::{is_degenerate_labels, SingularCube};
use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};

/// Values on the grid `{0,…,N}^dim`, indexed by `Σ a_i (N+1)^(i-1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridMap<T> {
    dim: usize,
    n: usize,
    values: Vec<T>,
}

impl<T> GridMap<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Subdivision parameter `N`.
    pub fn steps(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn stride(&self, axis: usize) -> usize {
        (self.n + 1).pow(axis as u32)
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        debug_assert_eq!(coords.len(), self.dim);
        coords
            .iter()
            .rev()
            .fold(0, |acc, &a| acc * (self.n + 1) + a)
    }

    pub fn coords(&self, mut idx: usize) -> Vec<usize> {
        (0..self.dim)
            .map(|_| {
                let a = idx % (self.n + 1);
                idx /= self.n + 1;
                a
            })
            .collect()
    }

    pub fn get(&self, coords: &[usize]) -> &T {
        &self.values[self.index(coords)]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> GridMap<U> {
        GridMap {
            dim: self.dim,
            n: self.n,
            values: self.values.iter().map(f).collect(),
        }
    }

    /// Restriction to the face `a_axis = 0` (`eps = 0`) or `a_axis = N`.
    pub fn face(&self, axis: usize, eps: usize) -> GridMap<T>
    where
        T: Clone,
    {
        let fixed = eps * self.n;
        let values = (0..self.values.len())
            .filter(|&i| self.coords(i)[axis] == fixed)
            .map(|i| self.values[i].clone())
            .collect();
        GridMap {
            dim: self.dim - 1,
            n: self.n,
            values,
        }
    }

    /// Base points of the `N^dim` small cubes.
    fn small_cube_bases(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.values.len()).filter(move |&i| self.coords(i).iter().all(|&a| a < self.n))
    }

    /// Labels of every small cube, in colex order of its corners.
    pub fn small_cubes(&self) -> Vec<Vec<T>>
    where
        T: Clone,
    {
        let offsets: Vec<usize> = (0..1usize << self.dim)
            .map(|e| {
                (0..self.dim)
                    .filter(|&k| e >> k & 1 == 1)
                    .map(|k| self.stride(k))
                    .sum()
            })
            .collect();
        self.small_cube_bases()
            .map(|b| {
                offsets
                    .iter()
                    .map(|&o| self.values[b + o].clone())
                    .collect()
            })
            .collect()
    }

    /// Pairs of grid points that differ by one step in one coordinate.
    pub fn grid_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.values.len()).flat_map(move |i| {
            let c = self.coords(i);
            (0..self.dim)
                .filter(move |&k| c[k] < self.n)
                .map(move |k| (i, i + self.stride(k)))
        })
    }
}

impl GridMap<TreePoint> {
    /// Largest tree distance between neighbouring grid points.
    pub fn max_step(&self) -> Rational {
        self.grid_edges()
            .map(|(i, j)| tree_distance(&self.values[i], &self.values[j]))
            .max()
            .unwrap_or_else(Rational::zero)
    }
}

/// Sum of the non-degenerate small cubes of a rounded grid, times `sign`.
pub fn sum_small_cubes(grid: &GridMap<Vertex>, sign: i64) -> Chain {
    let mut c = Chain::zero(grid.dim);
    for cube in grid.small_cubes() {
        c.add_term(&cube, sign);
    }
    c
}

/// Anchor depth used for every lift in this module.
pub fn anchor_depth(d: usize) -> usize {
    d + 2
}

/// Fills the grid axis by axis: corners from the lift, then for axis `i` the
/// points with coordinate `i` interior and every later coordinate at 0 or N,
/// by equal division of the segment between the two opposite points.
pub fn grid_extend(lift: &LiftedCube, n: usize) -> Result<GridMap<TreePoint>> {
    if n == 0 {
        return Err(Error::domain("subdivision parameter must be positive"));
    }
    let d = lift.dim();
    let total = (n + 1).pow(d as u32);
    let mut values: Vec<Option<TreePoint>> = vec![None; total];
    let shape = GridMap {
        dim: d,
        n,
        values: vec![(); total],
    };
    for (bits, v) in lift.labels().iter().enumerate() {
        let coords: Vec<usize> = (0..d).map(|k| (bits >> k & 1) * n).collect();
        values[shape.index(&coords)] = Some(TreePoint::Vertex(v.clone()));
    }
    for axis in 0..d {
        for idx in 0..total {
            let c = shape.coords(idx);
            if c[axis] == 0 || c[axis] == n || c[axis + 1..].iter().any(|&a| a != 0 && a != n) {
                continue;
            }
            let mut lo = c.clone();
            lo[axis] = 0;
            let mut hi = c.clone();
            hi[axis] = n;
            let x = values[shape.index(&lo)]
                .as_ref()
                .expect("filled by an earlier axis");
            let y = values[shape.index(&hi)]
                .as_ref()
                .expect("filled by an earlier axis");
            values[idx] = Some(convex_combination(
                x,
                y,
                Rational::new(c[axis] as i64, n as i64),
            )?);
        }
    }
    Ok(GridMap {
        dim: d,
        n,
        values: values
            .into_iter()
            .map(|v| v.expect("every grid point filled"))
            .collect(),
    })
}

/// Rounds every point toward the root and projects to `G`.
pub fn grid_round_project(m: &GridMap<TreePoint>) -> GridMap<Vertex> {
    m.map(|p| round_toward_root(p).project())
}

/// The rounded, projected grid `[σ̃^N]`.
pub fn subdivided_grid(sigma: &SingularCube, n: usize, g: &Graph) -> Result<GridMap<Vertex>> {
    let lift = lift_cube(sigma, g, anchor_depth(sigma.dim()))?;
    Ok(grid_round_project(&grid_extend(&lift, n)?))
}

/// `S^N(σ)`: the sum of the small cubes of `[σ̃^N]`.
pub fn subdivide_cube(sigma: &SingularCube, n: usize, g: &Graph) -> Result<Chain> {
    if sigma.is_degenerate() {
        return Ok(Chain::zero(sigma.dim()));
    }
    Ok(sum_small_cubes(&subdivided_grid(sigma, n, g)?, 1))
}

pub fn subdivide_chain(c: &Chain, n: usize, g: &Graph) -> Result<Chain> {
    let mut out = Chain::zero(c.dim());
    for (labels, k) in c.terms() {
        let s = subdivide_cube(&SingularCube::from_labels(labels.to_vec())?, n, g)?;
        out.add_scaled(&s, k)?;
    }
    Ok(out)
}

/// The top face `T(σ)(a) = σ̃(ā)`, `ā_i = 0` if `a_i = 0` and 1 otherwise,
/// on the grid with parameter `m`.
pub fn top_face(lift: &LiftedCube, m: usize) -> GridMap<TreePoint> {
    let d = lift.dim();
    let total = (m + 1).pow(d as u32);
    let shape = GridMap {
        dim: d,
        n: m,
        values: vec![(); total],
    };
    let values = (0..total)
        .map(|idx| {
            let bits = shape
                .coords(idx)
                .iter()
                .enumerate()
                .fold(0usize, |acc, (k, &a)| acc | (usize::from(a > 0) << k));
            TreePoint::Vertex(lift.labels()[bits].clone())
        })
        .collect();
    GridMap {
        dim: d,
        n: m,
        values,
    }
}

/// The prism grid on `{0,…,m}^(d+1)`: bottom `σ̃^m`, top `T(σ)`, vertical
/// segments cut into `m` equal steps.
pub fn prism_grid(lift: &LiftedCube, m: usize) -> Result<GridMap<TreePoint>> {
    let d = lift.dim();
    let bottom = grid_extend(lift, m)?;
    let top = top_face(lift, m);
    let layer = bottom.values.len();
    let mut values = Vec::with_capacity(layer * (m + 1));
    for k in 0..=m {
        for i in 0..layer {
            values.push(convex_combination(
                &bottom.values[i],
                &top.values[i],
                Rational::new(k as i64, m as i64),
            )?);
        }
    }
    Ok(GridMap {
        dim: d + 1,
        n: m,
        values,
    })
}

/// Sign of the prism chain for a d-cube, chosen so that
/// `σ − S(σ) = h(∂σ) + ∂h(σ)` holds with `∂ = Σ (−1)^i (f_i^− − f_i^+)`.
pub fn prism_sign(d: usize) -> i64 {
    if d.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// `h(σ)` with subdivision parameter `m`.
pub fn prism_with(sigma: &SingularCube, m: usize, g: &Graph) -> Result<Chain> {
    let d = sigma.dim();
    if sigma.is_degenerate() {
        return Ok(Chain::zero(d + 1));
    }
    let lift = lift_cube(sigma, g, anchor_depth(d))?;
    let grid = grid_round_project(&prism_grid(&lift, m)?);
    Ok(sum_small_cubes(&grid, prism_sign(d)))
}

/// `h_d(σ)` with parameter `max(d, 2)`.
pub fn prism(sigma: &SingularCube, g: &Graph) -> Result<Chain> {
    prism_with(sigma, sigma.dim().max(2), g)
}

pub fn prism_chain_with(c: &Chain, m: usize, g: &Graph) -> Result<Chain> {
    let mut out = Chain::zero(c.dim() + 1);
    for (labels, k) in c.terms() {
        out.add_scaled(
            &prism_with(&SingularCube::from_labels(labels.to_vec())?, m, g)?,
            k,
        )?;
    }
    Ok(out)
}

/// `σ − S^d σ − h_{d−1} ∂σ − ∂ h_d σ`, every piece built with parameter d.
/// For d ≤ 1, `S` is the identity and the `h` terms vanish.
pub fn verify_homotopy_identity(sigma: &SingularCube, g: &Graph) -> Result<Chain> {
    let d = sigma.dim();
    let s = Chain::from_cube(sigma);
    if d <= 1 {
        let n = d.max(1);
        return s.sub(&subdivide_cube(sigma, n, g)?);
    }
    let mut r = s.sub(&subdivide_cube(sigma, d, g)?)?;
    r = r.sub(&prism_chain_with(&boundary(&s), d, g)?)?;
    r = r.sub(&boundary(&prism_with(sigma, d, g)?))?;
    Ok(r)
}

/// A random non-degenerate d-cube, by randomized depth-first labelling.
pub fn random_cube<R: Rng>(g: &Graph, d: usize, rng: &mut R) -> Option<SingularCube> {
    fn fill<R: Rng>(
        g: &Graph,
        labels: &mut Vec<Vertex>,
        pos: usize,
        d: usize,
        rng: &mut R,
        budget: &mut usize,
    ) -> bool {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        if pos == labels.len() {
            return !is_degenerate_labels(labels, d);
        }
        let low = pos & pos.wrapping_neg();
        let mut cands = g.closed_neighborhood(labels[pos ^ low]);
        cands.shuffle(rng);
        for c in cands {
            let mut rest = pos ^ low;
            let mut ok = true;
            while rest != 0 {
                let b = rest & rest.wrapping_neg();
                rest ^= b;
                ok &= g.adjacent_or_equal(c, labels[pos ^ b]);
            }
            if ok {
                labels[pos] = c;
                if fill(g, labels, pos + 1, d, rng, budget) {
                    return true;
                }
            }
        }
        false
    }
    if g.vertex_count() == 0 {
        return None;
    }
    for _ in 0..64 {
        let start = rng.gen_range(0..g.vertex_count()) as Vertex;
        let mut labels = vec![start; 1 << d];
        let mut budget = 10_000;
        if fill(g, &mut labels, 1, d, rng, &mut budget) || (d == 0) {
            return Some(SingularCube::from_labels(labels).expect("power of two"));
        }
    }
    None
}

/// The construction on an n-cycle with the cover identified with ℤ:
/// integer lift, multilinear weights, floor, reduction mod n.
pub mod line {
    use super::*;

    /// Lift to ℤ with `σ(0)` placed at `σ(0) + n·shift`.
    pub fn lift_to_integers(sigma: &SingularCube, n: usize, shift: i64) -> Result<Vec<i64>> {
        let labels = sigma.labels();
        let d = sigma.dim();
        let n = n as i64;
        let mut z: Vec<Option<i64>> = vec![None; labels.len()];
        z[0] = Some(labels[0] as i64 + n * shift);
        for p in 1..labels.len() {
            let q = p ^ (p & p.wrapping_neg());
            let prev = z[q].expect("lower neighbour assigned");
            let step = (labels[p] as i64 - prev).mod_floor(&n);
            let delta = match step {
                0 => 0,
                1 => 1,
                s if s == n - 1 => -1,
                _ => {
                    return Err(Error::InvalidCube(format!(
                        "labels {} and {} are not adjacent",
                        labels[q], labels[p]
                    )))
                }
            };
            z[p] = Some(prev + delta);
        }
        let z: Vec<i64> = z.into_iter().map(|v| v.expect("assigned")).collect();
        for p in 0..z.len() {
            for k in 0..d {
                let q = p | (1 << k);
                if q != p && (z[p] - z[q]).abs() > 1 {
                    return Err(Error::LiftObstruction { cycle: (p, q) });
                }
            }
        }
        Ok(z)
    }

    /// `σ̃^N(a) = Σ_ε Π_i w_i(ε_i) z(ε)` with `w_i(0) = 1 − a_i/N`, `w_i(1) = a_i/N`.
    pub fn grid_values(z: &[i64], d: usize, big_n: usize) -> GridMap<Rational> {
        let total = (big_n + 1).pow(d as u32);
        let shape = GridMap {
            dim: d,
            n: big_n,
            values: vec![(); total],
        };
        let values = (0..total)
            .map(|idx| {
                let a = shape.coords(idx);
                let mut v = Rational::zero();
                for (eps, &ze) in z.iter().enumerate() {
                    let mut w = Rational::from_integer(1);
                    for (k, &ak) in a.iter().enumerate() {
                        let t = Rational::new(ak as i64, big_n as i64);
                        w *= if eps >> k & 1 == 1 {
                            t
                        } else {
                            Rational::from_integer(1) - t
                        };
                    }
                    v += w * Rational::from_integer(ze);
                }
                v
            })
            .collect();
        GridMap {
            dim: d,
            n: big_n,
            values,
        }
    }

    /// Prism values on `{0,…,m}^(d+1)` between `σ̃^m` and the top face.
    pub fn prism_values(z: &[i64], d: usize, m: usize) -> GridMap<Rational> {
        let bottom = grid_values(z, d, m);
        let layer = bottom.values.len();
        let mut values = Vec::with_capacity(layer * (m + 1));
        for k in 0..=m {
            let t = Rational::new(k as i64, m as i64);
            for i in 0..layer {
                let a = bottom.coords(i);
                let bits = a
                    .iter()
                    .enumerate()
                    .fold(0usize, |acc, (j, &x)| acc | (usize::from(x > 0) << j));
                let top = Rational::from_integer(z[bits]);
                values.push(bottom.values[i] * (Rational::from_integer(1) - t) + top * t);
            }
        }
        GridMap {
            dim: d + 1,
            n: m,
            values,
        }
    }

    pub fn floor_mod(grid: &GridMap<Rational>, n: usize) -> GridMap<Vertex> {
        grid.map(|v| v.floor().to_integer().mod_floor(&(n as i64)) as Vertex)
    }

    pub fn subdivide(sigma: &SingularCube, n: usize, big_n: usize) -> Result<Chain> {
        let z = lift_to_integers(sigma, n, anchor_depth(sigma.dim()) as i64)?;
        Ok(sum_small_cubes(
            &floor_mod(&grid_values(&z, sigma.dim(), big_n), n),
            1,
        ))
    }
}
