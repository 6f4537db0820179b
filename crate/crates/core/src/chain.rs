//! Integer chains of non-degenerate cubes and the cubical boundary.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cube::{face_labels, is_degenerate_labels, SingularCube};
use crate::error::{Error, Result};
use crate::graph::Vertex;

/// A finite integer combination of non-degenerate d-cubes. Zero coefficients
/// and degenerate keys are never stored.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Chain {
    dim: usize,
    terms: BTreeMap<Vec<Vertex>, i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainTerm {
    pub labels: Vec<Vertex>,
    pub coeff: i64,
}

impl fmt::Debug for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (labels, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(
                f,
                "{c:+}{:?}",
                SingularCube::from_labels_unchecked(labels.clone())
            )?;
        }
        Ok(())
    }
}

impl Chain {
    pub fn zero(dim: usize) -> Self {
        Chain {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_cube(cube: &SingularCube) -> Self {
        let mut c = Chain::zero(cube.dim());
        c.add_term(cube.labels(), 1);
        c
    }

    /// Parses a list of `(labels, coeff)` pairs. Degenerate keys vanish.
    pub fn from_terms(
        dim: usize,
        terms: impl IntoIterator<Item = (Vec<Vertex>, i64)>,
    ) -> Result<Self> {
        let mut c = Chain::zero(dim);
        for (labels, coeff) in terms {
            if labels.len() != 1 << dim {
                return Err(Error::domain(format!(
                    "mixed dimensions: expected {} labels, got {}",
                    1usize << dim,
                    labels.len()
                )));
            }
            c.add_term(&labels, coeff);
        }
        Ok(c)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, labels: &[Vertex]) -> i64 {
        self.terms.get(labels).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[Vertex], i64)> + '_ {
        self.terms.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    pub fn to_records(&self) -> Vec<ChainTerm> {
        self.terms
            .iter()
            .map(|(k, &v)| ChainTerm {
                labels: k.clone(),
                coeff: v,
            })
            .collect()
    }

    /// Adds `coeff · labels`; a degenerate cube is the zero class and is ignored.
    pub fn add_term(&mut self, labels: &[Vertex], coeff: i64) {
        debug_assert_eq!(labels.len(), 1 << self.dim);
        if coeff == 0 || is_degenerate_labels(labels, self.dim) {
            return;
        }
        self.add_raw(labels, coeff);
    }

    fn add_raw(&mut self, labels: &[Vertex], coeff: i64) {
        if let Some(c) = self.terms.get_mut(labels) {
            *c += coeff;
            if *c == 0 {
                self.terms.remove(labels);
            }
        } else {
            self.terms.insert(labels.to_vec(), coeff);
        }
    }

    pub fn add_scaled(&mut self, other: &Chain, k: i64) -> Result<()> {
        if other.dim != self.dim && !other.is_zero() {
            return Err(Error::domain(format!(
                "cannot add a {}-chain to a {}-chain",
                other.dim, self.dim
            )));
        }
        for (labels, &c) in &other.terms {
            self.add_raw(labels, c * k);
        }
        Ok(())
    }

    pub fn scaled(&self, k: i64) -> Chain {
        let mut c = Chain::zero(self.dim);
        if k != 0 {
            c.terms = self
                .terms
                .iter()
                .map(|(l, &v)| (l.clone(), v * k))
                .collect();
        }
        c
    }

    pub fn sub(&self, other: &Chain) -> Result<Chain> {
        let mut c = self.clone();
        c.add_scaled(other, -1)?;
        Ok(c)
    }

    /// Cubes of the chain, in sorted order.
    pub fn support(&self) -> impl Iterator<Item = &[Vertex]> + '_ {
        self.terms.keys().map(Vec::as_slice)
    }
}

/// Calls `f(face_labels, sign)` for every face term of `∂σ`, degenerate faces
/// included.
pub(crate) fn for_each_face(labels: &[Vertex], dim: usize, mut f: impl FnMut(Vec<Vertex>, i64)) {
    for axis in 0..dim {
        // (-1)^i with i = axis + 1
        let s = if axis % 2 == 0 { -1 } else { 1 };
        f(face_labels(labels, dim, axis, 0), s);
        f(face_labels(labels, dim, axis, 1), -s);
    }
}

/// `∂` on the quotient: degenerate faces are dropped as they are produced.
pub fn boundary(c: &Chain) -> Chain {
    if c.dim == 0 {
        return Chain::zero(0);
    }
    let mut out = Chain::zero(c.dim - 1);
    for (labels, &k) in &c.terms {
        for_each_face(labels, c.dim, |face, s| out.add_term(&face, s * k));
    }
    out
}

/// `∂` before the quotient: every face is kept, degenerate or not. The result
/// is a plain map from label sequences to coefficients.
pub fn boundary_prequotient(c: &Chain) -> BTreeMap<Vec<Vertex>, i64> {
    let mut out: BTreeMap<Vec<Vertex>, i64> = BTreeMap::new();
    if c.dim == 0 {
        return out;
    }
    for (labels, &k) in &c.terms {
        for_each_face(labels, c.dim, |face, s| {
            *out.entry(face).or_insert(0) += s * k
        });
    }
    out.retain(|_, v| *v != 0);
    out
}

/// Projects a pre-quotient combination to `C_d` by discarding degenerate cubes.
pub fn project_to_quotient(dim: usize, raw: &BTreeMap<Vec<Vertex>, i64>) -> Chain {
    let mut c = Chain::zero(dim);
    for (labels, &k) in raw {
        c.add_term(labels, k);
    }
    c
}
