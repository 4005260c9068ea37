//! Bézier simplices `b(w) = Σ_{i ∈ ℕ^m_d} C(d, i) w^i p_i`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::simplex::{enumerate_multi_indices, int_pow, multinomial_f64, FaceIndex, MultiIndex, WeightVector};

#[derive(Debug, Clone, PartialEq)]
pub struct BezierSimplexModel {
    m: usize,
    degree: u32,
    out_dim: usize,
    indices: Vec<MultiIndex>,
    coefficients: Vec<f64>,
    /// Row-major, one row per multi-index in reverse-lexicographic order.
    control_points: Vec<f64>,
}

impl BezierSimplexModel {
    /// `control_points[k]` belongs to the k-th multi-index of
    /// [`enumerate_multi_indices`]`(m, degree)`.
    pub fn new(m: usize, degree: u32, out_dim: usize, control_points: Vec<Vec<f64>>) -> Result<Self> {
        let expected = enumerate_multi_indices(m, degree).len();
        if control_points.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: control_points.len(),
            });
        }
        let mut flat = Vec::with_capacity(expected * out_dim);
        for p in &control_points {
            if p.len() != out_dim {
                return Err(Error::DimensionMismatch {
                    expected: out_dim,
                    found: p.len(),
                });
            }
            flat.extend_from_slice(p);
        }
        Self::from_flat(m, degree, out_dim, flat)
    }

    /// Same as [`new`](Self::new) with the control points flattened row-major.
    pub fn from_flat(m: usize, degree: u32, out_dim: usize, control_points: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidModel("input dimension must be positive"));
        }
        if out_dim == 0 {
            return Err(Error::InvalidModel("output dimension must be positive"));
        }
        let indices = enumerate_multi_indices(m, degree);
        if control_points.len() != indices.len() * out_dim {
            return Err(Error::DimensionMismatch {
                expected: indices.len() * out_dim,
                found: control_points.len(),
            });
        }
        if control_points.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("non-finite control point"));
        }
        let coefficients = indices.iter().map(multinomial_f64).collect();
        Ok(Self {
            m,
            degree,
            out_dim,
            indices,
            coefficients,
            control_points,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn n_control_points(&self) -> usize {
        self.indices.len()
    }

    pub fn control_point(&self, k: usize) -> &[f64] {
        &self.control_points[k * self.out_dim..(k + 1) * self.out_dim]
    }

    pub fn control_points(&self) -> impl Iterator<Item = &[f64]> {
        self.control_points.chunks_exact(self.out_dim)
    }

    pub fn control_point_for(&self, index: &MultiIndex) -> Option<&[f64]> {
        // Reverse-lexicographic order is strictly descending.
        self.indices
            .binary_search_by(|probe| index.cmp(probe))
            .ok()
            .map(|k| self.control_point(k))
    }

    /// Bernstein basis values at `w`, in control-point order.
    pub fn basis(&self, w: &WeightVector) -> Result<Vec<f64>> {
        if w.dim() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: w.dim(),
            });
        }
        Ok(basis_with(&self.indices, &self.coefficients, self.degree, w.as_slice()))
    }

    pub fn evaluate(&self, w: &WeightVector) -> Result<Vec<f64>> {
        let basis = self.basis(w)?;
        let mut out = alloc::vec![0.0; self.out_dim];
        for (b, p) in basis.iter().zip(self.control_points()) {
            for (o, v) in out.iter_mut().zip(p) {
                *o += b * v;
            }
        }
        Ok(out)
    }

    /// The Bézier simplex over the face Δ_I: keeps `p_i` with `i_j = 0` for
    /// every `j ∉ I`, re-indexed on ℕ^{|I|}_d. Reverse-lexicographic order
    /// survives the projection, so evaluation on the face sums the same
    /// terms in the same order as the full model.
    pub fn restrict_to_face(&self, face: &FaceIndex) -> Result<Self> {
        if face.ambient() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: face.ambient(),
            });
        }
        let mut flat = Vec::new();
        for (k, idx) in self.indices.iter().enumerate() {
            let on_face = idx.exponents().iter().enumerate().all(|(j, &e)| e == 0 || face.contains(j));
            if on_face {
                flat.extend_from_slice(self.control_point(k));
            }
        }
        Self::from_flat(face.len(), self.degree, self.out_dim, flat)
    }
}

/// Bernstein values for `indices` at `w`, reusing one power table.
pub(crate) fn basis_with(indices: &[MultiIndex], coefficients: &[f64], degree: u32, w: &[f64]) -> Vec<f64> {
    let powers: Vec<Vec<f64>> = w.iter().map(|&x| (0..=degree).map(|e| int_pow(x, e)).collect()).collect();
    indices
        .iter()
        .zip(coefficients)
        .map(|(idx, &c)| idx.exponents().iter().zip(&powers).fold(c, |acc, (&e, pw)| acc * pw[e as usize]))
        .collect()
}
