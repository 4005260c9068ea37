//! Simplex combinatorics: weight vectors on Δ^{m−1}, faces, multi-indices
//! of ℕ^m_d, multinomial coefficients, Bernstein basis values and grids.
//!
//! Multi-indices are always listed in reverse-lexicographic order: the first
//! exponent descends fastest to slowest, so for `m = 3, d = 1` the order is
//! `(1,0,0), (0,1,0), (0,0,1)`. Serialized models depend on this order.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Allowed deviation of `Σ w_k` from 1.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// A point of the standard simplex Δ^{m−1}.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidWeight("no components"));
        }
        if components.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidWeight("non-finite component"));
        }
        if components.iter().any(|&c| c < 0.0) {
            return Err(Error::InvalidWeight("negative component"));
        }
        let sum: f64 = components.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidWeight("components do not sum to 1"));
        }
        Ok(Self(components))
    }

    /// The `k`-th vertex `e_k` of Δ^{m−1} (0-based).
    pub fn vertex(m: usize, k: usize) -> Self {
        assert!(k < m, "vertex index out of range");
        let mut c = alloc::vec![0.0; m];
        c[k] = 1.0;
        Self(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// ℓ1 distance `Σ |w_k − w̃_k|`.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).sum()
    }
}

impl core::ops::Index<usize> for WeightVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// A non-empty face `I ⊆ {0, .., m−1}` of Δ^{m−1}, stored 0-based and sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceIndex {
    members: Vec<usize>,
    ambient: usize,
}

impl FaceIndex {
    pub fn new(members: &[usize], ambient: usize) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidFace("empty face"));
        }
        if members.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::InvalidFace("members must be strictly increasing"));
        }
        if members[members.len() - 1] >= ambient {
            return Err(Error::InvalidFace("member outside the ambient simplex"));
        }
        Ok(Self {
            members: members.to_vec(),
            ambient,
        })
    }

    /// The whole simplex as a face of itself.
    pub fn full(ambient: usize) -> Self {
        Self {
            members: (0..ambient).collect(),
            ambient,
        }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, k: usize) -> bool {
        self.members.binary_search(&k).is_ok()
    }
}

/// An element of ℕ^m_d.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self(exponents)
    }

    /// `d · e_k`, the index of the control point at vertex `k`.
    pub fn corner(m: usize, k: usize, degree: u32) -> Self {
        let mut e = alloc::vec![0; m];
        e[k] = degree;
        Self(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }
}

/// All of ℕ^m_d in reverse-lexicographic order; `C(d+m−1, m−1)` entries.
/// Returns an empty list for `m = 0`.
pub fn enumerate_multi_indices(m: usize, d: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    if m == 0 {
        return out;
    }
    let mut current = alloc::vec![0u32; m];
    fill_revlex(&mut current, 0, d, &mut out);
    out
}

fn fill_revlex(current: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex(current.to_vec()));
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        fill_revlex(current, pos + 1, remaining - e, out);
    }
    current[pos] = 0;
}

/// Binomial coefficient with checked arithmetic. `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 1..=k {
        // acc * (n - k + j) / j stays integral at every step.
        acc = acc.checked_mul(u128::from(n - k + j))? / u128::from(j);
    }
    Some(acc)
}

/// `d! / (i_1! ⋯ i_m!)`, computed as a product of binomials
/// `C(i_1, i_1) · C(i_1+i_2, i_2) ⋯` so no factorial is ever formed.
pub fn multinomial_coefficient(d: u32, index: &MultiIndex) -> Result<u128> {
    if index.degree() != d {
        return Err(Error::InvalidMultiIndex { degree: d });
    }
    let mut acc: u128 = 1;
    let mut partial: u64 = 0;
    for &e in index.exponents() {
        partial += u64::from(e);
        let b = binomial(partial, u64::from(e)).ok_or(Error::CoefficientOverflow { degree: d })?;
        acc = acc
            .checked_mul(b)
            .ok_or(Error::CoefficientOverflow { degree: d })?;
    }
    Ok(acc)
}

/// The multinomial coefficient as a float. Exact whenever the integer value
/// is below 2^53; falls back to a floating product past `u128` range.
pub(crate) fn multinomial_f64(index: &MultiIndex) -> f64 {
    match multinomial_coefficient(index.degree(), index) {
        Ok(c) => c as f64,
        Err(_) => {
            let mut acc = 1.0;
            let mut partial = 0u32;
            for &e in index.exponents() {
                partial += e;
                for j in 1..=e {
                    acc *= f64::from(partial - e + j) / f64::from(j);
                }
            }
            acc
        }
    }
}

/// `x^e` by repeated multiplication; `0^0 = 1`.
pub(crate) fn int_pow(x: f64, e: u32) -> f64 {
    let mut acc = 1.0;
    let mut base = x;
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    acc
}

/// `C(d, i) · w^i` with the convention `0^0 = 1`, so vertex values are exact.
///
/// Panics when `i` and `w` have different lengths.
pub fn bernstein_value(index: &MultiIndex, w: &WeightVector) -> f64 {
    assert_eq!(index.dim(), w.dim(), "multi-index and weight dimensions differ");
    let coeff = multinomial_f64(index);
    index
        .exponents()
        .iter()
        .zip(w.as_slice())
        .fold(coeff, |acc, (&e, &x)| acc * int_pow(x, e))
}

/// All vectors `(n_1, .., n_m) / resolution` with `Σ n_k = resolution`, in the
/// same reverse-lexicographic order as [`enumerate_multi_indices`]. Each
/// component is a single correctly rounded division.
pub fn grid_points(m: usize, resolution: u32) -> Vec<WeightVector> {
    assert!(resolution >= 1, "resolution must be positive");
    let r = f64::from(resolution);
    enumerate_multi_indices(m, resolution)
        .into_iter()
        .map(|i| WeightVector(i.0.iter().map(|&n| f64::from(n) / r).collect()))
        .collect()
}

/// Places a point of Δ^{|I|−1} on the face Δ_I of Δ^{m−1}.
pub fn embed_face(face: &FaceIndex, w_face: &WeightVector) -> Result<WeightVector> {
    if w_face.dim() != face.len() {
        return Err(Error::DimensionMismatch {
            expected: face.len(),
            found: w_face.dim(),
        });
    }
    let mut out = alloc::vec![0.0; face.ambient()];
    for (&k, &x) in face.members().iter().zip(w_face.as_slice()) {
        out[k] = x;
    }
    Ok(WeightVector(out))
}

/// Inverse of [`embed_face`]: reads the `I`-components of a point of Δ_I.
/// Rejects points with mass outside the face.
pub fn project_face(face: &FaceIndex, w: &WeightVector) -> Result<WeightVector> {
    if w.dim() != face.ambient() {
        return Err(Error::DimensionMismatch {
            expected: face.ambient(),
            found: w.dim(),
        });
    }
    if (0..w.dim()).any(|k| !face.contains(k) && w[k] != 0.0) {
        return Err(Error::InvalidWeight("point does not lie on the face"));
    }
    Ok(WeightVector(face.members().iter().map(|&k| w[k]).collect()))
}
