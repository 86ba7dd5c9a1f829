//! The discrete model of `L²(ℝ^d)` and of the Hilbert–Schmidt space attached
//! to each irreducible representation.
//!
//! Functions on `ℝ^d` are sampled on a periodic grid of `q` points per axis
//! covering a window of length `W` per axis, so the model space has dimension
//! `q^d` (one when `d = 0`). Operators are dense complex matrices; the
//! Hilbert–Schmidt pairing carries the grid measure `spacing^d` so that
//! refinement approximates continuum norms.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex double precision scalar used throughout the crate.
pub type C64 = Complex64;

/// Dense complex matrix modelling a Hilbert–Schmidt operator on the grid space.
pub type Operator = DMatrix<C64>;

/// Periodic sampling grid for the realization space `L²(ℝ^d)`.
///
/// `samples` must be a multiple of `window` so that unit translations are
/// exact cyclic shifts of `samples / window` grid points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridSpace {
    d: usize,
    window: u32,
    samples: u32,
}

impl GridSpace {
    pub fn new(d: usize, window: u32, samples: u32) -> Result<Self> {
        if window == 0 || samples == 0 {
            return Err(Error::Config(
                "grid window and sample count must be positive".into(),
            ));
        }
        if samples % window != 0 {
            return Err(Error::Config(format!(
                "samples per axis ({samples}) must be a multiple of the window length ({window})"
            )));
        }
        Ok(GridSpace { d, window, samples })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn window(&self) -> u32 {
        self.window
    }

    pub fn samples(&self) -> u32 {
        self.samples
    }

    /// Grid step `W / q` per axis.
    pub fn spacing(&self) -> f64 {
        f64::from(self.window) / f64::from(self.samples)
    }

    /// Dimension of the model space, `q^d` (1 when `d = 0`).
    pub fn dim(&self) -> usize {
        (self.samples as usize).pow(self.d as u32)
    }

    /// Grid measure `spacing^d` of one cell.
    pub fn measure(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }

    /// Axis indices of a flattened grid index (row-major, first axis major).
    pub fn axis_indices(&self, flat: usize) -> Vec<usize> {
        let q = self.samples as usize;
        let mut idx = vec![0usize; self.d];
        let mut rest = flat;
        for a in (0..self.d).rev() {
            idx[a] = rest % q;
            rest /= q;
        }
        idx
    }

    /// Flattened index of axis indices.
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        let q = self.samples as usize;
        idx.iter().fold(0usize, |acc, &i| acc * q + (i % q))
    }

    /// Coordinates of the grid point with the given flattened index.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let sp = self.spacing();
        self.axis_indices(flat)
            .into_iter()
            .map(|i| i as f64 * sp)
            .collect()
    }
}

/// Hilbert–Schmidt inner product `trace(B* A) · spacing^d`.
///
/// Linear in the first argument, conjugate linear in the second. Summation
/// runs in the matrices' storage order, so results are bit-reproducible.
pub fn hs_inner(space: &GridSpace, a: &Operator, b: &Operator) -> Result<C64> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "hs_inner: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let mut acc = C64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        acc += y.conj() * x;
    }
    Ok(acc * space.measure())
}

/// Hilbert–Schmidt norm induced by [`hs_inner`].
pub fn hs_norm(space: &GridSpace, a: &Operator) -> f64 {
    let mut acc = 0.0f64;
    for x in a.iter() {
        acc += x.norm_sqr();
    }
    (acc * space.measure()).sqrt()
}

/// Rank-one operator `u ⊗ v*`, i.e. the matrix `u v^H`.
///
/// Left composition with a unitary `U` sends `u ⊗ v*` to `(Uu) ⊗ v*`.
pub fn rank_one(space: &GridSpace, u: &DVector<C64>, v: &DVector<C64>) -> Result<Operator> {
    if u.len() != space.dim() || v.len() != space.dim() {
        return Err(Error::ShapeMismatch(format!(
            "rank_one: vector lengths {} and {} do not match the space dimension {}",
            u.len(),
            v.len(),
            space.dim()
        )));
    }
    Ok(u * v.adjoint())
}

/// Grid inner product `spacing^d · Σ u_i conj(v_i)` on vectors.
pub fn grid_inner(space: &GridSpace, u: &DVector<C64>, v: &DVector<C64>) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (x, y) in u.iter().zip(v.iter()) {
        acc += y.conj() * x;
    }
    acc * space.measure()
}

/// Grid norm of a vector, `‖u‖ = (spacing^d Σ |u_i|²)^{1/2}`.
pub fn grid_norm(space: &GridSpace, u: &DVector<C64>) -> f64 {
    let mut acc = 0.0f64;
    for x in u.iter() {
        acc += x.norm_sqr();
    }
    (acc * space.measure()).sqrt()
}
