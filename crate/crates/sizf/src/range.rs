//! Range functions, orthogonal fiber projectors, fiber Gramians, and the
//! frame/Riesz/orthonormality bounds of translate systems.
//!
//! At each torus point `σ` the translates of the generators trace out the
//! fiber system `{π̃_σ(k) φ(σ)}`. Its Gram matrix shares its nonzero
//! spectrum with the fiber frame operator, so the extreme eigenvalues are
//! the frame (or Riesz) bounds of the system on the fiber span `J(σ)`; the
//! essential bounds over `σ` are the global constants of the full translate
//! family in the discrete model.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::action::{fiber_action, TranslateSystem};
use crate::error::{Error, Result};
use crate::group::lattice_gamma1;
use crate::space::{GridSpace, C64};
use crate::transform::{fiber_inner, fiber_vector_norm, FiberField, FiberVector, Layout};

/// Which pair of spectral bounds to extract from a fiber Gramian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundsMode {
    /// Bounds for the span: smallest eigenvalue above the rank cutoff and
    /// the largest eigenvalue.
    Frame,
    /// Smallest and largest eigenvalue; rank-deficient systems are rejected.
    Riesz,
    /// Upper bound only.
    Bessel,
}

impl std::str::FromStr for BoundsMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<BoundsMode> {
        match s {
            "frame" => Ok(BoundsMode::Frame),
            "riesz" => Ok(BoundsMode::Riesz),
            "bessel" => Ok(BoundsMode::Bessel),
            _ => Err(Error::Config(format!(
                "unknown mode `{s}` (expected frame, riesz, or bessel)"
            ))),
        }
    }
}

impl std::fmt::Display for BoundsMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundsMode::Frame => write!(f, "frame"),
            BoundsMode::Riesz => write!(f, "riesz"),
            BoundsMode::Bessel => write!(f, "bessel"),
        }
    }
}

/// Spectral bounds of one fiber Gramian.
#[derive(Debug, Clone, Serialize)]
pub struct FiberBounds {
    /// `A(σ)`; absent in bessel mode and for rank-zero fibers.
    pub lower: Option<f64>,
    /// `B(σ)`, the largest eigenvalue.
    pub upper: f64,
    /// Number of eigenvalues above the rank cutoff.
    pub rank: usize,
    /// All eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
}

/// Per-`σ` bounds with the grid point attached.
#[derive(Debug, Clone, Serialize)]
pub struct SigmaBounds {
    pub sigma: Vec<f64>,
    pub lower: Option<f64>,
    pub upper: f64,
    pub rank: usize,
    pub eigenvalues: Vec<f64>,
}

/// Discretization metadata carried by every report.
#[derive(Debug, Clone, Serialize)]
pub struct ReportMetadata {
    pub group: String,
    pub torus_samples: u32,
    pub grid_samples: u32,
    pub j_min: Vec<i64>,
    pub j_max: Vec<i64>,
    pub generator_count: usize,
    pub gamma1_count: usize,
    pub gamma1_radius: i64,
    pub pf_eps: f64,
    pub rank_rel_tol: f64,
    pub mode: BoundsMode,
}

/// Fiber-by-fiber Gramian spectra with the essential (min/max over the
/// σ-grid) frame or Riesz constants.
#[derive(Debug, Clone, Serialize)]
pub struct GramianReport {
    pub metadata: ReportMetadata,
    /// Global `A = min_σ A(σ)`.
    pub lower: Option<f64>,
    /// Global `B = max_σ B(σ)`.
    pub upper: Option<f64>,
    pub per_sigma: Vec<SigmaBounds>,
}

/// An orthonormal basis of the fiber span `J(σ)`.
#[derive(Debug, Clone)]
pub struct RangeSample {
    pub sigma_idx: usize,
    pub basis: Vec<FiberVector>,
    pub rank: usize,
}

/// The fiber system `{π̃_σ(k) φ(σ) : φ ∈ 𝒜, k ∈ Γ₁}` at one `σ`, generator
/// index major, `k` in the system's `Γ₁` order.
pub fn fiber_system(
    layout: &Layout,
    sigma_idx: usize,
    system: &TranslateSystem,
) -> Result<Vec<FiberVector>> {
    let mut out = Vec::with_capacity(system.generators().len() * system.gamma1().len());
    for phi in system.generators() {
        let fiber = phi.fiber(sigma_idx);
        for k in system.gamma1() {
            out.push(fiber_action(layout, sigma_idx, k, &fiber)?);
        }
    }
    Ok(out)
}

/// Gram matrix `G[i][j] = ⟨v_j, v_i⟩_𝓛`, hermitized by averaging with its
/// adjoint.
pub fn gramian(space: &GridSpace, vectors: &[FiberVector]) -> Result<DMatrix<C64>> {
    if vectors.is_empty() {
        return Err(Error::Invalid("gramian of an empty vector list".into()));
    }
    let n = vectors.len();
    let mut g = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = fiber_inner(space, &vectors[j], &vectors[i])?;
        }
    }
    let adj = g.adjoint();
    Ok((g + adj) * C64::new(0.5, 0.0))
}

/// Extracts the requested spectral bounds from a Hermitian PSD Gramian.
///
/// The rank cutoff is `rank_rel_tol · λ_max`; eigenvalues at or below it are
/// treated as numerical zeros of the span.
pub fn frame_bounds(g: &DMatrix<C64>, mode: BoundsMode, rank_rel_tol: f64) -> Result<FiberBounds> {
    if g.nrows() == 0 || g.nrows() != g.ncols() {
        return Err(Error::Invalid("frame_bounds: Gramian must be square and nonempty".into()));
    }
    let herm = (g + g.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| b.partial_cmp(a).expect("eigenvalues must be finite"));
    let lam_max = vals[0].max(0.0);
    let cutoff = rank_rel_tol * lam_max;
    let rank = vals.iter().filter(|&&v| v > cutoff).count();

    let lower = match mode {
        BoundsMode::Frame => {
            if rank > 0 {
                Some(vals[rank - 1])
            } else {
                None
            }
        }
        BoundsMode::Riesz => {
            let lam_min = *vals.last().unwrap();
            if lam_min <= cutoff {
                return Err(Error::RankDeficient { sigma: Vec::new() });
            }
            Some(lam_min)
        }
        BoundsMode::Bessel => None,
    };
    Ok(FiberBounds {
        lower,
        upper: lam_max,
        rank,
        eigenvalues: vals,
    })
}

/// Per-`σ` Gramian bounds and their essential extremes over the σ-grid.
///
/// Fibers are processed in parallel; the report is assembled in σ order, so
/// the result is identical for any thread count.
pub fn essential_bounds(
    system: &TranslateSystem,
    mode: BoundsMode,
    rank_rel_tol: f64,
) -> Result<GramianReport> {
    let layout = system.layout().clone();
    let space = layout.space();

    let per_sigma: Vec<Result<SigmaBounds>> = (0..layout.torus().count())
        .into_par_iter()
        .map(|sigma_idx| {
            let vectors = fiber_system(&layout, sigma_idx, system)?;
            let g = gramian(space, &vectors)?;
            let bounds = frame_bounds(&g, mode, rank_rel_tol).map_err(|e| match e {
                Error::RankDeficient { .. } => Error::RankDeficient {
                    sigma: layout.torus().sigma(sigma_idx),
                },
                other => other,
            })?;
            Ok(SigmaBounds {
                sigma: layout.torus().sigma(sigma_idx),
                lower: bounds.lower,
                upper: bounds.upper,
                rank: bounds.rank,
                eigenvalues: bounds.eigenvalues,
            })
        })
        .collect();

    let mut rows = Vec::with_capacity(per_sigma.len());
    for row in per_sigma {
        rows.push(row?);
    }

    let lower = rows
        .iter()
        .filter_map(|r| r.lower)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))));
    let upper = rows
        .iter()
        .map(|r| r.upper)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));

    Ok(GramianReport {
        metadata: ReportMetadata {
            group: layout.group().name().to_string(),
            torus_samples: layout.torus().samples(),
            grid_samples: layout.space().samples(),
            j_min: layout.fibers().j_min().to_vec(),
            j_max: layout.fibers().j_max().to_vec(),
            generator_count: system.generators().len(),
            gamma1_count: system.gamma1().len(),
            gamma1_radius: system.gamma1_radius(),
            pf_eps: layout.pf_eps(),
            rank_rel_tol,
            mode,
        },
        lower,
        upper,
        per_sigma: rows,
    })
}

/// Pivoted modified Gram–Schmidt with a relative drop tolerance.
///
/// Pivots on the largest residual norm (ties broken by index order); a
/// residual is dropped once its squared norm falls to `rel_tol` times the
/// largest initial squared norm. Pivots are re-orthogonalized once against
/// the accepted basis before being admitted.
fn pivoted_gram_schmidt(
    space: &GridSpace,
    vectors: &[FiberVector],
    rel_tol: f64,
) -> Result<Vec<FiberVector>> {
    let mut residuals: Vec<Option<FiberVector>> = vectors.iter().cloned().map(Some).collect();
    let scale = vectors
        .iter()
        .map(|v| {
            let n = fiber_vector_norm(space, v);
            n * n
        })
        .fold(0.0f64, f64::max);
    let mut basis: Vec<FiberVector> = Vec::new();
    if scale == 0.0 {
        return Ok(basis);
    }
    loop {
        let mut best: Option<(usize, f64)> = None;
        for (idx, res) in residuals.iter().enumerate() {
            if let Some(v) = res {
                let n = fiber_vector_norm(space, v);
                let nsq = n * n;
                if best.map_or(true, |(_, b)| nsq > b) {
                    best = Some((idx, nsq));
                }
            }
        }
        let Some((pivot_idx, pivot_sq)) = best else {
            break;
        };
        if pivot_sq <= rel_tol * scale {
            break;
        }
        let mut pivot = residuals[pivot_idx].take().unwrap();
        // one re-orthogonalization pass against the accepted basis
        for b in &basis {
            let overlap = fiber_inner(space, &pivot, b)?;
            pivot.add_scaled(b, -overlap);
        }
        let norm = fiber_vector_norm(space, &pivot);
        if norm * norm <= rel_tol * scale {
            continue;
        }
        pivot.scale(C64::new(1.0 / norm, 0.0));
        for res in residuals.iter_mut().flatten() {
            let overlap = fiber_inner(space, res, &pivot)?;
            res.add_scaled(&pivot, -overlap);
        }
        basis.push(pivot);
    }
    Ok(basis)
}

/// Orthonormal basis of the fiber span `J(σ) = span(fiber_system(σ))`.
pub fn range_sample(
    system: &TranslateSystem,
    sigma_idx: usize,
    rank_rel_tol: f64,
) -> Result<RangeSample> {
    let layout = system.layout();
    let vectors = fiber_system(layout, sigma_idx, system)?;
    let basis = pivoted_gram_schmidt(layout.space(), &vectors, rank_rel_tol)?;
    let rank = basis.len();
    Ok(RangeSample {
        sigma_idx,
        basis,
        rank,
    })
}

/// Orthogonal projection `P_σ h = Σ_b ⟨h, b⟩ b` onto the fiber span.
pub fn project(space: &GridSpace, rs: &RangeSample, h: &FiberVector) -> Result<FiberVector> {
    let mut out = FiberVector {
        slots: h
            .slots
            .iter()
            .map(|op| crate::space::Operator::zeros(op.nrows(), op.ncols()))
            .collect(),
    };
    for b in &rs.basis {
        let coeff = fiber_inner(space, h, b)?;
        out.add_scaled(b, coeff);
    }
    Ok(out)
}

/// Witness construction for the orthonormality corollary: orthonormalizes
/// the single-generator fiber system at every `σ` and returns the basis
/// vectors as a multi-generator system over the trivial `Γ₁ = {0}`.
///
/// The resulting fiber Gramians are the identity at every `σ`, and the
/// global translate Gram of the new system is the identity as well.
pub fn orthonormalize_fibers(
    system: &TranslateSystem,
    rank_rel_tol: f64,
) -> Result<TranslateSystem> {
    if system.generators().len() != 1 {
        return Err(Error::Invalid(
            "orthonormalize_fibers expects a single-generator system".into(),
        ));
    }
    let layout = system.layout().clone();
    let n = system.gamma1().len();
    let fiber_dim = layout.fibers().count() * layout.space().dim() * layout.space().dim();
    if fiber_dim < n {
        return Err(Error::Invalid(format!(
            "fiber dimension {fiber_dim} is too small to orthonormalize {n} translates"
        )));
    }

    let bases: Vec<Result<Vec<FiberVector>>> = (0..layout.torus().count())
        .into_par_iter()
        .map(|sigma_idx| {
            let vectors = fiber_system(&layout, sigma_idx, system)?;
            let basis = pivoted_gram_schmidt(layout.space(), &vectors, rank_rel_tol)?;
            if basis.len() < n {
                return Err(Error::RankDeficient {
                    sigma: layout.torus().sigma(sigma_idx),
                });
            }
            Ok(basis)
        })
        .collect();

    let mut generators = vec![FiberField::zero(&layout); n];
    for (sigma_idx, basis) in bases.into_iter().enumerate() {
        let basis = basis?;
        for (i, vector) in basis.into_iter().enumerate() {
            generators[i].set_fiber(sigma_idx, vector)?;
        }
    }
    TranslateSystem::new(generators, lattice_gamma1(layout.group(), 0))
}

/// Invariance defect of the sampled range space under `π̃_σ(k)`:
/// `max_b ‖(I − P_σ) π̃_σ(k) b‖_𝓛` over the basis.
pub fn invariance_defect(
    layout: &Layout,
    rs: &RangeSample,
    k: &[i64],
) -> Result<f64> {
    let space = layout.space();
    let mut worst = 0.0f64;
    for b in &rs.basis {
        let moved = fiber_action(layout, rs.sigma_idx, k, b)?;
        let proj = project(space, rs, &moved)?;
        let mut diff = moved;
        diff.add_scaled(&proj, C64::new(-1.0, 0.0));
        worst = worst.max(fiber_vector_norm(space, &diff));
    }
    Ok(worst)
}

/// Per-`σ` membership residuals of a fiber field against the range function
/// of a translate system.
#[derive(Debug, Clone, Serialize)]
pub struct MembershipReport {
    pub per_sigma: Vec<f64>,
    pub max: f64,
}

/// Residual `‖f(σ) − P_σ f(σ)‖_𝓛` per `σ`; `f` lies in the generated space
/// exactly when the residual vanishes for every `σ`.
pub fn membership_residual(
    f: &FiberField,
    system: &TranslateSystem,
    rank_rel_tol: f64,
) -> Result<MembershipReport> {
    let layout = system.layout().clone();
    if !layout.same_shape(f.layout()) {
        return Err(Error::LayoutMismatch("membership_residual".into()));
    }
    let per_sigma: Vec<Result<f64>> = (0..layout.torus().count())
        .into_par_iter()
        .map(|sigma_idx| {
            let rs = range_sample(system, sigma_idx, rank_rel_tol)?;
            let h = f.fiber(sigma_idx);
            let proj = project(layout.space(), &rs, &h)?;
            let mut diff = h;
            diff.add_scaled(&proj, C64::new(-1.0, 0.0));
            Ok(fiber_vector_norm(layout.space(), &diff))
        })
        .collect();
    let mut rows = Vec::with_capacity(per_sigma.len());
    for row in per_sigma {
        rows.push(row?);
    }
    let max = rows.iter().copied().fold(0.0f64, f64::max);
    Ok(MembershipReport {
        per_sigma: rows,
        max,
    })
}
