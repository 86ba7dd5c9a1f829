//! Independent brute-force verifiers.
//!
//! Every check here recomputes its quantities from the group/space/transform
//! primitives without reusing the fiber machinery's shortcuts: translate
//! Grams are assembled coefficient by coefficient from explicitly translated
//! fields, trigonometric polynomials are evaluated by direct DFT, and
//! representation products are compared entrywise as dense matrices. These
//! are the ground truths the acceptance suite measures the fast paths
//! against.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::action::{
    analysis_coefficient, fiber_action, frame_sum, synthesis, translate, Coefficients,
    FrameSumMethod, TranslateSystem,
};
use crate::error::{Error, Result};
use crate::group::{rep_matrix, GroupName, GroupSpec, LatticePoint};
use crate::space::{GridSpace, C64};
use crate::transform::{fiber_inner_slices, fiber_norm, FiberField, TorusGrid};

/// Size guard for the dense translate Gram (O(n³) eigensolve budget).
pub const TRANSLATE_GRAM_MAX: usize = 4096;

/// Label of one translate: (generator index, k, m).
pub type TranslateLabel = (usize, Vec<i64>, Vec<i64>);

/// Dense Gram matrix of the full translate family `{(k,m)·φ}` over
/// generator-major, then `k`, then `m` lexicographic order.
///
/// Entries are `⟨(column)·φ', (row)·φ⟩`, each computed through
/// [`analysis_coefficient`] applied to an explicitly translated field; no
/// fiber Gramian is reused.
pub fn translate_gram(
    system: &TranslateSystem,
) -> Result<(DMatrix<C64>, Vec<TranslateLabel>)> {
    let layout = system.layout().clone();
    let m_points = layout.torus().m_points();
    let mut labels: Vec<TranslateLabel> = Vec::new();
    for phi_idx in 0..system.generators().len() {
        for k in system.gamma1() {
            for m in &m_points {
                labels.push((phi_idx, k.clone(), m.clone()));
            }
        }
    }
    let n = labels.len();
    if n > TRANSLATE_GRAM_MAX {
        return Err(Error::Invalid(format!(
            "translate_gram: {n} vectors exceed the desk-scale guard of {TRANSLATE_GRAM_MAX}"
        )));
    }

    let translated: Vec<FiberField> = labels
        .iter()
        .map(|(phi_idx, k, m)| {
            translate(
                &system.generators()[*phi_idx],
                &LatticePoint::new(k.clone(), m.clone()),
            )
        })
        .collect::<Result<_>>()?;

    let rows: Vec<Result<Vec<C64>>> = (0..n)
        .into_par_iter()
        .map(|row| {
            let (phi_idx, k, m) = &labels[row];
            let gamma = LatticePoint::new(k.clone(), m.clone());
            let mut out = Vec::with_capacity(n);
            for col in 0..n {
                out.push(analysis_coefficient(
                    &translated[col],
                    &system.generators()[*phi_idx],
                    &gamma,
                )?);
            }
            Ok(out)
        })
        .collect();

    let mut g = DMatrix::<C64>::zeros(n, n);
    for (row, entries) in rows.into_iter().enumerate() {
        for (col, v) in entries?.into_iter().enumerate() {
            g[(row, col)] = v;
        }
    }
    let adj = g.adjoint();
    Ok(((g + adj) * C64::new(0.5, 0.0), labels))
}

/// Outcome of a two-route comparison.
#[derive(Debug, Clone, Copy)]
pub struct TwoRouteCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
}

fn rel_err(lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    }
}

/// Verifies the synthesis-norm identity: the squared norm of
/// `Σ a_{φ,k,m} (k,m)·φ` equals the σ-average of
/// `‖Σ_{φ,k} P_{φ,k}(σ) π̃_σ(k) φ(σ)‖²`, where `P_{φ,k}` is the
/// trigonometric polynomial of the `m`-coefficients, evaluated by direct
/// DFT.
pub fn equality_lemma_check(
    coeffs: &Coefficients,
    system: &TranslateSystem,
) -> Result<TwoRouteCheck> {
    let lhs = {
        let s = synthesis(coeffs, system)?;
        let n = fiber_norm(&s);
        n * n
    };

    let layout = system.layout().clone();
    let space = layout.space();
    // group coefficients by (φ, k)
    let mut grouped: BTreeMap<(usize, Vec<i64>), Vec<(Vec<i64>, C64)>> = BTreeMap::new();
    for ((phi_idx, k, m), &a) in &coeffs.0 {
        grouped
            .entry((*phi_idx, k.clone()))
            .or_default()
            .push((m.clone(), a));
    }

    let mut rhs = 0.0f64;
    for sigma_idx in 0..layout.torus().count() {
        let sigma = layout.torus().sigma(sigma_idx);
        let mut acc: Option<crate::transform::FiberVector> = None;
        for ((phi_idx, k), terms) in &grouped {
            // P_{φ,k}(σ) = Σ_m a_m e^{2πi⟨σ,m⟩}
            let mut p = C64::new(0.0, 0.0);
            for (m, a) in terms {
                p += a * crate::action::central_character(&sigma, m);
            }
            let phi = &system.generators()[*phi_idx];
            let moved = fiber_action(&layout, sigma_idx, k, &phi.fiber(sigma_idx))?;
            match &mut acc {
                None => {
                    let mut v = moved;
                    v.scale(p);
                    acc = Some(v);
                }
                Some(v) => v.add_scaled(&moved, p),
            }
        }
        if let Some(v) = acc {
            let n = crate::transform::fiber_vector_norm(space, &v);
            rhs += n * n;
        }
    }
    rhs *= layout.sigma_weight();

    Ok(TwoRouteCheck {
        lhs,
        rhs,
        rel_err: rel_err(lhs, rhs),
    })
}

/// Parseval identity for trigonometric polynomials on the torus grid:
/// `Σ_m |a_m|²` against `S^{−r} Σ_σ |Σ_m a_m e^{2πi⟨σ,m⟩}|²`.
pub fn trig_parseval_check(
    torus: &TorusGrid,
    coeffs: &BTreeMap<Vec<i64>, C64>,
) -> TwoRouteCheck {
    let lhs: f64 = coeffs.values().map(|c| c.norm_sqr()).sum();
    let mut rhs = 0.0f64;
    for sigma_idx in 0..torus.count() {
        let sigma = torus.sigma(sigma_idx);
        let mut p = C64::new(0.0, 0.0);
        for (m, a) in coeffs {
            p += a * crate::action::central_character(&sigma, m);
        }
        rhs += p.norm_sqr();
    }
    rhs /= torus.count() as f64;
    TwoRouteCheck {
        lhs,
        rhs,
        rel_err: rel_err(lhs, rhs),
    }
}

/// Coefficient-sum identity: the direct sum over every `(φ, k, m)` versus
/// the fiberized sum, both computed from scratch.
pub fn sumid_check(f: &FiberField, system: &TranslateSystem) -> Result<TwoRouteCheck> {
    let direct = frame_sum(f, system, FrameSumMethod::Direct)?;
    let fiber = frame_sum(f, system, FrameSumMethod::Fiber)?;
    Ok(TwoRouteCheck {
        lhs: direct,
        rhs: fiber,
        rel_err: rel_err(direct, fiber),
    })
}

/// Result of a projective homomorphism probe.
#[derive(Debug, Clone, Copy)]
pub struct HomomorphismCheck {
    /// `max |π_λ(a) π_λ(b) − c · π_λ(a ⊞ b)|` over matrix entries.
    pub defect: f64,
    /// The unimodular scalar `c`, read off the first nonzero entry.
    pub scalar: C64,
    /// The closed-form cocycle predicted for the preset.
    pub predicted: C64,
}

/// Checks that the discretized representation is a projective homomorphism
/// under coordinatewise lattice composition `a ⊞ b`, and compares the
/// extracted unimodular scalar with the preset's closed-form cocycle.
pub fn homomorphism_check(
    spec: &GroupSpec,
    space: &GridSpace,
    lambda: &[f64],
    a: &LatticePoint,
    b: &LatticePoint,
) -> Result<HomomorphismCheck> {
    if !spec.has_group_law() {
        return Err(Error::NoGroupLaw(spec.name().to_string()));
    }
    let ga = spec.element_from_lattice(a)?;
    let gb = spec.element_from_lattice(b)?;
    let sum = a.coordinate_sum(b);
    let gsum = spec.element_from_lattice(&sum)?;

    let ua = rep_matrix(spec, space, lambda, &ga)?;
    let ub = rep_matrix(spec, space, lambda, &gb)?;
    let usum = rep_matrix(spec, space, lambda, &gsum)?;
    let prod = ua * ub;

    // c from the first nonzero entry of the target, row-major scan
    let n = usum.nrows();
    let mut scalar = C64::new(1.0, 0.0);
    'scan: for i in 0..n {
        for j in 0..n {
            if usum[(i, j)].norm() > 1e-12 {
                let c = prod[(i, j)] / usum[(i, j)];
                scalar = c / c.norm();
                break 'scan;
            }
        }
    }

    let mut defect = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            defect = defect.max((prod[(i, j)] - scalar * usum[(i, j)]).norm());
        }
    }

    let predicted = predicted_cocycle(spec, lambda, a, b);
    Ok(HomomorphismCheck {
        defect,
        scalar,
        predicted,
    })
}

/// Closed-form cocycle `π_λ(a)π_λ(b) = c · π_λ(a ⊞ b)` for the presets with
/// a printed law: `e^{2πiλ x_a y_b}` for heisenberg3, the `M_λ` pairing for
/// twostep6, and 1 for abelian groups.
pub fn predicted_cocycle(
    spec: &GroupSpec,
    lambda: &[f64],
    a: &LatticePoint,
    b: &LatticePoint,
) -> C64 {
    use std::f64::consts::TAU;
    match spec.name() {
        GroupName::Abelian(_) => C64::new(1.0, 0.0),
        GroupName::Heisenberg3 => {
            C64::cis(TAU * lambda[0] * a.k[0] as f64 * b.k[1] as f64)
        }
        GroupName::TwoStep6 => {
            let (l1, l2) = (lambda[0], lambda[1]);
            let (xa1, xa2) = (a.k[0] as f64, a.k[1] as f64);
            let (yb1, yb2) = (b.k[2] as f64, b.k[3] as f64);
            // ⟨x_a, M_λ y_b⟩ with M_λ = [[λ₁,λ₂],[λ₂,λ₁]]
            C64::cis(TAU * (xa1 * (l1 * yb1 + l2 * yb2) + xa2 * (l2 * yb1 + l1 * yb2)))
        }
        GroupName::ThreeStep5 => C64::new(1.0, 0.0),
    }
}
