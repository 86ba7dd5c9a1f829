//! The lattice action on fibers: central characters, the fiberwise unitary
//! action, full lattice translates, analysis coefficients, frame sums, and
//! synthesis.
//!
//! A lattice point `γ = (k, m)` acts on a fiber field `a` by
//! `(γ·a)(σ) = e^{2πi⟨σ,m⟩} · π̃_σ(k) a(σ)`, where `π̃_σ(k)` composes each
//! slot with the representation at `λ = σ + j`. This *is* the model's
//! definition of the transform of a lattice translate, so every
//! translate-side statement is computed on the Fourier side.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::group::{rep_op, LatticePoint};
use crate::space::C64;
use crate::transform::{fiber_inner_slices, FiberField, FiberVector, Layout};

/// A countable family of generators together with the truncated lattice
/// `Γ₁` they are translated along. The central lattice `Γ₀ = ℤ_S^r` is
/// implicit and always full.
#[derive(Debug, Clone)]
pub struct TranslateSystem {
    generators: Vec<FiberField>,
    gamma1: Vec<Vec<i64>>,
}

impl TranslateSystem {
    pub fn new(generators: Vec<FiberField>, gamma1: Vec<Vec<i64>>) -> Result<TranslateSystem> {
        let first = generators
            .first()
            .ok_or_else(|| Error::Invalid("translate system needs at least one generator".into()))?;
        for g in &generators[1..] {
            if !first.layout().same_shape(g.layout()) {
                return Err(Error::LayoutMismatch(
                    "translate system generators must share one layout".into(),
                ));
            }
        }
        let expect = 2 * first.layout().group().d();
        if gamma1.is_empty() || gamma1.iter().any(|k| k.len() != expect) {
            return Err(Error::Invalid(format!(
                "gamma1 must be a nonempty list of integer vectors of length 2d = {expect}"
            )));
        }
        Ok(TranslateSystem { generators, gamma1 })
    }

    pub fn layout(&self) -> &std::sync::Arc<Layout> {
        self.generators[0].layout()
    }

    pub fn generators(&self) -> &[FiberField] {
        &self.generators
    }

    pub fn generators_mut(&mut self) -> &mut [FiberField] {
        &mut self.generators
    }

    pub fn gamma1(&self) -> &[Vec<i64>] {
        &self.gamma1
    }

    /// Largest `‖k‖∞` over `Γ₁` (the truncation radius).
    pub fn gamma1_radius(&self) -> i64 {
        self.gamma1
            .iter()
            .flat_map(|k| k.iter().map(|v| v.abs()))
            .max()
            .unwrap_or(0)
    }
}

/// Central character `e^{2πi⟨σ,m⟩}` pairing the torus with `Γ₀`.
pub fn central_character(sigma: &[f64], m: &[i64]) -> C64 {
    debug_assert_eq!(sigma.len(), m.len());
    let angle: f64 = sigma.iter().zip(m).map(|(s, &m)| s * m as f64).sum();
    C64::cis(std::f64::consts::TAU * angle)
}

/// The fiberwise unitary action: slot `j` becomes `π_{σ+j}(k, 0) ∘ h_j`.
pub fn fiber_action(
    layout: &Layout,
    sigma_idx: usize,
    k: &[i64],
    h: &FiberVector,
) -> Result<FiberVector> {
    let group = layout.group();
    if k.len() != 2 * group.d() {
        return Err(Error::ShapeMismatch(format!(
            "fiber_action: k has length {}, expected 2d = {}",
            k.len(),
            2 * group.d()
        )));
    }
    if h.slots.len() != layout.fibers().count() {
        return Err(Error::LayoutMismatch(
            "fiber_action: fiber does not match the layout's box".into(),
        ));
    }
    let g = group.element_from_lattice(&LatticePoint::new(k.to_vec(), vec![0; group.r()]))?;
    let mut slots = Vec::with_capacity(h.slots.len());
    for (j_idx, op) in h.slots.iter().enumerate() {
        let lambda = layout.lambda(sigma_idx, j_idx);
        let rep = rep_op(group, layout.space(), &lambda, &g)?;
        slots.push(rep.apply_left(op));
    }
    Ok(FiberVector { slots })
}

/// Transform-side lattice translate:
/// `(γ·a)(σ) = e^{2πi⟨σ,m⟩} π̃_σ(k) a(σ)`.
pub fn translate(ff: &FiberField, gamma: &LatticePoint) -> Result<FiberField> {
    let layout = ff.layout().clone();
    let group = layout.group();
    if gamma.m.len() != group.r() {
        return Err(Error::ShapeMismatch(format!(
            "translate: m has length {}, expected r = {}",
            gamma.m.len(),
            group.r()
        )));
    }
    let mut out = FiberField::zero(&layout);
    for sigma_idx in 0..layout.torus().count() {
        let sigma = layout.torus().sigma(sigma_idx);
        let chi = central_character(&sigma, &gamma.m);
        let mut fiber = fiber_action(&layout, sigma_idx, &gamma.k, &ff.fiber(sigma_idx))?;
        fiber.scale(chi);
        out.set_fiber(sigma_idx, fiber)?;
    }
    Ok(out)
}

/// Analysis coefficient `⟨f, γ·φ⟩`, computed Fourier-side:
/// `S^{−r} Σ_σ e^{−2πi⟨σ,m⟩} ⟨f(σ), π̃_σ(k) φ(σ)⟩_𝓛`.
pub fn analysis_coefficient(
    f: &FiberField,
    phi: &FiberField,
    gamma: &LatticePoint,
) -> Result<C64> {
    let layout = f.layout();
    if !layout.same_shape(phi.layout()) {
        return Err(Error::LayoutMismatch("analysis_coefficient".into()));
    }
    let space = layout.space();
    let mut acc = C64::new(0.0, 0.0);
    for sigma_idx in 0..layout.torus().count() {
        let sigma = layout.torus().sigma(sigma_idx);
        let action = fiber_action(layout, sigma_idx, &gamma.k, &phi.fiber(sigma_idx))?;
        let ip = fiber_inner_slices(space, f.fiber_slice(sigma_idx), &action.slots);
        acc += central_character(&sigma, &gamma.m).conj() * ip;
    }
    Ok(acc * layout.sigma_weight())
}

/// How to evaluate the quadratic coefficient sum of a translate system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameSumMethod {
    /// `Σ_{φ,k,m} |⟨f, L_{(k,m)}φ⟩|²` with `m` over all of `ℤ_S^r`; every
    /// coefficient is recomputed from scratch.
    Direct,
    /// `S^{−r} Σ_σ Σ_{φ,k} |⟨f(σ), π̃_σ(k) φ(σ)⟩|²` — the fiberized form.
    Fiber,
}

/// Quadratic frame sum of `f` against the translates of a system. The two
/// methods agree to rounding: the central sum is an exact DFT identity.
pub fn frame_sum(f: &FiberField, system: &TranslateSystem, method: FrameSumMethod) -> Result<f64> {
    let layout = system.layout();
    if !layout.same_shape(f.layout()) {
        return Err(Error::LayoutMismatch("frame_sum".into()));
    }
    let r = layout.group().r();
    match method {
        FrameSumMethod::Direct => {
            let mut acc = 0.0f64;
            for phi in system.generators() {
                for k in system.gamma1() {
                    for m in layout.torus().m_points() {
                        let gamma = LatticePoint::new(k.clone(), m);
                        let c = analysis_coefficient(f, phi, &gamma)?;
                        acc += c.norm_sqr();
                    }
                }
            }
            let _ = r;
            Ok(acc)
        }
        FrameSumMethod::Fiber => {
            let space = layout.space();
            let mut acc = 0.0f64;
            for sigma_idx in 0..layout.torus().count() {
                let f_sigma = f.fiber_slice(sigma_idx);
                for phi in system.generators() {
                    let phi_sigma = phi.fiber(sigma_idx);
                    for k in system.gamma1() {
                        let action = fiber_action(layout, sigma_idx, k, &phi_sigma)?;
                        let ip = fiber_inner_slices(space, f_sigma, &action.slots);
                        acc += ip.norm_sqr();
                    }
                }
            }
            Ok(acc * layout.sigma_weight())
        }
    }
}

/// Finitely supported coefficient array over `(φ, k, m)`, keyed by generator
/// index, `Γ₁` point, and central lattice point. Iteration order is the key
/// order, so synthesis is deterministic.
#[derive(Debug, Clone, Default)]
pub struct Coefficients(pub BTreeMap<(usize, Vec<i64>, Vec<i64>), C64>);

impl Coefficients {
    pub fn new() -> Coefficients {
        Coefficients(BTreeMap::new())
    }

    pub fn insert(&mut self, phi: usize, k: Vec<i64>, m: Vec<i64>, value: C64) {
        self.0.insert((phi, k, m), value);
    }

    pub fn sum_sq(&self) -> f64 {
        self.0.values().map(|c| c.norm_sqr()).sum()
    }
}

/// Synthesis `Σ a_{φ,k,m} · (k,m)·φ` of a finitely supported coefficient
/// array against the system's translates.
pub fn synthesis(coeffs: &Coefficients, system: &TranslateSystem) -> Result<FiberField> {
    let layout = system.layout();
    let mut out = FiberField::zero(layout);
    for ((phi_idx, k, m), &a) in &coeffs.0 {
        let phi = system
            .generators()
            .get(*phi_idx)
            .ok_or_else(|| Error::Invalid(format!("unknown generator index {phi_idx}")))?;
        if !system.gamma1().contains(k) {
            return Err(Error::Invalid(format!(
                "coefficient key k = {k:?} is not in the system's gamma1"
            )));
        }
        let gamma = LatticePoint::new(k.clone(), m.clone());
        let shifted = translate(phi, &gamma)?;
        out.add_scaled(&shifted, a)?;
    }
    Ok(out)
}
