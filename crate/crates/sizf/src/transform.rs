//! Fourier-side operator fields, the Pfaffian weighting, the periodization
//! reindexing, and their composite transform.
//!
//! In this model a function *is* its Fourier-side field: an assignment
//! `λ ↦ F(λ)` of Hilbert–Schmidt operators to the points `λ = σ + j` of the
//! sampled frequency grid, where `σ` runs over the torus grid `{0..S−1}^r/S`
//! and `j` over a finite fiber box in `ℤ^r`. The composite transform weights
//! each slot by `|Pf(λ)|^{1/2}` and regroups `(σ, j)`-slots into per-`σ`
//! fiber sequences; in the discrete model the regrouping is an exact
//! reindexing, so the transform is an isometry up to rounding.
//!
//! The layout enforces the discrete model contract `W = S`: frequencies
//! satisfy `λ·W ∈ ℤ`, so lattice modulations are exactly periodic on the
//! grid and all lattice operators compose exactly. Slots where the
//! Plancherel density `|Pf(λ)|` falls below `pf_eps` are masked and hold the
//! zero operator; the masked set is the discrete analogue of a null set.

use std::path::PathBuf;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{pfaffian, GroupSpec};
use crate::space::{hs_inner, rank_one, GridSpace, Operator, C64};

/// Sampled torus `𝕋^r`: points `σ_s = s/S`, `s ∈ {0..S−1}^r`, in
/// lexicographic order. The central lattice `Γ₀` is `ℤ_S^r`, paired with `σ`
/// by `e^{2πi⟨σ,m⟩}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TorusGrid {
    r: usize,
    samples: u32,
}

impl TorusGrid {
    pub fn new(r: usize, samples: u32) -> Result<TorusGrid> {
        if r == 0 {
            return Err(Error::Config("torus dimension r must be positive".into()));
        }
        if samples < 2 {
            return Err(Error::Config(
                "torus sample count S must be at least 2".into(),
            ));
        }
        Ok(TorusGrid { r, samples })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn samples(&self) -> u32 {
        self.samples
    }

    /// Number of grid points, `S^r`.
    pub fn count(&self) -> usize {
        (self.samples as usize).pow(self.r as u32)
    }

    /// Integer coordinates of the `idx`-th grid point (lexicographic).
    pub fn indices(&self, idx: usize) -> Vec<usize> {
        let s = self.samples as usize;
        let mut out = vec![0usize; self.r];
        let mut rest = idx;
        for a in (0..self.r).rev() {
            out[a] = rest % s;
            rest /= s;
        }
        out
    }

    /// The grid point `σ = s/S`.
    pub fn sigma(&self, idx: usize) -> Vec<f64> {
        let s = f64::from(self.samples);
        self.indices(idx).into_iter().map(|i| i as f64 / s).collect()
    }

    /// All central lattice points `m ∈ {0..S−1}^r` in lexicographic order.
    pub fn m_points(&self) -> Vec<Vec<i64>> {
        (0..self.count())
            .map(|idx| self.indices(idx).into_iter().map(|i| i as i64).collect())
            .collect()
    }
}

/// Finite fiber index box `∏ [j_min_i, j_max_i] ⊂ ℤ^r` (inclusive),
/// enumerated lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberIndexSet {
    j_min: Vec<i64>,
    j_max: Vec<i64>,
}

impl FiberIndexSet {
    pub fn new(j_min: Vec<i64>, j_max: Vec<i64>) -> Result<FiberIndexSet> {
        if j_min.len() != j_max.len() || j_min.is_empty() {
            return Err(Error::Config("fiber box bounds must share a positive length".into()));
        }
        if j_min.iter().zip(&j_max).any(|(lo, hi)| lo > hi) {
            return Err(Error::Config("fiber box is empty".into()));
        }
        Ok(FiberIndexSet { j_min, j_max })
    }

    /// Symmetric box `[−j_half, j_half − 1]^r`.
    pub fn symmetric(r: usize, j_half: i64) -> Result<FiberIndexSet> {
        if j_half < 1 {
            return Err(Error::Config("j_half must be at least 1".into()));
        }
        FiberIndexSet::new(vec![-j_half; r], vec![j_half - 1; r])
    }

    pub fn j_min(&self) -> &[i64] {
        &self.j_min
    }

    pub fn j_max(&self) -> &[i64] {
        &self.j_max
    }

    pub fn r(&self) -> usize {
        self.j_min.len()
    }

    pub fn count(&self) -> usize {
        self.j_min
            .iter()
            .zip(&self.j_max)
            .map(|(lo, hi)| (hi - lo + 1) as usize)
            .product()
    }

    /// The `idx`-th fiber index (lexicographic).
    pub fn j(&self, idx: usize) -> Vec<i64> {
        let mut out = vec![0i64; self.r()];
        let mut rest = idx;
        for a in (0..self.r()).rev() {
            let extent = (self.j_max[a] - self.j_min[a] + 1) as usize;
            out[a] = self.j_min[a] + (rest % extent) as i64;
            rest /= extent;
        }
        out
    }

    pub fn index_of(&self, j: &[i64]) -> Option<usize> {
        if j.len() != self.r() {
            return None;
        }
        let mut idx = 0usize;
        for a in 0..self.r() {
            if j[a] < self.j_min[a] || j[a] > self.j_max[a] {
                return None;
            }
            let extent = (self.j_max[a] - self.j_min[a] + 1) as usize;
            idx = idx * extent + (j[a] - self.j_min[a]) as usize;
        }
        Some(idx)
    }
}

/// Shared discretization: group, torus grid, fiber box, realization grid,
/// and the Pfaffian mask.
///
/// The contract `W = S` is enforced on construction, making every frequency
/// `λ = σ + j` satisfy `λ·W ∈ ℤ` coordinatewise.
#[derive(Debug, Clone)]
pub struct Layout {
    group: GroupSpec,
    torus: TorusGrid,
    fibers: FiberIndexSet,
    space: GridSpace,
    pf_eps: f64,
    active: Vec<bool>,
    pf: Vec<f64>,
}

impl Layout {
    /// Standard layout with the symmetric fiber box `[−j_half, j_half−1]^r`
    /// and `q = c·S` grid samples per axis.
    pub fn new(
        group: GroupSpec,
        s: u32,
        samples_per_unit: u32,
        j_half: i64,
        pf_eps: f64,
    ) -> Result<Arc<Layout>> {
        let fibers = FiberIndexSet::symmetric(group.r(), j_half)?;
        Layout::with_fiber_box(group, s, samples_per_unit, fibers, pf_eps)
    }

    pub fn with_fiber_box(
        group: GroupSpec,
        s: u32,
        samples_per_unit: u32,
        fibers: FiberIndexSet,
        pf_eps: f64,
    ) -> Result<Arc<Layout>> {
        if samples_per_unit < 1 {
            return Err(Error::Config("samples per unit c must be at least 1".into()));
        }
        if pf_eps <= 0.0 {
            return Err(Error::Config("pf_eps must be positive".into()));
        }
        if fibers.r() != group.r() {
            return Err(Error::Config(format!(
                "fiber box dimension {} does not match the group's r = {}",
                fibers.r(),
                group.r()
            )));
        }
        let torus = TorusGrid::new(group.r(), s)?;
        let space = GridSpace::new(group.d(), s, s * samples_per_unit)?;

        let box_count = fibers.count();
        let slots = torus.count() * box_count;
        let mut active = Vec::with_capacity(slots);
        let mut pf = Vec::with_capacity(slots);
        for sigma_idx in 0..torus.count() {
            let sigma = torus.sigma(sigma_idx);
            for j_idx in 0..box_count {
                let j = fibers.j(j_idx);
                let lambda: Vec<f64> = sigma
                    .iter()
                    .zip(&j)
                    .map(|(s, j)| s + *j as f64)
                    .collect();
                let density = pfaffian(&group, &lambda);
                pf.push(density);
                active.push(density >= pf_eps);
            }
        }
        if !active.iter().any(|&a| a) {
            return Err(Error::Config(
                "degenerate model: every fiber slot is Pfaffian-masked (pf_eps too large?)".into(),
            ));
        }
        Ok(Arc::new(Layout {
            group,
            torus,
            fibers,
            space,
            pf_eps,
            active,
            pf,
        }))
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn torus(&self) -> &TorusGrid {
        &self.torus
    }

    pub fn fibers(&self) -> &FiberIndexSet {
        &self.fibers
    }

    pub fn space(&self) -> &GridSpace {
        &self.space
    }

    pub fn pf_eps(&self) -> f64 {
        self.pf_eps
    }

    pub fn slot_count(&self) -> usize {
        self.active.len()
    }

    pub fn slot(&self, sigma_idx: usize, j_idx: usize) -> usize {
        sigma_idx * self.fibers.count() + j_idx
    }

    pub fn sigma_of_slot(&self, slot: usize) -> usize {
        slot / self.fibers.count()
    }

    pub fn j_of_slot(&self, slot: usize) -> usize {
        slot % self.fibers.count()
    }

    /// The frequency `λ = σ + j` of a slot.
    pub fn lambda(&self, sigma_idx: usize, j_idx: usize) -> Vec<f64> {
        let sigma = self.torus.sigma(sigma_idx);
        let j = self.fibers.j(j_idx);
        sigma.iter().zip(&j).map(|(s, j)| s + *j as f64).collect()
    }

    /// Whether a slot carries Plancherel mass (mask value `true` = kept).
    pub fn is_active(&self, slot: usize) -> bool {
        self.active[slot]
    }

    pub fn active_mask(&self) -> &[bool] {
        &self.active
    }

    /// Cached `|Pf(λ)|` of a slot.
    pub fn pf_of_slot(&self, slot: usize) -> f64 {
        self.pf[slot]
    }

    /// Normalization weight `S^{−r}` of the torus quadrature.
    pub fn sigma_weight(&self) -> f64 {
        1.0 / self.torus.count() as f64
    }

    /// Structural equality: same group, grids, box, and mask threshold.
    pub fn same_shape(&self, other: &Layout) -> bool {
        self.group == other.group
            && self.torus == other.torus
            && self.fibers == other.fibers
            && self.space == other.space
            && self.pf_eps == other.pf_eps
    }
}

fn check_same_shape(a: &Layout, b: &Layout, what: &str) -> Result<()> {
    if a.same_shape(b) {
        Ok(())
    } else {
        Err(Error::LayoutMismatch(what.to_string()))
    }
}

/// A Fourier-side field `λ ↦ F(λ)`: one operator per `(σ, j)` slot.
/// Masked slots hold the zero operator.
#[derive(Debug, Clone)]
pub struct OperatorField {
    layout: Arc<Layout>,
    data: Vec<Operator>,
}

impl OperatorField {
    pub fn zero(layout: &Arc<Layout>) -> OperatorField {
        let dim = layout.space.dim();
        OperatorField {
            layout: Arc::clone(layout),
            data: vec![Operator::zeros(dim, dim); layout.slot_count()],
        }
    }

    /// Builds a field slot by slot (lexicographic in `(σ, j)`), zeroing
    /// masked slots afterwards.
    pub fn build<F>(layout: &Arc<Layout>, mut fill: F) -> Result<OperatorField>
    where
        F: FnMut(usize, &[f64]) -> Operator,
    {
        let dim = layout.space.dim();
        let mut data = Vec::with_capacity(layout.slot_count());
        for slot in 0..layout.slot_count() {
            let lambda = layout.lambda(layout.sigma_of_slot(slot), layout.j_of_slot(slot));
            let op = fill(slot, &lambda);
            if op.nrows() != dim || op.ncols() != dim {
                return Err(Error::ShapeMismatch(format!(
                    "field slot {slot}: operator is {}×{}, expected {dim}×{dim}",
                    op.nrows(),
                    op.ncols()
                )));
            }
            data.push(op);
        }
        let mut field = OperatorField {
            layout: Arc::clone(layout),
            data,
        };
        field.enforce_mask();
        Ok(field)
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn slot(&self, slot: usize) -> &Operator {
        &self.data[slot]
    }

    pub fn get(&self, sigma_idx: usize, j_idx: usize) -> &Operator {
        &self.data[self.layout.slot(sigma_idx, j_idx)]
    }

    pub fn set_slot(&mut self, slot: usize, op: Operator) -> Result<()> {
        let dim = self.layout.space.dim();
        if op.nrows() != dim || op.ncols() != dim {
            return Err(Error::ShapeMismatch("set_slot: wrong operator shape".into()));
        }
        self.data[slot] = op;
        self.enforce_mask_slot(slot);
        Ok(())
    }

    pub fn slots(&self) -> &[Operator] {
        &self.data
    }

    fn enforce_mask_slot(&mut self, slot: usize) {
        if !self.layout.is_active(slot) {
            let dim = self.layout.space.dim();
            self.data[slot] = Operator::zeros(dim, dim);
        }
    }

    fn enforce_mask(&mut self) {
        for slot in 0..self.data.len() {
            self.enforce_mask_slot(slot);
        }
    }

    /// Exact data equality (used by the bit-exact round-trip guarantees).
    pub fn bit_equal(&self, other: &OperatorField) -> bool {
        self.layout.same_shape(&other.layout) && self.data == other.data
    }
}

/// One fiber: the sequence `(h_j)_j` of operators over the fiber box at a
/// fixed `σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberVector {
    pub slots: Vec<Operator>,
}

impl FiberVector {
    pub fn zero(box_count: usize, dim: usize) -> FiberVector {
        FiberVector {
            slots: vec![Operator::zeros(dim, dim); box_count],
        }
    }

    pub fn scale(&mut self, c: C64) {
        for op in &mut self.slots {
            for v in op.iter_mut() {
                *v *= c;
            }
        }
    }

    pub fn add_scaled(&mut self, other: &FiberVector, c: C64) {
        for (a, b) in self.slots.iter_mut().zip(&other.slots) {
            for (x, y) in a.iter_mut().zip(b.iter()) {
                *x += c * y;
            }
        }
    }
}

/// A fiber field `σ ↦ a(σ) ∈ 𝓛`: the per-`σ` regrouping of an operator
/// field. Storage is slot-compatible with [`OperatorField`], making the
/// periodization an exact reindexing.
#[derive(Debug, Clone)]
pub struct FiberField {
    layout: Arc<Layout>,
    data: Vec<Operator>,
}

impl FiberField {
    pub fn zero(layout: &Arc<Layout>) -> FiberField {
        let dim = layout.space.dim();
        FiberField {
            layout: Arc::clone(layout),
            data: vec![Operator::zeros(dim, dim); layout.slot_count()],
        }
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    /// Borrowed view of the fiber at `σ`.
    pub fn fiber_slice(&self, sigma_idx: usize) -> &[Operator] {
        let b = self.layout.fibers.count();
        &self.data[sigma_idx * b..(sigma_idx + 1) * b]
    }

    /// Owned copy of the fiber at `σ`.
    pub fn fiber(&self, sigma_idx: usize) -> FiberVector {
        FiberVector {
            slots: self.fiber_slice(sigma_idx).to_vec(),
        }
    }

    pub fn set_fiber(&mut self, sigma_idx: usize, fiber: FiberVector) -> Result<()> {
        let b = self.layout.fibers.count();
        let dim = self.layout.space.dim();
        if fiber.slots.len() != b || fiber.slots.iter().any(|m| m.nrows() != dim || m.ncols() != dim)
        {
            return Err(Error::ShapeMismatch("set_fiber: wrong fiber shape".into()));
        }
        for (offset, op) in fiber.slots.into_iter().enumerate() {
            self.data[sigma_idx * b + offset] = op;
        }
        Ok(())
    }

    /// Multiplies the fiber at `σ` by a scalar.
    pub fn scale_fiber(&mut self, sigma_idx: usize, c: C64) {
        let b = self.layout.fibers.count();
        for op in &mut self.data[sigma_idx * b..(sigma_idx + 1) * b] {
            for v in op.iter_mut() {
                *v *= c;
            }
        }
    }

    /// `self += c · other`.
    pub fn add_scaled(&mut self, other: &FiberField, c: C64) -> Result<()> {
        check_same_shape(&self.layout, &other.layout, "add_scaled")?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            for (x, y) in a.iter_mut().zip(b.iter()) {
                *x += c * y;
            }
        }
        Ok(())
    }

    pub fn slots(&self) -> &[Operator] {
        &self.data
    }

    pub fn bit_equal(&self, other: &FiberField) -> bool {
        self.layout.same_shape(&other.layout) && self.data == other.data
    }
}

/// Multiplies each unmasked slot by `|Pf(λ)|^{1/2}`; masked slots stay zero.
pub fn weight(field: &OperatorField) -> OperatorField {
    let layout = &field.layout;
    let mut data = Vec::with_capacity(field.data.len());
    for (slot, op) in field.data.iter().enumerate() {
        if layout.is_active(slot) {
            let w = layout.pf_of_slot(slot).sqrt();
            data.push(op.map(|v| v * w));
        } else {
            data.push(op.clone());
        }
    }
    OperatorField {
        layout: Arc::clone(layout),
        data,
    }
}

/// Regroups the `(σ, j)` slots into per-`σ` fiber sequences. An exact
/// reindexing: `deperiodize ∘ periodize` is the identity, bit for bit.
pub fn periodize(field: &OperatorField) -> FiberField {
    FiberField {
        layout: Arc::clone(&field.layout),
        data: field.data.clone(),
    }
}

/// Inverse of [`periodize`] onto the given layout.
pub fn deperiodize(ff: &FiberField, layout: &Arc<Layout>) -> Result<OperatorField> {
    check_same_shape(&ff.layout, layout, "deperiodize")?;
    Ok(OperatorField {
        layout: Arc::clone(layout),
        data: ff.data.clone(),
    })
}

/// The composite transform: Pfaffian weighting followed by periodization.
///
/// Isometric from the Plancherel-weighted field norm to the fiber-field
/// norm: `fiber_norm(t_transform(F)) = field_norm(F)` up to rounding.
pub fn t_transform(field: &OperatorField) -> FiberField {
    periodize(&weight(field))
}

/// Plancherel-weighted field norm:
/// `‖F‖² = S^{−r} Σ_{σ,j unmasked} ‖F(σ+j)‖²_HS · |Pf(σ+j)|`.
pub fn field_norm(field: &OperatorField) -> f64 {
    let layout = &field.layout;
    let measure = layout.space.measure();
    let mut acc = 0.0f64;
    for (slot, op) in field.data.iter().enumerate() {
        if !layout.is_active(slot) {
            continue;
        }
        let mut sq = 0.0f64;
        for v in op.iter() {
            sq += v.norm_sqr();
        }
        acc += sq * measure * layout.pf_of_slot(slot);
    }
    (acc * layout.sigma_weight()).sqrt()
}

/// Unweighted field norm `‖F‖² = S^{−r} Σ_{σ,j unmasked} ‖F(σ+j)‖²_HS`,
/// the plain `L²(dλ)` norm of the field.
pub fn field_norm_unweighted(field: &OperatorField) -> f64 {
    let layout = &field.layout;
    let measure = layout.space.measure();
    let mut acc = 0.0f64;
    for (slot, op) in field.data.iter().enumerate() {
        if !layout.is_active(slot) {
            continue;
        }
        let mut sq = 0.0f64;
        for v in op.iter() {
            sq += v.norm_sqr();
        }
        acc += sq * measure;
    }
    (acc * layout.sigma_weight()).sqrt()
}

/// Fiber-field norm `‖a‖² = S^{−r} Σ_σ ‖a(σ)‖²_𝓛`.
pub fn fiber_norm(ff: &FiberField) -> f64 {
    let measure = ff.layout.space.measure();
    let mut acc = 0.0f64;
    for op in &ff.data {
        let mut sq = 0.0f64;
        for v in op.iter() {
            sq += v.norm_sqr();
        }
        acc += sq * measure;
    }
    (acc * ff.layout.sigma_weight()).sqrt()
}

pub(crate) fn fiber_inner_slices(space: &GridSpace, a: &[Operator], b: &[Operator]) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        for (u, v) in x.iter().zip(y.iter()) {
            acc += v.conj() * u;
        }
    }
    acc * space.measure()
}

/// `𝓛` inner product of two fibers at a fixed `σ`:
/// `⟨a, b⟩ = Σ_j ⟨a_j, b_j⟩_HS`.
pub fn fiber_inner(space: &GridSpace, a: &FiberVector, b: &FiberVector) -> Result<C64> {
    if a.slots.len() != b.slots.len() {
        return Err(Error::ShapeMismatch("fiber_inner: fiber lengths differ".into()));
    }
    for (x, y) in a.slots.iter().zip(&b.slots) {
        if x.shape() != y.shape() {
            return Err(Error::ShapeMismatch("fiber_inner: operator shapes differ".into()));
        }
    }
    Ok(fiber_inner_slices(space, &a.slots, &b.slots))
}

/// `𝓛` norm of a fiber.
pub fn fiber_vector_norm(space: &GridSpace, a: &FiberVector) -> f64 {
    let mut acc = 0.0f64;
    for op in &a.slots {
        for v in op.iter() {
            acc += v.norm_sqr();
        }
    }
    (acc * space.measure()).sqrt()
}

/// Inner product of two fiber fields:
/// `⟨a, b⟩ = S^{−r} Σ_σ ⟨a(σ), b(σ)⟩_𝓛`.
pub fn ff_inner(a: &FiberField, b: &FiberField) -> Result<C64> {
    check_same_shape(&a.layout, &b.layout, "ff_inner")?;
    let mut acc = C64::new(0.0, 0.0);
    for sigma_idx in 0..a.layout.torus.count() {
        acc += fiber_inner_slices(
            &a.layout.space,
            a.fiber_slice(sigma_idx),
            b.fiber_slice(sigma_idx),
        );
    }
    Ok(acc * a.layout.sigma_weight())
}

/// Normalized sinc, `sin(πx)/(πx)` with `sinc(0) = 1`.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (std::f64::consts::PI * x).sin() / (std::f64::consts::PI * x)
    }
}

/// Deterministic generator presets for Fourier-side fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    /// Rank-one field `u ⊗ u*` with a Gaussian bump `u` centered at `center`.
    GaussianRankOne { center: Vec<f64>, width: f64 },
    /// Rank-one field `1_{[0,b_u)} ⊗ 1_{[0,b_v)}*` from box indicators.
    IndicatorRankOne { box_u: Vec<f64>, box_v: Vec<f64> },
    /// Independent uniform complex entries in every slot, seeded.
    Random { seed: u64 },
    /// Like `random`, but slots with `j ∉ {−1, 0}` are zeroed (`r = 1`).
    BandlimitedRandom { seed: u64 },
    /// Scalar field `Π_i sinc²(λ_i)` — the Fourier transform of the tent
    /// B-spline. Abelian (`d = 0`) only.
    Bspline2,
    /// Loads a field from a `SIZF1` file and validates it against the layout.
    File { path: PathBuf },
}

/// Builds the deterministic Fourier-side field of a generator preset.
pub fn build_generator(spec: &GeneratorSpec, layout: &Arc<Layout>) -> Result<OperatorField> {
    let space = layout.space();
    let dim = space.dim();
    match spec {
        GeneratorSpec::GaussianRankOne { center, width } => {
            if center.len() != space.d() {
                return Err(Error::Config(format!(
                    "gaussian-rank-one: center has {} coordinates, expected d = {}",
                    center.len(),
                    space.d()
                )));
            }
            if *width <= 0.0 {
                return Err(Error::Config("gaussian-rank-one: width must be positive".into()));
            }
            let u = nalgebra::DVector::from_fn(dim, |flat, _| {
                let t = space.point(flat);
                let sq: f64 = t
                    .iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                C64::new((-sq / (2.0 * width * width)).exp(), 0.0)
            });
            let op = rank_one(space, &u, &u)?;
            OperatorField::build(layout, |_, _| op.clone())
        }
        GeneratorSpec::IndicatorRankOne { box_u, box_v } => {
            if box_u.len() != space.d() || box_v.len() != space.d() {
                return Err(Error::Config(format!(
                    "indicator-rank-one: boxes must have d = {} coordinates",
                    space.d()
                )));
            }
            let indicator = |bounds: &[f64]| {
                nalgebra::DVector::from_fn(dim, |flat, _| {
                    let t = space.point(flat);
                    let inside = t.iter().zip(bounds).all(|(a, b)| *a >= 0.0 && a < b);
                    C64::new(if inside { 1.0 } else { 0.0 }, 0.0)
                })
            };
            let op = rank_one(space, &indicator(box_u), &indicator(box_v))?;
            OperatorField::build(layout, |_, _| op.clone())
        }
        GeneratorSpec::Random { seed } => {
            let mut rng = ChaCha12Rng::seed_from_u64(*seed);
            OperatorField::build(layout, |_, _| {
                Operator::from_fn(dim, dim, |_, _| {
                    C64::new(
                        rng.random::<f64>() * 2.0 - 1.0,
                        rng.random::<f64>() * 2.0 - 1.0,
                    )
                })
            })
        }
        GeneratorSpec::BandlimitedRandom { seed } => {
            if layout.group().r() != 1 {
                return Err(Error::Config(
                    "bandlimited-random requires a rank-one center (r = 1)".into(),
                ));
            }
            let mut rng = ChaCha12Rng::seed_from_u64(*seed);
            let fibers = layout.fibers().clone();
            OperatorField::build(layout, |slot, _| {
                // Consume the stream uniformly so the field does not depend
                // on which slots are kept.
                let op = Operator::from_fn(dim, dim, |_, _| {
                    C64::new(
                        rng.random::<f64>() * 2.0 - 1.0,
                        rng.random::<f64>() * 2.0 - 1.0,
                    )
                });
                let j = fibers.j(slot % fibers.count());
                if j[0] == -1 || j[0] == 0 {
                    op
                } else {
                    Operator::zeros(dim, dim)
                }
            })
        }
        GeneratorSpec::Bspline2 => {
            if space.d() != 0 {
                return Err(Error::Config(
                    "bspline2 is the abelian scalar preset and requires d = 0".into(),
                ));
            }
            OperatorField::build(layout, |_, lambda| {
                let v: f64 = lambda.iter().map(|&l| sinc(l) * sinc(l)).product();
                Operator::from_element(1, 1, C64::new(v, 0.0))
            })
        }
        GeneratorSpec::File { path } => crate::fieldfile::read(path, layout),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupSpec;
    use proptest::prelude::*;

    fn heis_layout(s: u32, c: u32, j_half: i64) -> Arc<Layout> {
        Layout::new(GroupSpec::preset("heisenberg3").unwrap(), s, c, j_half, 1e-9).unwrap()
    }

    fn abelian_layout(r: usize, s: u32, j_half: i64) -> Arc<Layout> {
        Layout::new(
            GroupSpec::preset(&format!("abelian({r})")).unwrap(),
            s,
            1,
            j_half,
            1e-9,
        )
        .unwrap()
    }

    fn random_field(layout: &Arc<Layout>, seed: u64) -> OperatorField {
        build_generator(&GeneratorSpec::Random { seed }, layout).unwrap()
    }

    #[test]
    fn torus_and_fiber_enumeration_are_lexicographic() {
        let torus = TorusGrid::new(2, 3).unwrap();
        assert_eq!(torus.count(), 9);
        assert_eq!(torus.indices(0), vec![0, 0]);
        assert_eq!(torus.indices(1), vec![0, 1]);
        assert_eq!(torus.indices(3), vec![1, 0]);
        assert_eq!(torus.sigma(4), vec![1.0 / 3.0, 1.0 / 3.0]);

        let fibers = FiberIndexSet::symmetric(2, 1).unwrap();
        assert_eq!(fibers.count(), 4);
        assert_eq!(fibers.j(0), vec![-1, -1]);
        assert_eq!(fibers.j(3), vec![0, 0]);
        assert_eq!(fibers.index_of(&[-1, 0]), Some(1));
        assert_eq!(fibers.index_of(&[2, 0]), None);
    }

    #[test]
    fn layout_masks_the_pfaffian_zero_set() {
        let layout = heis_layout(4, 1, 2);
        // λ = 0 occurs exactly at σ = 0, j = 0.
        let zero_slot = layout.slot(0, layout.fibers().index_of(&[0]).unwrap());
        assert!(!layout.is_active(zero_slot));
        let active = layout.active_mask().iter().filter(|&&a| a).count();
        assert_eq!(active, layout.slot_count() - 1);
    }

    #[test]
    fn fully_masked_layout_is_rejected() {
        let err = Layout::new(GroupSpec::preset("heisenberg3").unwrap(), 4, 1, 2, 10.0);
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn weight_is_identity_on_abelian() {
        let layout = abelian_layout(1, 4, 2);
        let f = random_field(&layout, 3);
        let w = weight(&f);
        assert!(w.bit_equal(&f));
    }

    #[test]
    fn weight_scales_by_sqrt_density() {
        let layout = heis_layout(4, 1, 4);
        let f = random_field(&layout, 5);
        let w = weight(&f);
        // slot at λ = 2: σ = 0, j = 2.
        let j_idx = layout.fibers().index_of(&[2]).unwrap();
        let orig = f.get(0, j_idx);
        let scaled = w.get(0, j_idx);
        let dev = (scaled - orig.map(|v| v * 2.0f64.sqrt()))
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        assert!(dev < 1e-14);
        // masked slot stays zero
        let zero_slot = layout.fibers().index_of(&[0]).unwrap();
        assert!(w.get(0, zero_slot).iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let layout = heis_layout(4, 2, 2);
        let f = random_field(&layout, 11);
        let back = deperiodize(&periodize(&f), &layout).unwrap();
        assert!(back.bit_equal(&f));
    }

    #[test]
    fn transform_is_an_isometry() {
        for layout in [
            heis_layout(8, 1, 2),
            abelian_layout(2, 4, 1),
            Layout::new(GroupSpec::preset("twostep6").unwrap(), 2, 1, 1, 1e-9).unwrap(),
            Layout::new(GroupSpec::preset("threestep5").unwrap(), 4, 1, 2, 1e-9).unwrap(),
        ] {
            for seed in 0..8u64 {
                let f = random_field(&layout, seed);
                let lhs = fiber_norm(&t_transform(&f));
                let rhs = field_norm(&f);
                let literal = field_norm_unweighted(&weight(&f));
                assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
                assert!((lhs - literal).abs() <= 1e-12 * rhs.max(1.0));
            }
        }
    }

    #[test]
    fn transform_matches_the_scalar_formula() {
        // heisenberg3: (Tφ)(σ)_j = |σ+j|^{1/2} F(σ+j)
        let layout = heis_layout(4, 1, 2);
        let f = random_field(&layout, 21);
        let tf = t_transform(&f);
        for sigma_idx in 0..layout.torus().count() {
            let sigma = layout.torus().sigma(sigma_idx)[0];
            for j_idx in 0..layout.fibers().count() {
                let j = layout.fibers().j(j_idx)[0];
                let lambda = sigma + j as f64;
                let slot = layout.slot(sigma_idx, j_idx);
                let expect = if lambda.abs() >= layout.pf_eps() {
                    f.slot(slot).map(|v| v * lambda.abs().sqrt())
                } else {
                    Operator::zeros(layout.space().dim(), layout.space().dim())
                };
                let got = &tf.fiber_slice(sigma_idx)[j_idx];
                let dev = (got - expect).iter().map(|c| c.norm()).fold(0.0, f64::max);
                assert!(dev < 1e-13);
            }
        }
    }

    #[test]
    fn abelian_transform_is_the_identity_reindexing() {
        let layout = abelian_layout(1, 4, 1);
        let mut f = OperatorField::zero(&layout);
        // one nonzero slot at σ-index 2, j = 0
        let j0 = layout.fibers().index_of(&[0]).unwrap();
        let slot = layout.slot(2, j0);
        f.set_slot(slot, Operator::from_element(1, 1, C64::new(0.7, -0.1)))
            .unwrap();
        let tf = t_transform(&f);
        let got = &tf.fiber_slice(2)[j0];
        assert!((got[(0, 0)] - C64::new(0.7, -0.1)).norm() < 1e-15);
        let others: f64 = (0..layout.torus().count())
            .flat_map(|s| tf.fiber_slice(s).iter().enumerate().map(move |(j, op)| (s, j, op)))
            .filter(|(s, j, _)| !(*s == 2 && *j == j0))
            .map(|(_, _, op)| op.iter().map(|c| c.norm()).sum::<f64>())
            .sum();
        assert_eq!(others, 0.0);
    }

    #[test]
    fn field_norm_of_single_unit_slot() {
        // r = 1: a single unmasked unit-HS-norm slot has
        // field_norm² = (1/S)·|Pf(λ)|.
        let layout = heis_layout(4, 1, 2);
        let mut f = OperatorField::zero(&layout);
        let j_idx = layout.fibers().index_of(&[1]).unwrap();
        let slot = layout.slot(1, j_idx); // λ = 1 + 1/4
        // unit HS norm: single entry 1/sqrt(measure)
        let dim = layout.space().dim();
        let mut op = Operator::zeros(dim, dim);
        op[(0, 0)] = C64::new(1.0 / layout.space().measure().sqrt(), 0.0);
        f.set_slot(slot, op).unwrap();
        let lambda = 1.25f64;
        let expect = (lambda / 4.0).sqrt();
        assert!((field_norm(&f) - expect).abs() < 1e-14);
        assert!(field_norm(&OperatorField::zero(&layout)) == 0.0);
    }

    #[test]
    fn generator_determinism() {
        let layout = heis_layout(4, 1, 2);
        let a = random_field(&layout, 7);
        let b = random_field(&layout, 7);
        assert!(a.bit_equal(&b));
        let c = random_field(&layout, 8);
        assert!(!a.bit_equal(&c));
    }

    #[test]
    fn bandlimited_support() {
        let layout = heis_layout(4, 1, 3);
        let f = build_generator(&GeneratorSpec::BandlimitedRandom { seed: 2 }, &layout).unwrap();
        for sigma_idx in 0..layout.torus().count() {
            for j_idx in 0..layout.fibers().count() {
                let j = layout.fibers().j(j_idx)[0];
                let op = f.get(sigma_idx, j_idx);
                let mass: f64 = op.iter().map(|c| c.norm()).sum();
                if j == -1 || j == 0 {
                    let slot = layout.slot(sigma_idx, j_idx);
                    if layout.is_active(slot) {
                        assert!(mass > 0.0);
                    }
                } else {
                    assert_eq!(mass, 0.0);
                }
            }
        }
    }

    #[test]
    fn indicator_generator_is_constant_rank_one() {
        let layout = Layout::new(GroupSpec::preset("twostep6").unwrap(), 2, 2, 1, 1e-9).unwrap();
        let f = build_generator(
            &GeneratorSpec::IndicatorRankOne {
                box_u: vec![0.5, 0.5],
                box_v: vec![1.0, 1.0],
            },
            &layout,
        )
        .unwrap();
        // entries are products of indicator values; check a diagonal entry
        // where both points lie in the boxes, and that masked slots are zero.
        let space = layout.space();
        for slot in 0..layout.slot_count() {
            let op = f.slot(slot);
            if !layout.is_active(slot) {
                assert!(op.iter().all(|c| c.norm() == 0.0));
                continue;
            }
            for row in 0..space.dim() {
                for col in 0..space.dim() {
                    let t = space.point(row);
                    let s = space.point(col);
                    let want = if t.iter().all(|&v| v < 0.5) && s.iter().all(|&v| v < 1.0) {
                        1.0
                    } else {
                        0.0
                    };
                    assert_eq!(op[(row, col)], C64::new(want, 0.0));
                }
            }
        }
    }

    #[test]
    fn bspline2_matches_the_closed_form() {
        let layout = abelian_layout(1, 4, 2);
        let f = build_generator(&GeneratorSpec::Bspline2, &layout).unwrap();
        for sigma_idx in 0..layout.torus().count() {
            for j_idx in 0..layout.fibers().count() {
                let lambda = layout.lambda(sigma_idx, j_idx)[0];
                let got = f.get(sigma_idx, j_idx)[(0, 0)].re;
                let want = sinc(lambda) * sinc(lambda);
                assert!((got - want).abs() < 1e-15);
            }
        }
        // requires d = 0
        let heis = heis_layout(4, 1, 1);
        assert!(build_generator(&GeneratorSpec::Bspline2, &heis).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip_bit_exact_random(seed in 0u64..64) {
            let layout = heis_layout(4, 1, 2);
            let f = random_field(&layout, seed);
            let back = deperiodize(&periodize(&f), &layout).unwrap();
            prop_assert!(back.bit_equal(&f));
        }

        #[test]
        fn fiber_inner_is_positive(seed in 0u64..32) {
            let layout = heis_layout(4, 1, 1);
            let f = t_transform(&random_field(&layout, seed));
            for sigma_idx in 0..layout.torus().count() {
                let a = f.fiber(sigma_idx);
                let ip = fiber_inner(layout.space(), &a, &a).unwrap();
                prop_assert!(ip.re >= 0.0);
                prop_assert!(ip.im.abs() < 1e-12);
            }
        }
    }
}
