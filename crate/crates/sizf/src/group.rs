//! Group presets: dimensions, group laws where a closed form exists, the
//! Pfaffian (Plancherel density), lattice enumeration, and the discretized
//! irreducible representations `π_λ` acting on the periodic grid model.
//!
//! Four presets are supported. `abelian(r)` is `ℝ^r` (no orbit part), and the
//! three nilpotent presets carry the representation formulas printed below:
//!
//! * `heisenberg3` — coordinates `(x, y, z)` with product
//!   `(x,y,z)·(x',y',z') = (x+x', y+y', z+z'+xy')` and
//!   `π_λ(x,y,z)f(t) = e^{2πiλz} e^{−2πiλyt} f(t−x)` on `L²(ℝ)`.
//! * `twostep6` — a six-dimensional two-step group realized by 7×7 upper
//!   unitriangular matrices; `π_λ` acts on `L²(ℝ²)` by the modulation matrix
//!   `M_λ = [[λ₁,λ₂],[λ₂,λ₁]]` followed by translation.
//! * `threestep5` — a five-dimensional three-step group; its group law is
//!   not available in closed form here, but `π_λ` on `L²(ℝ²)` is: a chirp
//!   modulation `e^{πiλ(t₁²y₁−2t₁y₂)} e^{−2πiλt₂y₁}` composed with
//!   translation (translation outermost).
//!
//! All representations are realized as exactly unitary `q^d × q^d` matrices:
//! the product of a unimodular diagonal and a cyclic-shift permutation.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::space::{GridSpace, Operator, C64};

/// Identifies one of the supported group presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupName {
    Abelian(usize),
    Heisenberg3,
    TwoStep6,
    ThreeStep5,
}

impl GroupName {
    /// Parses `"abelian"`, `"abelian(r)"`, `"heisenberg3"`, `"twostep6"`,
    /// or `"threestep5"`.
    pub fn parse(s: &str) -> Result<GroupName> {
        let s = s.trim();
        match s {
            "heisenberg3" => return Ok(GroupName::Heisenberg3),
            "twostep6" => return Ok(GroupName::TwoStep6),
            "threestep5" => return Ok(GroupName::ThreeStep5),
            "abelian" => return Ok(GroupName::Abelian(1)),
            _ => {}
        }
        if let Some(inner) = s.strip_prefix("abelian(").and_then(|t| t.strip_suffix(')')) {
            let r: usize = inner
                .trim()
                .parse()
                .map_err(|_| Error::UnknownPreset(s.to_string()))?;
            if r == 0 {
                return Err(Error::UnknownPreset(s.to_string()));
            }
            return Ok(GroupName::Abelian(r));
        }
        Err(Error::UnknownPreset(s.to_string()))
    }
}

impl std::fmt::Display for GroupName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GroupName::Abelian(r) => write!(f, "abelian({r})"),
            GroupName::Heisenberg3 => write!(f, "heisenberg3"),
            GroupName::TwoStep6 => write!(f, "twostep6"),
            GroupName::ThreeStep5 => write!(f, "threestep5"),
        }
    }
}

/// A group preset with its fixed dimensions.
///
/// `r` is the dimension of the center, `d` half the generic coadjoint orbit
/// dimension, so the group has dimension `n = r + 2d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupSpec {
    name: GroupName,
    r: usize,
    d: usize,
    has_group_law: bool,
}

impl GroupSpec {
    pub fn from_name(name: GroupName) -> GroupSpec {
        match name {
            GroupName::Abelian(r) => GroupSpec {
                name,
                r,
                d: 0,
                has_group_law: true,
            },
            GroupName::Heisenberg3 => GroupSpec {
                name,
                r: 1,
                d: 1,
                has_group_law: true,
            },
            GroupName::TwoStep6 => GroupSpec {
                name,
                r: 2,
                d: 2,
                has_group_law: true,
            },
            GroupName::ThreeStep5 => GroupSpec {
                name,
                r: 1,
                d: 2,
                has_group_law: false,
            },
        }
    }

    /// Looks up a preset by name, e.g. `"heisenberg3"` or `"abelian(3)"`.
    pub fn preset(name: &str) -> Result<GroupSpec> {
        Ok(GroupSpec::from_name(GroupName::parse(name)?))
    }

    pub fn name(&self) -> GroupName {
        self.name
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Group dimension `n = r + 2d`.
    pub fn n(&self) -> usize {
        self.r + 2 * self.d
    }

    pub fn has_group_law(&self) -> bool {
        self.has_group_law
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement {
            x: vec![0.0; 2 * self.d],
            z: vec![0.0; self.r],
        }
    }

    pub fn element(&self, x: Vec<f64>, z: Vec<f64>) -> Result<GroupElement> {
        if x.len() != 2 * self.d || z.len() != self.r {
            return Err(Error::ShapeMismatch(format!(
                "element coordinates ({}, {}) do not match the preset dimensions (2d = {}, r = {})",
                x.len(),
                z.len(),
                2 * self.d,
                self.r
            )));
        }
        Ok(GroupElement { x, z })
    }

    /// Group element of a lattice point `γ = (k, m)`.
    pub fn element_from_lattice(&self, gamma: &LatticePoint) -> Result<GroupElement> {
        self.element(
            gamma.k.iter().map(|&v| v as f64).collect(),
            gamma.m.iter().map(|&v| v as f64).collect(),
        )
    }
}

/// Element `n = xz` in split coordinates: `x` holds the 2d orbit coordinates,
/// `z` the r central coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
}

/// Lattice point `γ = (k, m) ∈ Γ₁ × Γ₀` in integer coordinates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticePoint {
    pub k: Vec<i64>,
    pub m: Vec<i64>,
}

impl LatticePoint {
    pub fn new(k: Vec<i64>, m: Vec<i64>) -> LatticePoint {
        LatticePoint { k, m }
    }

    /// Coordinatewise sum; the projective composition of lattice points.
    pub fn coordinate_sum(&self, other: &LatticePoint) -> LatticePoint {
        LatticePoint {
            k: self.k.iter().zip(&other.k).map(|(a, b)| a + b).collect(),
            m: self.m.iter().zip(&other.m).map(|(a, b)| a + b).collect(),
        }
    }
}

/// Group product in the preset's coordinates.
///
/// Componentwise addition for `abelian`, the printed closed form for
/// `heisenberg3`, and the 7×7 matrix realization for `twostep6`. Fails for
/// `threestep5`, whose law is not available in closed form.
pub fn multiply(spec: &GroupSpec, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
    if a.x.len() != 2 * spec.d || b.x.len() != 2 * spec.d || a.z.len() != spec.r || b.z.len() != spec.r
    {
        return Err(Error::ShapeMismatch(
            "multiply: element coordinates do not match the preset".into(),
        ));
    }
    match spec.name {
        GroupName::Abelian(_) => Ok(GroupElement {
            x: vec![],
            z: a.z.iter().zip(&b.z).map(|(u, v)| u + v).collect(),
        }),
        GroupName::Heisenberg3 => {
            // (x,y,z)·(x',y',z') = (x+x', y+y', z+z'+xy')
            let (x, y, z) = (a.x[0], a.x[1], a.z[0]);
            let (xp, yp, zp) = (b.x[0], b.x[1], b.z[0]);
            Ok(GroupElement {
                x: vec![x + xp, y + yp],
                z: vec![z + zp + x * yp],
            })
        }
        GroupName::TwoStep6 => {
            let ma = embed_twostep6(a);
            let mb = embed_twostep6(b);
            let mut prod = [[0.0f64; 7]; 7];
            for i in 0..7 {
                for j in 0..7 {
                    let mut acc = 0.0;
                    for l in 0..7 {
                        acc += ma[i][l] * mb[l][j];
                    }
                    prod[i][j] = acc;
                }
            }
            Ok(read_twostep6(&prod))
        }
        GroupName::ThreeStep5 => Err(Error::NoGroupLaw(spec.name.to_string())),
    }
}

/// 7×7 unitriangular realization of a twostep6 element with coordinates
/// `x = (x₁,x₂,y₁,y₂)`, `z = (z₁,z₂)`.
fn embed_twostep6(g: &GroupElement) -> [[f64; 7]; 7] {
    let (x1, x2, y1, y2) = (g.x[0], g.x[1], g.x[2], g.x[3]);
    let (z1, z2) = (g.z[0], g.z[1]);
    let mut m = [[0.0f64; 7]; 7];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    m[0][2] = x2;
    m[0][3] = x1;
    m[0][4] = -y2;
    m[0][5] = -y1;
    m[0][6] = 2.0 * z1 - x1 * y1 - x2 * y2;
    m[1][2] = x1;
    m[1][3] = x2;
    m[1][4] = -y1;
    m[1][5] = -y2;
    m[1][6] = 2.0 * z2 - x1 * y2 - x2 * y1;
    m[2][6] = y2;
    m[3][6] = y1;
    m[4][6] = x2;
    m[5][6] = x1;
    m
}

fn read_twostep6(m: &[[f64; 7]; 7]) -> GroupElement {
    let y2 = m[2][6];
    let y1 = m[3][6];
    let x2 = m[4][6];
    let x1 = m[5][6];
    let z1 = (m[0][6] + x1 * y1 + x2 * y2) / 2.0;
    let z2 = (m[1][6] + x1 * y2 + x2 * y1) / 2.0;
    GroupElement {
        x: vec![x1, x2, y1, y2],
        z: vec![z1, z2],
    }
}

/// Composes two lattice points with the group law, staying in the lattice.
///
/// The central correction terms are integers for every preset with a printed
/// law, so the lattice is closed under this composition.
pub fn lattice_compose(
    spec: &GroupSpec,
    a: &LatticePoint,
    b: &LatticePoint,
) -> Result<LatticePoint> {
    let ga = spec.element_from_lattice(a)?;
    let gb = spec.element_from_lattice(b)?;
    let prod = multiply(spec, &ga, &gb)?;
    let k = prod.x.iter().map(|&v| v.round() as i64).collect::<Vec<_>>();
    let m = prod.z.iter().map(|&v| v.round() as i64).collect::<Vec<_>>();
    for (&exact, &rounded) in prod.x.iter().zip(&k) {
        if (exact - rounded as f64).abs() > 1e-9 {
            return Err(Error::Invalid(
                "lattice_compose: product leaves the lattice".into(),
            ));
        }
    }
    for (&exact, &rounded) in prod.z.iter().zip(&m) {
        if (exact - rounded as f64).abs() > 1e-9 {
            return Err(Error::Invalid(
                "lattice_compose: product leaves the lattice".into(),
            ));
        }
    }
    Ok(LatticePoint { k, m })
}

/// Plancherel density `|Pf(λ)|`.
///
/// `abelian → 1`, `heisenberg3 → |λ|`, `twostep6 → |λ₁² − λ₂²|`,
/// `threestep5 → λ²`. Zero is a valid return; callers mask it.
pub fn pfaffian(spec: &GroupSpec, lambda: &[f64]) -> f64 {
    assert_eq!(lambda.len(), spec.r, "pfaffian: λ must have length r");
    match spec.name {
        GroupName::Abelian(_) => 1.0,
        GroupName::Heisenberg3 => lambda[0].abs(),
        GroupName::TwoStep6 => (lambda[0] * lambda[0] - lambda[1] * lambda[1]).abs(),
        GroupName::ThreeStep5 => lambda[0] * lambda[0],
    }
}

/// All `k ∈ ℤ^{2d}` with `‖k‖∞ ≤ radius`, in lexicographic order.
///
/// For `d = 0` the single empty vector is returned (`Γ₁` is trivial).
pub fn lattice_gamma1(spec: &GroupSpec, radius: i64) -> Vec<Vec<i64>> {
    assert!(radius >= 0, "lattice_gamma1: radius must be nonnegative");
    let dims = 2 * spec.d;
    let mut out = Vec::new();
    let mut current = vec![-radius; dims];
    if dims == 0 {
        return vec![vec![]];
    }
    loop {
        out.push(current.clone());
        let mut axis = dims;
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            if current[axis] < radius {
                current[axis] += 1;
                for v in current.iter_mut().skip(axis + 1) {
                    *v = -radius;
                }
                break;
            }
        }
    }
}

/// A discretized representation operator in factored form: a global phase, a
/// unimodular diagonal, and a cyclic-shift permutation.
///
/// `perm[i]` is the source row feeding output row `i`. When `mod_at_source`
/// is set the diagonal is evaluated at the source point (translation
/// outermost, as for `threestep5`); otherwise at the output point.
#[derive(Debug, Clone)]
pub struct RepOp {
    phase: C64,
    diag: Vec<C64>,
    perm: Vec<usize>,
    mod_at_source: bool,
}

impl RepOp {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    fn weight(&self, i: usize) -> C64 {
        let d = if self.mod_at_source {
            self.diag[self.perm[i]]
        } else {
            self.diag[i]
        };
        self.phase * d
    }

    /// Left composition `U ∘ h` with a Hilbert–Schmidt operator.
    pub fn apply_left(&self, h: &Operator) -> Operator {
        let n = self.dim();
        debug_assert_eq!(h.nrows(), n);
        let mut out = Operator::zeros(n, n);
        for i in 0..n {
            let w = self.weight(i);
            let s = self.perm[i];
            for l in 0..n {
                out[(i, l)] = w * h[(s, l)];
            }
        }
        out
    }

    /// Action on a vector of the model space.
    pub fn apply_vector(&self, u: &nalgebra::DVector<C64>) -> nalgebra::DVector<C64> {
        let n = self.dim();
        debug_assert_eq!(u.len(), n);
        nalgebra::DVector::from_fn(n, |i, _| self.weight(i) * u[self.perm[i]])
    }

    /// Dense matrix form of the operator.
    pub fn materialize(&self) -> Operator {
        let n = self.dim();
        let mut m = Operator::zeros(n, n);
        for i in 0..n {
            m[(i, self.perm[i])] = self.weight(i);
        }
        m
    }
}

/// Splits the orbit coordinates into (translation, modulation) parts for the
/// preset: heisenberg3 has `(x; y)`, the others `(x₁,x₂; y₁,y₂)`.
fn split_translation(spec: &GroupSpec, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    match spec.name {
        GroupName::Abelian(_) => (vec![], vec![]),
        GroupName::Heisenberg3 => (vec![x[0]], vec![x[1]]),
        GroupName::TwoStep6 | GroupName::ThreeStep5 => {
            (vec![x[0], x[1]], vec![x[2], x[3]])
        }
    }
}

/// Builds the factored representation operator `π_λ(g)` on the grid model.
///
/// The translation part of `g` must lie on the grid (each coordinate an
/// integer multiple of the spacing).
pub fn rep_op(
    spec: &GroupSpec,
    space: &GridSpace,
    lambda: &[f64],
    g: &GroupElement,
) -> Result<RepOp> {
    if lambda.len() != spec.r {
        return Err(Error::ShapeMismatch(format!(
            "rep_op: λ has length {}, expected r = {}",
            lambda.len(),
            spec.r
        )));
    }
    if g.x.len() != 2 * spec.d || g.z.len() != spec.r {
        return Err(Error::ShapeMismatch(
            "rep_op: element coordinates do not match the preset".into(),
        ));
    }
    if space.d() != spec.d {
        return Err(Error::ShapeMismatch(format!(
            "rep_op: grid dimension {} does not match the preset d = {}",
            space.d(),
            spec.d
        )));
    }

    let phase = C64::cis(TAU * lambda.iter().zip(&g.z).map(|(l, z)| l * z).sum::<f64>());
    let (trans, modu) = split_translation(spec, &g.x);

    let q = space.samples() as usize;
    let sp = space.spacing();
    let mut shift = Vec::with_capacity(trans.len());
    for &x in &trans {
        let steps = x / sp;
        let rounded = steps.round();
        if (steps - rounded).abs() > 1e-9 {
            return Err(Error::OffGrid {
                value: x,
                spacing: sp,
            });
        }
        shift.push((rounded as i64).rem_euclid(q as i64) as usize);
    }

    let dim = space.dim();
    let mut perm = Vec::with_capacity(dim);
    for flat in 0..dim {
        let idx = space.axis_indices(flat);
        let src: Vec<usize> = idx
            .iter()
            .zip(&shift)
            .map(|(&i, &a)| (i + q - a) % q)
            .collect();
        perm.push(space.flat_index(&src));
    }

    let mut diag = Vec::with_capacity(dim);
    let mut mod_at_source = false;
    match spec.name {
        GroupName::Abelian(_) => {
            diag.push(C64::new(1.0, 0.0));
        }
        GroupName::Heisenberg3 => {
            // e^{−2πiλyt} at the output point
            let (l, y) = (lambda[0], modu[0]);
            for flat in 0..dim {
                let t = space.point(flat)[0];
                diag.push(C64::cis(-TAU * l * y * t));
            }
        }
        GroupName::TwoStep6 => {
            // e^{−2πi⟨t, M_λ y⟩}, M_λ = [[λ₁,λ₂],[λ₂,λ₁]], at the output point
            let (l1, l2) = (lambda[0], lambda[1]);
            let (y1, y2) = (modu[0], modu[1]);
            let m1 = l1 * y1 + l2 * y2;
            let m2 = l2 * y1 + l1 * y2;
            for flat in 0..dim {
                let t = space.point(flat);
                diag.push(C64::cis(-TAU * (t[0] * m1 + t[1] * m2)));
            }
        }
        GroupName::ThreeStep5 => {
            // e^{πiλ(t₁²y₁ − 2t₁y₂)} e^{−2πiλt₂y₁}, evaluated before the shift
            let l = lambda[0];
            let (y1, y2) = (modu[0], modu[1]);
            for flat in 0..dim {
                let t = space.point(flat);
                let chirp = PI * l * (t[0] * t[0] * y1 - 2.0 * t[0] * y2);
                diag.push(C64::cis(chirp - TAU * l * t[1] * y1));
            }
            mod_at_source = true;
        }
    }

    Ok(RepOp {
        phase,
        diag,
        perm,
        mod_at_source,
    })
}

/// Dense unitary matrix `π_λ(g)` on the grid model.
pub fn rep_matrix(
    spec: &GroupSpec,
    space: &GridSpace,
    lambda: &[f64],
    g: &GroupElement,
) -> Result<Operator> {
    Ok(rep_op(spec, space, lambda, g)?.materialize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn all_presets() -> Vec<GroupSpec> {
        vec![
            GroupSpec::preset("abelian(1)").unwrap(),
            GroupSpec::preset("abelian(3)").unwrap(),
            GroupSpec::preset("heisenberg3").unwrap(),
            GroupSpec::preset("twostep6").unwrap(),
            GroupSpec::preset("threestep5").unwrap(),
        ]
    }

    #[test]
    fn preset_dimensions() {
        let h = GroupSpec::preset("heisenberg3").unwrap();
        assert_eq!((h.r(), h.d()), (1, 1));
        let t = GroupSpec::preset("twostep6").unwrap();
        assert_eq!((t.r(), t.d()), (2, 2));
        let s = GroupSpec::preset("threestep5").unwrap();
        assert_eq!((s.r(), s.d()), (1, 2));
        let a = GroupSpec::preset("abelian(3)").unwrap();
        assert_eq!((a.r(), a.d()), (3, 0));
        assert!(GroupSpec::preset("nilpotent9").is_err());
        assert!(GroupSpec::preset("abelian(0)").is_err());
    }

    #[test]
    fn group_law_flags() {
        for spec in all_presets() {
            let expect = !matches!(spec.name(), GroupName::ThreeStep5);
            assert_eq!(spec.has_group_law(), expect);
        }
    }

    #[test]
    fn heisenberg_product() {
        let spec = GroupSpec::preset("heisenberg3").unwrap();
        let a = spec.element(vec![1.0, 2.0], vec![0.0]).unwrap();
        let b = spec.element(vec![3.0, 4.0], vec![0.0]).unwrap();
        let p = multiply(&spec, &a, &b).unwrap();
        assert_eq!(p.x, vec![4.0, 6.0]);
        assert_eq!(p.z, vec![4.0]); // z + z' + x·y' = 0 + 0 + 1·4
    }

    #[test]
    fn identity_is_neutral() {
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        for spec in all_presets() {
            if !spec.has_group_law() {
                continue;
            }
            let a = spec
                .element(
                    (0..2 * spec.d()).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect(),
                    (0..spec.r()).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect(),
                )
                .unwrap();
            let p = multiply(&spec, &a, &spec.identity()).unwrap();
            for (u, v) in p.x.iter().zip(&a.x) {
                assert!((u - v).abs() < 1e-12);
            }
            for (u, v) in p.z.iter().zip(&a.z) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn twostep_commutator_is_central() {
        // exp(X₁) exp(Y₁) exp(−X₁) exp(−Y₁) = exp(Z₁)
        let spec = GroupSpec::preset("twostep6").unwrap();
        let ex = spec.element(vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0]).unwrap();
        let ey = spec.element(vec![0.0, 0.0, 1.0, 0.0], vec![0.0, 0.0]).unwrap();
        let ex_inv = spec.element(vec![-1.0, 0.0, 0.0, 0.0], vec![0.0, 0.0]).unwrap();
        let ey_inv = spec.element(vec![0.0, 0.0, -1.0, 0.0], vec![0.0, 0.0]).unwrap();
        let c = multiply(
            &spec,
            &multiply(&spec, &multiply(&spec, &ex, &ey).unwrap(), &ex_inv).unwrap(),
            &ey_inv,
        )
        .unwrap();
        for v in &c.x {
            assert!(v.abs() < 1e-12);
        }
        assert!((c.z[0] - 1.0).abs() < 1e-12);
        assert!(c.z[1].abs() < 1e-12);
    }

    #[test]
    fn threestep_refuses_multiplication() {
        let spec = GroupSpec::preset("threestep5").unwrap();
        let e = spec.identity();
        assert!(matches!(
            multiply(&spec, &e, &e),
            Err(Error::NoGroupLaw(_))
        ));
    }

    #[test]
    fn pfaffian_values() {
        let h = GroupSpec::preset("heisenberg3").unwrap();
        assert_eq!(pfaffian(&h, &[2.0]), 2.0);
        assert_eq!(pfaffian(&h, &[0.0]), 0.0);
        let t = GroupSpec::preset("twostep6").unwrap();
        assert_eq!(pfaffian(&t, &[3.0, 1.0]), 8.0);
        let s = GroupSpec::preset("threestep5").unwrap();
        assert_eq!(pfaffian(&s, &[-2.0]), 4.0);
        let a = GroupSpec::preset("abelian(2)").unwrap();
        assert_eq!(pfaffian(&a, &[0.3, -0.7]), 1.0);
    }

    #[test]
    fn gamma1_enumeration() {
        let h = GroupSpec::preset("heisenberg3").unwrap();
        let pts = lattice_gamma1(&h, 1);
        assert_eq!(pts.len(), 9);
        assert_eq!(pts[0], vec![-1, -1]);
        assert_eq!(pts[8], vec![1, 1]);
        assert!(pts.windows(2).all(|w| w[0] < w[1])); // lexicographic

        let a = GroupSpec::preset("abelian(2)").unwrap();
        assert_eq!(lattice_gamma1(&a, 5), vec![Vec::<i64>::new()]);

        let t = GroupSpec::preset("twostep6").unwrap();
        assert_eq!(lattice_gamma1(&t, 1).len(), 81);
    }

    #[test]
    fn rep_identity_element() {
        for spec in all_presets() {
            let space = GridSpace::new(spec.d(), 4, 4).unwrap();
            let lambda: Vec<f64> = (0..spec.r()).map(|i| 0.25 + i as f64).collect();
            let u = rep_matrix(&spec, &space, &lambda, &spec.identity()).unwrap();
            let id = Operator::identity(space.dim(), space.dim());
            assert!((u - id).iter().all(|c| c.norm() < 1e-14));
        }
    }

    #[test]
    fn rep_central_element_is_scalar() {
        let spec = GroupSpec::preset("heisenberg3").unwrap();
        let space = GridSpace::new(1, 4, 8).unwrap();
        let z = 0.7;
        let lambda = [1.25];
        let g = spec.element(vec![0.0, 0.0], vec![z]).unwrap();
        let u = rep_matrix(&spec, &space, &lambda, &g).unwrap();
        let expect = C64::cis(TAU * lambda[0] * z);
        for i in 0..space.dim() {
            for j in 0..space.dim() {
                let want = if i == j { expect } else { C64::new(0.0, 0.0) };
                assert!((u[(i, j)] - want).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn rep_unit_translation_is_cyclic_shift() {
        // q samples over window W: translation by one unit shifts q/W samples.
        let spec = GroupSpec::preset("heisenberg3").unwrap();
        let space = GridSpace::new(1, 4, 8).unwrap();
        let g = spec.element(vec![1.0, 0.0], vec![0.0]).unwrap();
        let u = rep_matrix(&spec, &space, &[0.5], &g).unwrap();
        let q = space.dim();
        let step = q / space.window() as usize;
        let mut expect = Operator::zeros(q, q);
        for i in 0..q {
            expect[(i, (i + q - step) % q)] = C64::new(1.0, 0.0);
        }
        assert!((u - expect).iter().all(|c| c.norm() < 1e-14));
    }

    #[test]
    fn rep_off_grid_translation_is_rejected() {
        let spec = GroupSpec::preset("heisenberg3").unwrap();
        let space = GridSpace::new(1, 4, 4).unwrap();
        let g = spec.element(vec![0.3, 0.0], vec![0.0]).unwrap();
        assert!(matches!(
            rep_matrix(&spec, &space, &[1.0], &g),
            Err(Error::OffGrid { .. })
        ));
    }

    #[test]
    fn rep_matrices_are_unitary() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for spec in all_presets() {
            let s = 4u32;
            let space = GridSpace::new(spec.d(), s, s).unwrap();
            for _ in 0..8 {
                let lambda: Vec<f64> = (0..spec.r())
                    .map(|_| (rng.random::<f64>() * 8.0 - 4.0).round() / s as f64)
                    .collect();
                let k: Vec<f64> = (0..2 * spec.d())
                    .map(|_| (rng.random::<f64>() * 5.0).floor() - 2.0)
                    .collect();
                let z: Vec<f64> = (0..spec.r()).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
                let g = spec.element(k, z).unwrap();
                let u = rep_matrix(&spec, &space, &lambda, &g).unwrap();
                let gram = u.adjoint() * &u;
                let id = Operator::identity(space.dim(), space.dim());
                let dev = (gram - id).iter().map(|c| c.norm()).fold(0.0, f64::max);
                assert!(dev <= 1e-12, "{}: unitarity defect {dev}", spec.name());
            }
        }
    }

    #[test]
    fn heisenberg_projective_phase() {
        // π_λ(a)·π_λ(b) = e^{2πiλ x_a y_b} π_λ(a ⊞ b) for coordinatewise ⊞,
        // when λ·W is an integer.
        let spec = GroupSpec::preset("heisenberg3").unwrap();
        let s = 4u32;
        let space = GridSpace::new(1, s, 8).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(40);
        for _ in 0..12 {
            let lambda = [(rng.random::<f64>() * 16.0 - 8.0).round() / s as f64];
            let ka: Vec<i64> = (0..2).map(|_| rng.random_range(-2..3)).collect();
            let kb: Vec<i64> = (0..2).map(|_| rng.random_range(-2..3)).collect();
            let ma = rng.random_range(-2..3);
            let mb = rng.random_range(-2..3);
            let a = spec
                .element(ka.iter().map(|&v| v as f64).collect(), vec![ma as f64])
                .unwrap();
            let b = spec
                .element(kb.iter().map(|&v| v as f64).collect(), vec![mb as f64])
                .unwrap();
            let sum = spec
                .element(
                    vec![(ka[0] + kb[0]) as f64, (ka[1] + kb[1]) as f64],
                    vec![(ma + mb) as f64],
                )
                .unwrap();
            let ua = rep_matrix(&spec, &space, &lambda, &a).unwrap();
            let ub = rep_matrix(&spec, &space, &lambda, &b).unwrap();
            let usum = rep_matrix(&spec, &space, &lambda, &sum).unwrap();
            let prod = ua * ub;
            let scalar = C64::cis(TAU * lambda[0] * ka[0] as f64 * kb[1] as f64);
            let dev = (prod - usum * scalar)
                .iter()
                .map(|c| c.norm())
                .fold(0.0, f64::max);
            assert!(dev <= 1e-10, "projective phase defect {dev}");
        }
    }

    #[test]
    fn rep_respects_group_law_products() {
        // With the true group product the discretized representation is an
        // exact homomorphism for on-grid λ.
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        for name in ["heisenberg3", "twostep6"] {
            let spec = GroupSpec::preset(name).unwrap();
            let s = 2u32;
            let space = GridSpace::new(spec.d(), s, 4).unwrap();
            for _ in 0..8 {
                let lambda: Vec<f64> = (0..spec.r())
                    .map(|_| (rng.random::<f64>() * 8.0 - 4.0).round() / s as f64)
                    .collect();
                let rand_el = |rng: &mut ChaCha12Rng| {
                    let x: Vec<f64> = (0..2 * spec.d())
                        .map(|_| rng.random_range(-2..3) as f64)
                        .collect();
                    let z: Vec<f64> = (0..spec.r())
                        .map(|_| rng.random_range(-2..3) as f64)
                        .collect();
                    spec.element(x, z).unwrap()
                };
                let a = rand_el(&mut rng);
                let b = rand_el(&mut rng);
                let ab = multiply(&spec, &a, &b).unwrap();
                let ua = rep_matrix(&spec, &space, &lambda, &a).unwrap();
                let ub = rep_matrix(&spec, &space, &lambda, &b).unwrap();
                let uab = rep_matrix(&spec, &space, &lambda, &ab).unwrap();
                let dev = (ua * ub - uab).iter().map(|c| c.norm()).fold(0.0, f64::max);
                assert!(dev <= 1e-10, "{name}: homomorphism defect {dev}");
            }
        }
    }

    proptest! {
        #[test]
        fn pfaffian_is_even(l1 in -10.0f64..10.0, l2 in -10.0f64..10.0) {
            for spec in all_presets() {
                let lambda: Vec<f64> = match spec.r() {
                    1 => vec![l1],
                    2 => vec![l1, l2],
                    _ => vec![l1, l2, l1 - l2],
                };
                let neg: Vec<f64> = lambda.iter().map(|v| -v).collect();
                prop_assert!((pfaffian(&spec, &lambda) - pfaffian(&spec, &neg)).abs() < 1e-12);
            }
        }

        #[test]
        fn multiplication_is_associative(
            coords in proptest::collection::vec(-2.0f64..2.0, 18)
        ) {
            for spec in all_presets() {
                if !spec.has_group_law() {
                    continue;
                }
                let n = 2 * spec.d() + spec.r();
                let make = |chunk: &[f64]| {
                    spec.element(chunk[..2 * spec.d()].to_vec(), chunk[2 * spec.d()..n].to_vec())
                        .unwrap()
                };
                let a = make(&coords[0..n]);
                let b = make(&coords[6..6 + n]);
                let c = make(&coords[12..12 + n]);
                let left = multiply(&spec, &multiply(&spec, &a, &b).unwrap(), &c).unwrap();
                let right = multiply(&spec, &a, &multiply(&spec, &b, &c).unwrap()).unwrap();
                for (u, v) in left.x.iter().zip(&right.x) {
                    prop_assert!((u - v).abs() < 1e-12);
                }
                for (u, v) in left.z.iter().zip(&right.z) {
                    prop_assert!((u - v).abs() < 1e-12);
                }
            }
        }
    }
}
