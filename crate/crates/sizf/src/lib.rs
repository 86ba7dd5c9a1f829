//! Fiberization toolkit for shift-invariant spaces on SI/Z nilpotent Lie
//! groups.
//!
//! The crate realizes, in an exact finite-dimensional discrete model, the
//! periodized Plancherel transform of an SI/Z group, the fiberwise lattice
//! action, range functions with their orthogonal projectors, and the
//! characterization of frame, Riesz, and orthonormal families of lattice
//! translates through per-fiber Gramian spectra. Every fast path is paired
//! with an independent brute-force oracle so that the structural identities
//! (Parseval chains, coefficient-sum identities, Gramian/translate-Gram
//! spectral equality) can be checked to near machine precision.
//!
//! The discrete model: the torus is sampled on the grid `σ ∈ {0..S−1}^r / S`,
//! the central lattice is `ℤ_S^r` (so all central sums are exact DFT
//! identities), fiber indices range over a finite box, and the realization
//! space `L²(ℝ^d)` is a periodic grid whose window equals `S`. Under this
//! contract lattice modulations are exactly periodic and the continuum
//! theorems hold verbatim in finite dimensions.
//!
//! Entry points:
//!
//! * [`group`] — group presets, Pfaffian, lattice enumeration, discretized
//!   irreducible representations.
//! * [`space`] — the grid model of `L²(ℝ^d)` and the Hilbert–Schmidt pairing.
//! * [`transform`] — operator fields, the Pfaffian weighting, periodization,
//!   their composite transform, and generator presets.
//! * [`action`] — the lattice action on fibers, analysis coefficients, frame
//!   sums, and synthesis.
//! * [`range`] — range functions, fiber Gramians, frame/Riesz/orthonormal
//!   bounds, membership tests.
//! * [`oracle`] — brute-force verifiers computed without the fiber
//!   machinery's shortcuts.
//! * [`config`], [`commands`], [`report`], [`fieldfile`] — the config-driven
//!   front end used by the `sizf` binary.
//!
//! See the crate's `examples/` directory for one runnable walk-through per
//! capability.

pub mod action;
pub mod commands;
pub mod config;
pub mod error;
pub mod fieldfile;
pub mod group;
pub mod oracle;
pub mod range;
pub mod report;
pub mod space;
pub mod transform;

pub use error::{Error, Result};

/// Runs `f` on a dedicated rayon pool with `threads` workers.
///
/// All parallel reductions in the crate collect per-fiber results in a fixed
/// order before folding, so results are bit-identical for any thread count.
pub fn run_with_threads<T, F>(threads: usize, f: F) -> T
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("failed to build worker pool");
    pool.install(f)
}
