//! Configuration-driven run setup.
//!
//! A run is described by a single TOML file; no flags override it except
//! `--output` and `--threads`. Example:
//!
//! ```toml
//! group = "heisenberg3"
//! S = 8
//! c = 1
//! j_half = 2
//! gamma1_radius = 1
//! seed = 7
//! mode = "frame"
//! output = "report.json"
//!
//! [[generators]]
//! kind = "random"
//! seed = 7
//!
//! [tolerances]
//! pf_eps = 1e-9
//! rank_rel_tol = 1e-9
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::action::TranslateSystem;
use crate::error::{Error, Result};
use crate::group::{lattice_gamma1, GroupSpec};
use crate::range::BoundsMode;
use crate::transform::{build_generator, t_transform, GeneratorSpec, Layout};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Tolerances {
    pub pf_eps: f64,
    pub rank_rel_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            pf_eps: 1e-9,
            rank_rel_tol: 1e-9,
        }
    }
}

fn default_c() -> u32 {
    1
}

fn default_mode() -> String {
    "frame".into()
}

/// One run: the discretization, the generator list, and the report target.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    /// Group preset name: `abelian(r)`, `heisenberg3`, `twostep6`, `threestep5`.
    pub group: String,
    /// Torus samples per axis (also the grid window length).
    #[serde(rename = "S")]
    pub s: u32,
    /// Grid samples per unit length, so `q = c·S`.
    #[serde(default = "default_c")]
    pub c: u32,
    /// Fiber box half-width: indices range over `[−j_half, j_half−1]^r`.
    pub j_half: i64,
    /// Truncation radius of `Γ₁`.
    pub gamma1_radius: i64,
    /// Generator presets.
    pub generators: Vec<GeneratorSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub seed: u64,
    /// `frame`, `riesz`, or `bessel`.
    #[serde(default = "default_mode")]
    pub mode: String,
    /// JSON report path; stdout when absent.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Optional CSV path for per-σ bounds.
    #[serde(default)]
    pub csv_output: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml_str(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.c < 1 {
            return Err(Error::Config("c must be at least 1 (q = c·S)".into()));
        }
        if self.j_half < 1 {
            return Err(Error::Config("j_half must be at least 1".into()));
        }
        if self.gamma1_radius < 0 {
            return Err(Error::Config("gamma1_radius must be nonnegative".into()));
        }
        if self.tolerances.pf_eps <= 0.0 || self.tolerances.rank_rel_tol <= 0.0 {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.generators.is_empty() {
            return Err(Error::Config("at least one generator is required".into()));
        }
        self.mode.parse::<BoundsMode>()?;
        GroupSpec::preset(&self.group)?;
        Ok(())
    }

    pub fn group_spec(&self) -> Result<GroupSpec> {
        GroupSpec::preset(&self.group)
    }

    pub fn mode(&self) -> BoundsMode {
        self.mode.parse().expect("validated at load time")
    }

    pub fn layout(&self) -> Result<Arc<Layout>> {
        Layout::new(
            self.group_spec()?,
            self.s,
            self.c,
            self.j_half,
            self.tolerances.pf_eps,
        )
    }

    /// Builds the translate system: transformed generators over the
    /// truncated `Γ₁`.
    pub fn system(&self) -> Result<TranslateSystem> {
        let layout = self.layout()?;
        let spec = self.group_spec()?;
        let mut generators = Vec::with_capacity(self.generators.len());
        for g in &self.generators {
            let field = build_generator(g, &layout)?;
            generators.push(t_transform(&field));
        }
        TranslateSystem::new(generators, lattice_gamma1(&spec, self.gamma1_radius))
    }

    /// Echo of the reproducibility-relevant fields, embedded in reports.
    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            group: self.group.clone(),
            s: self.s,
            c: self.c,
            j_half: self.j_half,
            gamma1_radius: self.gamma1_radius,
            generator_count: self.generators.len(),
            seed: self.seed,
            mode: self.mode.clone(),
            pf_eps: self.tolerances.pf_eps,
            rank_rel_tol: self.tolerances.rank_rel_tol,
        }
    }
}

/// Deterministic summary of a config, free of filesystem paths.
#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub group: String,
    #[serde(rename = "S")]
    pub s: u32,
    pub c: u32,
    pub j_half: i64,
    pub gamma1_radius: i64,
    pub generator_count: usize,
    pub seed: u64,
    pub mode: String,
    pub pf_eps: f64,
    pub rank_rel_tol: f64,
}
