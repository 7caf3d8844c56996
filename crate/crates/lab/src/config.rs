//! Study configuration, read from and written to JSON.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use stadium_core::eigensolve::{bouncing_ball_window, SpectralWindow};
use stadium_core::fields::CutoffSpec;
use stadium_core::observables::{ObserveParams, TraceMethod};
use stadium_core::{Domain, StadiumGeometry};

/// Environment variable that overrides every output directory.
pub const OUT_ENV: &str = "STADIUM_LAB_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BouncingBallRange {
    pub n_min: u32,
    pub n_max: u32,
    pub halfwidth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StudyConfig {
    pub domain: Domain,
    /// Coarse mesh size; the study runs on the mesh refined `refinements` times.
    pub h: f64,
    pub refinements: u32,
    /// Explicit windows, solved before the bouncing-ball ones.
    pub windows: Vec<SpectralWindow>,
    pub bouncing_ball: Option<BouncingBallRange>,
    /// Cap on eigenpairs kept per window (nearest the centre).
    pub max_per_window: usize,
    pub delta: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub cutoffs: CutoffSpec,
    pub output_dir: PathBuf,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            domain: Domain::Stadium { alpha: 1.0, beta: 1.0 },
            h: 0.02,
            refinements: 1,
            windows: vec![],
            bouncing_ball: Some(BouncingBallRange { n_min: 3, n_max: 15, halfwidth: 10.0 }),
            max_per_window: 64,
            delta: 1.0,
            gamma1: -0.5,
            gamma2: 0.5,
            cutoffs: CutoffSpec::default(),
            output_dir: PathBuf::from("out/study"),
        }
    }
}

impl StudyConfig {
    pub fn load(path: &Path) -> anyhow::Result<StudyConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: StudyConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Checks every precondition that can be checked without building a mesh.
    pub fn validate(&self) -> anyhow::Result<()> {
        let (alpha, beta) = (self.domain.alpha(), self.domain.beta());
        match self.domain {
            Domain::Stadium { alpha, beta } => {
                StadiumGeometry::new(alpha, beta)?;
            }
            Domain::Rectangle { alpha, beta } => {
                if !(alpha > 0.0 && beta > 0.0) {
                    bail!("rectangle needs alpha, beta > 0");
                }
            }
            Domain::Disk { beta } => {
                if !(beta > 0.0) {
                    bail!("disk needs beta > 0");
                }
            }
        }
        let hmax = if matches!(self.domain, Domain::Rectangle { .. }) { beta } else { beta / 4.0 };
        if !(self.h > 0.0 && self.h <= hmax) {
            bail!("h = {} outside (0, {hmax}]", self.h);
        }
        if self.refinements > 4 {
            bail!("at most 4 refinement levels, got {}", self.refinements);
        }
        for w in &self.windows {
            if !(w.center > 0.0 && w.halfwidth > 0.0) {
                bail!("window {w:?} needs positive centre and halfwidth");
            }
        }
        if let Some(bb) = self.bouncing_ball {
            if bb.n_min > bb.n_max || !(bb.halfwidth > 0.0) {
                bail!("bouncing-ball range {bb:?} is empty or has nonpositive halfwidth");
            }
        }
        if self.max_per_window == 0 {
            bail!("max_per_window must be positive");
        }
        if !(self.delta > 0.0) {
            bail!("delta must be positive");
        }
        if !(-alpha <= self.gamma1 && self.gamma1 < self.gamma2 && self.gamma2 <= alpha) {
            bail!("strip needs -alpha <= gamma1 < gamma2 <= alpha");
        }
        self.cutoffs.validate()?;
        Ok(())
    }

    /// All windows in processing order, each with its bouncing-ball index.
    pub fn all_windows(&self) -> anyhow::Result<Vec<(Option<u32>, SpectralWindow)>> {
        let mut out: Vec<_> = self.windows.iter().map(|w| (None, *w)).collect();
        if let Some(bb) = self.bouncing_ball {
            for n in bb.n_min..=bb.n_max {
                out.push((Some(n), bouncing_ball_window(n, self.domain.beta(), bb.halfwidth)?));
            }
        }
        Ok(out)
    }

    pub fn observe_params(&self) -> ObserveParams {
        ObserveParams { delta: self.delta, gamma1: self.gamma1, gamma2: self.gamma2, s: 2.0, trace: TraceMethod::Variational }
    }

    /// `output_dir`, or the environment override when set.
    pub fn resolved_output_dir(&self) -> PathBuf {
        output_override().unwrap_or_else(|| self.output_dir.clone())
    }
}

pub fn output_override() -> Option<PathBuf> {
    std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}
