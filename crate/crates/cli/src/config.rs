//! Experiment configuration: presets, config-file keys, and flag overrides.

use std::path::PathBuf;

use beamsynth::{chebyshev_window, ArrayGeometry, SolverConfig, Tolerance};

use crate::error::CliError;
use crate::files::{parse_f64_list, KvFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// 11-element uniform linear array, one component image
    Ula11,
    /// 7-element minimum-redundancy array, two component images
    Mra7,
}

#[derive(Debug, Clone)]
pub enum QMode {
    Fixed(usize),
    /// Search Q = 1..=q_max for the smallest converging component count.
    Minimize {
        q_max: usize,
    },
}

#[derive(Debug, Clone)]
pub enum TargetSpec {
    Chebyshev {
        sidelobe_db: f64,
    },
    /// CSV samples `angle_rad,re,im`; the design grid comes from the file.
    File(PathBuf),
}

/// Fully resolved design configuration.
#[derive(Debug, Clone)]
pub struct DesignSpec {
    pub geometry: ArrayGeometry,
    pub q_mode: QMode,
    pub target: TargetSpec,
    pub design_points: usize,
    pub eval_points: usize,
    pub solver: SolverConfig,
    /// None means "scale-matched default" (see [`DesignSpec::resolve_step`]).
    pub step_size: Option<f64>,
    pub out: PathBuf,
}

impl DesignSpec {
    fn preset(preset: Preset) -> Self {
        let (geometry, q) = match preset {
            Preset::Ula11 => (ArrayGeometry::ula(11).expect("11 >= 1"), 1),
            Preset::Mra7 => (ArrayGeometry::mra7(), 2),
        };
        Self {
            geometry,
            q_mode: QMode::Fixed(q),
            target: TargetSpec::Chebyshev { sidelobe_db: 40.0 },
            design_points: 99,
            eval_points: 200,
            solver: SolverConfig::default(),
            step_size: None,
            out: PathBuf::from("out"),
        }
    }

    /// Step size to use: an explicit value wins; otherwise the reference
    /// value 1e-3 rescaled for the unit-peak Chebyshev target (gradient
    /// descent is invariant under scaling the target by `a` and the step by
    /// `1/a^2`; the unnormalized pattern has broadside value sum(w)).
    pub fn resolve_step(&self, coarray_size: usize) -> Result<f64, CliError> {
        if let Some(step) = self.step_size {
            return Ok(step);
        }
        match &self.target {
            TargetSpec::Chebyshev { sidelobe_db } => {
                let scale: f64 = chebyshev_window(coarray_size, *sidelobe_db)?.iter().sum();
                Ok(1e-3 * scale * scale)
            }
            TargetSpec::File(_) => Ok(1e-3),
        }
    }

    pub fn resolve(
        preset: Option<Preset>,
        config_path: Option<&PathBuf>,
        seed: Option<u64>,
        out: Option<&PathBuf>,
    ) -> Result<Self, CliError> {
        let mut spec = match preset {
            Some(p) => Self::preset(p),
            None => {
                if config_path.is_none() {
                    return Err(CliError::usage(
                        "design needs --preset and/or --config to define the experiment",
                    ));
                }
                Self::preset(Preset::Ula11)
            }
        };
        if let Some(path) = config_path {
            spec.apply_config(&KvFile::load(path)?)?;
        }
        if let Some(seed) = seed {
            spec.solver.seed = seed;
        }
        if let Some(out) = out {
            spec.out = out.clone();
        }
        spec.validate()?;
        Ok(spec)
    }

    fn apply_config(&mut self, kv: &KvFile) -> Result<(), CliError> {
        match kv.get("array") {
            Some("ula") => {
                let n = kv.get_usize("elements")?.unwrap_or(11);
                self.geometry =
                    ArrayGeometry::ula(n).map_err(|e| CliError::usage(e.to_string()))?;
            }
            Some("mra7") => self.geometry = ArrayGeometry::mra7(),
            Some("custom") => {
                let positions = parse_f64_list(kv.require("positions")?, "positions")?;
                self.geometry =
                    ArrayGeometry::new(positions).map_err(|e| CliError::usage(e.to_string()))?;
            }
            Some(other) => {
                return Err(CliError::usage(format!(
                    "array must be ula | mra7 | custom, got `{other}`"
                )))
            }
            None => {}
        }

        match kv.get("q") {
            Some("auto") => {
                let q_max = kv.get_usize("q_max")?.unwrap_or(8);
                self.q_mode = QMode::Minimize { q_max };
            }
            Some(q) => {
                let q = q.parse::<usize>().map_err(|_| {
                    CliError::usage(format!("q must be `auto` or an integer, got `{q}`"))
                })?;
                self.q_mode = QMode::Fixed(q);
            }
            None => {}
        }

        match kv.get("target") {
            Some("chebyshev") | None => {
                if let Some(db) = kv.get_f64("sidelobe_db")? {
                    self.target = TargetSpec::Chebyshev { sidelobe_db: db };
                }
            }
            Some("file") => {
                let path = kv.require("target_file")?;
                self.target = TargetSpec::File(PathBuf::from(path));
            }
            Some(other) => {
                return Err(CliError::usage(format!(
                    "target must be chebyshev | file, got `{other}`"
                )))
            }
        }

        if let Some(v) = kv.get_usize("design_points")? {
            self.design_points = v;
        }
        if let Some(v) = kv.get_usize("eval_points")? {
            self.eval_points = v;
        }
        if let Some(v) = kv.get_f64("step_size")? {
            self.step_size = Some(v);
        }
        if let Some(v) = kv.get_usize("max_iters")? {
            self.solver.max_iters = v;
        }
        if let Some(v) = kv.get_f64("tolerance")? {
            let relative = match kv.get("tolerance_mode") {
                Some("relative") | None => true,
                Some("absolute") => false,
                Some(other) => {
                    return Err(CliError::usage(format!(
                        "tolerance_mode must be relative | absolute, got `{other}`"
                    )))
                }
            };
            self.solver.tolerance = if relative {
                Tolerance::RelativeToTargetNorm(v)
            } else {
                Tolerance::Absolute(v)
            };
        }
        if let Some(v) = kv.get_usize("restarts")? {
            self.solver.restarts = v;
        }
        if let Some(v) = kv.get_f64("rank_tol")? {
            self.solver.rank_tol = Some(v);
        }
        if let Some(v) = kv.get_u64("seed")? {
            self.solver.seed = v;
        }
        if let Some(v) = kv.get("out") {
            self.out = PathBuf::from(v);
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), CliError> {
        if let Some(step) = self.step_size {
            if step <= 0.0 || !step.is_finite() {
                return Err(CliError::usage(format!(
                    "step_size must be positive and finite, got {step}"
                )));
            }
        }
        let tol = match self.solver.tolerance {
            Tolerance::Absolute(t) | Tolerance::RelativeToTargetNorm(t) => t,
        };
        if tol < 0.0 || tol.is_nan() {
            return Err(CliError::usage(format!(
                "tolerance must be >= 0, got {tol}"
            )));
        }
        match self.q_mode {
            QMode::Fixed(0) => Err(CliError::usage("q must be at least 1")),
            QMode::Minimize { q_max: 0 } => Err(CliError::usage("q_max must be at least 1")),
            _ => Ok(()),
        }
    }
}
