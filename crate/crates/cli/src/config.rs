//! TOML run configuration mirroring `SolveConfig`.
//!
//! Every section and key is optional; missing values take the defaults
//! shown in the README schema. Paths in `[initial]` are taken as given
//! (relative to the working directory).

use std::path::{Path, PathBuf};

use serde::Deserialize;

use hheat_core::grid::GridSpec;
use hheat_core::semigroup::SemigroupBackend;
use hheat_core::solver::{InitialData, InitialProfile, MonitorFlags, SolveConfig};
use hheat_core::{CoreError, Result};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub monitors: MonitorSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    pub n: Option<usize>,
    pub p: Option<f64>,
    pub gamma: Option<f64>,
}

impl Default for ProblemSection {
    fn default() -> Self {
        ProblemSection {
            n: None,
            p: None,
            gamma: None,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub half_width_xy: Option<f64>,
    pub half_width_tau: Option<f64>,
    pub points_per_xy_axis: Option<usize>,
    pub points_per_tau_axis: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// "koranyi_gaussian" | "plateau" | "power_decay" | "dump"
    pub profile: Option<String>,
    pub amplitude: Option<f64>,
    pub radius: Option<f64>,
    pub kappa: Option<f64>,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub time_step: Option<f64>,
    pub t_end: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub blowup_threshold: Option<f64>,
    /// "fd" | "kernel"
    pub backend: Option<String>,
    pub lq_norms: Option<Vec<f64>>,
    pub snapshot_times: Option<Vec<f64>>,
    pub nonlinearity_enabled: Option<bool>,
    pub max_history_bytes: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorSection {
    pub positivity: Option<bool>,
    pub local_window: Option<bool>,
    pub moment_inequality: Option<bool>,
}

pub mod defaults {
    pub const N: usize = 1;
    pub const P: f64 = 2.0;
    pub const GAMMA: f64 = 0.5;
    pub const HALF_WIDTH_XY: f64 = 4.0;
    pub const HALF_WIDTH_TAU: f64 = 16.0;
    pub const POINTS_XY: usize = 48;
    pub const POINTS_TAU: usize = 48;
    pub const AMPLITUDE: f64 = 1.0;
    pub const PLATEAU_RADIUS: f64 = 1.5;
    pub const POWER_KAPPA: f64 = 1.0;
    pub const TIME_STEP: f64 = 0.05;
    pub const T_END: f64 = 5.0;
    pub const BLOWUP_THRESHOLD: f64 = 1e6;
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text)
            .map_err(|e| CoreError::InvalidParameter(format!("bad config: {e}")))
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(
            self.problem.n.unwrap_or(defaults::N),
            self.grid.half_width_xy.unwrap_or(defaults::HALF_WIDTH_XY),
            self.grid.half_width_tau.unwrap_or(defaults::HALF_WIDTH_TAU),
            self.grid.points_per_xy_axis.unwrap_or(defaults::POINTS_XY),
            self.grid.points_per_tau_axis.unwrap_or(defaults::POINTS_TAU),
        )
    }

    pub fn initial_data(&self) -> Result<InitialData> {
        let amplitude = self.initial.amplitude.unwrap_or(defaults::AMPLITUDE);
        let name = self
            .initial
            .profile
            .clone()
            .unwrap_or_else(|| "koranyi_gaussian".to_string());
        let data = match name.as_str() {
            "koranyi_gaussian" => InitialData::Profile {
                profile: InitialProfile::KoranyiGaussian,
                amplitude,
            },
            "plateau" => InitialData::Profile {
                profile: InitialProfile::PlateauBump {
                    radius: self.initial.radius.unwrap_or(defaults::PLATEAU_RADIUS),
                },
                amplitude,
            },
            "power_decay" => InitialData::Profile {
                profile: InitialProfile::PowerDecay {
                    kappa: self.initial.kappa.unwrap_or(defaults::POWER_KAPPA),
                },
                amplitude,
            },
            "dump" => InitialData::Dump(self.initial.path.clone().ok_or_else(|| {
                CoreError::InvalidParameter("initial.profile = \"dump\" needs initial.path".into())
            })?),
            other => {
                return Err(CoreError::InvalidParameter(format!(
                    "unknown initial profile {other:?}"
                )))
            }
        };
        Ok(data)
    }

    pub fn backend(&self) -> Result<SemigroupBackend> {
        match self.solver.backend.as_deref() {
            None | Some("fd") => Ok(SemigroupBackend::FdStepping),
            Some("kernel") => Ok(SemigroupBackend::KernelConvolution),
            Some(other) => Err(CoreError::InvalidParameter(format!(
                "unknown backend {other:?} (use \"fd\" or \"kernel\")"
            ))),
        }
    }

    pub fn solve_config(&self) -> Result<SolveConfig> {
        let spec = self.grid_spec()?;
        let mut cfg = SolveConfig::new(
            self.problem.n.unwrap_or(defaults::N),
            self.problem.p.unwrap_or(defaults::P),
            self.problem.gamma.unwrap_or(defaults::GAMMA),
            spec,
            self.initial_data()?,
        );
        cfg.time_step = self.time.time_step.unwrap_or(defaults::TIME_STEP);
        cfg.t_end = self.time.t_end.unwrap_or(defaults::T_END);
        cfg.blowup_threshold = self
            .solver
            .blowup_threshold
            .unwrap_or(defaults::BLOWUP_THRESHOLD);
        cfg.backend = self.backend()?;
        if let Some(lq) = &self.solver.lq_norms {
            cfg.lq_norms = lq.clone();
        }
        if let Some(ts) = &self.solver.snapshot_times {
            cfg.snapshot_times = ts.clone();
        }
        if let Some(v) = self.solver.nonlinearity_enabled {
            cfg.nonlinearity_enabled = v;
        }
        if let Some(v) = self.solver.max_history_bytes {
            cfg.max_history_bytes = v;
        }
        cfg.monitors = MonitorFlags {
            positivity: self.monitors.positivity.unwrap_or(true),
            local_window: self.monitors.local_window.unwrap_or(true),
            moment_inequality: self.monitors.moment_inequality.unwrap_or(true),
        };
        Ok(cfg)
    }

    /// Deterministic echo of the effective configuration for reports.
    pub fn echo(cfg: &SolveConfig) -> String {
        let backend = cfg.backend.name();
        let initial = match &cfg.initial {
            InitialData::Profile { profile, amplitude } => match profile {
                InitialProfile::KoranyiGaussian => {
                    format!("koranyi_gaussian amplitude={amplitude}")
                }
                InitialProfile::PlateauBump { radius } => {
                    format!("plateau radius={radius} amplitude={amplitude}")
                }
                InitialProfile::PowerDecay { kappa } => {
                    format!("power_decay kappa={kappa} amplitude={amplitude}")
                }
            },
            InitialData::Dump(path) => format!("dump path={}", path.display()),
        };
        format!(
            "n={} p={} gamma={}\n\
             grid: half_width_xy={} half_width_tau={} points_xy={} points_tau={}\n\
             initial: {}\n\
             time_step={} t_end={} blowup_threshold={:e} backend={}\n\
             monitors: positivity={} local_window={} moment_inequality={}\n",
            cfg.n,
            cfg.p,
            cfg.gamma,
            cfg.grid.half_width_xy(),
            cfg.grid.half_width_tau(),
            cfg.grid.points_per_xy_axis(),
            cfg.grid.points_per_tau_axis(),
            initial,
            cfg.time_step,
            cfg.t_end,
            cfg.blowup_threshold,
            backend,
            cfg.monitors.positivity,
            cfg.monitors.local_window,
            cfg.monitors.moment_inequality,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_defaults() {
        let fc: FileConfig = toml::from_str("").unwrap();
        let cfg = fc.solve_config().unwrap();
        assert_eq!(cfg.n, 1);
        assert_eq!(cfg.p, 2.0);
        assert_eq!(cfg.gamma, 0.5);
        assert_eq!(cfg.grid.points_per_xy_axis(), 48);
        assert_eq!(cfg.backend, SemigroupBackend::FdStepping);
    }

    #[test]
    fn full_config_round_trips() {
        let text = r#"
            [problem]
            n = 1
            p = 1.4
            gamma = 0.25

            [grid]
            half_width_xy = 3.0
            half_width_tau = 9.0
            points_per_xy_axis = 17
            points_per_tau_axis = 21

            [initial]
            profile = "power_decay"
            kappa = 1.5
            amplitude = 0.25

            [time]
            time_step = 0.01
            t_end = 2.0

            [solver]
            backend = "kernel"
            lq_norms = [2.5]

            [monitors]
            positivity = false
        "#;
        let fc: FileConfig = toml::from_str(text).unwrap();
        let cfg = fc.solve_config().unwrap();
        assert_eq!(cfg.p, 1.4);
        assert_eq!(cfg.grid.points_per_tau_axis(), 21);
        assert_eq!(cfg.backend, SemigroupBackend::KernelConvolution);
        assert!(!cfg.monitors.positivity);
        assert_eq!(cfg.lq_norms, vec![2.5]);
        match cfg.initial {
            InitialData::Profile {
                profile: InitialProfile::PowerDecay { kappa },
                amplitude,
            } => {
                assert_eq!(kappa, 1.5);
                assert_eq!(amplitude, 0.25);
            }
            other => panic!("wrong profile: {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("[problem]\nq = 3").is_err());
    }
}
