//! Desk-scale synthetic shell-implosion ensemble.
//!
//! Each simulation is a spherical shell seen in the (R, z) half plane:
//! void inside `r_in`, shocked material between `r_in` and the outgoing
//! shock `r_s(t)`, unshocked material out to the (angularly perturbed) edge
//! `r_e(θ, t)`, and vacuum beyond. Parameter effects:
//!
//! * `cs` sets the shock speed (strong effect on shock and density);
//! * `rho0` scales the density amplitude and slightly slows the shock;
//! * `profile` shapes the density gradient behind the shock, leaving the
//!   shock and edge curves untouched;
//! * `s1`, `s2` add mode-2 and mode-4 ripples to the edge;
//! * `mgrg` scales the density by `1 + 0.001·level`;
//! * `tshift` offsets the clock.
//!
//! A seeded per-configuration offset of the shock launch radius keeps
//! shock distances distinct. It ignores `mgrg`, so runs differing only in
//! `mgrg` share their shock exactly.
//!
//! The functional forms are stand-ins for a hydrodynamics code; only the
//! qualitative structure above is meaningful.

mod files;

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use files::{read_density, read_features, write_density, write_features, Manifest, MANIFEST_NAME};

use crate::distance::fourier_decompose;
use crate::model::{EnsembleMeta, Params, SimId, SimulationRecord, Validate, ValidationError, DEFAULT_TIME_STEPS};
use crate::{CylGrid, DensityField, FeatureSet};

const INNER_RADIUS: f64 = 0.15;
const SHOCK_LAUNCH: f64 = 0.2;
const SHOCK_SPEED: f64 = 0.01;
const SHOCK_SPEED_PER_CS: f64 = 0.008;
const SHOCK_SLOWDOWN_PER_RHO0: f64 = 0.001;
const SHOCK_JITTER: f64 = 0.001;
const EDGE_START: f64 = 0.7;
const EDGE_SPEED: f64 = 0.019;
const EDGE_MODE2_PER_S1: f64 = 0.03;
const EDGE_MODE4_PER_S2: f64 = 0.02;
const SHOCKED_DENSITY: f64 = 2.0;
const UNSHOCKED_DENSITY: f64 = 1.0;
const PROFILE_SLOPE: f64 = 1.0;
const AMPLITUDE_PER_RHO0: f64 = 0.25;
const AMPLITUDE_PER_MGRG: f64 = 0.001;
const CLOCK_PER_TSHIFT: f64 = 2.0;

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed file {path}: {reason}")]
    MalformedFile { path: PathBuf, reason: String },
    #[error(transparent)]
    Invalid(#[from] ValidationError),
    #[error("time step {t} outside 1..={max}")]
    TimeStep { t: u32, max: u32 },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn default_grid() -> CylGrid {
    CylGrid {
        n_r: 64,
        n_z: 64,
        d_r: 0.05,
        d_z: 0.05,
    }
}
fn default_levels() -> Params {
    Params::from_levels([3, 3, 3, 2, 2, 2, 1])
}
fn default_time_steps() -> u32 {
    DEFAULT_TIME_STEPS
}
fn default_n_theta() -> usize {
    64
}
fn default_n_modes() -> usize {
    9
}

/// Shape and seed of a synthetic ensemble. `levels` holds the number of
/// levels per parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    #[serde(default = "default_grid")]
    pub grid: CylGrid,
    #[serde(default = "default_levels")]
    pub levels: Params,
    #[serde(default = "default_time_steps")]
    pub time_steps: u32,
    #[serde(default = "default_n_theta")]
    pub n_theta: usize,
    #[serde(default = "default_n_modes")]
    pub n_modes: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            grid: default_grid(),
            levels: default_levels(),
            time_steps: default_time_steps(),
            n_theta: default_n_theta(),
            n_modes: default_n_modes(),
            seed: 0,
        }
    }
}

impl Validate for EnsembleConfig {
    fn validate(&self) -> Result<(), ValidationError> {
        self.grid.validate()?;
        if let Some(i) = self.levels.levels().iter().position(|&n| n == 0) {
            return Err(ValidationError::new(
                format!("levels.{}", crate::model::PARAM_NAMES[i]),
                "needs at least one level",
            ));
        }
        if self.time_steps == 0 {
            return Err(ValidationError::new("time_steps", "must be at least 1"));
        }
        if self.n_modes == 0 || self.n_theta < 2 * self.n_modes {
            return Err(ValidationError::new("n_theta", "must be at least twice n_modes"));
        }
        Ok(())
    }
}

impl EnsembleConfig {
    pub fn size(&self) -> usize {
        self.levels.levels().iter().map(|&n| n as usize).product()
    }

    /// Every parameter combination; the last parameter varies fastest.
    pub fn combinations(&self) -> Vec<Params> {
        let counts = self.levels.levels();
        let mut out = Vec::with_capacity(self.size());
        let mut current = [0u32; 7];
        'outer: loop {
            out.push(Params::from_levels(current));
            for i in (0..7).rev() {
                current[i] += 1;
                if current[i] < counts[i] {
                    continue 'outer;
                }
                current[i] = 0;
            }
            break;
        }
        out
    }

    pub fn meta(&self) -> EnsembleMeta {
        EnsembleMeta {
            n_time_steps: self.time_steps,
            level_counts: self.levels,
            n_modes: self.n_modes,
            grid: self.grid,
        }
    }

    fn check(&self, params: &Params, t: u32) -> Result<(), SynthError> {
        params.check_levels(&self.levels)?;
        if t == 0 || t > self.time_steps {
            return Err(SynthError::TimeStep {
                t,
                max: self.time_steps,
            });
        }
        Ok(())
    }

    /// Seeded launch offset of the shock, shared by runs that differ only
    /// in `mgrg`.
    fn shock_offset(&self, params: &Params) -> f64 {
        let key = Params { mgrg: 0, ..*params };
        let stream = key
            .levels()
            .iter()
            .zip(self.levels.levels())
            .fold(0u64, |acc, (&level, count)| acc * count as u64 + level as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng.gen_range(-SHOCK_JITTER..=SHOCK_JITTER)
    }

    fn clock(params: &Params, t: u32) -> f64 {
        t as f64 + CLOCK_PER_TSHIFT * params.tshift as f64
    }

    /// Radius of the (circular) shock front at time step `t`.
    pub fn shock_radius(&self, params: &Params, t: u32) -> Result<f64, SynthError> {
        self.check(params, t)?;
        let tau = Self::clock(params, t);
        let speed = SHOCK_SPEED + SHOCK_SPEED_PER_CS * params.cs as f64 - SHOCK_SLOWDOWN_PER_RHO0 * params.rho0 as f64;
        Ok(SHOCK_LAUNCH + speed * tau + self.shock_offset(params))
    }

    fn edge_radius(params: &Params, tau: f64, theta: f64) -> f64 {
        let mean = EDGE_START + EDGE_SPEED * tau;
        mean * (1.0
            + EDGE_MODE2_PER_S1 * params.s1 as f64 * (2.0 * theta).cos()
            + EDGE_MODE4_PER_S2 * params.s2 as f64 * (4.0 * theta).cos())
    }

    fn angles(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_theta).map(move |i| std::f64::consts::TAU * i as f64 / self.n_theta as f64)
    }

    pub fn density_at(&self, params: &Params, t: u32) -> Result<DensityField, SynthError> {
        let r_s = self.shock_radius(params, t)?;
        let tau = Self::clock(params, t);
        let amplitude =
            (1.0 + AMPLITUDE_PER_RHO0 * params.rho0 as f64) * (1.0 + AMPLITUDE_PER_MGRG * params.mgrg as f64);
        let slope = if params.profile == 0 {
            0.0
        } else {
            let magnitude = PROFILE_SLOPE * params.profile.div_ceil(2) as f64;
            if params.profile % 2 == 1 {
                magnitude
            } else {
                -magnitude
            }
        };
        let values = self
            .grid
            .cells()
            .map(|(_, r, z)| {
                let s = r.hypot(z);
                let theta = z.atan2(r);
                if s < INNER_RADIUS || s > Self::edge_radius(params, tau, theta) {
                    0.0
                } else if s <= r_s {
                    let x = (s - INNER_RADIUS) / (r_s - INNER_RADIUS);
                    amplitude * (SHOCKED_DENSITY + slope * (x - 0.5))
                } else {
                    amplitude * UNSHOCKED_DENSITY
                }
            })
            .collect();
        Ok(DensityField::new(self.grid, values)?)
    }

    pub fn features_at(&self, params: &Params, t: u32) -> Result<FeatureSet, SynthError> {
        let r_s = self.shock_radius(params, t)?;
        let tau = Self::clock(params, t);
        let shock: Vec<f64> = self.angles().map(|_| r_s).collect();
        let edge: Vec<f64> = self.angles().map(|th| Self::edge_radius(params, tau, th)).collect();
        let decompose = |c: &[f64]| fourier_decompose(c, self.n_modes).expect("n_theta validated against n_modes");
        Ok(FeatureSet {
            shock: decompose(&shock),
            edge: decompose(&edge),
        })
    }
}

/// Generate every simulation of `config` under `out_dir` and write its
/// manifest. Output depends only on the config (including its seed).
pub fn generate_ensemble(
    config: &EnsembleConfig,
    out_dir: impl AsRef<Path>,
) -> Result<Vec<SimulationRecord>, SynthError> {
    config.validate()?;
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir)?;
    let records = config
        .combinations()
        .into_par_iter()
        .enumerate()
        .map(|(i, params)| {
            let sim_id = i as SimId + 1;
            let rel = format!("sim_{sim_id:04}");
            std::fs::create_dir_all(out_dir.join(&rel))?;
            let mut features = Vec::with_capacity(config.time_steps as usize);
            for t in 1..=config.time_steps {
                write_density(
                    &config.density_at(&params, t)?,
                    out_dir.join(format!("{rel}/rho_{t:03}.bin")),
                )?;
                features.push(config.features_at(&params, t)?);
            }
            write_features(&features, out_dir.join(format!("{rel}/features.txt")))?;
            Ok(SimulationRecord {
                sim_id,
                params,
                density_path: format!("{rel}/rho_{{t}}.bin"),
                feature_path: format!("{rel}/features.txt"),
            })
        })
        .collect::<Result<Vec<_>, SynthError>>()?;
    Manifest {
        config: config.clone(),
        simulations: records.clone(),
    }
    .write(out_dir.join(MANIFEST_NAME))?;
    Ok(records)
}
