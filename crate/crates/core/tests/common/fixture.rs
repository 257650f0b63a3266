//! Generated ensembles and stores in temporary directories.

use std::path::PathBuf;

use ensemble_select::store::Store;
use ensemble_select::synth::{generate_ensemble, EnsembleConfig, Manifest, MANIFEST_NAME};
use ensemble_select::{CylGrid, MethodId, NormKind, Params, SimId};
use tempfile::TempDir;

/// 8 simulations, 5 time steps, 16×16 grid.
pub fn small_config() -> EnsembleConfig {
    EnsembleConfig {
        grid: CylGrid {
            n_r: 16,
            n_z: 16,
            d_r: 0.2,
            d_z: 0.2,
        },
        levels: Params::from_levels([2, 1, 2, 2, 1, 1, 1]),
        time_steps: 5,
        seed: 3,
        ..Default::default()
    }
}

pub struct Ensemble {
    pub dir: TempDir,
    pub config: EnsembleConfig,
    pub manifest: Manifest,
}

pub fn generate(config: EnsembleConfig) -> Ensemble {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    generate_ensemble(&config, &data).unwrap();
    let manifest = Manifest::read(data.join(MANIFEST_NAME)).unwrap();
    Ensemble { dir, config, manifest }
}

impl Ensemble {
    pub fn store_path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.dir.path().join("data").join(MANIFEST_NAME)
    }

    /// Open (creating) a store and register every simulation.
    pub fn ingest(&self, name: &str) -> Store {
        let store = Store::open(self.store_path(name)).unwrap();
        store.set_ensemble(&self.config.meta()).unwrap();
        store.insert_simulations(&self.manifest.simulations).unwrap();
        store
    }
}

pub fn create_method(store: &Store, gt: SimId, t: u32, norm: NormKind, description: &str) -> MethodId {
    let gt_id = match store.find_ground_truth(gt).unwrap() {
        Some(id) => id,
        None => store.register_ground_truth(gt).unwrap(),
    };
    store.create_method(gt_id, t, norm, description).unwrap()
}
