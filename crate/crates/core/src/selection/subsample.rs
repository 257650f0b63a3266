use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SelectionError;
use crate::model::SimId;

/// Keep decision for one id: the first draw of the ChaCha stream keyed by
/// `(seed, sim_id)`. Independent of the order ids are visited in.
pub fn keeps(sim_id: SimId, p: f64, seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sim_id as u64);
    rng.gen::<f64>() < p
}

/// Independent Bernoulli(p) thinning of `ids`, preserving input order.
pub fn subsample(ids: &[SimId], p: f64, seed: u64) -> Result<Vec<SimId>, SelectionError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(SelectionError::InvalidProbability(p));
    }
    Ok(ids.iter().copied().filter(|&id| keeps(id, p, seed)).collect())
}
