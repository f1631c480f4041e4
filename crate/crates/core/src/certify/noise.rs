use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::Bitstring;
use crate::error::{Error, Result};
use crate::statevec::{Distribution, MeasurementRecord};

/// Imperfections of the experiment: an independent outcome bit-flip rate
/// and an optional depolarizing perturbation of the prepared state.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub flip: f64,
    /// Sites depolarized with weight `depolarizing` before measurement.
    pub depolarized_sites: Vec<usize>,
    pub depolarizing: f64,
}

impl NoiseModel {
    pub fn flips(flip: f64) -> Result<Self> {
        let model = Self { flip, ..Self::default() };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=0.5).contains(&self.flip) {
            return Err(Error::InvalidParameter(format!("flip rate {} must lie in [0, 1/2]", self.flip)));
        }
        if !(0.0..=1.0).contains(&self.depolarizing) {
            return Err(Error::InvalidParameter(format!(
                "depolarizing weight {} must lie in [0, 1]",
                self.depolarizing
            )));
        }
        Ok(())
    }
}

/// Flips each recorded bit independently with probability `flip`.
pub fn apply_noise_to_record(record: &MeasurementRecord, flip: f64, seed: u64) -> Result<MeasurementRecord> {
    NoiseModel::flips(flip)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outcomes = record
        .outcomes
        .iter()
        .map(|o| {
            let mut bits = o.bits();
            for site in 0..o.len() {
                if rng.random::<f64>() < flip {
                    bits ^= 1 << site;
                }
            }
            Bitstring::new(bits, o.len())
        })
        .collect::<Result<_>>()?;
    Ok(MeasurementRecord { outcomes, ..record.clone() })
}

/// The exact image of `dist` under independent bit flips with probability
/// `flip` on every site.
pub fn apply_noise_to_distribution(dist: &Distribution, flip: f64) -> Result<Distribution> {
    NoiseModel::flips(flip)?;
    let mut probs = dist.probabilities().to_vec();
    for site in 0..dist.num_bits() {
        let bit = 1usize << site;
        for x in 0..probs.len() {
            if x & bit == 0 {
                let (a, b) = (probs[x], probs[x | bit]);
                probs[x] = (1.0 - flip) * a + flip * b;
                probs[x | bit] = flip * a + (1.0 - flip) * b;
            }
        }
    }
    Distribution::new(dist.num_bits(), probs)
}
