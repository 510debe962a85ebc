use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{CoincidenceCounter, CoincidenceCounts, DetectionRecord, DetectorConfig, HbtError};
use crate::photon_model::{PhotonNumberDistribution, SourceKind};

/// Pulses generated from one random stream. Batch `b` covers pulse indices
/// `[b * BATCH_PULSES, (b + 1) * BATCH_PULSES)` and draws from ChaCha stream
/// `b` of the run seed, so any batch can be produced independently.
pub const BATCH_PULSES: u64 = 1 << 16;

// Minimum cutoff used when sampling from a `SourceKind`.
const SAMPLING_MIN_CUT: usize = 25;

#[derive(Debug, Clone)]
struct PulseSampler {
    /// Cumulative photon-number distribution rescaled to end at exactly 1.
    cdf: Vec<f64>,
    efficiency: f64,
    split_cdf: [f64; 4],
    dark: f64,
}

impl PulseSampler {
    fn new(dist: &PhotonNumberDistribution, cfg: &DetectorConfig) -> Self {
        let mut cdf = dist.cumulative();
        let total = *cdf.last().expect("distribution has at least two entries");
        cdf.iter_mut().for_each(|c| *c /= total);
        let mut split_cdf = [0.0; 4];
        let mut acc = 0.0;
        for (d, p) in cfg.split_probs.iter().enumerate() {
            acc += p;
            split_cdf[d] = acc;
        }
        Self {
            cdf,
            efficiency: cfg.efficiency,
            split_cdf,
            dark: cfg.dark_count_prob,
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> u8 {
        let u: f64 = rng.random();
        let last = self.cdf.len() - 1;
        let photons = self.cdf.iter().position(|&c| u < c).unwrap_or(last);
        let mut mask = 0u8;
        for _ in 0..photons {
            if rng.random::<f64>() < self.efficiency {
                let v: f64 = rng.random();
                let d = self.split_cdf.iter().position(|&c| v < c).unwrap_or(3);
                mask |= 1 << d;
            }
        }
        if self.dark > 0.0 {
            for d in 0..4 {
                if rng.random::<f64>() < self.dark {
                    mask |= 1 << d;
                }
            }
        }
        mask
    }

    fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(batch);
        rng
    }
}

/// Deterministic stream of per-pulse click records.
#[derive(Debug, Clone)]
pub struct PulseTrain {
    sampler: PulseSampler,
    seed: u64,
    n_pulses: u64,
    next: u64,
    rng: ChaCha8Rng,
}

impl PulseTrain {
    pub fn from_distribution(
        dist: &PhotonNumberDistribution,
        n_pulses: u64,
        cfg: &DetectorConfig,
        seed: u64,
    ) -> Result<Self, HbtError> {
        cfg.validate()?;
        if n_pulses == 0 {
            return Err(HbtError::InvalidConfig(
                "at least one pulse is required".into(),
            ));
        }
        Ok(Self {
            sampler: PulseSampler::new(dist, cfg),
            seed,
            n_pulses,
            next: 0,
            rng: PulseSampler::batch_rng(seed, 0),
        })
    }

    pub fn n_pulses(&self) -> u64 {
        self.n_pulses
    }
}

impl Iterator for PulseTrain {
    type Item = DetectionRecord;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.n_pulses {
            return None;
        }
        let index = self.next;
        if index > 0 && index.is_multiple_of(BATCH_PULSES) {
            self.rng = PulseSampler::batch_rng(self.seed, index / BATCH_PULSES);
        }
        let mask = self.sampler.sample(&mut self.rng);
        self.next += 1;
        Some(DetectionRecord::from_mask(index, mask))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.n_pulses - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for PulseTrain {}

/// Simulates `n_pulses` pulses of `source` through the four-detector setup.
///
/// Each pulse: draw a photon number from the source, route every photon to a
/// detector by `split_probs`, register it with probability `efficiency`; a
/// detector clicks when it registers at least one photon or fires a dark
/// count. Identical arguments always give the identical stream.
pub fn simulate_pulse_train(
    source: &SourceKind,
    n_pulses: u64,
    cfg: &DetectorConfig,
    seed: u64,
) -> Result<PulseTrain, HbtError> {
    let dist = source.auto_distribution(SAMPLING_MIN_CUT)?;
    PulseTrain::from_distribution(&dist, n_pulses, cfg, seed)
}

/// Coincidence counts of [`simulate_pulse_train`] computed batch-parallel
/// without materialising the stream. Equal to counting the serial stream.
pub fn simulate_counts(
    source: &SourceKind,
    n_pulses: u64,
    cfg: &DetectorConfig,
    seed: u64,
) -> Result<CoincidenceCounts, HbtError> {
    let dist = source.auto_distribution(SAMPLING_MIN_CUT)?;
    // Validates the configuration.
    let train = PulseTrain::from_distribution(&dist, n_pulses, cfg, seed)?;
    let sampler = train.sampler;
    let n_batches = n_pulses.div_ceil(BATCH_PULSES);
    let patterns = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = PulseSampler::batch_rng(seed, b);
            let start = b * BATCH_PULSES;
            let end = (start + BATCH_PULSES).min(n_pulses);
            let mut hist = [0u64; 16];
            for _ in start..end {
                hist[sampler.sample(&mut rng) as usize] += 1;
            }
            hist
        })
        .reduce(
            || [0u64; 16],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    CoincidenceCounter::from_patterns(patterns).finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hbt::count_coincidences;

    #[test]
    fn single_photons_click_at_most_once() {
        let cfg = DetectorConfig::with_efficiency(0.01);
        let train = simulate_pulse_train(&SourceKind::SinglePhoton, 20_000, &cfg, 11).unwrap();
        for r in train {
            assert!(r.clicks.iter().filter(|c| **c).count() <= 1);
        }
        let train = simulate_pulse_train(&SourceKind::SinglePhoton, 4, &cfg, 11).unwrap();
        assert_eq!(train.count(), 4);
    }

    #[test]
    fn vacuum_like_source_never_clicks() {
        let cfg = DetectorConfig::default();
        for seed in [0, 1, 99] {
            let train =
                simulate_pulse_train(&SourceKind::Poisson { mean: 1e-9 }, 50_000, &cfg, seed)
                    .unwrap();
            assert!(train.into_iter().all(|r| r.clicks == [false; 4]));
        }
    }

    #[test]
    fn dark_counts_fire_without_light() {
        let cfg = DetectorConfig {
            dark_count_prob: 0.1,
            ..DetectorConfig::default()
        };
        let counts =
            simulate_counts(&SourceKind::Poisson { mean: 1e-9 }, 100_000, &cfg, 4).unwrap();
        for s in counts.singles {
            assert!((s as f64 - 10_000.0).abs() < 5.0 * (100_000.0f64 * 0.1 * 0.9).sqrt());
        }
    }

    #[test]
    fn indices_are_consecutive_across_batches() {
        let cfg = DetectorConfig::default();
        let n = BATCH_PULSES * 2 + 17;
        let train = simulate_pulse_train(&SourceKind::Poisson { mean: 0.42 }, n, &cfg, 5).unwrap();
        assert_eq!(train.len() as u64, n);
        for (i, r) in train.enumerate() {
            assert_eq!(r.pulse_index, i as u64);
        }
    }

    #[test]
    fn parallel_counts_equal_serial_counts() {
        let cfg = DetectorConfig::with_efficiency(0.01);
        let source = SourceKind::Thermal { mean: 3.0 };
        let n = BATCH_PULSES * 3 + 1234;
        let serial =
            count_coincidences(simulate_pulse_train(&source, n, &cfg, 21).unwrap()).unwrap();
        let parallel = simulate_counts(&source, n, &cfg, 21).unwrap();
        assert_eq!(serial, parallel);
    }

    #[test]
    fn seeds_change_the_stream() {
        let cfg = DetectorConfig::with_efficiency(0.01);
        let source = SourceKind::Poisson { mean: 5.0 };
        let a: Vec<_> = simulate_pulse_train(&source, 1000, &cfg, 1)
            .unwrap()
            .collect();
        let b: Vec<_> = simulate_pulse_train(&source, 1000, &cfg, 1)
            .unwrap()
            .collect();
        let c: Vec<_> = simulate_pulse_train(&source, 1000, &cfg, 2)
            .unwrap()
            .collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_configuration_rejected() {
        let cfg = DetectorConfig::with_efficiency(0.05);
        assert!(matches!(
            simulate_pulse_train(&SourceKind::SinglePhoton, 10, &cfg, 0),
            Err(HbtError::InvalidConfig(_))
        ));
        let cfg = DetectorConfig::default();
        assert!(simulate_pulse_train(&SourceKind::SinglePhoton, 0, &cfg, 0).is_err());
    }
}
