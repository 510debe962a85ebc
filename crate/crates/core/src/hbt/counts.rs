use serde::{Deserialize, Serialize};

use super::{DetectionRecord, HbtError, NUM_DETECTORS};

/// Detector pairs in the order used by [`CoincidenceCounts::pair_counts`].
pub const PAIRS: [[usize; 2]; 6] = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]];
/// Detector triples in the order used by [`CoincidenceCounts::triple_counts`].
pub const TRIPLES: [[usize; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];

/// Zero-delay coincidence counts over a stream of pulse slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CoincidenceCounts {
    pub n_pulses: u64,
    pub singles: [u64; NUM_DETECTORS],
    pub pair_counts: [u64; 6],
    pub triple_counts: [u64; 4],
    pub quad_count: u64,
}

impl CoincidenceCounts {
    pub fn pair(&self, i: usize, j: usize) -> u64 {
        let key = [i.min(j), i.max(j)];
        PAIRS
            .iter()
            .position(|p| *p == key)
            .map(|k| self.pair_counts[k])
            .unwrap_or(0)
    }

    pub fn triple(&self, mut key: [usize; 3]) -> u64 {
        key.sort_unstable();
        TRIPLES
            .iter()
            .position(|t| *t == key)
            .map(|k| self.triple_counts[k])
            .unwrap_or(0)
    }

    /// Adds the counts of a disjoint stretch of pulses.
    pub fn merge(&mut self, other: &CoincidenceCounts) {
        self.n_pulses += other.n_pulses;
        for d in 0..NUM_DETECTORS {
            self.singles[d] += other.singles[d];
        }
        for k in 0..6 {
            self.pair_counts[k] += other.pair_counts[k];
        }
        for k in 0..4 {
            self.triple_counts[k] += other.triple_counts[k];
        }
        self.quad_count += other.quad_count;
    }

    /// Checks that no count exceeds the counts it is a subset of.
    pub fn is_consistent(&self) -> bool {
        let singles_ok = self.singles.iter().all(|&s| s <= self.n_pulses);
        let pairs_ok = PAIRS
            .iter()
            .zip(self.pair_counts)
            .all(|(p, c)| c <= self.singles[p[0]].min(self.singles[p[1]]));
        let triples_ok = TRIPLES.iter().zip(self.triple_counts).all(|(t, c)| {
            c <= self
                .pair(t[0], t[1])
                .min(self.pair(t[0], t[2]))
                .min(self.pair(t[1], t[2]))
        });
        let quad_ok = self.triple_counts.iter().all(|&t| self.quad_count <= t);
        singles_ok && pairs_ok && triples_ok && quad_ok
    }
}

/// Streaming accumulator behind [`count_coincidences`]. Keeps a histogram of
/// the 16 click patterns; counts are derived from it at the end.
#[derive(Debug, Clone, Default)]
pub struct CoincidenceCounter {
    patterns: [u64; 16],
    last_index: Option<u64>,
}

impl CoincidenceCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn from_patterns(patterns: [u64; 16]) -> Self {
        Self {
            patterns,
            last_index: None,
        }
    }

    /// Adds one pulse slot; indices must increase strictly.
    pub fn push(&mut self, record: &DetectionRecord) -> Result<(), HbtError> {
        if let Some(previous) = self.last_index {
            if record.pulse_index <= previous {
                return Err(HbtError::NonIncreasingIndex {
                    previous,
                    index: record.pulse_index,
                });
            }
        }
        self.last_index = Some(record.pulse_index);
        self.patterns[record.mask() as usize] += 1;
        Ok(())
    }

    pub fn finish(&self) -> Result<CoincidenceCounts, HbtError> {
        let n_pulses: u64 = self.patterns.iter().sum();
        if n_pulses == 0 {
            return Err(HbtError::EmptyStream);
        }
        let covering = |bits: u8| -> u64 {
            (0..16u8)
                .filter(|m| m & bits == bits)
                .map(|m| self.patterns[m as usize])
                .sum()
        };
        let bits = |dets: &[usize]| dets.iter().fold(0u8, |m, &d| m | (1 << d));
        Ok(CoincidenceCounts {
            n_pulses,
            singles: std::array::from_fn(|d| covering(1 << d)),
            pair_counts: std::array::from_fn(|k| covering(bits(&PAIRS[k]))),
            triple_counts: std::array::from_fn(|k| covering(bits(&TRIPLES[k]))),
            quad_count: covering(0b1111),
        })
    }
}

/// Singles and same-slot pair, triple and four-fold coincidences.
pub fn count_coincidences<I>(records: I) -> Result<CoincidenceCounts, HbtError>
where
    I: IntoIterator<Item = DetectionRecord>,
{
    let mut counter = CoincidenceCounter::new();
    for r in records {
        counter.push(&r)?;
    }
    counter.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(masks: &[u8]) -> Vec<DetectionRecord> {
        masks
            .iter()
            .enumerate()
            .map(|(i, &m)| DetectionRecord::from_mask(i as u64, m))
            .collect()
    }

    #[test]
    fn disjoint_detectors_have_no_pair() {
        let counts = count_coincidences(stream(&[0b0001, 0b0010, 0b0101, 0b1010, 0])).unwrap();
        assert_eq!(counts.pair(0, 1), 0);
        assert_eq!(counts.pair(0, 2), 1);
        assert_eq!(counts.singles, [2, 2, 1, 1]);
        assert_eq!(counts.n_pulses, 5);
    }

    #[test]
    fn saturated_stream() {
        let counts = count_coincidences(stream(&[0b1111; 37])).unwrap();
        assert_eq!(counts.quad_count, 37);
        assert_eq!(counts.singles, [37; 4]);
        assert_eq!(counts.pair_counts, [37; 6]);
        assert_eq!(counts.triple_counts, [37; 4]);
        assert!(counts.is_consistent());
    }

    #[test]
    fn empty_and_unordered_streams() {
        assert_eq!(count_coincidences(Vec::new()), Err(HbtError::EmptyStream));
        let records = vec![
            DetectionRecord::from_mask(4, 1),
            DetectionRecord::from_mask(4, 1),
        ];
        assert!(matches!(
            count_coincidences(records),
            Err(HbtError::NonIncreasingIndex { .. })
        ));
    }

    #[test]
    fn merge_is_additive() {
        let all = stream(&[1, 3, 7, 15, 0, 12, 9, 6]);
        let whole = count_coincidences(all.clone()).unwrap();
        let mut left = count_coincidences(all[..3].to_vec()).unwrap();
        let right = count_coincidences(all[3..].to_vec()).unwrap();
        left.merge(&right);
        assert_eq!(left, whole);
    }

    #[test]
    fn lookup_is_order_insensitive() {
        let counts = count_coincidences(stream(&[0b1011])).unwrap();
        assert_eq!(counts.pair(3, 1), 1);
        assert_eq!(counts.triple([3, 0, 1]), 1);
        assert_eq!(counts.triple([0, 1, 2]), 0);
    }
}
