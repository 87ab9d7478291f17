//! Finite-memory target channel: which sub-channels the interferer occupies.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary occupancy vector over the `S` sub-channels. The first sub-channel
/// is the most significant bit of [`Occupancy::index`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Occupancy(Vec<bool>);

impl Occupancy {
    pub fn empty(subchannels: u32) -> Self {
        Self(vec![false; subchannels as usize])
    }

    pub fn one_hot(subchannels: u32, band: u32) -> Self {
        let mut occ = Self::empty(subchannels);
        occ.0[band as usize] = true;
        occ
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn from_index(subchannels: u32, index: u32) -> Result<Self> {
        if subchannels >= 32 || index >= 1 << subchannels {
            return Err(Error::AlphabetViolation {
                symbol: index,
                arity: 1u32.checked_shl(subchannels).unwrap_or(u32::MAX),
            });
        }
        let s = subchannels as usize;
        Ok(Self(
            (0..s).map(|i| index >> (s - 1 - i) & 1 == 1).collect(),
        ))
    }

    pub fn index(&self) -> u32 {
        self.0.iter().fold(0, |acc, &b| acc << 1 | b as u32)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_occupied(&self, band: u32) -> bool {
        self.0.get(band as usize).copied().unwrap_or(false)
    }
}

/// Next-band distribution of an order-`J` interferer, one row per history of
/// the last `J` bands (oldest band most significant in the row index).
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionTable {
    order: u32,
    subchannels: u32,
    probs: Vec<f64>,
}

impl TransitionTable {
    pub fn from_rows(order: u32, subchannels: u32, rows: Vec<Vec<f64>>) -> Result<Self> {
        let expected = Self::row_count(order, subchannels)?;
        if rows.len() != expected {
            return Err(Error::Config(format!(
                "transition table needs {expected} rows, got {}",
                rows.len()
            )));
        }
        let mut probs = Vec::with_capacity(expected * subchannels as usize);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != subchannels as usize {
                return Err(Error::Config(format!(
                    "transition row {r} has {} entries, expected {subchannels}",
                    row.len()
                )));
            }
            if row.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
                return Err(Error::Config(format!(
                    "transition row {r} has an invalid entry"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!("transition row {r} sums to {sum}")));
            }
            probs.extend(row);
        }
        Ok(Self {
            order,
            subchannels,
            probs,
        })
    }

    /// The interferer stays on the majority band of its last `order` bands
    /// with probability `stay + (1 - stay) / S`, otherwise it moves uniformly.
    /// Without a strict majority the newest band plays that role.
    pub fn majority(order: u32, subchannels: u32, stay: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&stay) {
            return Err(Error::Config(format!(
                "stay probability {stay} outside [0, 1]"
            )));
        }
        let rows = Self::row_count(order, subchannels)?;
        let s = subchannels as usize;
        let spread = (1.0 - stay) / s as f64;
        let mut out = Vec::with_capacity(rows);
        for r in 0..rows {
            let hist = Self::decode_row(order, subchannels, r);
            let mut row = vec![spread; s];
            row[majority_band(&hist, subchannels) as usize] += stay;
            out.push(row);
        }
        Self::from_rows(order, subchannels, out)
    }

    fn row_count(order: u32, subchannels: u32) -> Result<usize> {
        if order == 0 || subchannels == 0 {
            return Err(Error::Config(
                "interferer order and sub-channels must be >= 1".into(),
            ));
        }
        (subchannels as usize)
            .checked_pow(order)
            .filter(|&n| n <= 1 << 20)
            .ok_or_else(|| Error::Config("transition table too large".into()))
    }

    fn decode_row(order: u32, subchannels: u32, mut row: usize) -> Vec<u32> {
        let mut hist = vec![0; order as usize];
        for slot in hist.iter_mut().rev() {
            *slot = (row % subchannels as usize) as u32;
            row /= subchannels as usize;
        }
        hist
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn subchannels(&self) -> u32 {
        self.subchannels
    }

    /// Row for a history given oldest first.
    pub fn row(&self, history: &[u32]) -> &[f64] {
        debug_assert_eq!(history.len(), self.order as usize);
        let s = self.subchannels as usize;
        let r = history.iter().fold(0usize, |acc, &b| acc * s + b as usize);
        &self.probs[r * s..(r + 1) * s]
    }

    pub fn sample<R: Rng + ?Sized>(&self, history: &[u32], rng: &mut R) -> u32 {
        let row = self.row(history);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (b, p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return b as u32;
            }
        }
        // Rounding left u above the last partial sum; take the last nonzero band.
        row.iter().rposition(|&p| p > 0.0).unwrap_or(0) as u32
    }
}

/// Band occurring in a strict majority of `hist`, or the newest band.
pub fn majority_band(hist: &[u32], subchannels: u32) -> u32 {
    let mut counts = vec![0usize; subchannels as usize];
    for &b in hist {
        counts[b as usize] += 1;
    }
    counts
        .iter()
        .position(|&c| 2 * c > hist.len())
        .map(|b| b as u32)
        .unwrap_or_else(|| *hist.last().expect("history is nonempty"))
}

/// Interferer occupancy plus the recent interferer and radar bands.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    subchannels: u32,
    capacity: usize,
    occupancy: Occupancy,
    interferer: VecDeque<u32>,
    radar: VecDeque<u32>,
}

impl ChannelState {
    /// Interferer history is padded with `band` so an order-`J` rule can run
    /// from the first step.
    pub fn new(subchannels: u32, memory: u32, band: u32) -> Result<Self> {
        if band >= subchannels {
            return Err(Error::AlphabetViolation {
                symbol: band,
                arity: subchannels,
            });
        }
        let capacity = memory.max(2) as usize;
        Ok(Self {
            subchannels,
            capacity,
            occupancy: Occupancy::one_hot(subchannels, band),
            interferer: std::iter::repeat_n(band, capacity).collect(),
            radar: VecDeque::with_capacity(capacity),
        })
    }

    pub fn occupancy(&self) -> &Occupancy {
        &self.occupancy
    }

    /// Current interferer band.
    pub fn band(&self) -> u32 {
        *self.interferer.back().expect("history is nonempty")
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn interferer_history(&self) -> impl Iterator<Item = u32> + '_ {
        self.interferer.iter().copied()
    }

    pub fn radar_history(&self) -> impl Iterator<Item = u32> + '_ {
        self.radar.iter().copied()
    }

    fn push_band(&mut self, band: u32) {
        if self.interferer.len() == self.capacity {
            self.interferer.pop_front();
        }
        self.interferer.push_back(band);
        self.occupancy = Occupancy::one_hot(self.subchannels, band);
    }

    pub fn record_transmission(&mut self, subchannel: u32) {
        if self.radar.len() == self.capacity {
            self.radar.pop_front();
        }
        self.radar.push_back(subchannel);
    }

    /// Draws the next interferer band from the table row selected by the last
    /// `order` bands.
    pub fn step_stochastic<R: Rng + ?Sized>(
        &mut self,
        table: &TransitionTable,
        rng: &mut R,
    ) -> Result<()> {
        if table.subchannels() != self.subchannels {
            return Err(Error::Config(
                "transition table sub-channel count mismatch".into(),
            ));
        }
        let order = table.order() as usize;
        if order > self.capacity {
            return Err(Error::Config(format!(
                "channel keeps {} bands but the table has order {order}",
                self.capacity
            )));
        }
        let hist: Vec<u32> = self
            .interferer
            .iter()
            .skip(self.capacity - order)
            .copied()
            .collect();
        let next = table.sample(&hist, rng);
        self.push_band(next);
        Ok(())
    }

    /// Order-2 emitter: jump to the radar's band after two consecutive CPIs
    /// in it, otherwise stay.
    pub fn step_adaptive(&mut self) {
        let next = adaptive_response(self.band(), self.last_two_radar_bands());
        self.push_band(next);
    }

    pub fn last_two_radar_bands(&self) -> Option<(u32, u32)> {
        let n = self.radar.len();
        (n >= 2).then(|| (self.radar[n - 2], self.radar[n - 1]))
    }
}

/// Emitter band after observing the radar's two latest bands (older first).
pub fn adaptive_response(emitter: u32, last_two: Option<(u32, u32)>) -> u32 {
    match last_two {
        Some((a, b)) if a == b => b,
        _ => emitter,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn occupancy_index_is_msb_first() {
        let occ = Occupancy::from_bits(vec![false, true]);
        assert_eq!(occ.index(), 1);
        assert_eq!(Occupancy::one_hot(4, 0).index(), 8);
        for i in 0..16 {
            assert_eq!(Occupancy::from_index(4, i).unwrap().index(), i);
        }
        assert!(Occupancy::from_index(4, 16).is_err());
    }

    #[test]
    fn majority_rule() {
        assert_eq!(majority_band(&[1, 2, 1], 4), 1);
        assert_eq!(majority_band(&[0, 1, 2], 4), 2);
        assert_eq!(majority_band(&[3, 3, 3], 4), 3);
        let t = TransitionTable::majority(3, 4, 0.8).unwrap();
        let row = t.row(&[2, 0, 2]);
        assert!((row[2] - 0.85).abs() < 1e-15);
        assert!((row[1] - 0.05).abs() < 1e-15);
    }

    #[test]
    fn malformed_table_is_rejected() {
        let bad = vec![vec![0.5, 0.4]; 2];
        assert!(matches!(
            TransitionTable::from_rows(1, 2, bad),
            Err(Error::Config(_))
        ));
        let short = vec![vec![1.0, 0.0]];
        assert!(TransitionTable::from_rows(1, 2, short).is_err());
        let ok = vec![vec![0.5, 0.5 + 1e-12]; 2];
        assert!(TransitionTable::from_rows(1, 2, ok).is_ok());
    }

    #[test]
    fn degenerate_table_pins_band_zero() {
        let rows = vec![vec![1.0, 0.0, 0.0]; 27];
        let t = TransitionTable::from_rows(3, 3, rows).unwrap();
        let mut ch = ChannelState::new(3, 3, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            ch.step_stochastic(&t, &mut rng).unwrap();
            assert_eq!(ch.occupancy(), &Occupancy::one_hot(3, 0));
        }
    }

    #[test]
    fn uniform_table_gives_uniform_bands() {
        let n = 100_000;
        let t = TransitionTable::majority(3, 4, 0.0).unwrap();
        let mut ch = ChannelState::new(4, 3, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut freq = [0usize; 4];
        for _ in 0..n {
            ch.step_stochastic(&t, &mut rng).unwrap();
            freq[ch.band() as usize] += 1;
        }
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for f in freq {
            assert!((f as f64 - n as f64 / 4.0).abs() <= 3.0 * sigma);
        }
    }

    #[test]
    fn adaptive_examples() {
        assert_eq!(adaptive_response(0, Some((2, 2))), 2);
        assert_eq!(adaptive_response(0, Some((1, 3))), 0);
        assert_eq!(adaptive_response(1, None), 1);

        let mut ch = ChannelState::new(4, 2, 3).unwrap();
        for k in 0..50 {
            ch.record_transmission(k % 2);
            ch.step_adaptive();
            assert_eq!(ch.band(), 3);
        }
        ch.record_transmission(1);
        ch.step_adaptive();
        assert_eq!(ch.band(), 1);
    }

    #[test]
    fn history_is_bounded() {
        let mut ch = ChannelState::new(4, 3, 0).unwrap();
        for k in 0..20 {
            ch.record_transmission(k % 4);
            ch.step_adaptive();
        }
        assert_eq!(ch.interferer_history().count(), 3);
        assert_eq!(ch.radar_history().count(), 3);
    }
}
