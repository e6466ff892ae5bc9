use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Probabilities below this are dropped when converting dense vectors.
pub const DUST: f64 = 1e-16;

/// Sparse distribution over `bits`-bit outcomes; bit `i` of a key is qubit `i`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    bits: usize,
    probs: BTreeMap<u64, f64>,
}

impl Distribution {
    pub fn new(bits: usize) -> Distribution {
        Distribution { bits, probs: BTreeMap::new() }
    }

    pub fn from_dense(bits: usize, probs: &[f64]) -> Distribution {
        let probs = probs.iter().enumerate().filter(|(_, &p)| p > DUST).map(|(i, &p)| (i as u64, p)).collect();
        Distribution { bits, probs }
    }

    pub fn from_counts(bits: usize, counts: &BTreeMap<u64, u64>) -> Distribution {
        let shots: u64 = counts.values().sum();
        let probs = counts.iter().filter(|(_, &c)| c > 0).map(|(&x, &c)| (x, c as f64 / shots as f64)).collect();
        Distribution { bits, probs }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn get(&self, outcome: u64) -> f64 {
        self.probs.get(&outcome).copied().unwrap_or(0.0)
    }

    pub fn add(&mut self, outcome: u64, p: f64) {
        *self.probs.entry(outcome).or_insert(0.0) += p;
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.probs.iter().map(|(&x, &p)| (x, p))
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    pub fn scaled(&self, factor: f64) -> Distribution {
        Distribution { bits: self.bits, probs: self.probs.iter().map(|(&x, &p)| (x, p * factor)).collect() }
    }

    /// Half the L1 distance.
    pub fn tvd(&self, other: &Distribution) -> f64 {
        let mut sum = 0.0;
        for (&x, &p) in &self.probs {
            sum += (p - other.get(x)).abs();
        }
        for (&x, &q) in &other.probs {
            if !self.probs.contains_key(&x) {
                sum += q.abs();
            }
        }
        sum / 2.0
    }

    /// Reorders bits: bit `j` of a new outcome is bit `layout[j]` of the old one.
    pub fn permuted(&self, layout: &[usize]) -> Distribution {
        let mut out = Distribution::new(layout.len());
        for (&x, &p) in &self.probs {
            let mut y = 0u64;
            for (j, &src) in layout.iter().enumerate() {
                y |= ((x >> src) & 1) << j;
            }
            out.add(y, p);
        }
        out
    }

    /// Outcome as a string whose character `i` is bit `i`.
    pub fn bitstring(outcome: u64, bits: usize) -> String {
        (0..bits).map(|i| if (outcome >> i) & 1 == 1 { '1' } else { '0' }).collect()
    }

    pub fn parse_bitstring(s: &str) -> Option<u64> {
        s.chars().enumerate().try_fold(0u64, |acc, (i, ch)| match ch {
            '0' => Some(acc),
            '1' if i < 64 => Some(acc | (1 << i)),
            _ => None,
        })
    }

    pub fn to_string_map(&self) -> BTreeMap<String, f64> {
        self.probs.iter().map(|(&x, &p)| (Self::bitstring(x, self.bits), p)).collect()
    }
}
