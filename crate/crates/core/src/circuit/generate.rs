//! Benchmark circuit families: Bernstein–Vazirani, GHZ, QFT and seeded
//! random circuits.

use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{schedule_asap, Circuit, CircuitError, GateKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorKind {
    Bv,
    Ghz,
    Qft,
    Random,
}

impl GeneratorKind {
    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::Bv => "bv",
            GeneratorKind::Ghz => "ghz",
            GeneratorKind::Qft => "qft",
            GeneratorKind::Random => "random",
        }
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorKind {
    type Err = CircuitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bv" => Ok(GeneratorKind::Bv),
            "ghz" => Ok(GeneratorKind::Ghz),
            "qft" => Ok(GeneratorKind::Qft),
            "random" => Ok(GeneratorKind::Random),
            other => Err(CircuitError::InvalidOptions(format!("unknown circuit family `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorOptions {
    /// BV secret over the n-1 data qubits, as a string of `0`/`1`; char i is data qubit i.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secret: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Builds a scheduled benchmark circuit named `{kind}{n}`.
pub fn generate(kind: GeneratorKind, n: usize, opts: &GeneratorOptions) -> Result<Circuit, CircuitError> {
    let bad = |m: &str| Err(CircuitError::InvalidOptions(m.to_string()));
    if n == 0 {
        return bad("qubit count must be at least 1");
    }
    if kind != GeneratorKind::Bv && opts.secret.is_some() {
        return bad("--secret only applies to bv");
    }
    if kind != GeneratorKind::Random && (opts.depth.is_some() || opts.seed.is_some()) {
        return bad("--depth and --seed only apply to random");
    }
    let mut c = Circuit::new(format!("{kind}{n}"), n);
    match kind {
        GeneratorKind::Ghz => ghz(&mut c, n)?,
        GeneratorKind::Qft => qft(&mut c, n)?,
        GeneratorKind::Bv => {
            let secret = match &opts.secret {
                Some(s) => {
                    if s.len() != n - 1 || !s.chars().all(|ch| ch == '0' || ch == '1') {
                        return bad(&format!("bv secret must be {} characters of 0/1", n - 1));
                    }
                    s.chars().map(|ch| ch == '1').collect()
                }
                None => vec![true; n - 1],
            };
            bv(&mut c, &secret)?;
        }
        GeneratorKind::Random => {
            let (Some(depth), Some(seed)) = (opts.depth, opts.seed) else {
                return bad("random requires both depth and seed");
            };
            random(&mut c, n, depth, seed)?;
        }
    }
    Ok(schedule_asap(&c))
}

fn ghz(c: &mut Circuit, n: usize) -> Result<(), CircuitError> {
    c.apply(GateKind::H, &[0], &[])?;
    for q in 0..n - 1 {
        c.apply(GateKind::Cx, &[q, q + 1], &[])?;
    }
    Ok(())
}

/// Hadamard plus controlled-phase ladder, then the bit-reversal swaps.
fn qft(c: &mut Circuit, n: usize) -> Result<(), CircuitError> {
    for j in 0..n {
        c.apply(GateKind::H, &[j], &[])?;
        for k in j + 1..n {
            let angle = PI / f64::powi(2.0, (k - j) as i32);
            c.apply(GateKind::Cp, &[k, j], &[angle])?;
        }
    }
    for i in 0..n / 2 {
        c.apply(GateKind::Swap, &[i, n - 1 - i], &[])?;
    }
    Ok(())
}

/// Data qubits 0..n-1, ancilla n-1 prepared in |->; one CNOT per set secret bit.
fn bv(c: &mut Circuit, secret: &[bool]) -> Result<(), CircuitError> {
    let anc = secret.len();
    c.apply(GateKind::X, &[anc], &[])?;
    c.apply(GateKind::H, &[anc], &[])?;
    for q in 0..anc {
        c.apply(GateKind::H, &[q], &[])?;
    }
    for (q, &bit) in secret.iter().enumerate() {
        if bit {
            c.apply(GateKind::Cx, &[q, anc], &[])?;
        }
    }
    for q in 0..anc {
        c.apply(GateKind::H, &[q], &[])?;
    }
    Ok(())
}

const RANDOM_SINGLE: [GateKind; 11] = [
    GateKind::H,
    GateKind::X,
    GateKind::Y,
    GateKind::Z,
    GateKind::S,
    GateKind::Sdg,
    GateKind::T,
    GateKind::Tdg,
    GateKind::Rx,
    GateKind::Ry,
    GateKind::Rz,
];
const RANDOM_DOUBLE: [GateKind; 4] = [GateKind::Cx, GateKind::Cz, GateKind::Cp, GateKind::Swap];

/// Layered random circuit: every layer shuffles the qubits and covers each
/// one with either a single-qubit gate or (half the time, when a partner is
/// left) a two-qubit gate. Rotation angles are drawn from the pi/4 grid.
fn random(c: &mut Circuit, n: usize, depth: usize, seed: u64) -> Result<(), CircuitError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..depth {
        order.shuffle(&mut rng);
        let mut i = 0;
        while i < n {
            if i + 1 < n && rng.gen_bool(0.5) {
                let kind = *RANDOM_DOUBLE.choose(&mut rng).expect("nonempty");
                let params = random_params(kind, &mut rng);
                c.apply(kind, &[order[i], order[i + 1]], &params)?;
                i += 2;
            } else {
                let kind = *RANDOM_SINGLE.choose(&mut rng).expect("nonempty");
                let params = random_params(kind, &mut rng);
                c.apply(kind, &[order[i]], &params)?;
                i += 1;
            }
        }
    }
    Ok(())
}

fn random_params(kind: GateKind, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..kind.num_params()).map(|_| rng.gen_range(1..8) as f64 * FRAC_PI_4).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateClass;

    fn ops(c: &Circuit) -> Vec<(GateKind, Vec<usize>)> {
        c.gates().iter().map(|g| (g.kind, g.operands.clone())).collect()
    }

    #[test]
    fn ghz3_exact() {
        let c = generate(GeneratorKind::Ghz, 3, &GeneratorOptions::default()).unwrap();
        assert_eq!(ops(&c), vec![(GateKind::H, vec![0]), (GateKind::Cx, vec![0, 1]), (GateKind::Cx, vec![1, 2])]);
        assert_eq!(c.name(), "ghz3");
    }

    #[test]
    fn ghz_counts() {
        for n in [1, 2, 10, 30] {
            let c = generate(GeneratorKind::Ghz, n, &GeneratorOptions::default()).unwrap();
            assert_eq!(c.single_qubit_gate_count(), 1);
            assert_eq!(c.multi_qubit_gate_count(), n - 1);
        }
    }

    #[test]
    fn qft_counts_and_non_clifford() {
        for n in 1..=12 {
            let c = generate(GeneratorKind::Qft, n, &GeneratorOptions::default()).unwrap();
            let h = c.gates().iter().filter(|g| g.kind == GateKind::H).count();
            let cp = c.gates().iter().filter(|g| g.kind == GateKind::Cp).count();
            let sw = c.gates().iter().filter(|g| g.kind == GateKind::Swap).count();
            assert_eq!((h, cp, sw), (n, n * (n - 1) / 2, n / 2));
            if n >= 3 {
                assert!(c.gates().iter().any(|g| g.kind == GateKind::Cp && (g.params[0] - FRAC_PI_4).abs() < 1e-15));
                assert!(c.gates().iter().any(|g| g.class() == GateClass::NonClifford));
            }
        }
    }

    #[test]
    fn bv_structure() {
        let opts = GeneratorOptions { secret: Some("101".into()), ..Default::default() };
        let c = generate(GeneratorKind::Bv, 4, &opts).unwrap();
        let cx: Vec<_> = c.gates().iter().filter(|g| g.kind == GateKind::Cx).map(|g| g.operands.clone()).collect();
        assert_eq!(cx, vec![vec![0, 3], vec![2, 3]]);
        assert_eq!(c.single_qubit_gate_count(), 2 + 3 + 3);

        let all_ones = generate(GeneratorKind::Bv, 10, &GeneratorOptions::default()).unwrap();
        assert_eq!(all_ones.multi_qubit_gate_count(), 9);
        assert_eq!(all_ones.single_qubit_gate_count(), 20);
    }

    #[test]
    fn random_is_deterministic() {
        let opts = GeneratorOptions { depth: Some(5), seed: Some(7), ..Default::default() };
        let a = generate(GeneratorKind::Random, 4, &opts).unwrap();
        let b = generate(GeneratorKind::Random, 4, &opts).unwrap();
        assert!(a.same_structure(&b));
        assert!(a.depth() >= 5);
        let other = GeneratorOptions { seed: Some(8), ..opts };
        assert!(!a.same_structure(&generate(GeneratorKind::Random, 4, &other).unwrap()));
    }

    #[test]
    fn option_errors() {
        let secret = GeneratorOptions { secret: Some("11".into()), ..Default::default() };
        assert!(generate(GeneratorKind::Ghz, 3, &secret).is_err());
        assert!(generate(GeneratorKind::Bv, 4, &secret).is_err());
        assert!(generate(GeneratorKind::Random, 4, &GeneratorOptions { depth: Some(3), ..Default::default() }).is_err());
        assert!(generate(GeneratorKind::Qft, 4, &GeneratorOptions { seed: Some(3), ..Default::default() }).is_err());
        assert!(generate(GeneratorKind::Ghz, 0, &GeneratorOptions::default()).is_err());
        assert!(generate(GeneratorKind::Bv, 4, &GeneratorOptions { secret: Some("1x1".into()), ..Default::default() })
            .is_err());
    }
}
