//! Dense statevector simulation. Qubit `i` is bit `i` of the basis index.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::circuit::{Gate, GateKind};

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);
const I: C = C::new(0.0, 1.0);

#[derive(Clone, Debug)]
pub struct StateVector {
    n: usize,
    amps: Vec<C>,
}

impl StateVector {
    /// `|0...0>` on `n` qubits.
    pub fn zero(n: usize) -> StateVector {
        let mut amps = vec![ZERO; 1usize << n];
        amps[0] = ONE;
        StateVector { n, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C] {
        &self.amps
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn apply(&mut self, g: &Gate) {
        let q = &g.operands;
        match g.kind {
            GateKind::Cx => self.controlled(&[q[0]], q[1], [[ZERO, ONE], [ONE, ZERO]]),
            GateKind::Ccx => self.controlled(&[q[0], q[1]], q[2], [[ZERO, ONE], [ONE, ZERO]]),
            GateKind::Cz => self.phase_on_all(&[q[0], q[1]], -ONE),
            GateKind::Cp => self.phase_on_all(&[q[0], q[1]], C::from_polar(1.0, g.params[0])),
            GateKind::Swap => self.swap(q[0], q[1]),
            kind => self.single(q[0], single_matrix(kind, &g.params)),
        }
    }

    /// Applies a Pauli (0 = I, 1 = X, 2 = Y, 3 = Z) to one qubit.
    pub fn apply_pauli(&mut self, qubit: usize, pauli: u8) {
        match pauli {
            1 => self.single(qubit, single_matrix(GateKind::X, &[])),
            2 => self.single(qubit, single_matrix(GateKind::Y, &[])),
            3 => self.single(qubit, single_matrix(GateKind::Z, &[])),
            _ => {}
        }
    }

    fn single(&mut self, q: usize, m: [[C; 2]; 2]) {
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a, b) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[i | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    fn controlled(&mut self, controls: &[usize], target: usize, m: [[C; 2]; 2]) {
        let cmask: usize = controls.iter().map(|&c| 1usize << c).sum();
        let bit = 1usize << target;
        for i in 0..self.amps.len() {
            if i & bit == 0 && i & cmask == cmask {
                let (a, b) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a + m[0][1] * b;
                self.amps[i | bit] = m[1][0] * a + m[1][1] * b;
            }
        }
    }

    fn phase_on_all(&mut self, qubits: &[usize], phase: C) {
        let mask: usize = qubits.iter().map(|&q| 1usize << q).sum();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *a *= phase;
            }
        }
    }

    fn swap(&mut self, a: usize, b: usize) {
        let (ba, bb) = (1usize << a, 1usize << b);
        for i in 0..self.amps.len() {
            if i & ba != 0 && i & bb == 0 {
                self.amps.swap(i, i ^ ba ^ bb);
            }
        }
    }
}

fn single_matrix(kind: GateKind, params: &[f64]) -> [[C; 2]; 2] {
    let h = C::new(FRAC_1_SQRT_2, 0.0);
    match kind {
        GateKind::H => [[h, h], [h, -h]],
        GateKind::X => [[ZERO, ONE], [ONE, ZERO]],
        GateKind::Y => [[ZERO, -I], [I, ZERO]],
        GateKind::Z => [[ONE, ZERO], [ZERO, -ONE]],
        GateKind::S => [[ONE, ZERO], [ZERO, I]],
        GateKind::Sdg => [[ONE, ZERO], [ZERO, -I]],
        GateKind::T => [[ONE, ZERO], [ZERO, C::from_polar(1.0, std::f64::consts::FRAC_PI_4)]],
        GateKind::Tdg => [[ONE, ZERO], [ZERO, C::from_polar(1.0, -std::f64::consts::FRAC_PI_4)]],
        GateKind::Rz => {
            let t = params[0] / 2.0;
            [[C::from_polar(1.0, -t), ZERO], [ZERO, C::from_polar(1.0, t)]]
        }
        GateKind::Rx => {
            let (s, c) = (params[0] / 2.0).sin_cos();
            [[C::new(c, 0.0), C::new(0.0, -s)], [C::new(0.0, -s), C::new(c, 0.0)]]
        }
        GateKind::Ry => {
            let (s, c) = (params[0] / 2.0).sin_cos();
            [[C::new(c, 0.0), C::new(-s, 0.0)], [C::new(s, 0.0), C::new(c, 0.0)]]
        }
        other => unreachable!("{other} is not a single-qubit gate"),
    }
}
