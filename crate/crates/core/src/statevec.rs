//! Dense statevector over the composite register `index ⊗ flag ⊗ modexp`.
//!
//! Basis states are packed as `(index << (1 + t)) | (flag << t) | modexp`,
//! so the index register holds the most significant bits and the `t`-qubit
//! modexp register the least significant ones. Oracles are applied as exact
//! permutations of basis states rather than gate sequences.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use thiserror::Error;

use crate::fourier::{Direction, Plan};
use crate::numtheory::{self, NumTheoryError};

/// Default limit on the total qubit count (2^26 amplitudes, about 1 GiB).
pub const DEFAULT_QUBIT_CAP: u32 = 26;

/// Tolerance for norm and unitarity checks.
pub const NORM_TOLERANCE: f64 = 1e-10;

// Subspaces with less probability than this are treated as empty.
const EMPTY_SUBSPACE: f64 = 1e-24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("{requested} qubits exceed the simulation cap of {cap}")]
    TooManyQubits { requested: u32, cap: u32 },
    #[error("oracle returned {value} for index {index}; expected 0 or 1")]
    NonBooleanOracle { index: u64, value: u8 },
    #[error(transparent)]
    NumTheory(#[from] NumTheoryError),
    #[error("modulus {modulus} does not fit in a {width}-qubit modexp register")]
    ModulusTooWide { modulus: u64, width: u32 },
    #[error("modexp register holds {found} instead of 1 at basis state {basis}")]
    ModexpNotOne { basis: u64, found: u64 },
    #[error("expected {expected} amplitudes for this layout, got {found}")]
    AmplitudeCount { expected: usize, found: usize },
    #[error("nothing in measurement: flag = {value} has zero probability")]
    EmptySubspace { value: u8 },
}

/// One of the three sub-registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Register {
    Index,
    Flag,
    Modexp,
}

/// Widths of the index (`n`), flag (always 1) and modexp (`t`) registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RegisterLayout {
    index_width: u32,
    modexp_width: u32,
}

impl RegisterLayout {
    pub const FLAG_WIDTH: u32 = 1;

    pub fn new(index_width: u32, modexp_width: u32) -> Self {
        Self {
            index_width,
            modexp_width,
        }
    }

    pub fn index_width(&self) -> u32 {
        self.index_width
    }

    pub fn modexp_width(&self) -> u32 {
        self.modexp_width
    }

    pub fn total(&self) -> u32 {
        self.index_width + Self::FLAG_WIDTH + self.modexp_width
    }

    pub fn width(&self, register: Register) -> u32 {
        match register {
            Register::Index => self.index_width,
            Register::Flag => Self::FLAG_WIDTH,
            Register::Modexp => self.modexp_width,
        }
    }

    fn shift(&self, register: Register) -> u32 {
        match register {
            Register::Index => Self::FLAG_WIDTH + self.modexp_width,
            Register::Flag => self.modexp_width,
            Register::Modexp => 0,
        }
    }

    /// Packs register values into a basis-state number.
    pub fn pack(&self, index: u64, flag: u8, modexp: u64) -> u64 {
        (index << self.shift(Register::Index)) | (u64::from(flag) << self.modexp_width) | modexp
    }

    /// Splits a basis-state number into `(index, flag, modexp)`.
    pub fn unpack(&self, basis: u64) -> (u64, u8, u64) {
        (
            self.extract(basis, Register::Index),
            self.extract(basis, Register::Flag) as u8,
            self.extract(basis, Register::Modexp),
        )
    }

    pub fn extract(&self, basis: u64, register: Register) -> u64 {
        (basis >> self.shift(register)) & ((1u64 << self.width(register)) - 1)
    }

    fn check_cap(&self, cap: u32) -> Result<(), StateError> {
        let requested = self.total();
        if requested > cap || requested >= usize::BITS {
            return Err(StateError::TooManyQubits { requested, cap });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: RegisterLayout,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0⟩|0⟩|1⟩`, or `|0⟩|0⟩` when the modexp register is empty.
    pub fn initial(layout: RegisterLayout) -> Result<Self, StateError> {
        Self::initial_with_cap(layout, DEFAULT_QUBIT_CAP)
    }

    pub fn initial_with_cap(layout: RegisterLayout, cap: u32) -> Result<Self, StateError> {
        layout.check_cap(cap)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1usize << layout.total()];
        let start = if layout.modexp_width > 0 { 1 } else { 0 };
        amplitudes[start] = Complex64::new(1.0, 0.0);
        Ok(Self { layout, amplitudes })
    }

    /// Wraps raw amplitudes; the length must be `2^layout.total()`.
    pub fn from_amplitudes(
        layout: RegisterLayout,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self, StateError> {
        let expected = 1usize
            .checked_shl(layout.total())
            .filter(|_| layout.total() < usize::BITS)
            .unwrap_or(0);
        if amplitudes.len() != expected {
            return Err(StateError::AmplitudeCount {
                expected,
                found: amplitudes.len(),
            });
        }
        Ok(Self { layout, amplitudes })
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Direct amplitude access for tests and fault injection.
    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn amplitude(&self, index: u64, flag: u8, modexp: u64) -> Complex64 {
        self.amplitudes[self.layout.pack(index, flag, modexp) as usize]
    }

    /// `Σ |a|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Largest `|a_j - b_j|` between two states of the same layout.
    pub fn max_deviation(&self, other: &StateVector) -> f64 {
        assert_eq!(self.layout, other.layout, "layouts differ");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn inner_len(&self) -> usize {
        1usize << (RegisterLayout::FLAG_WIDTH + self.layout.modexp_width)
    }

    /// Hadamard on every index qubit. Flag and modexp are untouched.
    pub fn apply_hadamard_layer(&mut self) {
        let inner = self.inner_len();
        let n = self.layout.index_width;
        for q in 0..n {
            let bit = inner << q;
            for base in 0..self.amplitudes.len() {
                if base & bit != 0 {
                    continue;
                }
                let a = self.amplitudes[base];
                let b = self.amplitudes[base | bit];
                self.amplitudes[base] = (a + b) * FRAC_1_SQRT_2;
                self.amplitudes[base | bit] = (a - b) * FRAC_1_SQRT_2;
            }
        }
    }

    /// `|k⟩|y⟩|m⟩ → |k⟩|y ⊕ f(k)⟩|m⟩`.
    ///
    /// `f` is evaluated on every index before the state is touched, so a
    /// non-boolean value leaves the state unchanged.
    pub fn apply_flag_oracle<F>(&mut self, f: F) -> Result<(), StateError>
    where
        F: Fn(u64) -> u8,
    {
        let count = 1u64 << self.layout.index_width;
        let mut marked = Vec::new();
        for k in 0..count {
            match f(k) {
                0 => {}
                1 => marked.push(k),
                value => return Err(StateError::NonBooleanOracle { index: k, value }),
            }
        }
        let modexp_len = 1u64 << self.layout.modexp_width;
        for k in marked {
            for m in 0..modexp_len {
                let zero = self.layout.pack(k, 0, m) as usize;
                let one = self.layout.pack(k, 1, m) as usize;
                self.amplitudes.swap(zero, one);
            }
        }
        Ok(())
    }

    /// `|k⟩|y⟩|1⟩ → |k⟩|y⟩|base^k mod modulus⟩`.
    ///
    /// Implemented as the swap of modexp values `1` and `base^k mod modulus`
    /// for each index `k`, which is a permutation of the full basis and
    /// agrees with the map above on every reachable state.
    pub fn apply_modexp(&mut self, base: u64, modulus: u64) -> Result<(), StateError> {
        if modulus < 2 {
            return Err(NumTheoryError::ModulusTooSmall(modulus).into());
        }
        numtheory::ensure_coprime(base, modulus)?;
        let t = self.layout.modexp_width;
        if t >= 64 || modulus > (1u64 << t) {
            return Err(StateError::ModulusTooWide { modulus, width: t });
        }
        for (basis, amp) in self.amplitudes.iter().enumerate() {
            let m = self.layout.extract(basis as u64, Register::Modexp);
            if m != 1 && (amp.re != 0.0 || amp.im != 0.0) {
                return Err(StateError::ModexpNotOne {
                    basis: basis as u64,
                    found: m,
                });
            }
        }
        let reduced = base % modulus;
        let mut power = 1u64;
        for k in 0..(1u64 << self.layout.index_width) {
            if power != 1 {
                for flag in 0..2u8 {
                    let one = self.layout.pack(k, flag, 1) as usize;
                    let target = self.layout.pack(k, flag, power) as usize;
                    self.amplitudes.swap(one, target);
                }
            }
            power = power * reduced % modulus;
        }
        Ok(())
    }

    /// Inverse QFT on the index register:
    /// `|k⟩ → 2^{-n/2} Σ_i exp(-2πi·ik/2^n) |i⟩`.
    pub fn apply_iqft(&mut self) {
        self.fourier(Direction::Negative);
    }

    /// QFT on the index register, the exact inverse of [`apply_iqft`](Self::apply_iqft).
    pub fn apply_qft(&mut self) {
        self.fourier(Direction::Positive);
    }

    fn fourier(&mut self, direction: Direction) {
        let n = self.layout.index_width;
        let plan = Plan::new(n, direction);
        let inner = self.inner_len();
        let len = plan.len();
        let scale = 1.0 / libm::sqrt(len as f64);
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        for offset in 0..inner {
            let mut nonzero = false;
            for (k, slot) in buf.iter_mut().enumerate() {
                *slot = self.amplitudes[k * inner + offset];
                nonzero |= slot.re != 0.0 || slot.im != 0.0;
            }
            if !nonzero {
                continue;
            }
            plan.run(&mut buf);
            for (k, value) in buf.iter().enumerate() {
                self.amplitudes[k * inner + offset] = value * scale;
            }
        }
    }

    /// Probability of each value of `register`, tracing out the others.
    pub fn marginal(&self, register: Register) -> Vec<f64> {
        let mut probs = vec![0.0; 1usize << self.layout.width(register)];
        for (basis, amp) in self.amplitudes.iter().enumerate() {
            probs[self.layout.extract(basis as u64, register) as usize] += amp.norm_sqr();
        }
        probs
    }

    /// Projects onto `flag = value` and renormalizes. Returns the
    /// probability of the projected subspace before renormalization.
    pub fn post_select_flag(&mut self, value: u8) -> Result<f64, StateError> {
        assert!(value <= 1, "flag value must be 0 or 1");
        let keep =
            |basis: usize| self.layout.extract(basis as u64, Register::Flag) == u64::from(value);
        let acceptance: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(b, _)| keep(*b))
            .map(|(_, a)| a.norm_sqr())
            .sum();
        if acceptance <= EMPTY_SUBSPACE {
            return Err(StateError::EmptySubspace { value });
        }
        let scale = 1.0 / libm::sqrt(acceptance);
        let layout = self.layout;
        for (basis, amp) in self.amplitudes.iter_mut().enumerate() {
            if layout.extract(basis as u64, Register::Flag) == u64::from(value) {
                *amp *= scale;
            } else {
                *amp = Complex64::new(0.0, 0.0);
            }
        }
        Ok(acceptance)
    }

    /// Measures the whole register `shots` times; keys are basis-state numbers.
    pub fn sample(&self, shots: u64, seed: u64) -> BTreeMap<u64, u64> {
        sample_distribution(self.amplitudes.iter().map(|a| a.norm_sqr()), shots, seed)
    }

    /// Measures one register `shots` times; keys are register values.
    pub fn sample_register(&self, register: Register, shots: u64, seed: u64) -> BTreeMap<u64, u64> {
        sample_distribution(self.marginal(register), shots, seed)
    }
}

/// Draws `shots` outcomes from `probs` (which need not be exactly
/// normalized) with a ChaCha8 stream seeded by `seed`.
///
/// Uniform draws are sorted and matched against the cumulative sum in a
/// single sweep, so no prefix-sum table is allocated.
pub fn sample_distribution<I>(probs: I, shots: u64, seed: u64) -> BTreeMap<u64, u64>
where
    I: IntoIterator<Item = f64>,
    I::IntoIter: Clone,
{
    let probs = probs.into_iter();
    let total: f64 = probs.clone().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws: Vec<f64> = (0..shots).map(|_| unit_f64(&mut rng) * total).collect();
    draws.sort_by(f64::total_cmp);

    let mut hist = BTreeMap::new();
    let mut next = 0usize;
    let mut cumulative = 0.0;
    let mut last_nonzero = None;
    for (outcome, p) in probs.enumerate() {
        if p <= 0.0 {
            continue;
        }
        last_nonzero = Some(outcome as u64);
        cumulative += p;
        let start = next;
        while next < draws.len() && draws[next] < cumulative {
            next += 1;
        }
        if next > start {
            *hist.entry(outcome as u64).or_insert(0) += (next - start) as u64;
        }
    }
    // Rounding can leave the last few draws just above the final cumulative sum.
    if next < draws.len() {
        if let Some(outcome) = last_nonzero {
            *hist.entry(outcome).or_insert(0) += (draws.len() - next) as u64;
        }
    }
    hist
}

fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EPS: f64 = 1e-12;

    fn uniform(n: u32, t: u32) -> StateVector {
        let mut s = StateVector::initial(RegisterLayout::new(n, t)).unwrap();
        s.apply_hadamard_layer();
        s
    }

    #[test]
    fn initial_state_examples() {
        let s = StateVector::initial(RegisterLayout::new(2, 2)).unwrap();
        assert_eq!(s.amplitude(0, 0, 1), Complex64::new(1.0, 0.0));
        assert_eq!(s.norm_sqr(), 1.0);
        let s = StateVector::initial(RegisterLayout::new(1, 1)).unwrap();
        let nonzero: Vec<_> = (0..s.amplitudes().len())
            .filter(|&b| s.amplitudes()[b].norm() > 0.0)
            .map(|b| s.layout().unpack(b as u64))
            .collect();
        assert_eq!(nonzero, vec![(0, 0, 1)]);
        let s = StateVector::initial(RegisterLayout::new(3, 0)).unwrap();
        assert_eq!(s.amplitudes()[0], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn initial_state_respects_cap() {
        assert_eq!(
            StateVector::initial(RegisterLayout::new(22, 4)),
            Err(StateError::TooManyQubits {
                requested: 27,
                cap: DEFAULT_QUBIT_CAP
            })
        );
        assert!(StateVector::initial_with_cap(RegisterLayout::new(4, 1), 5).is_err());
    }

    #[test]
    fn pack_order_is_index_flag_modexp() {
        let l = RegisterLayout::new(3, 2);
        assert_eq!(l.pack(0b101, 1, 0b10), (0b101 << 3) | (1 << 2) | 0b10);
        assert_eq!(l.unpack((0b101 << 3) | (1 << 2) | 0b10), (0b101, 1, 0b10));
    }

    #[test]
    fn hadamard_layer_is_uniform() {
        let s = uniform(3, 1);
        let a = 1.0 / libm::sqrt(8.0);
        for k in 0..8 {
            assert!((s.amplitude(k, 0, 1) - Complex64::new(a, 0.0)).norm() < EPS);
        }
        assert!((s.norm_sqr() - 1.0).abs() < EPS);
    }

    #[test]
    fn hadamard_layer_is_involution() {
        let start = StateVector::initial(RegisterLayout::new(4, 2)).unwrap();
        let mut s = start.clone();
        s.apply_hadamard_layer();
        s.apply_hadamard_layer();
        assert!(s.max_deviation(&start) < EPS);
    }

    #[test]
    fn hadamard_on_one() {
        let layout = RegisterLayout::new(1, 0);
        let mut amps = vec![Complex64::new(0.0, 0.0); 4];
        amps[layout.pack(1, 0, 0) as usize] = Complex64::new(1.0, 0.0);
        let mut s = StateVector::from_amplitudes(layout, amps).unwrap();
        s.apply_hadamard_layer();
        assert!((s.amplitude(0, 0, 0).re - FRAC_1_SQRT_2).abs() < EPS);
        assert!((s.amplitude(1, 0, 0).re + FRAC_1_SQRT_2).abs() < EPS);
    }

    #[test]
    fn flag_oracle_marks_single_index() {
        let mut s = uniform(3, 1);
        s.apply_flag_oracle(|k| u8::from(k == 5)).unwrap();
        let a = 1.0 / libm::sqrt(8.0);
        for k in 0..8u64 {
            let flag = u8::from(k == 5);
            assert!((s.amplitude(k, flag, 1).norm() - a).abs() < EPS);
            assert_eq!(s.amplitude(k, 1 - flag, 1).norm(), 0.0);
        }
    }

    #[test]
    fn flag_oracle_identity_and_involution() {
        let start = uniform(3, 1);
        let mut s = start.clone();
        s.apply_flag_oracle(|_| 0).unwrap();
        assert_eq!(s, start);
        s.apply_flag_oracle(|k| (k % 3 == 0) as u8).unwrap();
        s.apply_flag_oracle(|k| (k % 3 == 0) as u8).unwrap();
        assert_eq!(s, start);
    }

    #[test]
    fn flag_oracle_rejects_non_boolean() {
        let start = uniform(2, 0);
        let mut s = start.clone();
        assert_eq!(
            s.apply_flag_oracle(|k| if k == 2 { 2 } else { 1 }),
            Err(StateError::NonBooleanOracle { index: 2, value: 2 })
        );
        assert_eq!(s, start);
    }

    #[test]
    fn modexp_examples() {
        let mut s = uniform(8, 4);
        s.apply_modexp(7, 15).unwrap();
        let a = 1.0 / 16.0;
        for (k, m) in [(0u64, 1u64), (2, 4), (4, 1), (1, 7), (3, 13)] {
            assert!((s.amplitude(k, 0, m).norm() - a).abs() < EPS, "k={k}");
        }
        let marg = s.marginal(Register::Modexp);
        for (m, p) in marg.iter().enumerate() {
            let expected = if [1, 4, 7, 13].contains(&m) {
                0.25
            } else {
                0.0
            };
            assert!((p - expected).abs() < EPS, "m={m}");
        }
    }

    #[test]
    fn modexp_preconditions() {
        let mut s = uniform(4, 4);
        assert!(matches!(
            s.apply_modexp(6, 15),
            Err(StateError::NumTheory(NumTheoryError::NotCoprime { .. }))
        ));
        assert!(matches!(
            s.apply_modexp(2, 17),
            Err(StateError::ModulusTooWide { .. })
        ));
        s.apply_modexp(7, 15).unwrap();
        assert!(matches!(
            s.apply_modexp(7, 15),
            Err(StateError::ModexpNotOne { .. })
        ));
    }

    #[test]
    fn iqft_of_uniform_is_zero_frequency() {
        let mut s = uniform(5, 1);
        s.apply_iqft();
        assert!((s.amplitude(0, 0, 1) - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        assert!((s.norm_sqr() - 1.0).abs() < NORM_TOLERANCE);
    }

    #[test]
    fn qft_inverts_iqft() {
        let mut s = uniform(6, 2);
        s.apply_flag_oracle(|k| (k % 5 == 1) as u8).unwrap();
        s.apply_modexp(2, 3).unwrap();
        let start = s.clone();
        s.apply_iqft();
        s.apply_qft();
        assert!(s.max_deviation(&start) < NORM_TOLERANCE);
    }

    #[test]
    fn iqft_of_period_four_comb() {
        // (1/8) Σ_z |4z + 1⟩ over n = 8 bits.
        let layout = RegisterLayout::new(8, 0);
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << 9];
        for z in 0..64u64 {
            amps[layout.pack(4 * z + 1, 0, 0) as usize] = Complex64::new(0.125, 0.0);
        }
        let mut s = StateVector::from_amplitudes(layout, amps).unwrap();
        s.apply_iqft();
        let marg = s.marginal(Register::Index);
        for (i, p) in marg.iter().enumerate() {
            let expected = if i % 64 == 0 { 0.25 } else { 0.0 };
            assert!((p - expected).abs() < 1e-12, "i={i}");
        }
        // Phase of the peak at i = 64 is exp(-2πi·64/256) = -i.
        let peak = s.amplitude(64, 0, 0);
        assert!((peak - Complex64::new(0.0, -0.5)).norm() < 1e-12);
    }

    #[test]
    fn marginal_examples() {
        let s = uniform(3, 0);
        for p in s.marginal(Register::Index) {
            assert!((p - 0.125).abs() < EPS);
        }
        let s = StateVector::initial(RegisterLayout::new(3, 2)).unwrap();
        assert_eq!(s.marginal(Register::Flag), vec![1.0, 0.0]);
    }

    #[test]
    fn post_select_examples() {
        let mut s = uniform(3, 0);
        s.apply_flag_oracle(|k| u8::from(k == 5)).unwrap();
        let acceptance = s.post_select_flag(1).unwrap();
        assert!((acceptance - 0.125).abs() < EPS);
        assert!((s.amplitude(5, 1, 0).norm() - 1.0).abs() < EPS);

        let start = uniform(3, 0);
        let mut s = start.clone();
        assert!((s.post_select_flag(0).unwrap() - 1.0).abs() < EPS);
        assert!(s.max_deviation(&start) < EPS);

        let mut s = uniform(3, 0);
        assert_eq!(
            s.post_select_flag(1),
            Err(StateError::EmptySubspace { value: 1 })
        );
    }

    #[test]
    fn sampling_examples() {
        let s = StateVector::initial(RegisterLayout::new(2, 1)).unwrap();
        let hist = s.sample(500, 3);
        assert_eq!(hist.len(), 1);
        assert_eq!(hist[&1], 500);

        let s = uniform(1, 0);
        let hist = s.sample_register(Register::Index, 100_000, 42);
        for outcome in 0..2 {
            let freq = hist[&outcome] as f64 / 100_000.0;
            assert!((freq - 0.5).abs() < 0.01, "freq={freq}");
        }
        assert_eq!(s.sample(1000, 9), s.sample(1000, 9));
        assert_ne!(s.sample(1000, 9), s.sample(1000, 10));
    }

    #[test]
    fn sampling_handles_unnormalized_input() {
        let hist = sample_distribution([0.0, 2.0, 0.0, 2.0, 0.0], 10_000, 1);
        assert_eq!(hist.keys().copied().collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(hist.values().sum::<u64>(), 10_000);
    }
}
