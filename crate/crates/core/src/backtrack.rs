//! Quantum preimage search for an elementary cellular automaton.
//!
//! The pipeline prepares a uniform superposition over every initial
//! configuration, marks the ones that evolve to the target in a flag qubit,
//! and then either
//!
//! * post-selects the flag ([`Mode::MarkPostselect`]), which leaves the
//!   index register in a uniform mixture of the preimages, or
//! * additionally loads `A^k mod N` into a modexp register and applies the
//!   inverse QFT to the index register ([`Mode::FullPaper`]), after which
//!   measured frequencies feed continued-fraction order extraction.
//!
//! In the full mode the post-selection of the mark stage is still evaluated
//! on a copy of the marked state, so both query styles are reported side by
//! side. [`analytic_amplitude`] and [`analytic_index_probability`] give the
//! closed-form frequency distribution for cross-checking the simulation.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::eca::{self, Configuration, EcaError, RuleTable};
use crate::numtheory::{self, NumTheoryError};
use crate::statevec::{Register, RegisterLayout, StateError, StateVector, DEFAULT_QUBIT_CAP};

/// Post-selected outcomes below this probability are not reported.
const RECOVERY_THRESHOLD: f64 = 1e-12;

/// Widest target for which [`verify_result`] re-runs exhaustive enumeration.
pub const VERIFY_ENUMERATION_WIDTH: u32 = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BacktrackError {
    #[error(transparent)]
    Eca(#[from] EcaError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    NumTheory(#[from] NumTheoryError),
    #[error("step count must be positive")]
    ZeroSteps,
    #[error("base {base} is degenerate modulo {modulus} (order 1); use a base with A >= 2 and A mod N != 1")]
    DegenerateBase { base: u64, modulus: u64 },
    #[error("full_paper mode needs a base and a modulus")]
    MissingModexp,
    #[error("index width {width} does not match ceil(log2(N^2)) = {required} for N = {modulus}")]
    WidthCoupling {
        width: u32,
        modulus: u64,
        required: u32,
    },
    #[error("shot count must be positive")]
    ZeroShots,
    #[error("nothing in measurement: the target has no preimage")]
    NothingInMeasurement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Mark preimages, then post-select `flag = 1`.
    MarkPostselect,
    /// Mark, load `A^k mod N`, inverse QFT, then sample and extract orders.
    FullPaper,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::MarkPostselect => "mark_postselect",
            Mode::FullPaper => "full_paper",
        }
    }
}

/// Base and modulus for the modular-exponentiation stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModexpParams {
    base: u64,
    modulus: u64,
}

impl ModexpParams {
    /// Requires `gcd(base, modulus) = 1` and `base mod modulus ∉ {0, 1}`.
    pub fn new(base: u64, modulus: u64) -> Result<Self, BacktrackError> {
        if modulus < 2 {
            return Err(NumTheoryError::ModulusTooSmall(modulus).into());
        }
        numtheory::ensure_coprime(base, modulus)?;
        if base < 2 || base % modulus == 1 {
            return Err(BacktrackError::DegenerateBase { base, modulus });
        }
        Ok(Self { base, modulus })
    }

    pub fn base(&self) -> u64 {
        self.base
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    /// `t = ceil(log2 N)`.
    pub fn register_width(&self) -> u32 {
        ceil_log2(u128::from(self.modulus))
    }

    /// `ceil(log2(N^2))`, the index width the modulus calls for.
    pub fn coupled_index_width(&self) -> u32 {
        let n = u128::from(self.modulus);
        ceil_log2(n * n)
    }
}

fn ceil_log2(x: u128) -> u32 {
    if x <= 1 {
        0
    } else {
        u128::BITS - (x - 1).leading_zeros()
    }
}

/// One backtracking problem: which lines of `target.width()` cells evolve
/// to `target` after `steps` applications of `rule`?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemInstance {
    rule: RuleTable,
    steps: u32,
    target: Configuration,
    modexp: Option<ModexpParams>,
}

impl ProblemInstance {
    pub fn new(
        rule: RuleTable,
        steps: u32,
        target: Configuration,
        modexp: Option<ModexpParams>,
    ) -> Result<Self, BacktrackError> {
        if steps == 0 {
            return Err(BacktrackError::ZeroSteps);
        }
        Ok(Self {
            rule,
            steps,
            target,
            modexp,
        })
    }

    pub fn rule(&self) -> &RuleTable {
        &self.rule
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }

    pub fn target(&self) -> &Configuration {
        &self.target
    }

    pub fn width(&self) -> u32 {
        self.target.width()
    }

    pub fn modexp(&self) -> Option<&ModexpParams> {
        self.modexp.as_ref()
    }

    /// Checks the mode-specific invariants. The modexp parameters and the
    /// `ceil(log2(N^2)) = n` coupling are only required in full mode.
    pub fn validate(&self, mode: Mode) -> Result<(), BacktrackError> {
        if mode == Mode::FullPaper {
            let params = self.modexp.ok_or(BacktrackError::MissingModexp)?;
            let required = params.coupled_index_width();
            if required != self.width() {
                return Err(BacktrackError::WidthCoupling {
                    width: self.width(),
                    modulus: params.modulus,
                    required,
                });
            }
        }
        Ok(())
    }

    /// Register widths used by `mode`; the modexp register is empty in
    /// mark-and-post-select mode.
    pub fn layout(&self, mode: Mode) -> Result<RegisterLayout, BacktrackError> {
        self.validate(mode)?;
        let t = match mode {
            Mode::MarkPostselect => 0,
            Mode::FullPaper => self.modexp.map_or(0, |p| p.register_width()),
        };
        Ok(RegisterLayout::new(self.width(), t))
    }
}

/// `F(k) = 1` exactly when configuration `k` evolves to the target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreimageOracle {
    rule: RuleTable,
    steps: u32,
    target: Configuration,
}

impl PreimageOracle {
    pub fn eval(&self, k: u64) -> u8 {
        let width = self.target.width();
        u8::from(eca::evolve_bits(k, width, &self.rule, self.steps) == self.target.encode())
    }

    /// Every `k` with `F(k) = 1`, ascending.
    pub fn marked(&self) -> Vec<u64> {
        (0..(1u64 << self.target.width()))
            .filter(|&k| self.eval(k) == 1)
            .collect()
    }
}

pub fn build_oracle(instance: &ProblemInstance) -> PreimageOracle {
    PreimageOracle {
        rule: instance.rule,
        steps: instance.steps,
        target: instance.target,
    }
}

/// Pipeline stages, in order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Initial,
    Hadamard,
    Mark,
    PostSelect,
    Modexp,
    InverseFourier,
}

impl Stage {
    pub fn name(&self) -> &'static str {
        match self {
            Stage::Initial => "initial",
            Stage::Hadamard => "hadamard",
            Stage::Mark => "mark",
            Stage::PostSelect => "post_select",
            Stage::Modexp => "modexp",
            Stage::InverseFourier => "inverse_fourier",
        }
    }
}

/// Uniform superposition with preimages flagged:
/// `2^{-n/2} Σ_k |k⟩|F(k)⟩|1⟩`.
pub fn run_mark_stage(
    instance: &ProblemInstance,
    mode: Mode,
) -> Result<StateVector, BacktrackError> {
    run_mark_stage_with_cap(instance, mode, DEFAULT_QUBIT_CAP)
}

pub fn run_mark_stage_with_cap(
    instance: &ProblemInstance,
    mode: Mode,
    qubit_cap: u32,
) -> Result<StateVector, BacktrackError> {
    let mut norms = Vec::new();
    mark_stage(instance, mode, qubit_cap, &mut norms)
}

fn mark_stage(
    instance: &ProblemInstance,
    mode: Mode,
    qubit_cap: u32,
    norms: &mut Vec<(Stage, f64)>,
) -> Result<StateVector, BacktrackError> {
    let layout = instance.layout(mode)?;
    let mut state = StateVector::initial_with_cap(layout, qubit_cap)?;
    norms.push((Stage::Initial, state.norm_sqr()));
    state.apply_hadamard_layer();
    norms.push((Stage::Hadamard, state.norm_sqr()));
    let oracle = build_oracle(instance);
    state.apply_flag_oracle(|k| oracle.eval(k))?;
    norms.push((Stage::Mark, state.norm_sqr()));
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub shots: u64,
    pub seed: u64,
    pub qubit_cap: u32,
}

impl PipelineConfig {
    pub fn new(mode: Mode, shots: u64, seed: u64) -> Self {
        Self {
            mode,
            shots,
            seed,
            qubit_cap: DEFAULT_QUBIT_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineResult {
    pub mode: Mode,
    /// Total simulated qubits.
    pub qubits: u32,
    /// Indices flagged by the oracle.
    pub marked_indices: Vec<u64>,
    /// Probability of `flag = 1` before post-selection.
    pub acceptance_probability: f64,
    /// Post-selected index distribution in mark mode, post-IQFT index
    /// marginal in full mode.
    pub index_marginal: Vec<f64>,
    /// Index outcomes of the mark-stage post-selection, ascending.
    pub recovered_preimages: Vec<Configuration>,
    /// Sampled index-register outcomes.
    pub shots_histogram: BTreeMap<u64, u64>,
    /// Brute-force order of `A` modulo `N` (full mode).
    pub order: Option<u64>,
    /// Shot counts per extracted order; `None` counts failed extractions.
    pub extracted_orders: BTreeMap<Option<u64>, u64>,
    /// Exact probability that a measured frequency yields the true order.
    pub extraction_success_probability: Option<f64>,
    /// After the inverse QFT: probability that post-selecting `flag = 1`
    /// and reading the index register returns an actual preimage.
    pub fourier_postselect_hit_probability: Option<f64>,
    /// `Σ|a|²` after each stage.
    pub stage_norms: Vec<(Stage, f64)>,
}

/// Runs the whole pipeline. Deterministic for a fixed `config.seed`.
///
/// In [`Mode::MarkPostselect`] a target without preimages is reported as
/// [`BacktrackError::NothingInMeasurement`]. In [`Mode::FullPaper`] the same
/// situation only leaves `recovered_preimages` empty.
pub fn run_pipeline(
    instance: &ProblemInstance,
    config: &PipelineConfig,
) -> Result<PipelineResult, BacktrackError> {
    if config.shots == 0 {
        return Err(BacktrackError::ZeroShots);
    }
    let mode = config.mode;
    let mut norms = Vec::new();
    let marked = mark_stage(instance, mode, config.qubit_cap, &mut norms)?;
    let layout = marked.layout();
    let n = layout.index_width();
    let marked_indices = build_oracle(instance).marked();

    let mut selected = marked.clone();
    let (acceptance_probability, recovered_preimages, selected_marginal) =
        match selected.post_select_flag(1) {
            Ok(acceptance) => {
                norms.push((Stage::PostSelect, selected.norm_sqr()));
                let marginal = selected.marginal(Register::Index);
                let recovered = marginal
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| p > RECOVERY_THRESHOLD)
                    .map(|(k, _)| Configuration::decode(k as u64, n))
                    .collect::<Result<Vec<_>, _>>()?;
                (acceptance, recovered, Some(marginal))
            }
            Err(StateError::EmptySubspace { .. }) => (0.0, Vec::new(), None),
            Err(e) => return Err(e.into()),
        };

    match mode {
        Mode::MarkPostselect => {
            let index_marginal = selected_marginal.ok_or(BacktrackError::NothingInMeasurement)?;
            let shots_histogram =
                selected.sample_register(Register::Index, config.shots, config.seed);
            Ok(PipelineResult {
                mode,
                qubits: layout.total(),
                marked_indices,
                acceptance_probability,
                index_marginal,
                recovered_preimages,
                shots_histogram,
                order: None,
                extracted_orders: BTreeMap::new(),
                extraction_success_probability: None,
                fourier_postselect_hit_probability: None,
                stage_norms: norms,
            })
        }
        Mode::FullPaper => {
            let params = instance.modexp.ok_or(BacktrackError::MissingModexp)?;
            let (base, modulus) = (params.base, params.modulus);
            let order = numtheory::order_brute_force(base, modulus)?.order;

            let mut state = marked;
            state.apply_modexp(base, modulus)?;
            norms.push((Stage::Modexp, state.norm_sqr()));
            state.apply_iqft();
            norms.push((Stage::InverseFourier, state.norm_sqr()));

            let index_marginal = state.marginal(Register::Index);
            let shots_histogram = state.sample_register(Register::Index, config.shots, config.seed);
            let mut extracted_orders = BTreeMap::new();
            for (&outcome, &count) in &shots_histogram {
                let found = numtheory::extract_order(outcome, n, base, modulus);
                *extracted_orders.entry(found).or_insert(0) += count;
            }
            let extraction_success =
                extraction_success_probability(&index_marginal, n, base, modulus, order);
            let hit = fourier_postselect_hit(&state, &marked_indices);

            Ok(PipelineResult {
                mode,
                qubits: layout.total(),
                marked_indices,
                acceptance_probability,
                index_marginal,
                recovered_preimages,
                shots_histogram,
                order: Some(order),
                extracted_orders,
                extraction_success_probability: Some(extraction_success),
                fourier_postselect_hit_probability: hit,
                stage_norms: norms,
            })
        }
    }
}

/// `P(index = k and k is marked | flag = 1)` summed over marked `k`, on a
/// state whose index register has been Fourier transformed.
fn fourier_postselect_hit(state: &StateVector, marked: &[u64]) -> Option<f64> {
    let layout = state.layout();
    let mut flagged = 0.0;
    let mut hits = 0.0;
    for (basis, amp) in state.amplitudes().iter().enumerate() {
        let (index, flag, _) = layout.unpack(basis as u64);
        if flag == 1 {
            let p = amp.norm_sqr();
            flagged += p;
            if marked.binary_search(&index).is_ok() {
                hits += p;
            }
        }
    }
    (flagged > 0.0).then(|| hits / flagged)
}

/// `Σ_i P(i) · [extract_order(i) = order]`.
pub fn extraction_success_probability(
    index_marginal: &[f64],
    index_width: u32,
    base: u64,
    modulus: u64,
    order: u64,
) -> f64 {
    index_marginal
        .iter()
        .enumerate()
        .filter(|(i, _)| {
            numtheory::extract_order(*i as u64, index_width, base, modulus) == Some(order)
        })
        .map(|(_, p)| p)
        .sum()
}

/// Outcome of order finding alone (no preimage oracle).
#[derive(Debug, Clone, PartialEq)]
pub struct OrderFinding {
    pub order: u64,
    pub index_marginal: Vec<f64>,
    pub success_probability: f64,
}

/// Hadamard, modular exponentiation and inverse QFT on an `index_width`-qubit
/// index register, with the exact probability that continued fractions
/// recover the order from one measurement.
pub fn simulate_order_finding(
    index_width: u32,
    base: u64,
    modulus: u64,
    qubit_cap: u32,
) -> Result<OrderFinding, BacktrackError> {
    let params = ModexpParams::new(base, modulus)?;
    let order = numtheory::order_brute_force(base, modulus)?.order;
    let layout = RegisterLayout::new(index_width, params.register_width());
    let mut state = StateVector::initial_with_cap(layout, qubit_cap)?;
    state.apply_hadamard_layer();
    state.apply_modexp(base, modulus)?;
    state.apply_iqft();
    let index_marginal = state.marginal(Register::Index);
    let success_probability =
        extraction_success_probability(&index_marginal, index_width, base, modulus, order);
    Ok(OrderFinding {
        order,
        index_marginal,
        success_probability,
    })
}

/// Coefficient of `|i⟩|A^k mod N⟩` after the inverse QFT:
/// `2^{-n} Σ_{z=0}^{Z_k} exp(-2πi · i·(z·r + k) / 2^n)`.
///
/// # Panics
///
/// Panics unless `1 <= r <= 2^n`, `k < r` and `n < 63`.
pub fn analytic_amplitude(i: u64, k: u64, r: u64, n: u32) -> Complex64 {
    assert!(n < 63 && r >= 1 && r <= (1u64 << n) && k < r);
    let size = 1u128 << n;
    let z_max = numtheory::class_bound(n, r, k);
    let sum: Complex64 = (0..=z_max)
        .map(|z| {
            let exponent = (u128::from(z) * u128::from(r) + u128::from(k)) * u128::from(i) % size;
            let angle = -2.0 * PI * exponent as f64 / size as f64;
            Complex64::new(libm::cos(angle), libm::sin(angle))
        })
        .sum();
    sum / size as f64
}

/// Closed form of `Σ_k |analytic_amplitude(i, k, r, n)|²`:
///
/// * `Σ_k ((Z_k + 1) / 2^n)²` when `i·r / 2^n` is an integer,
/// * `Σ_k sin²(π·i·r·(Z_k + 1) / 2^n) / (2^{2n} · sin²(π·i·r / 2^n))` otherwise.
///
/// # Panics
///
/// Panics unless `1 <= r <= 2^n` and `n < 63`.
pub fn analytic_index_probability(i: u64, r: u64, n: u32) -> f64 {
    assert!(n < 63 && r >= 1 && r <= (1u64 << n));
    let size = 1u128 << n;
    let size_f = size as f64;
    let phase = u128::from(i) * u128::from(r) % size;
    let sizes = (0..r).map(|k| numtheory::class_bound(n, r, k) + 1);
    if phase == 0 {
        sizes
            .map(|c| (c as f64 / size_f) * (c as f64 / size_f))
            .sum()
    } else {
        // sin²(πx / 2^n) has period 2^n in x, so numerators reduce mod 2^n.
        let denom = libm::sin(PI * phase as f64 / size_f);
        let denom = denom * denom;
        sizes
            .map(|c| {
                let num = libm::sin(PI * (phase * u128::from(c) % size) as f64 / size_f);
                num * num / denom
            })
            .sum::<f64>()
            / (size_f * size_f)
    }
}

/// [`analytic_index_probability`] for every `i` in `0..2^n`.
pub fn analytic_index_distribution(r: u64, n: u32) -> Vec<f64> {
    (0..(1u64 << n))
        .map(|i| analytic_index_probability(i, r, n))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreimageCheck {
    pub configuration: Configuration,
    /// What the configuration actually evolves to.
    pub evolves_to: Configuration,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub checks: Vec<PreimageCheck>,
    /// `None` when the target is too wide to enumerate.
    pub marked_matches_enumeration: Option<bool>,
    /// Nothing was recovered; the checks pass vacuously.
    pub empty: bool,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.ok) && self.marked_matches_enumeration != Some(false)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PreimageCheck> {
        self.checks.iter().filter(|c| !c.ok)
    }
}

/// Re-evolves every recovered configuration classically and, for targets up
/// to [`VERIFY_ENUMERATION_WIDTH`] cells, compares the marked set with
/// exhaustive enumeration.
pub fn verify_result(
    instance: &ProblemInstance,
    result: &PipelineResult,
) -> Result<VerificationReport, BacktrackError> {
    let checks = result
        .recovered_preimages
        .iter()
        .map(|c| {
            let evolves_to = eca::evolve(c, &instance.rule, instance.steps);
            PreimageCheck {
                configuration: *c,
                evolves_to,
                ok: c.width() == instance.width() && evolves_to == instance.target,
            }
        })
        .collect();
    let marked_matches_enumeration = if instance.width() <= VERIFY_ENUMERATION_WIDTH {
        let expected: Vec<u64> = eca::preimages(&instance.target, &instance.rule, instance.steps)?
            .iter()
            .map(Configuration::encode)
            .collect();
        Some(expected == result.marked_indices)
    } else {
        None
    };
    Ok(VerificationReport {
        checks,
        marked_matches_enumeration,
        empty: result.recovered_preimages.is_empty(),
    })
}

/// Simulated qubits: `n + 1 + t`, with `t = 0` in mark mode.
pub fn qubit_budget(instance: &ProblemInstance, mode: Mode) -> Result<u32, BacktrackError> {
    Ok(instance.layout(mode)?.total())
}

/// Register count of the circuit including its uncomputed work register:
/// `n + (A + 1) + 1 + t`. `None` without modexp parameters.
pub fn circuit_qubit_envelope(instance: &ProblemInstance) -> Option<u64> {
    instance
        .modexp
        .map(|p| u64::from(instance.width()) + (p.base + 1) + 1 + u64::from(p.register_width()))
}
