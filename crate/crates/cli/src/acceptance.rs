//! The ten acceptance checks, shared by `selftest` and the `acceptance`
//! integration test.

use ca_backtrack_core::backtrack::{self, Mode, ModexpParams, PipelineConfig, ProblemInstance};
use ca_backtrack_core::eca::{self, Configuration, RuleTable};
use ca_backtrack_core::numtheory;
use ca_backtrack_core::statevec::{Register, StateError, StateVector, NORM_TOLERANCE};
use ca_backtrack_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::{BacktrackArgs, ModeArg};
use crate::commands::cmd_backtrack;
use crate::error::CliError;

const DISTRIBUTION_TOLERANCE: f64 = 1e-9;
const EXACT_TOLERANCE: f64 = 1e-12;
const SUITE_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Outcome {
    fn new(id: u32, name: &'static str, result: Result<String, String>) -> Self {
        let (passed, detail) = match result {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        Self {
            id,
            name,
            passed,
            detail,
        }
    }

    /// One-line summary, e.g. `PASS  3 mark_postselect_recovery: ...`.
    pub fn line(&self) -> String {
        format!(
            "{} {:>2} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelftestOptions {
    /// Added to one amplitude after the Hadamard layer in the normalization check.
    pub perturbation: Option<f64>,
    pub qubit_cap: u32,
    /// Optional extra mark-stage run at this width.
    pub extra_width: Option<u32>,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        Self {
            perturbation: None,
            qubit_cap: ca_backtrack_core::statevec::DEFAULT_QUBIT_CAP,
            extra_width: None,
        }
    }
}

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cfg(s: &str) -> Configuration {
    s.parse().expect("literal configuration")
}

fn rule(n: u32) -> RuleTable {
    RuleTable::from_number(n).expect("literal rule")
}

/// The width-11 rule-254 instance whose only preimage is a single black cell.
pub fn width11_instance() -> ProblemInstance {
    ProblemInstance::new(rule(254), 4, cfg("01111111110"), None).expect("valid instance")
}

/// Width-8 instance coupled to A = 7, N = 15.
pub fn width8_instance(rule_number: u32, target: &str) -> ProblemInstance {
    let params = ModexpParams::new(7, 15).expect("coprime");
    ProblemInstance::new(rule(rule_number), 1, cfg(target), Some(params)).expect("valid instance")
}

/// The black cells form one contiguous run; returns its bounds.
fn black_run(c: &Configuration) -> Option<(u32, u32)> {
    let cells: Vec<bool> = c.cells().collect();
    let first = cells.iter().position(|&b| b)?;
    let last = cells.iter().rposition(|&b| b)?;
    cells[first..=last]
        .iter()
        .all(|&b| b)
        .then_some((first as u32, last as u32))
}

pub fn figure_reproduction() -> Check {
    let rows = eca::history(&cfg("00000100000"), &rule(254), 4);
    let last = rows.last().expect("history is never empty").to_string();
    ensure(last == "01111111110", || format!("final row {last}"))?;
    let mut prev = black_run(&rows[0]).ok_or("initial row has no single run")?;
    for (step, row) in rows.iter().enumerate().skip(1) {
        let run = black_run(row).ok_or_else(|| format!("row {step} is not one black run"))?;
        ensure(run.0 + 1 == prev.0 && run.1 == prev.1 + 1, || {
            format!("row {step} run {run:?} does not extend {prev:?} by one cell per side")
        })?;
        prev = run;
    }
    Ok(format!("{} rows, final {last}", rows.len()))
}

pub fn oracle_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED);
    let mut total_marked = 0;
    for trial in 0..50 {
        let rule_number = rng.random_range(0..=255);
        let width = rng.random_range(1..=10);
        let steps = rng.random_range(1..=4);
        let target = Configuration::decode(rng.random_range(0..1u64 << width), width)
            .map_err(|e| e.to_string())?;
        let inst = ProblemInstance::new(rule(rule_number), steps, target, None)
            .map_err(|e| e.to_string())?;
        let marked = backtrack::build_oracle(&inst).marked();
        let expected: Vec<u64> = eca::preimages(&target, &rule(rule_number), steps)
            .map_err(|e| e.to_string())?
            .iter()
            .map(Configuration::encode)
            .collect();
        ensure(marked == expected, || {
            format!("trial {trial}: rule {rule_number}, target {target}, {steps} steps")
        })?;
        total_marked += marked.len();
    }
    Ok(format!(
        "50 instances, {total_marked} marked indices in total"
    ))
}

pub fn mark_postselect_recovery() -> Check {
    let inst = width11_instance();
    let result =
        backtrack::run_pipeline(&inst, &PipelineConfig::new(Mode::MarkPostselect, 1024, 0))
            .map_err(|e| e.to_string())?;
    let p32 = result.index_marginal[32];
    let rest: f64 = result.index_marginal.iter().sum::<f64>() - p32;
    let acceptance = result.acceptance_probability;
    ensure(
        (p32 - 1.0).abs() <= DISTRIBUTION_TOLERANCE && rest <= DISTRIBUTION_TOLERANCE,
        || format!("P(32) = {p32}, elsewhere {rest}"),
    )?;
    ensure((acceptance - 1.0 / 2048.0).abs() <= EXACT_TOLERANCE, || {
        format!("acceptance {acceptance}")
    })?;
    ensure(result.recovered_preimages == [cfg("00000100000")], || {
        format!("recovered {:?}", result.recovered_preimages)
    })?;
    Ok(format!("P(32) = {p32}, acceptance = {acceptance:e}"))
}

/// Runs on the two constant oracles: the closed form assumes the flag does
/// not split any residue class.
pub fn analytic_distribution() -> Check {
    let expected = backtrack::analytic_index_distribution(4, 8);
    let peaks = [0usize, 64, 128, 192];
    let mut worst: f64 = 0.0;
    for (rule_number, target) in [(254, "00010000"), (0, "00000000")] {
        let inst = width8_instance(rule_number, target);
        let result = backtrack::run_pipeline(&inst, &PipelineConfig::new(Mode::FullPaper, 1024, 0))
            .map_err(|e| e.to_string())?;
        for (i, (&sim, &exact)) in result.index_marginal.iter().zip(&expected).enumerate() {
            let want = if peaks.contains(&i) { 0.25 } else { 0.0 };
            let dev = (sim - exact).abs().max((sim - want).abs());
            worst = worst.max(dev);
            ensure(dev <= DISTRIBUTION_TOLERANCE, || {
                format!("rule {rule_number}: P({i}) = {sim}, closed form {exact}")
            })?;
        }
    }
    Ok(format!(
        "256 outcomes on 2 oracles, max deviation {worst:.1e}"
    ))
}

pub fn closed_form_consistency() -> Check {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for n in 1..=10u32 {
        for r in [1u64, 2, 3, 4, 5, 7, 12]
            .into_iter()
            .filter(|&r| r <= 1 << n)
        {
            for i in 0..1u64 << n {
                let direct: f64 = (0..r)
                    .map(|k| backtrack::analytic_amplitude(i, k, r, n).norm_sqr())
                    .sum();
                let closed = backtrack::analytic_index_probability(i, r, n);
                let dev = (direct - closed).abs();
                worst = worst.max(dev);
                ensure(dev <= DISTRIBUTION_TOLERANCE, || {
                    format!("n={n} r={r} i={i}: direct {direct}, closed {closed}")
                })?;
                cases += 1;
            }
        }
    }
    Ok(format!(
        "{cases} (n, r, i) cases, max deviation {worst:.1e}"
    ))
}

pub fn order_extraction() -> Check {
    let order = numtheory::order_brute_force(7, 15)
        .map_err(|e| e.to_string())?
        .order;
    ensure(order == 4, || format!("brute-force order {order}"))?;
    let sim = backtrack::simulate_order_finding(8, 7, 15, 26).map_err(|e| e.to_string())?;
    let p = sim.success_probability;
    ensure((p - 0.5).abs() <= EXACT_TOLERANCE, || {
        format!("success probability {p}")
    })?;
    for (outcome, want) in [(0, None), (64, Some(4)), (128, None), (192, Some(4))] {
        let got = numtheory::extract_order(outcome, 8, 7, 15);
        ensure(got == want, || {
            format!("extract_order({outcome}) = {got:?}")
        })?;
    }
    Ok(format!("r = {order}, P(success) = {p}"))
}

pub fn group_axioms() -> Check {
    for r in 1..=64 {
        let report = numtheory::group_axiom_check(r);
        ensure(report.exhaustive && report.all_hold(), || {
            format!("r = {r}: {:?}", report.counterexample)
        })?;
    }
    Ok("r = 1..=64, all exhaustive".into())
}

/// A full-mode instance with random rule, target and `N` in `3..32`.
fn random_full_instance(rng: &mut ChaCha8Rng) -> ProblemInstance {
    loop {
        let modulus = rng.random_range(3..32u64);
        let base = rng.random_range(2..modulus);
        let Ok(params) = ModexpParams::new(base, modulus) else {
            continue;
        };
        let width = params.coupled_index_width();
        let target =
            Configuration::decode(rng.random_range(0..1u64 << width), width).expect("in range");
        let steps = rng.random_range(1..=4);
        return ProblemInstance::new(rule(rng.random_range(0..=255)), steps, target, Some(params))
            .expect("valid instance");
    }
}

fn check_norm(stage: &str, state: &StateVector, trial: usize) -> Result<f64, String> {
    let dev = (1.0 - state.norm_sqr()).abs();
    ensure(dev < NORM_TOLERANCE, || {
        format!("instance {trial}, after {stage}: |1 - norm²| = {dev:e}")
    })?;
    Ok(dev)
}

fn check_involution(
    name: &str,
    before: &StateVector,
    after: &StateVector,
    trial: usize,
) -> Result<f64, String> {
    let dev = before.max_deviation(after);
    ensure(dev < NORM_TOLERANCE, || {
        format!("instance {trial}, {name} twice: max deviation {dev:e}")
    })?;
    Ok(dev)
}

pub fn normalization(perturbation: Option<f64>) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED + 8);
    let mut worst: f64 = 0.0;
    for trial in 0..20 {
        let inst = random_full_instance(&mut rng);
        let layout = inst.layout(Mode::FullPaper).map_err(|e| e.to_string())?;
        let (base, modulus) = inst
            .modexp()
            .map(|p| (p.base(), p.modulus()))
            .expect("full mode");
        let oracle = backtrack::build_oracle(&inst);

        let mut state = StateVector::initial(layout).map_err(|e| e.to_string())?;
        worst = worst.max(check_norm("initialization", &state, trial)?);
        state.apply_hadamard_layer();
        if let Some(eps) = perturbation {
            state.amplitudes_mut()[layout.pack(0, 0, 1) as usize] += Complex64::new(eps, 0.0);
        }
        worst = worst.max(check_norm("hadamard", &state, trial)?);

        let mut twice = state.clone();
        twice.apply_hadamard_layer();
        twice.apply_hadamard_layer();
        worst = worst.max(check_involution("hadamard layer", &state, &twice, trial)?);

        let mut twice = state.clone();
        twice
            .apply_flag_oracle(|k| oracle.eval(k))
            .map_err(|e| e.to_string())?;
        twice
            .apply_flag_oracle(|k| oracle.eval(k))
            .map_err(|e| e.to_string())?;
        worst = worst.max(check_involution("flag oracle", &state, &twice, trial)?);

        let mut twice = state.clone();
        twice.apply_iqft();
        twice.apply_qft();
        worst = worst.max(check_involution("QFT after IQFT", &state, &twice, trial)?);

        state
            .apply_flag_oracle(|k| oracle.eval(k))
            .map_err(|e| e.to_string())?;
        worst = worst.max(check_norm("mark", &state, trial)?);

        let mut selected = state.clone();
        match selected.post_select_flag(1) {
            Ok(_) => worst = worst.max(check_norm("post-selection", &selected, trial)?),
            Err(StateError::EmptySubspace { .. }) => {}
            Err(e) => return Err(e.to_string()),
        }

        state
            .apply_modexp(base, modulus)
            .map_err(|e| e.to_string())?;
        worst = worst.max(check_norm("modexp", &state, trial)?);
        state.apply_iqft();
        worst = worst.max(check_norm("inverse fourier", &state, trial)?);
        let total: f64 = state.marginal(Register::Index).iter().sum();
        ensure((total - 1.0).abs() < NORM_TOLERANCE, || {
            format!("instance {trial}: index marginal sums to {total}")
        })?;
    }
    Ok(format!("20 instances, max deviation {worst:.1e}"))
}

pub fn resource_accounting() -> Check {
    let inst = width8_instance(254, "00111000");
    let full = backtrack::qubit_budget(&inst, Mode::FullPaper).map_err(|e| e.to_string())?;
    let mark = backtrack::qubit_budget(&inst, Mode::MarkPostselect).map_err(|e| e.to_string())?;
    let envelope = backtrack::circuit_qubit_envelope(&inst).ok_or("no envelope")?;
    ensure(full == 13, || format!("full_paper budget {full}"))?;
    ensure(mark == 9, || format!("mark_postselect budget {mark}"))?;
    ensure(u64::from(full) <= envelope, || {
        format!("budget {full} over envelope {envelope}")
    })?;
    let w11 = backtrack::qubit_budget(&width11_instance(), Mode::MarkPostselect)
        .map_err(|e| e.to_string())?;
    ensure(w11 == 12, || format!("width-11 mark budget {w11}"))?;
    Ok(format!(
        "n + 1 + t = {full} <= envelope {envelope}; mark mode {mark}, width 11 {w11}"
    ))
}

fn determinism_args() -> BacktrackArgs {
    BacktrackArgs {
        rule: 254,
        target: "00111000".into(),
        steps: 1,
        width: Some(8),
        base: Some(7),
        modulus: Some(15),
        mode: ModeArg::FullPaper,
        shots: 1024,
        seed: 42,
        max_qubits: 26,
        output: None,
    }
}

pub fn determinism() -> Check {
    let args = determinism_args();
    let first = cmd_backtrack(&args).map_err(|e| e.to_string())?.render();
    let second = cmd_backtrack(&args).map_err(|e| e.to_string())?.render();
    ensure(first == second, || "two runs differ".into())?;
    let reparsed: serde_json::Value = serde_json::from_str(&first).map_err(|e| e.to_string())?;
    ensure(crate::json::render(&reparsed) == first, || {
        "re-serialized JSON differs".into()
    })?;
    Ok(format!("{} identical bytes, round trip exact", first.len()))
}

fn extra_width_check(width: u32, cap: u32) -> Check {
    let initial = Configuration::decode(1 << (width / 2), width).map_err(|e| e.to_string())?;
    let target = eca::evolve(&initial, &rule(254), 1);
    let inst = ProblemInstance::new(rule(254), 1, target, None).map_err(|e| e.to_string())?;
    let state = backtrack::run_mark_stage_with_cap(&inst, Mode::MarkPostselect, cap)
        .map_err(|e| e.to_string())?;
    let dev = (1.0 - state.norm_sqr()).abs();
    ensure(dev < NORM_TOLERANCE, || {
        format!("width {width}: |1 - norm²| = {dev:e}")
    })?;
    Ok(format!("mark stage at width {width}, deviation {dev:.1e}"))
}

/// Runs every check. Fails early with a resource error when the requested
/// extra width does not fit the qubit cap.
pub fn run_all(options: &SelftestOptions) -> Result<Vec<Outcome>, CliError> {
    if let Some(width) = options.extra_width {
        let requested = width.saturating_add(1);
        if requested > options.qubit_cap {
            return Err(StateError::TooManyQubits {
                requested,
                cap: options.qubit_cap,
            }
            .into());
        }
    }
    let mut outcomes = vec![
        Outcome::new(1, "figure_reproduction", figure_reproduction()),
        Outcome::new(2, "oracle_equivalence", oracle_equivalence()),
        Outcome::new(3, "mark_postselect_recovery", mark_postselect_recovery()),
        Outcome::new(4, "analytic_distribution", analytic_distribution()),
        Outcome::new(5, "closed_form_consistency", closed_form_consistency()),
        Outcome::new(6, "order_extraction", order_extraction()),
        Outcome::new(7, "group_axioms", group_axioms()),
        Outcome::new(8, "normalization", normalization(options.perturbation)),
        Outcome::new(9, "resource_accounting", resource_accounting()),
        Outcome::new(10, "determinism", determinism()),
    ];
    if let Some(width) = options.extra_width {
        outcomes.push(Outcome::new(
            11,
            "extra_width",
            extra_width_check(width, options.qubit_cap),
        ));
    }
    Ok(outcomes)
}
