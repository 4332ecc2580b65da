//! Subcommand implementations. Each returns a [`Report`]; writing it out is
//! left to the caller so the output bytes can be compared in tests.

use std::collections::BTreeMap;
use std::time::Instant;

use ca_backtrack_core::backtrack::{
    self, BacktrackError, Mode, ModexpParams, PipelineConfig, PipelineResult, ProblemInstance,
};
use ca_backtrack_core::eca::{self, Configuration, RuleTable};
use ca_backtrack_core::numtheory;
use serde_json::{json, Value};

use crate::acceptance::{self, SelftestOptions};
use crate::args::{BacktrackArgs, EvolveArgs, OrderArgs, PreimageArgs, SelftestArgs};
use crate::error::{exit, CliError};
use crate::json::{float, floats, object, opt_float, render};

/// JSON payload, human-readable notes for stderr, and the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub json: Value,
    pub notes: Vec<String>,
    pub exit_code: i32,
}

impl Report {
    fn ok(json: Value) -> Self {
        Self {
            json,
            notes: Vec::new(),
            exit_code: exit::SUCCESS,
        }
    }

    /// Canonical JSON text.
    pub fn render(&self) -> String {
        render(&self.json)
    }
}

fn parse_rule(rule: u32) -> Result<RuleTable, CliError> {
    Ok(RuleTable::from_number(rule)?)
}

fn parse_config(flag: &str, text: &str, width: Option<u32>) -> Result<Configuration, CliError> {
    let parsed = match width {
        Some(w) => Configuration::parse_with_width(text, w),
        None => text.parse(),
    };
    parsed.map_err(|e| CliError::Usage(format!("--{flag}: {e}")))
}

fn positive_steps(steps: u32) -> Result<u32, CliError> {
    if steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    Ok(steps)
}

fn strings(configs: &[Configuration]) -> Value {
    Value::Array(configs.iter().map(|c| Value::from(c.to_string())).collect())
}

pub fn cmd_evolve(args: &EvolveArgs) -> Result<Report, CliError> {
    let rule = parse_rule(args.rule)?;
    let initial = parse_config("initial", &args.initial, args.width)?;
    let rows = eca::history(&initial, &rule, args.steps);
    let mut report = Report::ok(object([
        ("rule", json!(args.rule)),
        ("width", json!(initial.width())),
        ("steps", json!(args.steps)),
        ("rows", strings(&rows)),
    ]));
    report.notes = rows.iter().map(Configuration::render).collect();
    Ok(report)
}

pub fn cmd_preimage(args: &PreimageArgs) -> Result<Report, CliError> {
    let rule = parse_rule(args.rule)?;
    let target = parse_config("target", &args.target, args.width)?;
    let steps = positive_steps(args.steps)?;
    let started = Instant::now();
    let found = eca::preimages(&target, &rule, steps)?;
    let elapsed = started.elapsed();
    let mut report = Report::ok(object([
        ("rule", json!(args.rule)),
        ("width", json!(target.width())),
        ("steps", json!(steps)),
        ("target", json!(target.to_string())),
        ("count", json!(found.len())),
        ("preimages", strings(&found)),
    ]));
    // Wall time stays out of the JSON so identical inputs give identical bytes.
    report.notes.push(format!(
        "searched 2^{} configurations in {:.3} s, found {}",
        target.width(),
        elapsed.as_secs_f64(),
        found.len()
    ));
    Ok(report)
}

fn build_instance(args: &BacktrackArgs, mode: Mode) -> Result<ProblemInstance, CliError> {
    let rule = parse_rule(args.rule)?;
    let target = parse_config("target", &args.target, args.width)?;
    let steps = positive_steps(args.steps)?;
    let modexp = match (args.base, args.modulus) {
        (Some(base), Some(modulus)) => Some(ModexpParams::new(base, modulus)?),
        (None, None) => None,
        _ => {
            return Err(CliError::Usage(
                "--base and --modulus must be given together".into(),
            ))
        }
    };
    let instance = ProblemInstance::new(rule, steps, target, modexp)?;
    instance.validate(mode)?;
    Ok(instance)
}

fn instance_json(instance: &ProblemInstance) -> Value {
    let (base, modulus) = instance.modexp().map_or((Value::Null, Value::Null), |p| {
        (json!(p.base()), json!(p.modulus()))
    });
    object([
        ("rule", json!(instance.rule().number())),
        ("width", json!(instance.width())),
        ("steps", json!(instance.steps())),
        ("target", json!(instance.target().to_string())),
        ("base", base),
        ("modulus", modulus),
    ])
}

fn histogram_json(hist: &BTreeMap<u64, u64>, width: u32) -> Value {
    object(hist.iter().map(|(&outcome, &count)| {
        let key = Configuration::decode(outcome, width)
            .map(|c| c.to_string())
            .unwrap_or_else(|_| outcome.to_string());
        (key, json!(count))
    }))
}

fn orders_json(orders: &BTreeMap<Option<u64>, u64>) -> Value {
    object(orders.iter().map(|(order, &count)| {
        let key = order.map_or_else(|| "none".to_string(), |r| r.to_string());
        (key, json!(count))
    }))
}

fn pipeline_json(
    instance: &ProblemInstance,
    result: &PipelineResult,
    verification: &backtrack::VerificationReport,
) -> Value {
    let width = instance.width();
    let failed: Vec<Configuration> = verification.failures().map(|c| c.configuration).collect();
    object([
        ("instance", instance_json(instance)),
        ("mode", json!(result.mode.name())),
        ("outcome", json!("measured")),
        ("marked", json!(result.marked_indices)),
        (
            "acceptance_probability",
            float(result.acceptance_probability),
        ),
        ("index_marginal", floats(&result.index_marginal)),
        ("histogram", histogram_json(&result.shots_histogram, width)),
        ("extracted_orders", orders_json(&result.extracted_orders)),
        ("order", json!(result.order)),
        (
            "extraction_success_probability",
            opt_float(result.extraction_success_probability),
        ),
        (
            "fourier_postselect_hit_probability",
            opt_float(result.fourier_postselect_hit_probability),
        ),
        ("preimages", strings(&result.recovered_preimages)),
        ("verified", json!(verification.passed())),
        (
            "verification",
            object([
                ("empty", json!(verification.empty)),
                (
                    "marked_matches_enumeration",
                    json!(verification.marked_matches_enumeration),
                ),
                ("failed", strings(&failed)),
            ]),
        ),
        (
            "stage_norms",
            object(
                result
                    .stage_norms
                    .iter()
                    .map(|(stage, norm)| (stage.name(), float(*norm))),
            ),
        ),
        ("qubits", json!(result.qubits)),
    ])
}

/// A mark-mode run whose target has no preimage: nothing to measure, which
/// passes verification vacuously.
fn nothing_measured_json(instance: &ProblemInstance, mode: Mode, qubits: u32) -> Value {
    object([
        ("instance", instance_json(instance)),
        ("mode", json!(mode.name())),
        ("outcome", json!("nothing_in_measurement")),
        ("marked", json!([])),
        ("acceptance_probability", float(0.0)),
        ("index_marginal", json!([])),
        ("histogram", json!({})),
        ("extracted_orders", json!({})),
        ("order", Value::Null),
        ("extraction_success_probability", Value::Null),
        ("fourier_postselect_hit_probability", Value::Null),
        ("preimages", json!([])),
        ("verified", json!(true)),
        (
            "verification",
            object([
                ("empty", json!(true)),
                ("marked_matches_enumeration", Value::Null),
                ("failed", json!([])),
            ]),
        ),
        ("stage_norms", json!({})),
        ("qubits", json!(qubits)),
    ])
}

pub fn cmd_backtrack(args: &BacktrackArgs) -> Result<Report, CliError> {
    let mode = Mode::from(args.mode);
    let instance = build_instance(args, mode)?;
    let qubits = backtrack::qubit_budget(&instance, mode)?;
    let config = PipelineConfig {
        mode,
        shots: args.shots,
        seed: args.seed,
        qubit_cap: args.max_qubits,
    };
    match backtrack::run_pipeline(&instance, &config) {
        Ok(result) => {
            let verification = backtrack::verify_result(&instance, &result)?;
            let mut report = Report::ok(pipeline_json(&instance, &result, &verification));
            report.notes.push(format!(
                "{} qubits, {} marked, acceptance {:.6e}",
                result.qubits,
                result.marked_indices.len(),
                result.acceptance_probability
            ));
            if !verification.passed() {
                report.exit_code = exit::VERIFICATION_FAILED;
                report.notes.push("verification failed".into());
            }
            Ok(report)
        }
        Err(BacktrackError::NothingInMeasurement) => {
            let mut report = Report::ok(nothing_measured_json(&instance, mode, qubits));
            report
                .notes
                .push("nothing in measurement: the target has no preimage".into());
            Ok(report)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_order(args: &OrderArgs) -> Result<Report, CliError> {
    let params = ModexpParams::new(args.base, args.modulus)?;
    let found = numtheory::order_brute_force(params.base(), params.modulus())?;
    let mut entries = vec![
        ("base", json!(args.base)),
        ("modulus", json!(args.modulus)),
        ("order", json!(found.order)),
        ("method", json!("brute_force")),
    ];
    if let Some(width) = args.width {
        let sim = backtrack::simulate_order_finding(
            width,
            params.base(),
            params.modulus(),
            args.max_qubits,
        )?;
        entries.push(("width", json!(width)));
        entries.push(("qubits", json!(width + 1 + params.register_width())));
        entries.push((
            "extraction_success_probability",
            float(sim.success_probability),
        ));
    }
    Ok(Report::ok(object(entries)))
}

pub fn cmd_selftest(args: &SelftestArgs) -> Result<Report, CliError> {
    let options = SelftestOptions {
        perturbation: args.perturb,
        qubit_cap: args.max_qubits,
        extra_width: args.width,
    };
    let outcomes = acceptance::run_all(&options)?;
    let passed = outcomes.iter().all(|o| o.passed);
    let json = object([
        (
            "criteria",
            Value::Array(
                outcomes
                    .iter()
                    .map(|o| {
                        object([
                            ("id", json!(o.id)),
                            ("name", json!(o.name)),
                            ("passed", json!(o.passed)),
                            ("detail", json!(o.detail)),
                        ])
                    })
                    .collect(),
            ),
        ),
        ("passed", json!(passed)),
    ]);
    Ok(Report {
        json,
        notes: outcomes.iter().map(|o| o.line()).collect(),
        exit_code: if passed {
            exit::SUCCESS
        } else {
            exit::VERIFICATION_FAILED
        },
    })
}
