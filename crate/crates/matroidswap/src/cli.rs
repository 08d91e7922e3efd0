//! Implementations behind the `matroidswap` command-line tool. Each command
//! returns its stdout payload and exit code; the binary only parses
//! arguments and prints.
//!
//! Exit codes: 0 success (all checks passed where applicable), 1 a
//! verification-style command found failures, 2 invalid input, 3 the
//! `--check-oracles` gate rejected a valuation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::allocation::{usw, utility_vector, Allocation};
use crate::bench::{records_to_csv, rpe_simulate, run_bench, BenchConfig, BenchRecord};
use crate::enumeration::{
    brute_force_leximin, brute_force_lorenz_augmented, brute_force_max_usw, brute_force_mnw,
    EnumerationGuard,
};
use crate::error::{Error, Result};
use crate::exchange::build_exchange_graph;
use crate::fairness::{run_checks, CheckKind};
use crate::format::{
    build_allocation, build_instance, instance_from_json, parse_allocation_file,
    parse_instance_file, priority_ranks,
};
use crate::goods::Agent;
use crate::instance::Instance;
use crate::solver::{yankee_swap, SolveTrace};
use crate::valuation::{check_mrf, MrfCheckMode, ValuationOracle};

/// Environment variable that lifts the exhaustive-enumeration guards.
/// Enumeration is exponential, so overriding can be very slow.
pub const GUARD_OVERRIDE_ENV: &str = "MATROIDSWAP_GUARD_OVERRIDE";

#[derive(Debug)]
pub struct CommandResult {
    pub stdout: String,
    pub code: i32,
}

impl CommandResult {
    fn json<T: Serialize>(value: &T, code: i32) -> Result<Self> {
        let mut stdout = serde_json::to_string_pretty(value)?;
        stdout.push('\n');
        Ok(CommandResult { stdout, code })
    }
}

fn guard_override_active() -> bool {
    match std::env::var(GUARD_OVERRIDE_ENV) {
        Ok(v) => !matches!(v.as_str(), "" | "0" | "false"),
        Err(_) => false,
    }
}

fn enumeration_guard() -> EnumerationGuard {
    if guard_override_active() {
        EnumerationGuard::unbounded()
    } else {
        EnumerationGuard::default()
    }
}

fn mms_guard() -> EnumerationGuard {
    if guard_override_active() {
        EnumerationGuard::unbounded()
    } else {
        EnumerationGuard::for_mms()
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Format(format!("cannot read {}: {e}", path.display())))
}

/// MRF check mode used by gates: exhaustive when small enough to be instant,
/// sampled otherwise.
fn gate_check_mode(m: usize) -> MrfCheckMode {
    if m <= 12 {
        MrfCheckMode::Exhaustive
    } else {
        MrfCheckMode::Sampled { trials: 2000, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub instance: PathBuf,
    pub priority_file: Option<PathBuf>,
    pub seed_priority: Option<u64>,
    pub trace: bool,
    pub check_oracles: bool,
    pub dump_exchange_graph: Option<PathBuf>,
}

#[derive(Serialize)]
struct TraceIterationOut {
    selected: String,
    sizes_before: Vec<usize>,
    path: Option<Vec<String>>,
    oracle_calls: u64,
}

#[derive(Serialize)]
struct TraceOut {
    iterations: Vec<TraceIterationOut>,
    removal_order: Vec<String>,
    total_iterations: usize,
}

#[derive(Serialize)]
struct SolveOutput {
    allocation: BTreeMap<String, Vec<String>>,
    augmented_priority_used: Vec<String>,
    priority_source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<TraceOut>,
    unallocated: Vec<String>,
    utilities: BTreeMap<String, u64>,
}

fn trace_to_output(trace: &SolveTrace, inst: &Instance) -> TraceOut {
    TraceOut {
        iterations: trace
            .iterations
            .iter()
            .map(|it| TraceIterationOut {
                selected: inst.agent_name(it.selected).to_string(),
                sizes_before: it.sizes_before.clone(),
                path: it.path.as_ref().map(|goods| {
                    goods.iter().map(|&g| inst.good_name(g).to_string()).collect()
                }),
                oracle_calls: it.oracle_calls,
            })
            .collect(),
        removal_order: trace
            .removal_order
            .iter()
            .map(|&a| inst.agent_name(a).to_string())
            .collect(),
        total_iterations: trace.total_iterations(),
    }
}

fn allocation_to_maps(
    alloc: &Allocation,
    inst: &Instance,
) -> Result<(BTreeMap<String, Vec<String>>, Vec<String>, BTreeMap<String, u64>)> {
    let mut bundles = BTreeMap::new();
    let utilities_vec = utility_vector(alloc, inst)?;
    let mut utilities = BTreeMap::new();
    for agent in inst.agents() {
        let name = inst.agent_name(agent).to_string();
        let goods: Vec<String> = alloc
            .bundle(agent)
            .iter()
            .map(|g| inst.good_name(g).to_string())
            .collect();
        bundles.insert(name.clone(), goods);
        utilities.insert(name, utilities_vec[agent.0 - 1]);
    }
    let unallocated = alloc
        .unallocated()
        .iter()
        .map(|g| inst.good_name(g).to_string())
        .collect();
    Ok((bundles, unallocated, utilities))
}

/// Runs the MRF gate over every agent, failing with the exit-3 error on the
/// first invalid oracle.
fn enforce_oracles_valid(inst: &Instance) -> Result<()> {
    let mode = gate_check_mode(inst.good_count());
    for agent in inst.agents() {
        let report = check_mrf(inst.oracle(agent)?, inst.good_count(), mode)?;
        if let Some(violation) = report.first_violation {
            return Err(Error::OracleInvalid {
                agent: inst.agent_name(agent).to_string(),
                detail: violation.to_string(),
            });
        }
    }
    Ok(())
}

pub fn cmd_solve(opts: &SolveOptions) -> Result<CommandResult> {
    let file = parse_instance_file(&read_file(&opts.instance)?)?;
    let mut inst = build_instance(&file)?;
    if opts.priority_file.is_some() && opts.seed_priority.is_some() {
        return Err(Error::Precondition(
            "--priority-file and --seed-priority are mutually exclusive".into(),
        ));
    }
    let priority_source = if let Some(path) = &opts.priority_file {
        let order: Vec<String> = serde_json::from_str(&read_file(path)?)?;
        let ranks = priority_ranks(&order, inst.agent_names())?;
        inst = inst.with_priority(ranks)?;
        "file"
    } else if let Some(seed) = opts.seed_priority {
        let mut ranks: Vec<usize> = (1..=inst.agent_count()).collect();
        ranks.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        inst = inst.with_priority(ranks)?;
        "seed"
    } else if file.priority.is_some() {
        "instance"
    } else {
        "identity-default"
    };

    if opts.check_oracles {
        enforce_oracles_valid(&inst)?;
    }

    let (alloc, trace) = yankee_swap(&inst)?;

    if let Some(path) = &opts.dump_exchange_graph {
        let graph = build_exchange_graph(&alloc, &inst)?;
        std::fs::write(path, graph.dump_edge_list(&inst))?;
    }

    let (allocation, unallocated, utilities) = allocation_to_maps(&alloc, &inst)?;
    let output = SolveOutput {
        allocation,
        augmented_priority_used: inst
            .agents_by_rank()
            .iter()
            .map(|&a| inst.agent_name(a).to_string())
            .collect(),
        priority_source: priority_source.to_string(),
        trace: opts.trace.then(|| trace_to_output(&trace, &inst)),
        unallocated,
        utilities,
    };
    CommandResult::json(&output, 0)
}

#[derive(Serialize)]
struct CheckOut {
    name: String,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness_text: Option<String>,
}

#[derive(Serialize)]
struct SkippedOut {
    name: String,
    reason: String,
}

#[derive(Serialize)]
struct VerifyOutput {
    all_pass: bool,
    checks: Vec<CheckOut>,
    skipped: Vec<SkippedOut>,
}

fn parse_check_name(name: &str) -> Result<CheckKind> {
    match name {
        "clean" => Ok(CheckKind::Clean),
        "ef1" => Ok(CheckKind::Ef1),
        "efx" => Ok(CheckKind::Efx),
        "cmms" => Ok(CheckKind::Cmms { c_num: 1, c_den: 2 }),
        "max-usw" => Ok(CheckKind::MaxUsw),
        "mnw" => Ok(CheckKind::Mnw),
        "leximin" => Ok(CheckKind::Leximin),
        "lorenz" | "lorenz-augmented" => Ok(CheckKind::LorenzAugmented),
        "lorenz-plain" => Ok(CheckKind::LorenzPlain),
        other => Err(Error::Precondition(format!("unknown check `{other}`"))),
    }
}

pub fn cmd_verify(
    instance: &Path,
    allocation: &Path,
    checks: Option<&[String]>,
) -> Result<CommandResult> {
    let inst = instance_from_json(&read_file(instance)?)?;
    let alloc_file = parse_allocation_file(&read_file(allocation)?)?;
    let alloc = build_allocation(&alloc_file, &inst)?;
    let guard = enumeration_guard();
    let mms = mms_guard();

    let mut skipped = Vec::new();
    let kinds: Vec<CheckKind> = match checks {
        Some(names) => names
            .iter()
            .map(|n| parse_check_name(n))
            .collect::<Result<Vec<_>>>()?,
        None => {
            // Default: everything that fits the guards; note what does not.
            let mut kinds = vec![CheckKind::Clean, CheckKind::Ef1, CheckKind::Efx];
            let enumerable = guard.admit(&inst).is_ok();
            let mms_ok = mms.admit(&inst).is_ok();
            if mms_ok {
                kinds.push(CheckKind::Cmms { c_num: 1, c_den: 2 });
            } else {
                skipped.push(SkippedOut {
                    name: "cmms".into(),
                    reason: format!("instance exceeds the maximin-share guard; set {GUARD_OVERRIDE_ENV}=1 to force"),
                });
            }
            for kind in [CheckKind::MaxUsw, CheckKind::Mnw, CheckKind::Leximin, CheckKind::LorenzAugmented] {
                if enumerable {
                    kinds.push(kind);
                } else {
                    skipped.push(SkippedOut {
                        name: kind.name().into(),
                        reason: format!("instance exceeds the enumeration guard; set {GUARD_OVERRIDE_ENV}=1 to force"),
                    });
                }
            }
            kinds
        }
    };

    let report = run_checks(&alloc, &inst, &kinds, &guard, &mms)?;
    let checks_out = report
        .records
        .iter()
        .map(|record| {
            let (passed, witness, witness_text) = match &record.outcome {
                crate::fairness::CheckOutcome::Pass => (true, None, None),
                crate::fairness::CheckOutcome::Fail(w) => (
                    false,
                    Some(serde_json::to_value(w)?),
                    Some(w.describe(&inst)),
                ),
            };
            Ok(CheckOut {
                name: record.name.clone(),
                passed,
                witness,
                witness_text,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let all_pass = report.all_pass();
    let output = VerifyOutput {
        all_pass,
        checks: checks_out,
        skipped,
    };
    CommandResult::json(&output, if all_pass { 0 } else { 1 })
}

#[derive(Serialize)]
struct OracleOutput {
    objective: String,
    optimal: serde_json::Value,
    witness: WitnessAllocationOut,
}

#[derive(Serialize)]
struct WitnessAllocationOut {
    allocation: BTreeMap<String, Vec<String>>,
    unallocated: Vec<String>,
    usw: u64,
    utilities: BTreeMap<String, u64>,
}

pub fn cmd_oracle(instance: &Path, objective: &str) -> Result<CommandResult> {
    let inst = instance_from_json(&read_file(instance)?)?;
    let guard = enumeration_guard();
    let (optimal, witness) = match objective {
        "max-usw" => {
            let (value, alloc) = brute_force_max_usw(&inst, &guard)?;
            (serde_json::json!(value), alloc)
        }
        "mnw" => {
            let (value, alloc) = brute_force_mnw(&inst, &guard)?;
            (serde_json::to_value(&value)?, alloc)
        }
        "leximin" => {
            let (vector, alloc) = brute_force_leximin(&inst, &guard)?;
            (serde_json::json!(vector.entries()), alloc)
        }
        "lorenz" | "lorenz-augmented" => {
            let (vector, alloc) = brute_force_lorenz_augmented(&inst, &guard)?;
            (
                serde_json::json!({ "augmented_scaled": vector.scaled_entries() }),
                alloc,
            )
        }
        other => {
            return Err(Error::Precondition(format!(
                "unknown objective `{other}` (expected max-usw, mnw, leximin or lorenz)"
            )))
        }
    };
    let (allocation, unallocated, utilities) = allocation_to_maps(&witness, &inst)?;
    let output = OracleOutput {
        objective: objective.to_string(),
        optimal,
        witness: WitnessAllocationOut {
            allocation,
            unallocated,
            usw: usw(&witness, &inst)?,
            utilities,
        },
    };
    CommandResult::json(&output, 0)
}

/// Bench record without the wall-clock column, for byte-stable stdout.
#[derive(Serialize)]
struct BenchRecordOut {
    n: usize,
    m: usize,
    family: String,
    seed: u64,
    iterations: usize,
    oracle_calls: u64,
    graph_builds: usize,
    usw: u64,
}

impl From<&BenchRecord> for BenchRecordOut {
    fn from(r: &BenchRecord) -> Self {
        BenchRecordOut {
            n: r.n,
            m: r.m,
            family: r.family.clone(),
            seed: r.seed,
            iterations: r.iterations,
            oracle_calls: r.oracle_calls,
            graph_builds: r.graph_builds,
            usw: r.usw,
        }
    }
}

#[derive(Serialize)]
struct BenchOutput {
    config: BenchConfig,
    records: Vec<BenchRecordOut>,
    call_ratio_by_size: Vec<(String, f64)>,
}

/// Runs the benchmark. Stdout is deterministic for a fixed config; the
/// optional CSV file additionally carries wall-clock timings.
pub fn cmd_bench(config_path: Option<&Path>, csv_path: Option<&Path>) -> Result<CommandResult> {
    let config: BenchConfig = match config_path {
        Some(path) => serde_json::from_str(&read_file(path)?)?,
        None => BenchConfig::default(),
    };
    let report = run_bench(&config)?;
    if let Some(path) = csv_path {
        std::fs::write(path, records_to_csv(&report.records))?;
    }
    let output = BenchOutput {
        config,
        records: report.records.iter().map(BenchRecordOut::from).collect(),
        call_ratio_by_size: report.call_ratio_by_size,
    };
    CommandResult::json(&output, 0)
}

#[derive(Serialize)]
struct RpeOutput {
    agents: Vec<String>,
    envy_matrix: Vec<Vec<f64>>,
    mean_utility: Vec<f64>,
    proportionality_margin: Vec<f64>,
    samples: u64,
    seed: u64,
    /// Agents whose reported valuation failed the MRF check and was replaced
    /// by the zero valuation, per the mechanism's rule.
    zeroed_agents: Vec<String>,
}

pub fn cmd_rpe(instance: &Path, samples: u64, seed: u64) -> Result<CommandResult> {
    let mut inst = instance_from_json(&read_file(instance)?)?;
    let mode = gate_check_mode(inst.good_count());
    let mut zeroed_agents = Vec::new();
    for agent in inst.agents().collect::<Vec<Agent>>() {
        let report = check_mrf(inst.oracle(agent)?, inst.good_count(), mode)?;
        if !report.valid {
            zeroed_agents.push(inst.agent_name(agent).to_string());
            inst.replace_oracle(agent, ValuationOracle::zeroed(inst.good_count()))?;
        }
    }
    let report = rpe_simulate(&inst, samples, seed)?;
    let output = RpeOutput {
        agents: inst.agent_names().to_vec(),
        envy_matrix: report.envy_matrix,
        mean_utility: report.mean_utility,
        proportionality_margin: report.proportionality_margin,
        samples: report.samples,
        seed: report.seed,
        zeroed_agents,
    };
    CommandResult::json(&output, 0)
}

#[derive(Serialize)]
struct OracleCheckOut {
    valid: bool,
    checks_performed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    violation: Option<String>,
}

#[derive(Serialize)]
struct CheckOracleOutput {
    agents: BTreeMap<String, OracleCheckOut>,
    all_valid: bool,
    mode: String,
}

pub fn cmd_check_oracle(
    instance: &Path,
    mode: &str,
    trials: u64,
    seed: u64,
) -> Result<CommandResult> {
    let inst = instance_from_json(&read_file(instance)?)?;
    let check_mode = match mode {
        "auto" => gate_check_mode(inst.good_count()),
        "exhaustive" => MrfCheckMode::Exhaustive,
        "sampled" => MrfCheckMode::Sampled { trials, seed },
        other => {
            return Err(Error::Precondition(format!(
                "unknown mode `{other}` (expected auto, exhaustive or sampled)"
            )))
        }
    };
    let mut agents = BTreeMap::new();
    let mut all_valid = true;
    for agent in inst.agents() {
        let report = check_mrf(inst.oracle(agent)?, inst.good_count(), check_mode)?;
        all_valid &= report.valid;
        agents.insert(
            inst.agent_name(agent).to_string(),
            OracleCheckOut {
                valid: report.valid,
                checks_performed: report.checks_performed,
                violation: report.first_violation.map(|v| v.to_string()),
            },
        );
    }
    let output = CheckOracleOutput {
        agents,
        all_valid,
        mode: match check_mode {
            MrfCheckMode::Exhaustive => "exhaustive".to_string(),
            MrfCheckMode::Sampled { trials, seed } => format!("sampled(trials={trials}, seed={seed})"),
        },
    };
    CommandResult::json(&output, if all_valid { 0 } else { 1 })
}

/// Exit code for an error that escaped a command: 3 for the oracle gate,
/// 2 for anything else (bad input, guard, IO).
pub fn error_exit_code(err: &Error) -> i32 {
    match err {
        Error::OracleInvalid { .. } => 3,
        _ => 2,
    }
}
