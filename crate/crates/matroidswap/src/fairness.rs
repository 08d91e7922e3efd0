//! Verifiers for the fairness and efficiency properties a prioritized Lorenz
//! dominating allocation satisfies: EF1, EFX, half maximin share, maximum
//! utilitarian and Nash welfare, leximin optimality, and Lorenz dominance
//! itself. Every failed check carries a re-checkable certificate.
//!
//! All comparisons are exact integer or denominator-cleared rational
//! arithmetic; binary valuations make epsilons unnecessary. Agent 0's pile is
//! never party to an envy comparison.

use serde::Serialize;

use crate::allocation::{nsw, sorted_utility_vector, usw, Allocation};
use crate::enumeration::{
    brute_force_leximin, brute_force_lorenz_augmented, brute_force_max_usw, brute_force_mnw,
    for_each_clean_allocation, EnumerationGuard,
};
use crate::error::{Error, Result};
use crate::goods::{Agent, Good, GoodSet};
use crate::instance::Instance;
use crate::order::{lorenz_dominates_or_equal, NswValue};

/// Certificate carried by a failed check. Indices are 1-based agent and
/// 0-based good indices; [`Witness::describe`] renders them with names.
#[derive(Clone, Debug, Serialize)]
pub enum Witness {
    NotClean {
        agent: usize,
        bundle_size: usize,
        value: u64,
    },
    /// Envy that survives the relevant good-dropping rule. For EF1 the
    /// `dropped` field holds the best possible drop (which still leaves
    /// envy); for EFX it holds a single drop that already leaves envy.
    Envy {
        envious: usize,
        envied: usize,
        own_value: u64,
        envied_value: u64,
        dropped: Option<usize>,
        value_after_drop: Option<u64>,
    },
    MmsShortfall {
        agent: usize,
        mms: u64,
        value: u64,
        c_num: u64,
        c_den: u64,
    },
    NotMaxUsw {
        achieved: u64,
        optimal: u64,
    },
    NotMnw {
        achieved: NswValue,
        optimal: NswValue,
    },
    NotLeximin {
        achieved: Vec<u64>,
        optimal: Vec<u64>,
    },
    /// A sorted vector (scaled when augmented) that the allocation fails to
    /// Lorenz-dominate-or-equal.
    NotLorenzDominating {
        achieved: Vec<u64>,
        counterexample: Vec<u64>,
        augmented: bool,
    },
}

impl Witness {
    pub fn describe(&self, inst: &Instance) -> String {
        let agent_name = |idx: usize| inst.agent_name(Agent(idx)).to_string();
        match self {
            Witness::NotClean { agent, bundle_size, value } => format!(
                "{} holds {} goods but values them at {}",
                agent_name(*agent),
                bundle_size,
                value
            ),
            Witness::Envy {
                envious,
                envied,
                own_value,
                envied_value,
                dropped,
                value_after_drop,
            } => {
                let drop_note = match (dropped, value_after_drop) {
                    (Some(g), Some(v)) => format!(
                        "; dropping {} still leaves value {}",
                        inst.good_name(Good(*g)),
                        v
                    ),
                    _ => String::new(),
                };
                format!(
                    "{} values own bundle at {} but {}'s at {}{}",
                    agent_name(*envious),
                    own_value,
                    agent_name(*envied),
                    envied_value,
                    drop_note
                )
            }
            Witness::MmsShortfall { agent, mms, value, c_num, c_den } => format!(
                "{} gets {} < {}/{} of its maximin share {}",
                agent_name(*agent),
                value,
                c_num,
                c_den,
                mms
            ),
            Witness::NotMaxUsw { achieved, optimal } => {
                format!("USW {achieved} below optimum {optimal}")
            }
            Witness::NotMnw { achieved, optimal } => {
                format!("NSW {achieved} below optimum {optimal}")
            }
            Witness::NotLeximin { achieved, optimal } => {
                format!("sorted utilities {achieved:?} are leximin-worse than {optimal:?}")
            }
            Witness::NotLorenzDominating { achieved, counterexample, augmented } => format!(
                "{}sorted vector {achieved:?} does not dominate {counterexample:?}",
                if *augmented { "augmented " } else { "" }
            ),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub enum CheckOutcome {
    Pass,
    Fail(Witness),
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, CheckOutcome::Pass)
    }
}

/// True iff every agent's bundle value equals its size.
pub fn check_clean(alloc: &Allocation, inst: &Instance) -> Result<CheckOutcome> {
    for agent in inst.agents() {
        let bundle = alloc.bundle(agent);
        let value = inst.oracle(agent)?.value(bundle)?;
        if value != bundle.len() as u64 {
            return Ok(CheckOutcome::Fail(Witness::NotClean {
                agent: agent.0,
                bundle_size: bundle.len(),
                value,
            }));
        }
    }
    Ok(CheckOutcome::Pass)
}

/// Envy-free up to one good: any envy must vanish after dropping *some* good
/// from the envied bundle.
pub fn check_ef1(alloc: &Allocation, inst: &Instance) -> Result<CheckOutcome> {
    envy_check(alloc, inst, EnvyRule::SomeDrop)
}

/// Envy-free up to any good: any envy must vanish after dropping *every*
/// single good from the envied bundle. Strictly stronger than EF1.
pub fn check_efx(alloc: &Allocation, inst: &Instance) -> Result<CheckOutcome> {
    envy_check(alloc, inst, EnvyRule::EveryDrop)
}

enum EnvyRule {
    SomeDrop,
    EveryDrop,
}

fn envy_check(alloc: &Allocation, inst: &Instance, rule: EnvyRule) -> Result<CheckOutcome> {
    for i in inst.agents() {
        let oracle = inst.oracle(i)?;
        let own_value = oracle.value(alloc.bundle(i))?;
        for j in inst.agents() {
            if i == j {
                continue;
            }
            let envied_bundle = alloc.bundle(j);
            let envied_value = oracle.value(envied_bundle)?;
            if own_value >= envied_value {
                continue;
            }
            match rule {
                EnvyRule::SomeDrop => {
                    // Find the drop that helps the most; if even that leaves
                    // envy, EF1 fails.
                    let mut best: Option<(Good, u64)> = None;
                    for g in envied_bundle.iter() {
                        let after = oracle.value(&envied_bundle.without(g))?;
                        if best.map_or(true, |(_, b)| after < b) {
                            best = Some((g, after));
                        }
                        if own_value >= after {
                            break;
                        }
                    }
                    match best {
                        Some((_, after)) if own_value >= after => {}
                        Some((g, after)) => {
                            return Ok(CheckOutcome::Fail(Witness::Envy {
                                envious: i.0,
                                envied: j.0,
                                own_value,
                                envied_value,
                                dropped: Some(g.0),
                                value_after_drop: Some(after),
                            }))
                        }
                        None => {
                            // Envy towards an empty bundle is impossible
                            // (v_i(∅) = 0 <= own value), so this is
                            // unreachable for well-formed oracles.
                            return Ok(CheckOutcome::Fail(Witness::Envy {
                                envious: i.0,
                                envied: j.0,
                                own_value,
                                envied_value,
                                dropped: None,
                                value_after_drop: None,
                            }));
                        }
                    }
                }
                EnvyRule::EveryDrop => {
                    for g in envied_bundle.iter() {
                        let after = oracle.value(&envied_bundle.without(g))?;
                        if own_value < after {
                            return Ok(CheckOutcome::Fail(Witness::Envy {
                                envious: i.0,
                                envied: j.0,
                                own_value,
                                envied_value,
                                dropped: Some(g.0),
                                value_after_drop: Some(after),
                            }));
                        }
                    }
                }
            }
        }
    }
    Ok(CheckOutcome::Pass)
}

/// Exact maximin share of one agent: the best over all ways to split the
/// goods into `n` labeled bundles of the worst bundle's value. Enumerates
/// `n^m` assignments, so it is guarded.
pub fn mms_value(inst: &Instance, agent: Agent, guard: &EnumerationGuard) -> Result<u64> {
    guard.admit(inst)?;
    let oracle = inst.oracle(agent)?;
    let n = inst.agent_count();
    let m = inst.good_count();
    let mut bundles = vec![GoodSet::empty(m); n];
    let mut values = vec![0u64; n];
    let mut best = 0u64;
    fn assign(
        oracle: &crate::valuation::ValuationOracle,
        bundles: &mut [GoodSet],
        values: &mut [u64],
        g: usize,
        m: usize,
        best: &mut u64,
    ) -> Result<()> {
        if g == m {
            let worst = values.iter().copied().min().unwrap_or(0);
            *best = (*best).max(worst);
            return Ok(());
        }
        for b in 0..bundles.len() {
            let before = values[b];
            bundles[b].insert(Good(g));
            values[b] = oracle.value(&bundles[b])?;
            assign(oracle, bundles, values, g + 1, m, best)?;
            bundles[b].remove(Good(g));
            values[b] = before;
        }
        Ok(())
    }
    assign(oracle, &mut bundles, &mut values, 0, m, &mut best)?;
    Ok(best)
}

/// `c`-maximin-share check with `c = c_num / c_den`: every agent must get
/// at least a `c` fraction of its maximin share, compared exactly as
/// `c_den · v_i(X_i) >= c_num · MMS_i`.
pub fn check_cmms(
    alloc: &Allocation,
    inst: &Instance,
    c_num: u64,
    c_den: u64,
    guard: &EnumerationGuard,
) -> Result<CheckOutcome> {
    if c_den == 0 {
        return Err(Error::Precondition("c-MMS denominator must be non-zero".into()));
    }
    for agent in inst.agents() {
        let mms = mms_value(inst, agent, guard)?;
        let value = inst.oracle(agent)?.value(alloc.bundle(agent))?;
        if c_den.saturating_mul(value) < c_num.saturating_mul(mms) {
            return Ok(CheckOutcome::Fail(Witness::MmsShortfall {
                agent: agent.0,
                mms,
                value,
                c_num,
                c_den,
            }));
        }
    }
    Ok(CheckOutcome::Pass)
}

/// Compares the allocation's USW against the exhaustive optimum.
pub fn check_max_usw(alloc: &Allocation, inst: &Instance, guard: &EnumerationGuard) -> Result<CheckOutcome> {
    let achieved = usw(alloc, inst)?;
    let (optimal, _) = brute_force_max_usw(inst, guard)?;
    Ok(if achieved == optimal {
        CheckOutcome::Pass
    } else {
        CheckOutcome::Fail(Witness::NotMaxUsw { achieved, optimal })
    })
}

/// Compares the allocation's NSW (zeros first, then product) against the
/// exhaustive optimum.
pub fn check_mnw(alloc: &Allocation, inst: &Instance, guard: &EnumerationGuard) -> Result<CheckOutcome> {
    let achieved = nsw(alloc, inst)?;
    let (optimal, _) = brute_force_mnw(inst, guard)?;
    Ok(if achieved == optimal {
        CheckOutcome::Pass
    } else {
        CheckOutcome::Fail(Witness::NotMnw { achieved, optimal })
    })
}

/// Compares the allocation's sorted utility vector against the exhaustive
/// leximin optimum.
pub fn check_leximin(alloc: &Allocation, inst: &Instance, guard: &EnumerationGuard) -> Result<CheckOutcome> {
    let achieved = sorted_utility_vector(alloc, inst)?;
    let (optimal, _) = brute_force_leximin(inst, guard)?;
    Ok(if achieved.entries() == optimal.entries() {
        CheckOutcome::Pass
    } else {
        CheckOutcome::Fail(Witness::NotLeximin {
            achieved: achieved.entries().to_vec(),
            optimal: optimal.entries().to_vec(),
        })
    })
}

/// Checks that the allocation's sorted vector Lorenz-dominates-or-equals
/// every clean allocation's vector. With `augmented` set, the comparison
/// runs on the priority-augmented utilities (where the dominator is unique);
/// otherwise on plain utilities.
pub fn check_lorenz_dominating(
    alloc: &Allocation,
    inst: &Instance,
    augmented: bool,
    guard: &EnumerationGuard,
) -> Result<CheckOutcome> {
    if augmented {
        let achieved = crate::allocation::sorted_augmented_vector(alloc, inst)?.scaled_entries();
        let (best, _) = brute_force_lorenz_augmented(inst, guard)?;
        let best = best.scaled_entries();
        return Ok(if achieved == best {
            CheckOutcome::Pass
        } else {
            // The brute-force vector dominates-or-equals every clean vector,
            // so an allocation differing from it cannot dominate it back.
            CheckOutcome::Fail(Witness::NotLorenzDominating {
                achieved,
                counterexample: best,
                augmented: true,
            })
        });
    }
    let achieved = sorted_utility_vector(alloc, inst)?;
    let mut counterexample: Option<Vec<u64>> = None;
    for_each_clean_allocation(inst, guard, |candidate| {
        if counterexample.is_some() {
            return Ok(());
        }
        let other = sorted_utility_vector(candidate, inst)?;
        if !lorenz_dominates_or_equal(&achieved, &other)? {
            counterexample = Some(other.entries().to_vec());
        }
        Ok(())
    })?;
    Ok(match counterexample {
        None => CheckOutcome::Pass,
        Some(counterexample) => CheckOutcome::Fail(Witness::NotLorenzDominating {
            achieved: achieved.entries().to_vec(),
            counterexample,
            augmented: false,
        }),
    })
}

/// Which checks to run and with what parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CheckKind {
    Clean,
    Ef1,
    Efx,
    Cmms { c_num: u64, c_den: u64 },
    MaxUsw,
    Mnw,
    Leximin,
    LorenzPlain,
    LorenzAugmented,
}

impl CheckKind {
    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::Clean => "clean",
            CheckKind::Ef1 => "ef1",
            CheckKind::Efx => "efx",
            CheckKind::Cmms { .. } => "cmms",
            CheckKind::MaxUsw => "max-usw",
            CheckKind::Mnw => "mnw",
            CheckKind::Leximin => "leximin",
            CheckKind::LorenzPlain => "lorenz-plain",
            CheckKind::LorenzAugmented => "lorenz",
        }
    }

    /// True when the check needs exhaustive enumeration (and therefore a
    /// guard-sized instance).
    pub fn needs_enumeration(&self) -> bool {
        matches!(
            self,
            CheckKind::Cmms { .. }
                | CheckKind::MaxUsw
                | CheckKind::Mnw
                | CheckKind::Leximin
                | CheckKind::LorenzPlain
                | CheckKind::LorenzAugmented
        )
    }
}

#[derive(Debug, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub outcome: CheckOutcome,
}

/// Results of a batch of checks, in the order they ran.
#[derive(Debug, Serialize)]
pub struct FairnessReport {
    pub checks_run: Vec<String>,
    pub records: Vec<CheckRecord>,
}

impl FairnessReport {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.outcome.passed())
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.records.iter().filter(|r| !r.outcome.passed())
    }
}

/// Runs the requested checks. `guard` bounds the clean-allocation
/// enumerations; the maximin-share enumeration uses its own guard.
pub fn run_checks(
    alloc: &Allocation,
    inst: &Instance,
    kinds: &[CheckKind],
    guard: &EnumerationGuard,
    mms_guard: &EnumerationGuard,
) -> Result<FairnessReport> {
    if kinds.is_empty() {
        return Err(Error::Precondition("no checks requested".into()));
    }
    let mut report = FairnessReport {
        checks_run: Vec::new(),
        records: Vec::new(),
    };
    for kind in kinds {
        let outcome = match kind {
            CheckKind::Clean => check_clean(alloc, inst)?,
            CheckKind::Ef1 => check_ef1(alloc, inst)?,
            CheckKind::Efx => check_efx(alloc, inst)?,
            CheckKind::Cmms { c_num, c_den } => check_cmms(alloc, inst, *c_num, *c_den, mms_guard)?,
            CheckKind::MaxUsw => check_max_usw(alloc, inst, guard)?,
            CheckKind::Mnw => check_mnw(alloc, inst, guard)?,
            CheckKind::Leximin => check_leximin(alloc, inst, guard)?,
            CheckKind::LorenzPlain => check_lorenz_dominating(alloc, inst, false, guard)?,
            CheckKind::LorenzAugmented => check_lorenz_dominating(alloc, inst, true, guard)?,
        };
        report.checks_run.push(kind.name().to_string());
        report.records.push(CheckRecord {
            name: kind.name().to_string(),
            outcome,
        });
    }
    Ok(report)
}
