//! On-disk JSON formats: instance files, allocation files and priority
//! lists. Instance files reject unknown fields; allocation files are
//! permissive so a `solve` output can be fed straight back into `verify`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};

use crate::allocation::Allocation;
use crate::error::{Error, Result};
use crate::goods::{Agent, Good, GoodSet};
use crate::instance::Instance;
use crate::valuation::{OracleKind, ValuationOracle};

/// Instance file: a list of goods, one valuation per agent, and an optional
/// priority order (first listed agent has rank 1, i.e. the highest
/// priority).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub goods: Vec<String>,
    pub agents: Vec<AgentEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priority: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentEntry {
    pub id: String,
    pub valuation: ValuationSpec,
}

/// Wire form of one valuation: `{"type": "<family>", ...family fields}`.
#[derive(Clone, Debug)]
pub enum ValuationSpec {
    BinaryAdditive { desired: Vec<String> },
    Uniform { cap: u64 },
    Partition { parts: Vec<PartSpec>, global_cap: Option<u64> },
    Transversal { slots: BTreeMap<String, Vec<String>> },
    Graphic { edges: BTreeMap<String, (String, String)> },
    Explicit { values: BTreeMap<String, u64> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartSpec {
    pub goods: Vec<String>,
    pub cap: u64,
}

// Per-family payloads, kept separate so unknown fields are rejected even
// though the tag is internal.
#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct BinaryAdditivePayload {
    desired: Vec<String>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct UniformPayload {
    cap: u64,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct PartitionPayload {
    parts: Vec<PartSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    global_cap: Option<u64>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct TransversalPayload {
    slots: BTreeMap<String, Vec<String>>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct GraphicPayload {
    edges: BTreeMap<String, (String, String)>,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct ExplicitPayload {
    values: BTreeMap<String, u64>,
}

impl<'de> Deserialize<'de> for ValuationSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let mut map = serde_json::Map::deserialize(deserializer)?;
        let tag = map
            .remove("type")
            .ok_or_else(|| D::Error::custom("valuation is missing `type`"))?;
        let tag = tag
            .as_str()
            .ok_or_else(|| D::Error::custom("valuation `type` must be a string"))?
            .to_string();
        let rest = serde_json::Value::Object(map);
        let spec = match tag.as_str() {
            "binary_additive" => {
                let p: BinaryAdditivePayload =
                    serde_json::from_value(rest).map_err(D::Error::custom)?;
                ValuationSpec::BinaryAdditive { desired: p.desired }
            }
            "uniform" => {
                let p: UniformPayload = serde_json::from_value(rest).map_err(D::Error::custom)?;
                ValuationSpec::Uniform { cap: p.cap }
            }
            "partition" => {
                let p: PartitionPayload = serde_json::from_value(rest).map_err(D::Error::custom)?;
                ValuationSpec::Partition {
                    parts: p.parts,
                    global_cap: p.global_cap,
                }
            }
            "transversal" => {
                let p: TransversalPayload = serde_json::from_value(rest).map_err(D::Error::custom)?;
                ValuationSpec::Transversal { slots: p.slots }
            }
            "graphic" => {
                let p: GraphicPayload = serde_json::from_value(rest).map_err(D::Error::custom)?;
                ValuationSpec::Graphic { edges: p.edges }
            }
            "explicit" => {
                let p: ExplicitPayload = serde_json::from_value(rest).map_err(D::Error::custom)?;
                ValuationSpec::Explicit { values: p.values }
            }
            other => {
                return Err(D::Error::custom(format!("unknown valuation type `{other}`")))
            }
        };
        Ok(spec)
    }
}

impl Serialize for ValuationSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::Error as _;
        let (tag, value) = match self {
            ValuationSpec::BinaryAdditive { desired } => (
                "binary_additive",
                serde_json::to_value(BinaryAdditivePayload { desired: desired.clone() }),
            ),
            ValuationSpec::Uniform { cap } => {
                ("uniform", serde_json::to_value(UniformPayload { cap: *cap }))
            }
            ValuationSpec::Partition { parts, global_cap } => (
                "partition",
                serde_json::to_value(PartitionPayload {
                    parts: parts.clone(),
                    global_cap: *global_cap,
                }),
            ),
            ValuationSpec::Transversal { slots } => (
                "transversal",
                serde_json::to_value(TransversalPayload { slots: slots.clone() }),
            ),
            ValuationSpec::Graphic { edges } => (
                "graphic",
                serde_json::to_value(GraphicPayload { edges: edges.clone() }),
            ),
            ValuationSpec::Explicit { values } => (
                "explicit",
                serde_json::to_value(ExplicitPayload { values: values.clone() }),
            ),
        };
        let mut value = value.map_err(S::Error::custom)?;
        let obj = value.as_object_mut().expect("payloads serialize to objects");
        obj.insert("type".into(), serde_json::Value::String(tag.into()));
        // Re-emit with the tag first for readability; key order inside JSON
        // objects is otherwise preserved from the payload struct.
        let mut ordered = serde_json::Map::new();
        ordered.insert("type".into(), obj.remove("type").unwrap());
        for (k, v) in std::mem::take(obj) {
            ordered.insert(k, v);
        }
        serde_json::Value::Object(ordered).serialize(serializer)
    }
}

/// Parses JSON text into an [`InstanceFile`].
pub fn parse_instance_file(text: &str) -> Result<InstanceFile> {
    Ok(serde_json::from_str(text)?)
}

/// Turns the wire form into a validated [`Instance`].
pub fn build_instance(file: &InstanceFile) -> Result<Instance> {
    let m = file.goods.len();
    let mut good_index: HashMap<&str, Good> = HashMap::new();
    for (i, name) in file.goods.iter().enumerate() {
        if good_index.insert(name, Good(i)).is_some() {
            return Err(Error::DuplicateGood(name.clone()));
        }
    }
    let lookup = |name: &str| -> Result<Good> {
        good_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownGood(name.to_string()))
    };

    let mut oracles = Vec::with_capacity(file.agents.len());
    for agent in &file.agents {
        let oracle = match &agent.valuation {
            ValuationSpec::BinaryAdditive { desired } => {
                let mut set = GoodSet::empty(m);
                for name in desired {
                    set.insert(lookup(name)?);
                }
                ValuationOracle::binary_additive(set)
            }
            ValuationSpec::Uniform { cap } => ValuationOracle::uniform(*cap),
            ValuationSpec::Partition { parts, global_cap } => {
                let parts = parts
                    .iter()
                    .map(|p| {
                        let mut set = GoodSet::empty(m);
                        for name in &p.goods {
                            set.insert(lookup(name)?);
                        }
                        Ok((set, p.cap))
                    })
                    .collect::<Result<Vec<_>>>()?;
                ValuationOracle::partition(parts, *global_cap)?
            }
            ValuationSpec::Transversal { slots } => {
                let slot_ids: BTreeSet<&str> =
                    slots.values().flatten().map(String::as_str).collect();
                let slot_index: HashMap<&str, u32> = slot_ids
                    .iter()
                    .enumerate()
                    .map(|(i, &s)| (s, i as u32))
                    .collect();
                let mut adjacency = vec![Vec::new(); m];
                for (good, good_slots) in slots {
                    let g = lookup(good)?;
                    adjacency[g.0] = good_slots.iter().map(|s| slot_index[s.as_str()]).collect();
                }
                ValuationOracle::transversal(adjacency)
            }
            ValuationSpec::Graphic { edges } => {
                let vertex_ids: BTreeSet<&str> = edges
                    .values()
                    .flat_map(|(u, v)| [u.as_str(), v.as_str()])
                    .collect();
                let vertex_index: HashMap<&str, u32> = vertex_ids
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| (v, i as u32))
                    .collect();
                let mut endpoints = vec![None; m];
                for (good, (u, v)) in edges {
                    let g = lookup(good)?;
                    endpoints[g.0] = Some((vertex_index[u.as_str()], vertex_index[v.as_str()]));
                }
                let endpoints = endpoints
                    .into_iter()
                    .enumerate()
                    .map(|(g, e)| {
                        e.ok_or_else(|| {
                            Error::Format(format!(
                                "graphic valuation for `{}` is missing an edge for good `{}`",
                                agent.id, file.goods[g]
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                ValuationOracle::graphic(endpoints)
            }
            ValuationSpec::Explicit { values } => {
                let entries = values
                    .iter()
                    .map(|(key, &value)| {
                        let mut mask = 0u64;
                        if !key.is_empty() {
                            for name in key.split(',') {
                                let g = lookup(name)?;
                                let bit = 1u64 << g.0;
                                if mask & bit != 0 {
                                    return Err(Error::Format(format!(
                                        "subset key `{key}` repeats good `{name}`"
                                    )));
                                }
                                mask |= bit;
                            }
                        }
                        Ok((mask, value))
                    })
                    .collect::<Result<Vec<_>>>()?;
                ValuationOracle::explicit(m, entries)?
            }
        };
        oracles.push(oracle);
    }

    let agent_names: Vec<String> = file.agents.iter().map(|a| a.id.clone()).collect();
    let priority = match &file.priority {
        None => None,
        Some(order) => Some(priority_ranks(order, &agent_names)?),
    };
    Instance::new(file.goods.clone(), agent_names, oracles, priority)
}

/// Converts a priority list (agent ids, highest priority first) into ranks
/// indexed by agent position.
pub fn priority_ranks(order: &[String], agent_names: &[String]) -> Result<Vec<usize>> {
    let n = agent_names.len();
    if order.len() != n {
        return Err(Error::InvalidPriority(n));
    }
    let mut ranks = vec![0usize; n];
    let mut seen = HashSet::new();
    for (rank0, id) in order.iter().enumerate() {
        let pos = agent_names
            .iter()
            .position(|a| a == id)
            .ok_or_else(|| Error::UnknownAgent(id.clone()))?;
        if !seen.insert(pos) {
            return Err(Error::InvalidPriority(n));
        }
        ranks[pos] = rank0 + 1;
    }
    Ok(ranks)
}

/// Loads and validates an instance from JSON text in one step.
pub fn instance_from_json(text: &str) -> Result<Instance> {
    build_instance(&parse_instance_file(text)?)
}

/// Renders an in-memory instance back to the wire form (slot and vertex ids
/// become `s0, s1, …` / `v0, v1, …`).
pub fn instance_to_file(inst: &Instance) -> Result<InstanceFile> {
    let good_name = |g: Good| inst.good_name(g).to_string();
    let agents = inst
        .agents()
        .map(|agent| {
            let oracle = inst.oracle(agent)?;
            let valuation = match oracle.kind() {
                OracleKind::BinaryAdditive { desired } => ValuationSpec::BinaryAdditive {
                    desired: desired.iter().map(good_name).collect(),
                },
                OracleKind::Uniform { cap } => ValuationSpec::Uniform { cap: *cap },
                OracleKind::Partition { parts, global_cap } => ValuationSpec::Partition {
                    parts: parts
                        .iter()
                        .map(|(goods, cap)| PartSpec {
                            goods: goods.iter().map(good_name).collect(),
                            cap: *cap,
                        })
                        .collect(),
                    global_cap: *global_cap,
                },
                OracleKind::Transversal { adjacency, .. } => ValuationSpec::Transversal {
                    slots: adjacency
                        .iter()
                        .enumerate()
                        .filter(|(_, slots)| !slots.is_empty())
                        .map(|(g, slots)| {
                            (
                                good_name(Good(g)),
                                slots.iter().map(|s| format!("s{s}")).collect(),
                            )
                        })
                        .collect(),
                },
                OracleKind::Graphic { endpoints, .. } => ValuationSpec::Graphic {
                    edges: endpoints
                        .iter()
                        .enumerate()
                        .map(|(g, (u, v))| (good_name(Good(g)), (format!("v{u}"), format!("v{v}"))))
                        .collect(),
                },
                OracleKind::Explicit { good_count, table } => ValuationSpec::Explicit {
                    values: table
                        .iter()
                        .enumerate()
                        .filter_map(|(mask, value)| value.map(|v| (mask, v)))
                        .map(|(mask, v)| {
                            let key = (0..*good_count)
                                .filter(|g| mask & (1 << g) != 0)
                                .map(|g| inst.good_name(Good(g)))
                                .collect::<Vec<_>>()
                                .join(",");
                            (key, v)
                        })
                        .collect(),
                },
            };
            Ok(AgentEntry {
                id: inst.agent_name(agent).to_string(),
                valuation,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let priority = inst
        .agents_by_rank()
        .iter()
        .map(|&a| inst.agent_name(a).to_string())
        .collect();
    Ok(InstanceFile {
        goods: inst.good_names().to_vec(),
        agents,
        priority: Some(priority),
    })
}

/// Allocation file: bundles by agent id. Extra top-level fields (utilities,
/// trace, …) are ignored so `solve` output round-trips into `verify`.
#[derive(Debug, Deserialize)]
pub struct AllocationFile {
    pub allocation: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub unallocated: Option<Vec<String>>,
}

pub fn parse_allocation_file(text: &str) -> Result<AllocationFile> {
    Ok(serde_json::from_str(text)?)
}

/// Resolves an allocation file against an instance, checking the partition
/// invariant. Goods not mentioned anywhere are unallocated; an explicit
/// `unallocated` list must match exactly.
pub fn build_allocation(file: &AllocationFile, inst: &Instance) -> Result<Allocation> {
    let mut bundles = vec![GoodSet::empty(inst.good_count()); inst.agent_count()];
    let mut owner: Vec<Option<Agent>> = vec![None; inst.good_count()];
    for (agent_id, goods) in &file.allocation {
        let agent = inst.agent_index(agent_id)?;
        for name in goods {
            let g = inst.good_index(name)?;
            if owner[g.0].replace(agent).is_some() {
                return Err(Error::NotAPartition(format!("good `{name}` assigned twice")));
            }
            bundles[agent.0 - 1].insert(g);
        }
    }
    if let Some(unallocated) = &file.unallocated {
        let mut expected: Vec<Good> = owner
            .iter()
            .enumerate()
            .filter(|(_, o)| o.is_none())
            .map(|(g, _)| Good(g))
            .collect();
        let mut listed = unallocated
            .iter()
            .map(|name| inst.good_index(name))
            .collect::<Result<Vec<_>>>()?;
        listed.sort();
        listed.dedup();
        expected.sort();
        if listed != expected {
            return Err(Error::NotAPartition(
                "`unallocated` does not match the goods missing from bundles".into(),
            ));
        }
    }
    Allocation::from_agent_bundles(inst, &bundles)
}
