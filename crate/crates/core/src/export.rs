//! JSON and CSV forms of solver output. Nodes are written by label;
//! infinite values and ranks are written as the string `"inf"`.
//!
//! Every float goes through its shortest round-trip representation, so
//! reading back an export reproduces the table bit for bit.

use serde::{Deserialize, Serialize};

use crate::concurrent::{default_ceiling, Distribution, MixedStrategyTable, ValueTable};
use crate::error::GameError;
use crate::graph::{Graph, Node};
use crate::position::{Placement, PositionSpace};
use crate::turn_based::{CopwinTable, Side};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
enum Inf {
    #[serde(rename = "inf")]
    Inf,
}

/// A float that may be `+∞`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "ExtRepr", into = "ExtRepr")]
pub struct Extended(pub f64);

#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
enum ExtRepr {
    Finite(f64),
    Infinite(Inf),
}

impl From<ExtRepr> for Extended {
    fn from(r: ExtRepr) -> Self {
        match r {
            ExtRepr::Finite(v) => Extended(v),
            ExtRepr::Infinite(_) => Extended(f64::INFINITY),
        }
    }
}

impl From<Extended> for ExtRepr {
    fn from(e: Extended) -> Self {
        if e.0.is_finite() {
            ExtRepr::Finite(e.0)
        } else {
            ExtRepr::Infinite(Inf::Inf)
        }
    }
}

/// A rank that may be infinite (robber escapes).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RankField {
    Finite(u32),
    Infinite(#[serde(with = "inf_tag")] ()),
}

mod inf_tag {
    use super::Inf;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(_: &(), s: S) -> Result<S::Ok, S::Error> {
        Inf::Inf.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        Inf::deserialize(d).map(|_| ())
    }
}

impl From<Option<u32>> for RankField {
    fn from(r: Option<u32>) -> Self {
        r.map_or(RankField::Infinite(()), RankField::Finite)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CopwinRecord {
    pub cops: Vec<String>,
    pub robber: String,
    pub turn: Side,
    pub rank: RankField,
}

pub fn copwin_records(table: &CopwinTable) -> Vec<CopwinRecord> {
    let g = table.graph();
    table
        .entries()
        .map(|(tp, rank)| CopwinRecord {
            cops: tp.placement.cop_labels(g),
            robber: g.label(tp.placement.robber).to_string(),
            turn: tp.turn,
            rank: rank.into(),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueRecord {
    pub cops: Vec<String>,
    pub robber: String,
    pub value: Extended,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueTableDoc {
    /// Hash of the arena the table was solved on.
    pub fingerprint: String,
    pub nodes: Vec<String>,
    pub cops: usize,
    pub iterations: usize,
    pub converged: bool,
    pub ceiling: f64,
    pub capture_time: Extended,
    pub values: Vec<ValueRecord>,
}

pub fn value_table_doc(table: &ValueTable) -> ValueTableDoc {
    let g = table.graph();
    ValueTableDoc {
        fingerprint: g.fingerprint(),
        nodes: g.labels().to_vec(),
        cops: table.cops(),
        iterations: table.iterations_used,
        converged: table.converged,
        ceiling: table.ceiling(),
        capture_time: Extended(table.capture_time()),
        values: table
            .entries()
            .map(|(p, v)| ValueRecord {
                cops: p.cop_labels(g),
                robber: g.label(p.robber).to_string(),
                value: Extended(v),
            })
            .collect(),
    }
}

fn placement(g: &Graph, cops: &[String], robber: &str) -> Result<Placement, GameError> {
    Placement::from_labels(g, cops, robber)
}

/// Rebuilds a value table on `g` from its document. Every position must
/// appear exactly once.
pub fn value_table_from_doc(g: &Graph, doc: &ValueTableDoc) -> Result<ValueTable, GameError> {
    if doc.fingerprint != g.fingerprint() || doc.nodes != g.labels() {
        return Err(GameError::InvalidParameter("document was written for a different graph".into()));
    }
    let space = PositionSpace::new(g.node_count(), doc.cops)?;
    let mut values = vec![None; space.len()];
    for r in &doc.values {
        let p = placement(g, &r.cops, &r.robber)?;
        if p.cops.len() != doc.cops {
            return Err(GameError::CopArity {
                expected: doc.cops,
                got: p.cops.len(),
            });
        }
        if values[space.encode(&p)].replace(r.value.0).is_some() {
            return Err(GameError::InvalidParameter(format!("duplicate record for {p:?}")));
        }
    }
    let values = values
        .into_iter()
        .collect::<Option<Vec<f64>>>()
        .ok_or_else(|| GameError::InvalidParameter("value table is missing positions".into()))?;
    ValueTable::from_values(g, doc.cops, values, doc.ceiling, doc.iterations, doc.converged)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoveProb {
    #[serde(rename = "move")]
    pub mv: Vec<String>,
    pub prob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyRecord {
    pub cops: Vec<String>,
    pub robber: String,
    pub side: Side,
    pub support: Vec<MoveProb>,
}

fn labels(g: &Graph, nodes: &[Node]) -> Vec<String> {
    nodes.iter().map(|&u| g.label(u).to_string()).collect()
}

/// One record per defined (position, side). Moves with zero probability
/// are kept so the table reads back unchanged.
pub fn strategy_records(g: &Graph, table: &MixedStrategyTable) -> Vec<StrategyRecord> {
    table
        .entries()
        .map(|(p, side, d)| StrategyRecord {
            cops: p.cop_labels(g),
            robber: g.label(p.robber).to_string(),
            side,
            support: d
                .entries
                .iter()
                .map(|(mv, prob)| MoveProb {
                    mv: labels(g, mv),
                    prob: *prob,
                })
                .collect(),
        })
        .collect()
}

pub fn strategies_from_records(
    g: &Graph,
    k: usize,
    records: &[StrategyRecord],
) -> Result<MixedStrategyTable, GameError> {
    let space = PositionSpace::new(g.node_count(), k)?;
    let mut cop = vec![None; space.len()];
    let mut robber = vec![None; space.len()];
    for r in records {
        let p = placement(g, &r.cops, &r.robber)?;
        if p.cops.len() != k {
            return Err(GameError::CopArity {
                expected: k,
                got: p.cops.len(),
            });
        }
        let entries = r
            .support
            .iter()
            .map(|m| {
                let mv = m.mv.iter().map(|l| g.node(l)).collect::<Result<Vec<_>, _>>()?;
                Ok((mv, m.prob))
            })
            .collect::<Result<Vec<_>, GameError>>()?;
        let slot = match r.side {
            Side::Cop => &mut cop,
            Side::Robber => &mut robber,
        };
        slot[space.encode(&p)] = Some(Distribution { entries });
    }
    MixedStrategyTable::from_parts(space, cop, robber)
}

/// Values and strategies together, as served and printed by the tools.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionDoc {
    pub edges: Vec<(String, String)>,
    pub value_table: ValueTableDoc,
    pub strategies: Vec<StrategyRecord>,
}

pub fn solution_doc(values: &ValueTable, strategies: &MixedStrategyTable) -> SolutionDoc {
    let g = values.graph();
    SolutionDoc {
        edges: g
            .edges()
            .into_iter()
            .map(|(u, v)| (g.label(u).to_string(), g.label(v).to_string()))
            .collect(),
        value_table: value_table_doc(values),
        strategies: strategy_records(g, strategies),
    }
}

const CORNER: &str = "cop\\robber";

fn fmt_value(v: f64) -> String {
    if v.is_finite() {
        v.to_string()
    } else {
        "inf".to_string()
    }
}

/// The single-cop value table as a matrix: one row per cop node, one
/// column per robber node, in graph order.
pub fn values_to_csv(table: &ValueTable) -> Result<String, GameError> {
    if table.cops() != 1 {
        return Err(GameError::InvalidParameter(format!(
            "CSV export needs exactly one cop, table has {}",
            table.cops()
        )));
    }
    let g = table.graph();
    let n = g.node_count();
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| GameError::InvalidParameter(e.to_string());
    w.write_record(std::iter::once(CORNER).chain(g.labels().iter().map(String::as_str)))
        .map_err(csv_err)?;
    for x in 0..n {
        let row = &table.values()[x * n..(x + 1) * n];
        w.write_record(std::iter::once(g.label(x).to_string()).chain(row.iter().map(|&v| fmt_value(v))))
            .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| GameError::InvalidParameter(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("labels are UTF-8"))
}

/// Reads a matrix written by [`values_to_csv`]. The CSV carries values
/// only: the table comes back with the default ceiling, marked converged,
/// with zero iterations.
pub fn values_from_csv(g: &Graph, text: &str) -> Result<ValueTable, GameError> {
    let bad = |msg: String| GameError::InvalidParameter(format!("value CSV: {msg}"));
    let n = g.node_count();
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
    let rows = r
        .records()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| bad(e.to_string()))?;
    let (header, body) = rows.split_first().ok_or_else(|| bad("empty".into()))?;
    let columns: Vec<Node> = header
        .iter()
        .skip(1)
        .map(|l| g.node(l))
        .collect::<Result<_, _>>()?;
    if columns.len() != n || body.len() != n {
        return Err(bad(format!("expected a {n}x{n} matrix")));
    }
    let mut values = vec![f64::NAN; n * n];
    for row in body {
        let x = g.node(row.get(0).unwrap_or_default())?;
        if row.len() != n + 1 {
            return Err(bad(format!("row '{}' has {} values", g.label(x), row.len() - 1)));
        }
        for (cell, &y) in row.iter().skip(1).zip(&columns) {
            let v: f64 = cell.trim().parse().map_err(|_| bad(format!("bad number '{cell}'")))?;
            values[x * n + y] = v;
        }
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(bad("repeated or missing rows".into()));
    }
    ValueTable::from_values(g, 1, values, default_ceiling(n, 1), 0, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concurrent::{value_iterate, IterationConfig};
    use crate::graph::generate;
    use crate::turn_based::solve_copwin;

    #[test]
    fn p5_csv_is_the_integer_matrix() {
        let g = generate("path:5").unwrap();
        let (v, _) = value_iterate(&g, 1, &IterationConfig::default()).unwrap();
        let csv = values_to_csv(&v).unwrap();
        assert_eq!(
            csv,
            "cop\\robber,1,2,3,4,5\n1,0,4,4,4,4\n2,1,0,3,3,3\n3,2,2,0,2,2\n4,3,3,3,0,1\n5,4,4,4,4,0\n"
        );
        assert_eq!(values_from_csv(&g, &csv).unwrap().values(), v.values());
    }

    #[test]
    fn csv_round_trips_infinities_and_fractions() {
        let g = generate("cycle:4").unwrap();
        let (v, _) = value_iterate(&g, 1, &IterationConfig::default()).unwrap();
        let csv = values_to_csv(&v).unwrap();
        assert!(csv.contains("inf"));
        let back = values_from_csv(&g, &csv).unwrap();
        assert_eq!(back.values(), v.values());

        let k3 = generate("clique:3").unwrap();
        let (v, _) = value_iterate(&k3, 1, &IterationConfig::default()).unwrap();
        let back = values_from_csv(&k3, &values_to_csv(&v).unwrap()).unwrap();
        assert_eq!(back.values(), v.values());
    }

    #[test]
    fn csv_needs_one_cop() {
        let g = generate("cycle:4").unwrap();
        let (v, _) = value_iterate(&g, 2, &IterationConfig::default()).unwrap();
        assert!(values_to_csv(&v).is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        for (spec, k) in [("gavenciak", 1), ("cycle:4", 1), ("cycle:4", 2), ("paper-tree", 1)] {
            let g = generate(spec).unwrap();
            let (v, s) = value_iterate(&g, k, &IterationConfig::default()).unwrap();
            let text = serde_json::to_string(&solution_doc(&v, &s)).unwrap();
            let doc: SolutionDoc = serde_json::from_str(&text).unwrap();
            assert_eq!(value_table_from_doc(&g, &doc.value_table).unwrap(), v, "{spec}");
            assert_eq!(strategies_from_records(&g, k, &doc.strategies).unwrap(), s, "{spec}");
        }
    }

    #[test]
    fn infinite_values_are_tagged() {
        let g = generate("cycle:4").unwrap();
        let (v, _) = value_iterate(&g, 1, &IterationConfig::default()).unwrap();
        let text = serde_json::to_string(&value_table_doc(&v)).unwrap();
        assert!(text.contains("\"capture_time\":\"inf\""));
        assert!(text.contains("\"value\":\"inf\""));
    }

    #[test]
    fn copwin_records_mark_escapes() {
        let g = generate("cycle:4").unwrap();
        let records = copwin_records(&solve_copwin(&g, 1).unwrap());
        assert_eq!(records.len(), 2 * 16);
        let json = serde_json::to_value(&records).unwrap();
        let inf = json.as_array().unwrap().iter().filter(|r| r["rank"] == "inf").count();
        assert!(inf > 0);
        let zero = &json[0];
        assert_eq!(
            *zero,
            serde_json::json!({"cops": ["1"], "robber": "1", "turn": "C", "rank": 0})
        );
    }

    #[test]
    fn doc_for_another_graph_is_rejected() {
        let g = generate("path:5").unwrap();
        let (v, _) = value_iterate(&g, 1, &IterationConfig::default()).unwrap();
        let doc = value_table_doc(&v);
        assert!(value_table_from_doc(&generate("cycle:5").unwrap(), &doc).is_err());
    }
}
