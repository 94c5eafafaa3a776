//! JSON modulus instances:
//!
//! ```json
//! {
//!   "graph": { "kind": "graph", "edges": [[0, 1, 1.0], [0, 1, 1.0]] },
//!   "sigma": [1.0, 1.0],
//!   "family": { "kind": "connecting", "data": { "sources": [0], "targets": [1] } },
//!   "p": 2,
//!   "tol": 1e-8
//! }
//! ```
//!
//! `sigma` defaults to unit weights, `p` to 2 and `tol` to [`DEFAULT_TOL`].
//! Family kinds: `explicit` (data: list of vertex sequences), `connecting`
//! and `through_edge` (data: list of edge ids).

use serde::Deserialize;
use serde_json::Value;

use super::{CurveFamily, Exponent, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::metric::json::SpaceDoc;
use crate::metric::{Measure, MetricSpace, WeightedGraph};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDoc {
    pub kind: String,
    pub data: Value,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    graph: SpaceDoc,
    #[serde(default)]
    sigma: Option<Vec<f64>>,
    family: FamilyDoc,
    #[serde(default)]
    p: Option<Value>,
    #[serde(default)]
    tol: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ModulusInstance {
    pub graph: WeightedGraph,
    pub sigma: Measure,
    pub family: CurveFamily,
    pub p: Exponent,
    pub tol: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Endpoints {
    sources: Vec<usize>,
    targets: Vec<usize>,
}

fn field<T: for<'de> Deserialize<'de>>(value: Value, what: &str) -> Result<T> {
    serde_json::from_value(value).map_err(|e| Error::MalformedSpace(format!("family.data ({what}): {e}")))
}

pub fn parse_exponent(value: &Value) -> Result<Exponent> {
    match value {
        Value::Number(n) => Exponent::from_f64(n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) => s.parse(),
        other => Err(Error::UnsupportedExponent(other.to_string())),
    }
}

impl FamilyDoc {
    pub fn into_family(self, g: &WeightedGraph) -> Result<CurveFamily> {
        match self.kind.as_str() {
            "explicit" => {
                let walks: Vec<Vec<usize>> = field(self.data, "list of vertex sequences")?;
                CurveFamily::explicit_from_vertices(g, &walks)
            }
            "connecting" => {
                let ends: Endpoints = field(self.data, "sources and targets")?;
                Ok(CurveFamily::Connecting {
                    sources: ends.sources,
                    targets: ends.targets,
                })
            }
            "through_edge" => Ok(CurveFamily::ThroughEdge(field(self.data, "list of edge ids")?)),
            other => Err(Error::MalformedSpace(format!(
                "family.kind must be explicit, connecting or through_edge, got '{other}'"
            ))),
        }
    }
}

impl ModulusInstance {
    pub fn parse(text: &str) -> Result<Self> {
        let doc: InstanceDoc = serde_json::from_str(text)
            .map_err(|e| Error::MalformedSpace(format!("line {} column {}: {e}", e.line(), e.column())))?;
        let graph = match doc.graph.into_space()? {
            MetricSpace::Graph(g) => g,
            other => {
                return Err(Error::MalformedSpace(format!(
                    "graph must have kind 'graph', got '{}'",
                    other.kind()
                )))
            }
        };
        let sigma = Measure::edge(doc.sigma.unwrap_or_else(|| vec![1.0; graph.edges().len()]))?;
        let family = doc.family.into_family(&graph)?;
        let p = match &doc.p {
            Some(v) => parse_exponent(v)?,
            None => Exponent::Two,
        };
        Ok(Self {
            graph,
            sigma,
            family,
            p,
            tol: doc.tol.unwrap_or(DEFAULT_TOL),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_parallel_edges() {
        let text = r#"{"graph":{"kind":"graph","edges":[[0,1,1.0],[0,1,1.0],[0,1,1.0]]},
            "family":{"kind":"connecting","data":{"sources":[0],"targets":[1]}},"p":2}"#;
        let inst = ModulusInstance::parse(text).unwrap();
        assert_eq!(inst.graph.edges().len(), 3);
        assert_eq!(inst.p, Exponent::Two);
        assert_eq!(inst.sigma.weights(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn parses_other_families() {
        let text = r#"{"graph":{"kind":"graph","edges":[[0,1,1.0],[1,2,1.0]]},
            "family":{"kind":"explicit","data":[[0,1,2]]},"p":"inf","tol":1e-6}"#;
        let inst = ModulusInstance::parse(text).unwrap();
        assert_eq!(inst.p, Exponent::Infinity);
        assert!(matches!(inst.family, CurveFamily::Explicit(ref w) if w.len() == 1));
        let text = r#"{"graph":{"kind":"graph","edges":[[0,1,1.0]]},
            "family":{"kind":"through_edge","data":[0]},"p":1}"#;
        assert!(ModulusInstance::parse(text).is_ok());
    }

    #[test]
    fn rejects_bad_instances() {
        let bad = [
            r#"{"graph":{"kind":"graph","edges":[[0,1,1.0]]},"family":{"kind":"star","data":[]}}"#,
            r#"{"graph":{"kind":"graph","edges":[[0,1,1.0]]},"family":{"kind":"explicit","data":[[0,2]]}}"#,
            r#"{"graph":{"kind":"graph","edges":[[0,1,1.0]]},"family":{"kind":"explicit","data":[]},"p":3}"#,
            r#"{"graph":{"kind":"matrix","distances":[[0]]},"family":{"kind":"explicit","data":[]}}"#,
            r#"{"graph":{"kind":"graph","edges":[[0,1,1.0]]},"sigma":[-1],"family":{"kind":"explicit","data":[]}}"#,
        ];
        for text in bad {
            assert!(ModulusInstance::parse(text).is_err(), "{text}");
        }
    }
}
