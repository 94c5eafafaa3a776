//! JSON space descriptions:
//!
//! ```json
//! { "kind": "matrix", "points": ["a", "b"], "distances": [[0, 1], [1, 0]] }
//! { "kind": "graph", "points": [0, 1, 2], "edges": [[0, 1, 1.0], [1, 2, 0.5]] }
//! { "kind": "formula", "points": [0.0, 0.5, 1.0], "formula": { "name": "halfline", "params": { "n_max": 1 } } }
//! ```
//!
//! For formula spaces `points` holds the parameters (a number, or `[x, y]`);
//! for the other kinds it holds free-form labels. Any kind may carry named
//! functions on its points in `"fields": {"g": [0.0, 1.0, ...]}`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{DistanceMatrix, FormulaPoint, FormulaSample, FormulaSpace, MetricSpace, ScalarField, WeightedGraph};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormulaDoc {
    pub name: String,
    #[serde(default)]
    pub params: Value,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDoc {
    pub kind: String,
    #[serde(default)]
    pub points: Vec<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(usize, usize, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<FormulaDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub fields: BTreeMap<String, Vec<f64>>,
}

fn missing(kind: &str, field: &str) -> Error {
    Error::MalformedSpace(format!("a '{kind}' space needs the '{field}' field"))
}

impl SpaceDoc {
    /// Named field checked against the point count of `space`.
    pub fn field(&self, name: &str, space: &MetricSpace) -> Result<ScalarField> {
        let values = self.fields.get(name).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "no field '{name}' in the space file (available: {})",
                self.fields.keys().cloned().collect::<Vec<_>>().join(", ")
            ))
        })?;
        let f = ScalarField::new(values.clone())?;
        f.ensure_matches(space)?;
        Ok(f)
    }

    pub fn to_space(&self) -> Result<MetricSpace> {
        self.clone().into_space()
    }

    pub fn into_space(self) -> Result<MetricSpace> {
        match self.kind.as_str() {
            "matrix" => {
                let rows = self.distances.ok_or_else(|| missing("matrix", "distances"))?;
                if !self.points.is_empty() && self.points.len() != rows.len() {
                    return Err(Error::MalformedSpace(format!(
                        "{} points but a {}-row matrix",
                        self.points.len(),
                        rows.len()
                    )));
                }
                Ok(MetricSpace::Matrix(DistanceMatrix::new(rows)?))
            }
            "graph" => {
                let edges = self.edges.ok_or_else(|| missing("graph", "edges"))?;
                let n = if self.points.is_empty() {
                    edges.iter().map(|&(u, v, _)| u.max(v) + 1).max().unwrap_or(0)
                } else {
                    self.points.len()
                };
                Ok(MetricSpace::Graph(WeightedGraph::new(n, edges)?))
            }
            "formula" => {
                let doc = self.formula.ok_or_else(|| missing("formula", "formula"))?;
                let space = FormulaSpace::from_name(&doc.name, &doc.params)?;
                let points = self
                    .points
                    .into_iter()
                    .enumerate()
                    .map(|(i, v)| {
                        serde_json::from_value::<FormulaPoint>(v).map_err(|e| {
                            Error::MalformedSpace(format!("points[{i}]: {e}"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(MetricSpace::Formula(FormulaSample::new(space, points)?))
            }
            other => Err(Error::MalformedSpace(format!(
                "kind must be matrix, graph or formula, got '{other}'"
            ))),
        }
    }

    pub fn from_space(space: &MetricSpace) -> Self {
        match space {
            MetricSpace::Matrix(m) => SpaceDoc {
                kind: "matrix".into(),
                points: (0..m.len()).map(Value::from).collect(),
                distances: Some((0..m.len()).map(|i| m.row(i).to_vec()).collect()),
                edges: None,
                formula: None,
                fields: BTreeMap::new(),
            },
            MetricSpace::Graph(g) => SpaceDoc {
                kind: "graph".into(),
                points: (0..g.vertex_count()).map(Value::from).collect(),
                distances: None,
                edges: Some(g.edges().iter().map(|e| (e.u, e.v, e.len)).collect()),
                formula: None,
                fields: BTreeMap::new(),
            },
            MetricSpace::Formula(s) => SpaceDoc {
                kind: "formula".into(),
                points: s
                    .points()
                    .iter()
                    .map(|p| serde_json::to_value(p).expect("finite parameters serialize"))
                    .collect(),
                distances: None,
                edges: None,
                formula: Some(FormulaDoc {
                    name: s.space().name().into(),
                    params: s.space().params(),
                }),
                fields: BTreeMap::new(),
            },
        }
    }
}

pub fn parse_space(text: &str) -> Result<MetricSpace> {
    let doc: SpaceDoc =
        serde_json::from_str(text).map_err(|e| Error::MalformedSpace(format!("line {} column {}: {e}", e.line(), e.column())))?;
    doc.into_space()
}

pub fn space_from_value(value: Value) -> Result<MetricSpace> {
    let doc: SpaceDoc = serde_json::from_value(value).map_err(|e| Error::MalformedSpace(e.to_string()))?;
    doc.into_space()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::PointId;

    #[test]
    fn parses_all_kinds() {
        let m = parse_space(r#"{"kind":"matrix","points":["a","b"],"distances":[[0,2],[2,0]]}"#).unwrap();
        assert_eq!(m.distance(PointId(0), PointId(1)).unwrap(), 2.0);
        let g = parse_space(r#"{"kind":"graph","points":[0,1,2],"edges":[[0,1,1.0],[1,2,0.5]]}"#).unwrap();
        assert_eq!(g.distance(PointId(0), PointId(2)).unwrap(), 1.5);
        let f = parse_space(
            r#"{"kind":"formula","points":[1.0,2.0],"formula":{"name":"halfline","params":{"n_max":3}}}"#,
        )
        .unwrap();
        assert_eq!(f.distance(PointId(0), PointId(1)).unwrap(), 0.75);
        let p = parse_space(r#"{"kind":"formula","points":[[0,0],[3,4]],"formula":{"name":"plane"}}"#).unwrap();
        assert_eq!(p.distance(PointId(0), PointId(1)).unwrap(), 5.0);
    }

    #[test]
    fn rejects_schema_errors() {
        assert!(parse_space("{").is_err());
        assert!(parse_space(r#"{"kind":"tree"}"#).is_err());
        assert!(parse_space(r#"{"kind":"matrix"}"#).is_err());
        assert!(parse_space(r#"{"kind":"graph","edges":[[0,1,0.0]]}"#).is_err());
        assert!(parse_space(r#"{"kind":"formula","points":[0,1],"formula":{"name":"halfline"}}"#).is_err());
        assert!(parse_space(r#"{"kind":"matrix","distances":[[0]],"extra":1}"#).is_err());
    }

    #[test]
    fn round_trips_through_doc() {
        let f = parse_space(r#"{"kind":"formula","points":[0.5,-0.25],"formula":{"name":"cusp"}}"#).unwrap();
        let text = serde_json::to_string(&SpaceDoc::from_space(&f)).unwrap();
        let back = parse_space(&text).unwrap();
        assert_eq!(
            back.distance(PointId(0), PointId(1)).unwrap(),
            f.distance(PointId(0), PointId(1)).unwrap()
        );
    }
}
