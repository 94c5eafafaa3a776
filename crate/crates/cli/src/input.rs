use std::path::Path;

use metricgeo::curves::{Curve, Density, DensityLocation};
use metricgeo::lipschitz::ScaleSchedule;
use metricgeo::metric::json::SpaceDoc;
use metricgeo::metric::{MetricSpace, PointId, ScalarField};
use metricgeo::modulus::{parse_exponent, Exponent};
use serde::Deserialize;
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: line {line} column {column}: {message}")]
    Json {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Schema { path: String, source: metricgeo::Error },
    #[error(transparent)]
    Model(#[from] metricgeo::Error),
    #[error("{flag}: {message}")]
    Flag { flag: &'static str, message: String },
    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, InputError>;

pub fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| InputError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| InputError::Json {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub struct LoadedSpace {
    pub doc: SpaceDoc,
    pub space: MetricSpace,
}

pub fn load_space(path: &Path) -> Result<LoadedSpace> {
    let text = read(path)?;
    let doc: SpaceDoc = parse_json(path, &text)?;
    let space = doc.to_space().map_err(|source| InputError::Schema {
        path: path.display().to_string(),
        source,
    })?;
    Ok(LoadedSpace { doc, space })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FieldFile {
    Values(Vec<f64>),
    Object { values: Vec<f64> },
}

/// A field named in the space file, or else a JSON file holding an array
/// of values (or `{"values": [...]}`).
pub fn load_field(loaded: &LoadedSpace, name: &str) -> Result<ScalarField> {
    if loaded.doc.fields.contains_key(name) {
        return Ok(loaded.doc.field(name, &loaded.space)?);
    }
    let path = Path::new(name);
    if !path.exists() {
        return Err(InputError::Flag {
            flag: "--field",
            message: format!(
                "'{name}' is neither a field of the space file (available: {}) nor a file",
                loaded.doc.fields.keys().cloned().collect::<Vec<_>>().join(", ")
            ),
        });
    }
    let values = match parse_json::<FieldFile>(path, &read(path)?)? {
        FieldFile::Values(v) | FieldFile::Object { values: v } => v,
    };
    let f = ScalarField::new(values)?;
    f.ensure_matches(&loaded.space)?;
    Ok(f)
}

pub fn schedule(spec: Option<&str>, space: &MetricSpace) -> Result<ScaleSchedule> {
    let Some(spec) = spec else {
        return Ok(ScaleSchedule::default_for(space)?);
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = |message: String| InputError::Flag {
        flag: "--schedule",
        message,
    };
    if parts.len() != 3 {
        return Err(bad(format!("expected r0:ratio:rmin, got '{spec}'")));
    }
    let nums = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|e| bad(format!("'{p}': {e}"))))
        .collect::<Result<Vec<_>>>()?;
    ScaleSchedule::geometric(nums[0], nums[1], nums[2]).map_err(|e| bad(e.to_string()))
}

pub fn float_list(flag: &'static str, spec: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|p| {
            p.trim().parse::<f64>().map_err(|e| InputError::Flag {
                flag,
                message: format!("'{p}': {e}"),
            })
        })
        .collect()
}

pub fn index_list(flag: &'static str, spec: &str, space: &MetricSpace) -> Result<Vec<PointId>> {
    spec.split(',')
        .map(|p| {
            let i = p.trim().parse::<usize>().map_err(|e| InputError::Flag {
                flag,
                message: format!("'{p}': {e}"),
            })?;
            space.check(PointId(i))?;
            Ok(PointId(i))
        })
        .collect()
}

/// `"0:5,2:7"`; defaults to the first and last point.
pub fn pairs(spec: Option<&str>, space: &MetricSpace) -> Result<Vec<(PointId, PointId)>> {
    let Some(spec) = spec else {
        return Ok(vec![(PointId(0), PointId(space.len() - 1))]);
    };
    spec.split(',')
        .map(|pair| {
            let ends = pair
                .split_once(':')
                .ok_or_else(|| InputError::Flag {
                    flag: "--pairs",
                    message: format!("expected x:y, got '{pair}'"),
                })?;
            let one = index_list("--pairs", ends.0, space)?[0];
            let two = index_list("--pairs", ends.1, space)?[0];
            Ok((one, two))
        })
        .collect()
}

pub fn exponent(spec: &str) -> Result<Exponent> {
    parse_exponent(&Value::from(spec)).map_err(|e| InputError::Flag {
        flag: "--p",
        message: e.to_string(),
    })
}

pub fn curves(path: &Path, space: &MetricSpace) -> Result<Vec<Curve>> {
    let walks: Vec<Vec<usize>> = parse_json(path, &read(path)?)?;
    walks
        .iter()
        .enumerate()
        .map(|(i, w)| {
            Curve::from_indices(space, w).map_err(|e| InputError::Other(format!("{}: curve {i}: {e}", path.display())))
        })
        .collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DensityDoc {
    location: DensityLocation,
    values: Vec<Option<f64>>,
}

/// `{"location": "edge" | "vertex", "values": [...]}`; `null` stands for an
/// infinite value.
pub fn density(path: &Path) -> Result<Density> {
    let doc: DensityDoc = parse_json(path, &read(path)?)?;
    let values = doc.values.into_iter().map(|v| v.unwrap_or(f64::INFINITY)).collect();
    Ok(Density::new(doc.location, values)?)
}
