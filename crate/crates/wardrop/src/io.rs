//! Network and toll documents (JSON), demand-grid specs, and CSV reports.
//!
//! Network documents are demand-free on purpose: demands are runtime inputs,
//! the documents describe only the game itself.

use crate::cost::{CostFn, MonomialTerm, TollVector};
use crate::network::{Network, NetworkError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("cannot read `{path}`: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("cannot write `{path}`: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("validation error: {0}")]
    Validation(String),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EdgeDocument {
    pub id: String,
    pub tail: String,
    pub head: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<MonomialTerm>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CommodityDocument {
    pub id: String,
    pub origin: String,
    pub destination: String,
}

/// The on-disk description of a routing game.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NetworkDocument {
    pub beta: f64,
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeDocument>,
    pub commodities: Vec<CommodityDocument>,
}

impl NetworkDocument {
    pub fn to_network(&self) -> Result<Network, IoError> {
        let mut b = Network::builder(self.beta);
        for v in &self.vertices {
            b = b.vertex(v);
        }
        for e in &self.edges {
            let cost = match (&e.t, &e.a, &e.terms) {
                (Some(t), Some(a), None) => CostFn::bpr(*t, *a),
                (None, None, Some(terms)) => CostFn::MonomialSum {
                    terms: terms.clone(),
                },
                _ => {
                    return Err(IoError::Validation(format!(
                        "edge `{}` must carry exactly one of (t, a) or terms",
                        e.id
                    )))
                }
            };
            b = b.edge(&e.id, &e.tail, &e.head, cost);
        }
        for c in &self.commodities {
            b = b.commodity(&c.id, &c.origin, &c.destination);
        }
        Ok(b.build()?)
    }

    pub fn from_network(network: &Network) -> NetworkDocument {
        NetworkDocument {
            beta: network.beta(),
            vertices: network.vertex_names().to_vec(),
            edges: network
                .edges()
                .iter()
                .map(|e| {
                    let (t, a, terms) = match &e.cost {
                        CostFn::Bpr { t, a } => (Some(*t), Some(*a), None),
                        CostFn::MonomialSum { terms } => (None, None, Some(terms.clone())),
                    };
                    EdgeDocument {
                        id: e.name.clone(),
                        tail: network.vertex_name(e.tail).to_owned(),
                        head: network.vertex_name(e.head).to_owned(),
                        t,
                        a,
                        terms,
                    }
                })
                .collect(),
            commodities: network
                .commodities()
                .iter()
                .map(|c| CommodityDocument {
                    id: c.name.clone(),
                    origin: network.vertex_name(c.origin).to_owned(),
                    destination: network.vertex_name(c.destination).to_owned(),
                })
                .collect(),
        }
    }
}

fn parse_error(e: &serde_json::Error) -> IoError {
    IoError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

pub fn parse_network_str(text: &str) -> Result<Network, IoError> {
    let doc: NetworkDocument = serde_json::from_str(text).map_err(|e| parse_error(&e))?;
    doc.to_network()
}

pub fn load_network(path: impl AsRef<Path>) -> Result<Network, IoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_network_str(&text)
}

pub fn save_network(network: &Network, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    let doc = NetworkDocument::from_network(network);
    let text = serde_json::to_string_pretty(&doc).expect("document serialization");
    std::fs::write(path, text + "\n").map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })
}

/// A toll vector resolved against a network: edges missing from the document
/// default to zero and are recorded in `defaulted`.
#[derive(Debug, Clone)]
pub struct LoadedTolls {
    pub tolls: TollVector,
    pub defaulted: Vec<String>,
}

pub fn parse_tolls_str(text: &str, network: &Network) -> Result<LoadedTolls, IoError> {
    let map: BTreeMap<String, f64> = serde_json::from_str(text).map_err(|e| parse_error(&e))?;
    for name in map.keys() {
        network.edge_by_name(name)?;
    }
    let mut tolls = vec![0.0; network.edge_count()];
    let mut defaulted = Vec::new();
    for (i, e) in network.edges().iter().enumerate() {
        match map.get(&e.name) {
            Some(&v) => tolls[i] = v,
            None => defaulted.push(e.name.clone()),
        }
    }
    Ok(LoadedTolls {
        tolls: TollVector(tolls),
        defaulted,
    })
}

pub fn load_tolls(path: impl AsRef<Path>, network: &Network) -> Result<LoadedTolls, IoError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse_tolls_str(&text, network)
}

pub fn tolls_to_json(tolls: &TollVector, network: &Network) -> String {
    let map: BTreeMap<String, f64> = network
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| (e.name.clone(), tolls[i]))
        .collect();
    serde_json::to_string_pretty(&map).expect("toll serialization")
}

pub fn save_tolls(
    tolls: &TollVector,
    network: &Network,
    path: impl AsRef<Path>,
) -> Result<(), IoError> {
    let path = path.as_ref();
    std::fs::write(path, tolls_to_json(tolls, network) + "\n").map_err(|source| IoError::Write {
        path: path.display().to_string(),
        source,
    })
}

/// Parses a one-axis grid spec: either `lo:hi:count` (log-spaced, inclusive
/// endpoints) or an explicit comma list of values.
pub fn parse_grid_spec(spec: &str) -> Result<Vec<f64>, IoError> {
    let bad = |msg: String| IoError::Validation(msg);
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(format!("grid spec `{spec}` must be lo:hi:count")));
        }
        let lo: f64 = parts[0]
            .parse()
            .map_err(|_| bad(format!("bad grid bound `{}`", parts[0])))?;
        let hi: f64 = parts[1]
            .parse()
            .map_err(|_| bad(format!("bad grid bound `{}`", parts[1])))?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| bad(format!("bad grid count `{}`", parts[2])))?;
        if !(lo > 0.0) || !(hi >= lo) {
            return Err(bad(format!(
                "grid spec `{spec}` needs 0 < lo <= hi for log spacing"
            )));
        }
        if count == 0 {
            return Err(bad("grid count must be positive".into()));
        }
        Ok(log_spaced(lo, hi, count))
    } else {
        spec.split(',')
            .map(|s| {
                let v: f64 = s
                    .trim()
                    .parse()
                    .map_err(|_| bad(format!("bad grid value `{s}`")))?;
                if v < 0.0 {
                    return Err(bad(format!("grid value {v} must be >= 0")));
                }
                Ok(v)
            })
            .collect()
    }
}

/// `count` log-spaced values covering `[lo, hi]` inclusive.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let ratio = hi / lo;
    (0..count)
        .map(|k| lo * ratio.powf(k as f64 / (count - 1) as f64))
        .collect()
}

/// Formats a float with 12 significant digits, the stable report precision.
pub fn fmt_sig12(x: f64) -> String {
    format!("{x:.11e}")
}
