//! Run configuration: a JSON file overlaid by command-line flags.

use std::path::PathBuf;

use renorm_lab::distortion::Thresholds;
use renorm_lab::{MapDescriptor, Tolerances, UnimodalMap};
use serde::Deserialize;

pub const MAX_DEPTH: usize = 8;
pub const MAX_WORD_LENGTH: usize = 8;

/// Combinatorial type: a named constant type or explicit return times.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum TypeSpec {
    Named(String),
    Times(Vec<usize>),
}

impl TypeSpec {
    pub fn parse_flag(s: &str) -> TypeSpec {
        let times: Result<Vec<usize>, _> = s.split(',').map(|p| p.trim().parse::<usize>()).collect();
        match times {
            Ok(t) if !t.is_empty() => TypeSpec::Times(t),
            _ => TypeSpec::Named(s.to_string()),
        }
    }

    fn resolve(&self, depth: Option<usize>) -> Result<Vec<usize>, String> {
        let n = match self {
            TypeSpec::Times(t) => {
                if let Some(d) = depth {
                    if d != t.len() {
                        return Err(format!("type has {} levels but depth is {d}", t.len()));
                    }
                }
                return Ok(t.clone());
            }
            TypeSpec::Named(name) => match name.as_str() {
                "doubling" => 2,
                "tripling" => 3,
                other => match other.strip_prefix("constant-").map(str::parse::<usize>) {
                    Some(Ok(n)) => n,
                    _ => return Err(format!("unknown type {other:?}")),
                },
            },
        };
        Ok(vec![n; depth.unwrap_or(1)])
    }
}

/// A map given either explicitly or by tuning the affine family.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapSpec {
    pub t: Option<f64>,
    pub c: Option<f64>,
    pub h_coeffs: Option<Vec<f64>>,
    pub label: Option<String>,
    #[serde(rename = "type")]
    pub kind: Option<TypeSpec>,
    pub depth: Option<usize>,
}

/// How to obtain the map once flags are applied.
#[derive(Debug, Clone, PartialEq)]
pub enum MapSource {
    Tuned { t: f64, target: Vec<usize> },
    Explicit(MapDescriptor),
}

impl MapSpec {
    /// Flags win over fields already present.
    pub fn overlay(mut self, other: &MapSpec) -> MapSpec {
        if other.t.is_some() {
            self.t = other.t;
        }
        if other.c.is_some() {
            self.c = other.c;
            self.h_coeffs = None;
            self.kind = None;
        }
        if other.h_coeffs.is_some() {
            self.h_coeffs = other.h_coeffs.clone();
        }
        if other.label.is_some() {
            self.label = other.label.clone();
        }
        if other.kind.is_some() {
            self.kind = other.kind.clone();
            self.c = None;
        }
        if other.depth.is_some() {
            self.depth = other.depth;
        }
        self
    }

    pub fn is_empty(&self) -> bool {
        *self == MapSpec::default()
    }

    pub fn source(&self) -> Result<MapSource, String> {
        let t = self.t.ok_or("map needs a critical exponent t")?;
        if !(t > 1.0 && t.is_finite()) {
            return Err(format!("critical exponent must be a finite number above 1, got {t}"));
        }
        if let Some(kind) = &self.kind {
            let target = kind.resolve(self.depth)?;
            if target.is_empty() || target.iter().any(|&n| n < 2) {
                return Err(format!("return times must all be at least 2, got {target:?}"));
            }
            if target.len() > MAX_DEPTH {
                return Err(format!("tuning depth {} exceeds the cap {MAX_DEPTH}", target.len()));
            }
            return Ok(MapSource::Tuned { t, target });
        }
        let label = self.label.clone();
        match (self.c, &self.h_coeffs) {
            (Some(c), None) => Ok(MapSource::Explicit(MapDescriptor::Affine { t, c, label })),
            (None, Some(h)) => Ok(MapSource::Explicit(MapDescriptor::Polynomial { t, h_coeffs: h.clone(), label })),
            (Some(_), Some(_)) => Err("give either c or h_coeffs, not both".into()),
            (None, None) => Err("map needs c, h_coeffs or a type to tune".into()),
        }
    }
}

impl MapSource {
    pub fn label(&self) -> String {
        match self {
            MapSource::Tuned { t, target } => {
                let times: Vec<String> = target.iter().map(usize::to_string).collect();
                format!("t={t} type=({})", times.join(","))
            }
            MapSource::Explicit(d) => match d {
                MapDescriptor::Affine { label: Some(l), .. } | MapDescriptor::Polynomial { label: Some(l), .. } => {
                    l.clone()
                }
                _ => String::new(),
            },
        }
    }

    /// Checks that the descriptor builds a valid map.
    pub fn validate(&self) -> Result<(), String> {
        match self {
            MapSource::Tuned { .. } => Ok(()),
            MapSource::Explicit(d) => d.build().map(|_: UnimodalMap| ()).map_err(|e| e.to_string()),
        }
    }
}

/// Everything a run needs, from file and flags.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub map: MapSpec,
    /// Second map for `conjugate`; defaults to `map`.
    pub target: Option<MapSpec>,
    /// Tower / partition depth `K`.
    pub k: Option<usize>,
    pub max_n: Option<usize>,
    /// Word length `L`.
    pub word_length: Option<usize>,
    /// Sample points per word domain in `certify`.
    pub grid: Option<usize>,
    pub thresholds: Option<Thresholds>,
    pub tolerances: Option<Tolerances>,
    pub j0: Option<u32>,
    pub j1: Option<u32>,
    pub qs_grid: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig, String> {
        serde_json::from_str(text).map_err(|e| format!("config: {e}"))
    }

    pub fn tolerances(&self) -> Result<Tolerances, String> {
        let tol = self.tolerances.unwrap_or_default();
        tol.validate()?;
        Ok(tol)
    }

    pub fn word_length(&self) -> Result<usize, String> {
        let l = self.word_length.unwrap_or(3);
        if l == 0 || l > MAX_WORD_LENGTH {
            return Err(format!("word length must be in 1..={MAX_WORD_LENGTH}, got {l}"));
        }
        Ok(l)
    }

    /// `K`, falling back to `fallback` (the tuning depth when there is one).
    pub fn depth(&self, fallback: usize) -> Result<usize, String> {
        let k = self.k.unwrap_or(fallback);
        if k == 0 || k > MAX_DEPTH {
            return Err(format!("depth must be in 1..={MAX_DEPTH}, got {k}"));
        }
        Ok(k)
    }

    pub fn max_n(&self) -> Result<usize, String> {
        let n = self.max_n.unwrap_or(8);
        if n < 2 {
            return Err(format!("max_n must be at least 2, got {n}"));
        }
        Ok(n)
    }
}
