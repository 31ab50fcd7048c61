//! JSON forms of states and density operators.
//!
//! A pure state is a list of `{occupation, amplitude}` records where the
//! occupation maps each occupied path to `{"H": n, "V": n}` and the amplitude
//! is `[re, im]`. The wrapping object also carries the full path list and the
//! truncation so that a round trip restores the same registry. A bare record
//! list is accepted on input; the registry is then the set of paths it names.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::density::DensityOperator;
use crate::error::{FockError, Result};
use crate::mode::{ModeRegistry, OccupationVector, DEFAULT_N_MAX};
use crate::state::PureState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PolCounts {
    #[serde(rename = "H", default)]
    pub h: u8,
    #[serde(rename = "V", default)]
    pub v: u8,
}

pub type OccupationMap = BTreeMap<String, PolCounts>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub occupation: OccupationMap,
    pub amplitude: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u32>,
    pub terms: Vec<TermRecord>,
}

impl StateJson {
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('[') {
            let terms = serde_json::from_str(text)?;
            Ok(StateJson {
                paths: None,
                n_max: None,
                terms,
            })
        } else {
            Ok(serde_json::from_str(text)?)
        }
    }

    /// Declared paths, or the paths named by the records.
    pub fn paths(&self) -> Vec<String> {
        let mut v: Vec<String> = match &self.paths {
            Some(p) => p.clone(),
            None => self
                .terms
                .iter()
                .flat_map(|t| t.occupation.keys().cloned())
                .collect(),
        };
        v.sort();
        v.dedup();
        v
    }

    pub fn n_max(&self) -> u32 {
        self.n_max.unwrap_or(DEFAULT_N_MAX)
    }

    pub fn into_state(&self, registry: &Arc<ModeRegistry>) -> Result<PureState> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            terms.push((
                occupation_from_map(&t.occupation, registry)?,
                Complex64::new(t.amplitude[0], t.amplitude[1]),
            ));
        }
        PureState::from_terms(registry, terms)
    }

    pub fn from_state(s: &PureState) -> Self {
        let reg = s.registry();
        StateJson {
            paths: Some(reg.paths().to_vec()),
            n_max: Some(reg.n_max()),
            terms: s
                .terms()
                .iter()
                .map(|(k, a)| TermRecord {
                    occupation: occupation_to_map(k, reg.paths(), true),
                    amplitude: [a.re, a.im],
                })
                .collect(),
        }
    }
}

fn occupation_to_map(k: &OccupationVector, paths: &[String], skip_empty: bool) -> OccupationMap {
    paths
        .iter()
        .enumerate()
        .filter(|(i, _)| !skip_empty || k.path_count(*i) > 0)
        .map(|(i, p)| {
            (
                p.clone(),
                PolCounts {
                    h: k.get(2 * i),
                    v: k.get(2 * i + 1),
                },
            )
        })
        .collect()
}

fn occupation_from_map(m: &OccupationMap, registry: &ModeRegistry) -> Result<OccupationVector> {
    let mut counts = vec![0u8; registry.num_modes()];
    for (path, c) in m {
        let i = registry.path_index(path)?;
        counts[2 * i] = c.h;
        counts[2 * i + 1] = c.v;
    }
    Ok(OccupationVector::from_counts(counts))
}

impl PureState {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&StateJson::from_state(self))?)
    }

    /// Parses a state, building its registry from the document.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc = StateJson::parse(text)?;
        let reg = ModeRegistry::with_n_max(doc.paths(), doc.n_max())?;
        doc.into_state(&reg)
    }
}

impl Serialize for PureState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        StateJson::from_state(self).serialize(serializer)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityJson {
    pub paths: Vec<String>,
    pub basis: Vec<OccupationMap>,
    /// Row-major, each entry `[re, im]`.
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl DensityJson {
    pub fn from_operator(rho: &DensityOperator) -> Self {
        let n = rho.dim();
        DensityJson {
            paths: rho.paths().to_vec(),
            basis: rho
                .basis()
                .iter()
                .map(|b| occupation_to_map(b, rho.paths(), false))
                .collect(),
            matrix: (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let z = rho.matrix()[(i, j)];
                            [z.re, z.im]
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn into_operator(self) -> Result<DensityOperator> {
        let reg = ModeRegistry::new(self.paths.clone())?;
        let basis: Vec<OccupationVector> = self
            .basis
            .iter()
            .map(|m| occupation_from_map(m, &reg))
            .collect::<Result<_>>()?;
        let n = basis.len();
        if self.matrix.len() != n || self.matrix.iter().any(|r| r.len() != n) {
            return Err(FockError::DimensionMismatch(
                "matrix shape does not match basis".into(),
            ));
        }
        let matrix = DMatrix::from_fn(n, n, |i, j| {
            Complex64::new(self.matrix[i][j][0], self.matrix[i][j][1])
        });
        DensityOperator::from_parts(reg.paths().to_vec(), basis, matrix)
    }
}

impl DensityOperator {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&DensityJson::from_operator(
            self,
        ))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<DensityJson>(text)?.into_operator()
    }
}

impl Serialize for DensityOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        DensityJson::from_operator(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        DensityJson::deserialize(deserializer)?
            .into_operator()
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::to_density;
    use crate::state::{Bell, BellState};

    #[test]
    fn bare_record_list_builds_registry() {
        let text = r#"[
            {"occupation": {"a": {"H": 1}}, "amplitude": [0.6, 0.0]},
            {"occupation": {"b": {"V": 1}}, "amplitude": [0.0, 0.8]}
        ]"#;
        let s = PureState::from_json(text).unwrap();
        assert_eq!(s.registry().paths(), &["a", "b"]);
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unknown_path_rejected() {
        let text =
            r#"{"paths": ["a"], "terms": [{"occupation": {"q": {"H": 1}}, "amplitude": [1, 0]}]}"#;
        assert_eq!(
            PureState::from_json(text).unwrap_err(),
            FockError::UnknownPath("q".into())
        );
    }

    #[test]
    fn density_round_trip_is_exact() {
        let reg = ModeRegistry::new(["2'", "4'"]).unwrap();
        let psi = BellState::new(Bell::PsiMinus, "2'", "4'")
            .to_state(&reg)
            .unwrap();
        let rho = to_density(&psi).unwrap();
        let back = DensityOperator::from_json(&rho.to_json().unwrap()).unwrap();
        assert_eq!(back, rho);
    }
}
