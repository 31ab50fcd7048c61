//! Bucket (vacuum / non-vacuum) detectors with finite efficiency.
//!
//! Each photon reaching a detector is registered independently with
//! probability `eta`, so the no-click POVM element on the monitored path is
//! `E_silent = sum_n (1 - eta)^n |n><n|` (both polarizations summed into `n`)
//! and `E_click = I - E_silent`. Dark counts are zero.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::density::DensityOperator;
use crate::error::{FockError, Result};
use crate::mode::{ModeRegistry, OccupationVector};
use crate::state::{PureState, NORM_TOLERANCE};

/// Probability that `n` photons all pass undetected.
pub fn no_click_weight(n: u32, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok((1.0 - eta).powi(n as i32))
}

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta <= 1.0 {
        Ok(())
    } else {
        Err(FockError::InvalidEfficiency(eta))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub id: String,
    pub path: String,
    pub eta: f64,
}

impl DetectorModel {
    pub fn new(id: &str, path: &str, eta: f64) -> Result<Self> {
        check_eta(eta)?;
        Ok(DetectorModel {
            id: id.to_string(),
            path: path.to_string(),
            eta,
        })
    }
}

/// An ordered set of detectors, each on its own path.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DetectorBank {
    detectors: Vec<DetectorModel>,
}

impl DetectorBank {
    pub fn new(detectors: Vec<DetectorModel>) -> Result<Self> {
        if detectors.is_empty() {
            return Err(FockError::InvalidDetectors("no detectors".into()));
        }
        for (i, d) in detectors.iter().enumerate() {
            check_eta(d.eta)?;
            for e in &detectors[..i] {
                if e.id == d.id {
                    return Err(FockError::InvalidDetectors(format!(
                        "duplicate id `{}`",
                        d.id
                    )));
                }
                if e.path == d.path {
                    return Err(FockError::InvalidDetectors(format!(
                        "path `{}` monitored by both `{}` and `{}`",
                        d.path, e.id, d.id
                    )));
                }
            }
        }
        Ok(DetectorBank { detectors })
    }

    /// Parses a JSON list of `{id, path, eta}` records.
    pub fn from_json(text: &str) -> Result<Self> {
        let detectors: Vec<DetectorModel> = serde_json::from_str(text)?;
        Self::new(detectors)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.detectors)?)
    }

    pub fn detectors(&self) -> &[DetectorModel] {
        &self.detectors
    }

    pub fn len(&self) -> usize {
        self.detectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detectors.is_empty()
    }

    pub fn position(&self, id: &str) -> Result<usize> {
        self.detectors
            .iter()
            .position(|d| d.id == id)
            .ok_or_else(|| FockError::PatternMismatch(format!("unknown detector `{id}`")))
    }

    /// Same detectors with every efficiency replaced.
    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        check_eta(eta)?;
        let detectors = self
            .detectors
            .iter()
            .map(|d| DetectorModel { eta, ..d.clone() })
            .collect();
        Ok(DetectorBank { detectors })
    }

    fn path_indices(&self, registry: &ModeRegistry) -> Result<Vec<usize>> {
        self.detectors
            .iter()
            .map(|d| registry.path_index(&d.path))
            .collect()
    }

    /// Every one of the `2^n` click patterns, in binary counting order with
    /// the first detector as the most significant digit.
    pub fn all_patterns(&self) -> Vec<ClickPattern> {
        let n = self.len();
        (0..1usize << n)
            .map(|bits| ClickPattern((0..n).map(|i| bits >> (n - 1 - i) & 1 == 1).collect()))
            .collect()
    }
}

/// Clicked / silent outcome per detector, aligned with a [`DetectorBank`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClickPattern(pub Vec<bool>);

impl ClickPattern {
    /// The listed detectors click, every other one stays silent.
    pub fn clicked(bank: &DetectorBank, ids: &[&str]) -> Result<Self> {
        let mut v = vec![false; bank.len()];
        for id in ids {
            v[bank.position(id)?] = true;
        }
        Ok(ClickPattern(v))
    }

    pub fn label(&self, bank: &DetectorBank) -> String {
        let ids: Vec<&str> = self
            .0
            .iter()
            .zip(bank.detectors())
            .filter(|(c, _)| **c)
            .map(|(_, d)| d.id.as_str())
            .collect();
        if ids.is_empty() {
            "none".to_string()
        } else {
            ids.join("+")
        }
    }

    fn check(&self, bank: &DetectorBank) -> Result<()> {
        if self.0.len() != bank.len() {
            return Err(FockError::PatternMismatch(format!(
                "pattern covers {} detectors, bank has {}",
                self.0.len(),
                bank.len()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ClickPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.0 {
            f.write_str(if *c { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// How a heralding pair is read against the full detector bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CoincidenceMode {
    /// The pair clicks and every other detector is silent.
    #[default]
    Strict,
    /// The pair clicks; the others are unconstrained.
    Lenient,
}

impl fmt::Display for CoincidenceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoincidenceMode::Strict => "strict",
            CoincidenceMode::Lenient => "lenient",
        })
    }
}

/// The set of full click patterns making up a "one of these pairs clicked"
/// event. Patterns are disjoint, so their probabilities add.
pub fn coincidence_event(
    bank: &DetectorBank,
    pairs: &[(&str, &str)],
    mode: CoincidenceMode,
) -> Result<Vec<ClickPattern>> {
    let idx: Vec<(usize, usize)> = pairs
        .iter()
        .map(|(a, b)| Ok((bank.position(a)?, bank.position(b)?)))
        .collect::<Result<_>>()?;
    Ok(match mode {
        CoincidenceMode::Strict => pairs
            .iter()
            .map(|(a, b)| ClickPattern::clicked(bank, &[a, b]))
            .collect::<Result<_>>()?,
        CoincidenceMode::Lenient => bank
            .all_patterns()
            .into_iter()
            .filter(|p| idx.iter().any(|&(i, j)| p.0[i] && p.0[j]))
            .collect(),
    })
}

fn outcome_weight(
    bank: &DetectorBank,
    pattern: &ClickPattern,
    occ: &OccupationVector,
    paths: &[usize],
) -> f64 {
    bank.detectors()
        .iter()
        .zip(paths)
        .zip(&pattern.0)
        .map(|((d, &p), &click)| {
            let silent = (1.0 - d.eta).powi(occ.path_count(p) as i32);
            if click {
                1.0 - silent
            } else {
                silent
            }
        })
        .product()
}

fn check_normalized(s: &PureState) -> Result<()> {
    let n2 = s.norm_sqr();
    if (n2 - 1.0).abs() > NORM_TOLERANCE {
        return Err(FockError::NotNormalized(n2));
    }
    Ok(())
}

/// `<s| E_pattern |s>`; the POVM is diagonal in the Fock basis, so this is a
/// weighted sum over the stored terms.
pub fn pattern_probability(
    s: &PureState,
    pattern: &ClickPattern,
    bank: &DetectorBank,
) -> Result<f64> {
    check_normalized(s)?;
    pattern.check(bank)?;
    let paths = bank.path_indices(s.registry())?;
    Ok(s.terms()
        .iter()
        .map(|(k, a)| a.norm_sqr() * outcome_weight(bank, pattern, k, &paths))
        .sum())
}

/// Probability of every pattern, in [`DetectorBank::all_patterns`] order.
pub fn pattern_distribution(
    s: &PureState,
    bank: &DetectorBank,
) -> Result<Vec<(ClickPattern, f64)>> {
    bank.all_patterns()
        .into_iter()
        .map(|p| {
            let prob = pattern_probability(s, &p, bank)?;
            Ok((p, prob))
        })
        .collect()
}

/// Probability of the event and the normalized post-measurement state on
/// `keep`, every other path traced out.
pub fn conditional_state(
    s: &PureState,
    event: &[ClickPattern],
    bank: &DetectorBank,
    keep: &[&str],
) -> Result<(f64, DensityOperator)> {
    let (p, rho) = conditional_state_unnormalized(s, event, bank, keep)?;
    if p <= 0.0 {
        return Err(FockError::ZeroProbability);
    }
    Ok((p, rho.normalized()?))
}

/// Like [`conditional_state`] but returns `Tr_rest[sqrt(E) rho sqrt(E)]`
/// without renormalizing; its trace is the event probability.
pub fn conditional_state_unnormalized(
    s: &PureState,
    event: &[ClickPattern],
    bank: &DetectorBank,
    keep: &[&str],
) -> Result<(f64, DensityOperator)> {
    check_normalized(s)?;
    if keep.is_empty() {
        return Err(FockError::EmptyKeep);
    }
    for p in event {
        p.check(bank)?;
    }
    let reg = s.registry();
    let det_paths = bank.path_indices(reg)?;
    let mut keep_idx: Vec<usize> = keep
        .iter()
        .map(|k| reg.path_index(k))
        .collect::<Result<_>>()?;
    keep_idx.sort_unstable();
    keep_idx.dedup();
    if let Some(d) = det_paths.iter().find(|d| keep_idx.contains(d)) {
        return Err(FockError::InvalidDetectors(format!(
            "detected path `{}` is also kept",
            reg.paths()[*d]
        )));
    }
    let rest_idx: Vec<usize> = (0..reg.num_paths())
        .filter(|p| !keep_idx.contains(p))
        .collect();

    // Terms sharing the same occupation outside `keep` stay coherent.
    let mut groups: BTreeMap<OccupationVector, (f64, BTreeMap<OccupationVector, Complex64>)> =
        BTreeMap::new();
    for (k, a) in s.terms() {
        let rest = k.restrict(&rest_idx);
        let entry = groups.entry(rest).or_insert_with(|| {
            let w = event
                .iter()
                .map(|p| outcome_weight(bank, p, k, &det_paths))
                .sum();
            (w, BTreeMap::new())
        });
        entry.1.insert(k.restrict(&keep_idx), *a);
    }
    let vectors: Vec<(f64, BTreeMap<OccupationVector, Complex64>)> =
        groups.into_values().filter(|(w, _)| *w > 0.0).collect();
    let paths = keep_idx.iter().map(|&i| reg.paths()[i].clone()).collect();
    let rho = DensityOperator::from_weighted_vectors(paths, &vectors);
    let p = rho.trace();
    Ok((p, rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::to_density;
    use crate::mode::Polarization::{H, V};
    use crate::state::{superpose, Bell, BellState};
    use std::sync::Arc;

    fn reg() -> Arc<ModeRegistry> {
        ModeRegistry::new(["2'", "4'", "x", "y", "w", "z"]).unwrap()
    }

    fn bank(eta: f64) -> DetectorBank {
        DetectorBank::new(vec![
            DetectorModel::new("D1", "x", eta).unwrap(),
            DetectorModel::new("D2", "y", eta).unwrap(),
            DetectorModel::new("D3", "w", eta).unwrap(),
            DetectorModel::new("D4", "z", eta).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn no_click_weights() {
        assert_eq!(no_click_weight(0, 0.3).unwrap(), 1.0);
        assert_eq!(no_click_weight(1, 1.0).unwrap(), 0.0);
        assert_eq!(no_click_weight(2, 0.5).unwrap(), 0.25);
        assert_eq!(
            no_click_weight(1, 0.0).unwrap_err(),
            FockError::InvalidEfficiency(0.0)
        );
        assert!(no_click_weight(1, 1.5).is_err());
    }

    #[test]
    fn bank_validation() {
        let d = |id: &str, p: &str| DetectorModel::new(id, p, 1.0).unwrap();
        assert!(DetectorBank::new(vec![d("D1", "x"), d("D1", "y")]).is_err());
        assert!(DetectorBank::new(vec![d("D1", "x"), d("D2", "x")]).is_err());
        assert!(DetectorBank::from_json(r#"[{"id":"D1","path":"x","eta":0.0}]"#).is_err());
        let b = DetectorBank::from_json(&bank(0.5).to_json().unwrap()).unwrap();
        assert_eq!(b, bank(0.5));
    }

    #[test]
    fn patterns_enumerate_and_label() {
        let b = bank(1.0);
        let all = b.all_patterns();
        assert_eq!(all.len(), 16);
        assert_eq!(all[9].label(&b), "D1+D4");
        assert_eq!(all[0].label(&b), "none");
        assert_eq!(
            ClickPattern::clicked(&b, &["D2", "D3"])
                .unwrap()
                .to_string(),
            "0110"
        );
        assert!(ClickPattern::clicked(&b, &["D9"]).is_err());
    }

    #[test]
    fn lenient_event_contains_strict_event() {
        let b = bank(1.0);
        let pairs = [("D1", "D4"), ("D2", "D3")];
        let strict = coincidence_event(&b, &pairs, CoincidenceMode::Strict).unwrap();
        let lenient = coincidence_event(&b, &pairs, CoincidenceMode::Lenient).unwrap();
        assert_eq!(strict.len(), 2);
        // 4 patterns contain D1&D4, 4 contain D2&D3, one (all clicked) contains both.
        assert_eq!(lenient.len(), 7);
        assert!(strict.iter().all(|p| lenient.contains(p)));
    }

    #[test]
    fn pattern_mismatch_rejected() {
        let r = reg();
        let s = PureState::single_photon(&r, "x", H).unwrap();
        assert!(matches!(
            pattern_probability(&s, &ClickPattern(vec![true]), &bank(1.0)),
            Err(FockError::PatternMismatch(_))
        ));
    }

    #[test]
    fn singlet_on_kept_paths_with_silent_detectors() {
        let r = reg();
        let psi = BellState::new(Bell::PsiMinus, "2'", "4'")
            .to_state(&r)
            .unwrap();
        let b = bank(1.0);
        let silent = ClickPattern::clicked(&b, &[]).unwrap();
        let (p, rho) = conditional_state(&psi, &[silent], &b, &["2'", "4'"]).unwrap();
        assert!((p - 1.0).abs() < 1e-15);
        let expect = to_density(&psi)
            .unwrap()
            .partial_trace(&["2'", "4'"])
            .unwrap();
        assert!((rho.matrix() - expect.matrix()).norm() < 1e-15);
    }

    #[test]
    fn zero_probability_event_is_an_error() {
        let r = reg();
        let psi = BellState::new(Bell::PsiMinus, "2'", "4'")
            .to_state(&r)
            .unwrap();
        let b = bank(1.0);
        let ev = ClickPattern::clicked(&b, &["D1"]).unwrap();
        assert_eq!(
            conditional_state(&psi, &[ev], &b, &["2'", "4'"]).unwrap_err(),
            FockError::ZeroProbability
        );
    }

    #[test]
    fn perfect_detector_equals_projective_measurement() {
        // One photon shared between a detected and a kept path.
        let r = reg();
        let a = PureState::single_photon(&r, "x", V).unwrap();
        let b = PureState::single_photon(&r, "2'", H).unwrap();
        let s = superpose(&[
            (Complex64::new(0.6, 0.0), &a),
            (Complex64::new(0.0, 0.8), &b),
        ])
        .unwrap();
        let bank = DetectorBank::new(vec![DetectorModel::new("D1", "x", 1.0).unwrap()]).unwrap();
        let click = ClickPattern(vec![true]);
        let silent = ClickPattern(vec![false]);
        let (pc, rc) = conditional_state(&s, &[click], &bank, &["2'"]).unwrap();
        let (ps, rs) = conditional_state(&s, &[silent], &bank, &["2'"]).unwrap();
        assert!((pc - 0.36).abs() < 1e-15 && (ps - 0.64).abs() < 1e-15);
        // Projector onto vacuum of x: kept path holds the photon.
        assert_eq!(rs.dim(), 1);
        assert!((rs.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
        assert_eq!(rs.basis()[0].counts(), &[1, 0]);
        assert_eq!(rc.basis()[0].counts(), &[0, 0]);
    }
}
