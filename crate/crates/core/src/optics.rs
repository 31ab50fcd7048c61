//! Passive linear-optical elements acting on sparse Fock states.
//!
//! Every element is a linear substitution of creation operators,
//! `a_j^dag -> sum_i T_ij b_i^dag`, applied term by term with the bosonic
//! `sqrt(n!)` bookkeeping. Elements relabel paths: the inputs are consumed
//! and the outputs are produced, unless an element is declared in place
//! (outputs equal to inputs).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FockError, Result};
use crate::mode::{ModeRegistry, OccupationVector, Polarization};
use crate::state::{check_truncation, PureState};

const UNITARITY_TOLERANCE: f64 = 1e-12;

/// A 2x2 unitary acting on a pair of creation operators. Column `j` holds the
/// image of input `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix(pub [[Complex64; 2]; 2]);

impl TransferMatrix {
    /// `(1/sqrt2) [[1, 1], [1, -1]]`: the balanced beam splitter and the
    /// half-wave plate share it.
    pub fn hadamard() -> Self {
        let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        TransferMatrix([[r, r], [r, -r]])
    }

    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self> {
        let t = TransferMatrix(m);
        if t.unitarity_error() > UNITARITY_TOLERANCE {
            return Err(FockError::InvalidElement(
                "transfer matrix is not unitary".into(),
            ));
        }
        Ok(t)
    }

    /// Real rotation `[[cos, -sin], [sin, cos]]`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        TransferMatrix([
            [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
            [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
        ])
    }

    /// `max |(T^dag T - I)_ij|`.
    pub fn unitarity_error(&self) -> f64 {
        let m = &self.0;
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..2 {
                    acc += m[k][i].conj() * m[k][j];
                }
                let id = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((acc - id).norm());
            }
        }
        worst
    }
}

/// Substitution rules for one element: each listed input mode is replaced by
/// a linear combination of output modes.
#[derive(Debug, Clone)]
struct ModeMap {
    rules: Vec<(usize, Vec<(usize, Complex64)>)>,
    /// Output paths that must be empty beforehand (relabeling targets).
    fresh_outputs: Vec<usize>,
}

fn apply_mode_map(s: &PureState, map: &ModeMap) -> Result<PureState> {
    let reg = s.registry();
    for occ in s.terms().keys() {
        if let Some(&p) = map.fresh_outputs.iter().find(|&&p| occ.path_count(p) > 0) {
            return Err(FockError::OutputOccupied(reg.paths()[p].clone()));
        }
    }
    let mut out: BTreeMap<OccupationVector, Complex64> = BTreeMap::new();
    for (occ, amp) in s.terms() {
        let mut base = occ.counts().to_vec();
        let mut photons: Vec<usize> = Vec::new();
        for (m, _) in &map.rules {
            for _ in 0..base[*m] {
                photons.push(*m);
            }
            base[*m] = 0;
        }
        let mut poly: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
        poly.insert(base, Complex64::new(1.0, 0.0));
        for m in photons {
            let images = &map.rules.iter().find(|(src, _)| *src == m).expect("rule").1;
            let mut next: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
            for (mono, c) in &poly {
                for &(k, u) in images {
                    let mut mono2 = mono.clone();
                    mono2[k] += 1;
                    *next.entry(mono2).or_default() += c * u;
                }
            }
            poly = next;
        }
        let in_norm = occ.factorial_sqrt();
        for (mono, c) in poly {
            let occ_out = OccupationVector::from_counts(mono);
            check_truncation(&occ_out, reg.n_max())?;
            let a = amp * c * (occ_out.factorial_sqrt() / in_norm);
            *out.entry(occ_out).or_default() += a;
        }
    }
    Ok(PureState::from_map_unchecked(reg, out, s.is_normalized()))
}

fn fresh(inputs: &[usize], outputs: &[usize]) -> Vec<usize> {
    outputs
        .iter()
        .copied()
        .filter(|o| !inputs.contains(o))
        .collect()
}

/// Balanced beam splitter with the Hadamard convention: the H and V operator
/// pairs are mixed identically, `a -> (a' + b')/sqrt2`, `b -> (a' - b')/sqrt2`,
/// with `a` the first input and `a'` the first output.
pub fn apply_beamsplitter(
    s: &PureState,
    in_a: &str,
    in_b: &str,
    out_a: &str,
    out_b: &str,
) -> Result<PureState> {
    apply_beamsplitter_with(s, &TransferMatrix::hadamard(), in_a, in_b, out_a, out_b)
}

/// Two-port coupler with an arbitrary polarization-independent transfer matrix.
pub fn apply_beamsplitter_with(
    s: &PureState,
    t: &TransferMatrix,
    in_a: &str,
    in_b: &str,
    out_a: &str,
    out_b: &str,
) -> Result<PureState> {
    let reg = s.registry();
    let ins = [reg.path_index(in_a)?, reg.path_index(in_b)?];
    let outs = [reg.path_index(out_a)?, reg.path_index(out_b)?];
    let mut rules = Vec::new();
    for pol in Polarization::BOTH {
        for j in 0..2 {
            let images = (0..2)
                .map(|i| (2 * outs[i] + pol.index(), t.0[i][j]))
                .collect();
            rules.push((2 * ins[j] + pol.index(), images));
        }
    }
    apply_mode_map(
        s,
        &ModeMap {
            rules,
            fresh_outputs: fresh(&ins, &outs),
        },
    )
}

/// Polarizing beam splitter: H is transmitted (`in1 -> out1`, `in2 -> out2`),
/// V is reflected (`in1 -> out2`, `in2 -> out1`), all with unit coefficient.
/// With `in2 = None` the element splits a single beam by polarization.
pub fn apply_pbs(
    s: &PureState,
    in1: &str,
    in2: Option<&str>,
    out1: &str,
    out2: &str,
) -> Result<PureState> {
    let reg = s.registry();
    let one = Complex64::new(1.0, 0.0);
    let i1 = reg.path_index(in1)?;
    let o1 = reg.path_index(out1)?;
    let o2 = reg.path_index(out2)?;
    let (h, v) = (Polarization::H.index(), Polarization::V.index());
    let mut rules = vec![
        (2 * i1 + h, vec![(2 * o1 + h, one)]),
        (2 * i1 + v, vec![(2 * o2 + v, one)]),
    ];
    let mut ins = vec![i1];
    if let Some(in2) = in2 {
        let i2 = reg.path_index(in2)?;
        rules.push((2 * i2 + h, vec![(2 * o2 + h, one)]));
        rules.push((2 * i2 + v, vec![(2 * o1 + v, one)]));
        ins.push(i2);
    }
    apply_mode_map(
        s,
        &ModeMap {
            rules,
            fresh_outputs: fresh(&ins, &[o1, o2]),
        },
    )
}

/// Half-wave plate acting as the Hadamard on polarization:
/// `|H> -> (|H> + |V>)/sqrt2`, `|V> -> (|H> - |V>)/sqrt2`.
pub fn apply_hwp(s: &PureState, path: &str) -> Result<PureState> {
    apply_hwp_to(s, path, path)
}

/// Half-wave plate that also relabels its beam.
pub fn apply_hwp_to(s: &PureState, input: &str, output: &str) -> Result<PureState> {
    let reg = s.registry();
    let i = reg.path_index(input)?;
    let o = reg.path_index(output)?;
    let t = TransferMatrix::hadamard();
    let rules = Polarization::BOTH
        .iter()
        .map(|p| {
            let j = p.index();
            (2 * i + j, (0..2).map(|k| (2 * o + k, t.0[k][j])).collect())
        })
        .collect();
    apply_mode_map(
        s,
        &ModeMap {
            rules,
            fresh_outputs: fresh(&[i], &[o]),
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ElementKind {
    #[serde(rename = "BS")]
    BeamSplitter,
    #[serde(rename = "PBS")]
    PolarizingBeamSplitter,
    #[serde(rename = "HWP")]
    HalfWavePlate,
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ElementKind::BeamSplitter => "BS",
            ElementKind::PolarizingBeamSplitter => "PBS",
            ElementKind::HalfWavePlate => "HWP",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementSpec {
    pub kind: ElementKind,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl ElementSpec {
    pub fn new(kind: ElementKind, inputs: &[&str], outputs: &[&str]) -> Self {
        ElementSpec {
            kind,
            inputs: inputs.iter().map(|s| s.to_string()).collect(),
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn bs(a: &str, b: &str, out_a: &str, out_b: &str) -> Self {
        Self::new(ElementKind::BeamSplitter, &[a, b], &[out_a, out_b])
    }

    pub fn pbs(inputs: &[&str], out1: &str, out2: &str) -> Self {
        Self::new(ElementKind::PolarizingBeamSplitter, inputs, &[out1, out2])
    }

    pub fn hwp(path: &str) -> Self {
        Self::new(ElementKind::HalfWavePlate, &[path], &[path])
    }

    /// Checks arity, path registration, and that outputs are either disjoint
    /// from the inputs or identical to them (in place).
    pub fn validate(&self, registry: &ModeRegistry) -> Result<()> {
        let (ins, outs): (&[usize], &[usize]) = match self.kind {
            ElementKind::BeamSplitter => (&[2], &[2]),
            ElementKind::PolarizingBeamSplitter => (&[1, 2], &[2]),
            ElementKind::HalfWavePlate => (&[1], &[1]),
        };
        if !ins.contains(&self.inputs.len()) || !outs.contains(&self.outputs.len()) {
            return Err(FockError::InvalidElement(format!(
                "{} takes {:?} inputs and {:?} outputs, got {} and {}",
                self.kind,
                ins,
                outs,
                self.inputs.len(),
                self.outputs.len()
            )));
        }
        for p in self.inputs.iter().chain(&self.outputs) {
            registry.path_index(p)?;
        }
        let dup = |v: &[String]| v.len() == 2 && v[0] == v[1];
        if dup(&self.inputs) || dup(&self.outputs) {
            return Err(FockError::InvalidElement(format!(
                "{} repeats a path",
                self.kind
            )));
        }
        let in_place = self.inputs == self.outputs;
        let overlap = self.outputs.iter().any(|o| self.inputs.contains(o));
        if overlap && !in_place {
            return Err(FockError::InvalidElement(format!(
                "{} outputs {:?} partially overlap inputs {:?}",
                self.kind, self.outputs, self.inputs
            )));
        }
        Ok(())
    }

    pub fn apply(&self, s: &PureState) -> Result<PureState> {
        self.validate(s.registry())?;
        let i = &self.inputs;
        let o = &self.outputs;
        match self.kind {
            ElementKind::BeamSplitter => apply_beamsplitter(s, &i[0], &i[1], &o[0], &o[1]),
            ElementKind::PolarizingBeamSplitter => {
                apply_pbs(s, &i[0], i.get(1).map(String::as_str), &o[0], &o[1])
            }
            ElementKind::HalfWavePlate => apply_hwp_to(s, &i[0], &o[0]),
        }
    }
}

/// Ordered list of elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub elements: Vec<ElementSpec>,
}

impl Circuit {
    pub fn new(elements: Vec<ElementSpec>) -> Self {
        Circuit {
            name: None,
            elements,
        }
    }

    pub fn named(name: &str, elements: Vec<ElementSpec>) -> Self {
        Circuit {
            name: Some(name.to_string()),
            elements,
        }
    }

    /// Every path referenced by an element, sorted and deduplicated.
    pub fn paths(&self) -> Vec<String> {
        let mut v: Vec<String> = self
            .elements
            .iter()
            .flat_map(|e| e.inputs.iter().chain(&e.outputs).cloned())
            .collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn validate(&self, registry: &ModeRegistry) -> Result<()> {
        for (n, e) in self.elements.iter().enumerate() {
            e.validate(registry)
                .map_err(|err| FockError::InvalidElement(format!("element {n}: {err}")))?;
        }
        Ok(())
    }

    /// Splits after the first `n` elements.
    pub fn split_at(&self, n: usize) -> (Circuit, Circuit) {
        let (a, b) = self.elements.split_at(n.min(self.elements.len()));
        (Circuit::new(a.to_vec()), Circuit::new(b.to_vec()))
    }

    /// Accepts either `{ "name": ..., "elements": [...] }` or a bare element
    /// array.
    pub fn from_json(text: &str) -> Result<Self> {
        if text.trim_start().starts_with('[') {
            Ok(Circuit::new(serde_json::from_str(text)?))
        } else {
            Ok(serde_json::from_str(text)?)
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Applies the elements in order.
pub fn apply_circuit(s: &PureState, circuit: &Circuit) -> Result<PureState> {
    circuit.validate(s.registry())?;
    let mut out = s.clone();
    for e in &circuit.elements {
        out = e.apply(&out)?;
    }
    Ok(out)
}

/// Registry covering every path a circuit touches plus `extra`.
pub fn registry_for(circuit: &Circuit, extra: &[&str], n_max: u32) -> Result<Arc<ModeRegistry>> {
    let mut paths = circuit.paths();
    paths.extend(extra.iter().map(|s| s.to_string()));
    paths.sort();
    paths.dedup();
    ModeRegistry::with_n_max(paths, n_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{superpose, Bell, BellState};
    use Polarization::{H, V};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn reg() -> Arc<ModeRegistry> {
        ModeRegistry::new(["1'", "3'", "1''", "3''", "x", "y", "w", "z"]).unwrap()
    }

    fn mono(r: &Arc<ModeRegistry>, terms: &[(f64, &[(&str, Polarization)])]) -> PureState {
        let t: Vec<(Complex64, &[(&str, Polarization)])> =
            terms.iter().map(|(a, m)| (c(*a), *m)).collect();
        PureState::from_monomials(r, &t).unwrap()
    }

    #[test]
    fn hadamard_is_unitary_and_involutive() {
        let t = TransferMatrix::hadamard();
        assert!(t.unitarity_error() < 1e-15);
        assert!(TransferMatrix::new([[c(1.0), c(1.0)], [c(1.0), c(1.0)]]).is_err());
    }

    #[test]
    fn hong_ou_mandel_bunching_signs() {
        let r = reg();
        let input = mono(&r, &[(1.0, &[("1'", H), ("3'", H)])]);
        let out = apply_beamsplitter(&input, "1'", "3'", "1''", "3''").unwrap();
        // (a + b)(a - b)/2 = (a^2 - b^2)/2 -> (|2H>_1'' - |2H>_3'')/sqrt2
        let expect = mono(
            &r,
            &[
                (0.5, &[("1''", H), ("1''", H)]),
                (-0.5, &[("3''", H), ("3''", H)]),
            ],
        );
        assert!(out.max_abs_diff(&expect).unwrap() < 1e-15);
        let k = out.terms().keys().next().unwrap();
        assert_eq!(k.total(), 2);
        assert!((out.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn singlet_survives_the_beam_splitter() {
        let r = reg();
        let psi = BellState::new(Bell::PsiMinus, "1'", "3'")
            .to_state(&r)
            .unwrap();
        let out = apply_beamsplitter(&psi, "1'", "3'", "1''", "3''").unwrap();
        let expect = BellState::new(Bell::PsiMinus, "1''", "3''")
            .to_state(&r)
            .unwrap();
        assert!(out.max_abs_diff_up_to_phase(&expect).unwrap() < 1e-14);
        // det of the Hadamard is -1, which the singlet picks up as a global sign.
        assert!((out.inner(&expect).unwrap() + 1.0).norm() < 1e-14);
    }

    #[test]
    fn pbs_routes_by_polarization() {
        let r = reg();
        let s = superpose(&[
            (c(0.6), &PureState::single_photon(&r, "1''", H).unwrap()),
            (c(0.8), &PureState::single_photon(&r, "1''", V).unwrap()),
        ])
        .unwrap();
        let out = apply_pbs(&s, "1''", None, "x", "y").unwrap();
        let expect = superpose(&[
            (c(0.6), &PureState::single_photon(&r, "x", H).unwrap()),
            (c(0.8), &PureState::single_photon(&r, "y", V).unwrap()),
        ])
        .unwrap();
        assert_eq!(out.max_abs_diff(&expect).unwrap(), 0.0);
    }

    #[test]
    fn hwp_twice_is_identity() {
        let r = reg();
        let s = mono(
            &r,
            &[(0.6, &[("x", H), ("x", V)]), (0.8, &[("x", V), ("x", V)])],
        );
        let twice = apply_hwp(&apply_hwp(&s, "x").unwrap(), "x").unwrap();
        assert!(twice.max_abs_diff(&s).unwrap() < 1e-14);
    }

    #[test]
    fn relabeling_onto_occupied_output_fails() {
        let r = reg();
        let s = PureState::single_photon(&r, "1''", H).unwrap();
        assert_eq!(
            apply_beamsplitter(&s, "1'", "3'", "1''", "3''").unwrap_err(),
            FockError::OutputOccupied("1''".into())
        );
        assert!(matches!(apply_hwp(&s, "q"), Err(FockError::UnknownPath(_))));
    }

    #[test]
    fn element_validation() {
        let r = reg();
        assert!(ElementSpec::bs("1'", "3'", "1''", "3''")
            .validate(&r)
            .is_ok());
        assert!(ElementSpec::bs("1'", "3'", "1'", "3'").validate(&r).is_ok());
        assert!(ElementSpec::bs("1'", "3'", "1'", "x").validate(&r).is_err());
        assert!(
            ElementSpec::new(ElementKind::BeamSplitter, &["1'"], &["x", "y"])
                .validate(&r)
                .is_err()
        );
        assert!(ElementSpec::hwp("nowhere").validate(&r).is_err());
    }

    #[test]
    fn empty_circuit_is_identity() {
        let r = reg();
        let s = PureState::single_photon(&r, "x", V).unwrap();
        let out = apply_circuit(&s, &Circuit::new(vec![])).unwrap();
        assert_eq!(out.max_abs_diff(&s).unwrap(), 0.0);
    }

    #[test]
    fn circuit_json_accepts_bare_and_named_forms() {
        let bare = r#"[{"kind":"BS","inputs":["1'","3'"],"outputs":["1''","3''"]},
                       {"kind":"HWP","inputs":["1''"],"outputs":["1''"]}]"#;
        let c1 = Circuit::from_json(bare).unwrap();
        assert_eq!(c1.elements.len(), 2);
        let c2 = Circuit::from_json(
            &Circuit::named("demo", c1.elements.clone())
                .to_json()
                .unwrap(),
        )
        .unwrap();
        assert_eq!(c2.elements, c1.elements);
        assert_eq!(c2.name.as_deref(), Some("demo"));
        assert!(Circuit::from_json(r#"[{"kind":"XX","inputs":[],"outputs":[]}]"#).is_err());
    }
}
