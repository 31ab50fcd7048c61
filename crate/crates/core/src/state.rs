//! Sparse pure states over a mode registry.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{FockError, Result};
use crate::mode::{ModeRegistry, OccupationVector, Polarization};

/// Amplitudes below this magnitude are dropped after every operation.
pub const PRUNE_THRESHOLD: f64 = 1e-15;

/// Tolerance on `|<s|s> - 1|` for a state flagged as normalized.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// A pure state stored as a sparse map from Fock basis labels to amplitudes.
#[derive(Debug, Clone)]
pub struct PureState {
    registry: Arc<ModeRegistry>,
    terms: BTreeMap<OccupationVector, Complex64>,
    normalized: bool,
}

impl PureState {
    pub fn vacuum(registry: &Arc<ModeRegistry>) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(registry.vacuum(), Complex64::new(1.0, 0.0));
        PureState {
            registry: registry.clone(),
            terms,
            normalized: true,
        }
    }

    pub fn zero(registry: &Arc<ModeRegistry>) -> Self {
        PureState {
            registry: registry.clone(),
            terms: BTreeMap::new(),
            normalized: false,
        }
    }

    /// One photon in the given mode, nothing elsewhere.
    pub fn single_photon(
        registry: &Arc<ModeRegistry>,
        path: &str,
        pol: Polarization,
    ) -> Result<Self> {
        let mut occ = registry.vacuum();
        occ.0[registry.mode_index(path, pol)?] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(occ, Complex64::new(1.0, 0.0));
        Ok(PureState {
            registry: registry.clone(),
            terms,
            normalized: true,
        })
    }

    /// Single photon on `path` in the polarization state `h|H> + v|V>`
    /// (not renormalized).
    pub fn polarized_photon(
        registry: &Arc<ModeRegistry>,
        path: &str,
        h: Complex64,
        v: Complex64,
    ) -> Result<Self> {
        let sh = Self::single_photon(registry, path, Polarization::H)?;
        let sv = Self::single_photon(registry, path, Polarization::V)?;
        superpose(&[(h, &sh), (v, &sv)])
    }

    /// Builds `sum_j c_j prod_k a^dag_{m_jk} |0>` from monomials of creation
    /// operators, applying the bosonic `sqrt(n!)` factors.
    pub fn from_monomials(
        registry: &Arc<ModeRegistry>,
        monomials: &[(Complex64, &[(&str, Polarization)])],
    ) -> Result<Self> {
        let mut terms: BTreeMap<OccupationVector, Complex64> = BTreeMap::new();
        for (coef, ops) in monomials {
            let mut occ = registry.vacuum();
            for (path, pol) in ops.iter() {
                occ.0[registry.mode_index(path, *pol)?] += 1;
            }
            let amp = *coef * occ.factorial_sqrt();
            *terms.entry(occ).or_default() += amp;
        }
        Self::from_terms(registry, terms)
    }

    /// Wraps raw terms after validating lengths and truncation.
    pub fn from_terms<I>(registry: &Arc<ModeRegistry>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (OccupationVector, Complex64)>,
    {
        let mut map: BTreeMap<OccupationVector, Complex64> = BTreeMap::new();
        for (occ, amp) in terms {
            if occ.len() != registry.num_modes() {
                return Err(FockError::DimensionMismatch(format!(
                    "occupation vector of length {} for {} modes",
                    occ.len(),
                    registry.num_modes()
                )));
            }
            check_truncation(&occ, registry.n_max())?;
            *map.entry(occ).or_default() += amp;
        }
        let mut s = PureState {
            registry: registry.clone(),
            terms: map,
            normalized: false,
        };
        s.prune();
        Ok(s)
    }

    pub(crate) fn from_map_unchecked(
        registry: &Arc<ModeRegistry>,
        terms: BTreeMap<OccupationVector, Complex64>,
        normalized: bool,
    ) -> Self {
        let mut s = PureState {
            registry: registry.clone(),
            terms,
            normalized,
        };
        s.prune();
        s
    }

    fn prune(&mut self) {
        self.terms.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
    }

    pub fn registry(&self) -> &Arc<ModeRegistry> {
        &self.registry
    }

    pub fn terms(&self) -> &BTreeMap<OccupationVector, Complex64> {
        &self.terms
    }

    pub fn amplitude(&self, occ: &OccupationVector) -> Complex64 {
        self.terms.get(occ).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// True for the zero vector (not the vacuum).
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn norm_sqr(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(FockError::ZeroNorm);
        }
        let mut s = self.scale(Complex64::new(1.0 / n, 0.0));
        s.normalized = true;
        Ok(s)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let terms = self.terms.iter().map(|(k, a)| (k.clone(), a * c)).collect();
        let normalized = self.normalized && (c.norm() - 1.0).abs() < NORM_TOLERANCE;
        PureState::from_map_unchecked(&self.registry, terms, normalized)
    }

    /// Set of total photon numbers carried by the stored terms.
    pub fn photon_numbers(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.terms.keys().map(|k| k.total()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Paths carrying at least one photon in some term.
    pub fn occupied_paths(&self) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.registry.num_paths())
            .filter(|&p| self.terms.keys().any(|k| k.path_count(p) > 0))
            .collect();
        out.dedup();
        out
    }

    /// Conjugate-linear in `self`, linear in `other`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        self.same_registry(other)?;
        let (small, large, flip) = if self.terms.len() <= other.terms.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, a) in &small.terms {
            if let Some(b) = large.terms.get(k) {
                acc += if flip { b.conj() * a } else { a.conj() * b };
            }
        }
        Ok(acc)
    }

    /// Product state. Occupied paths of the two factors must be disjoint.
    pub fn tensor(&self, other: &PureState) -> Result<Self> {
        self.same_registry(other)?;
        let mine = self.occupied_paths();
        if let Some(&p) = other.occupied_paths().iter().find(|p| mine.contains(p)) {
            return Err(FockError::OverlappingSupport(
                self.registry.paths()[p].clone(),
            ));
        }
        let mut terms = BTreeMap::new();
        for (k1, a1) in &self.terms {
            for (k2, a2) in &other.terms {
                let counts: Vec<u8> = k1.0.iter().zip(&k2.0).map(|(x, y)| x + y).collect();
                let occ = OccupationVector(counts);
                check_truncation(&occ, self.registry.n_max())?;
                *terms.entry(occ).or_insert(Complex64::new(0.0, 0.0)) += a1 * a2;
            }
        }
        let normalized = self.normalized && other.normalized;
        Ok(PureState::from_map_unchecked(
            &self.registry,
            terms,
            normalized,
        ))
    }

    /// `max_k |a_k - b_k|` over the union of supports.
    pub fn max_abs_diff(&self, other: &PureState) -> Result<f64> {
        self.same_registry(other)?;
        let mut worst = 0.0f64;
        for (k, a) in &self.terms {
            worst = worst.max((a - other.amplitude(k)).norm());
        }
        for (k, b) in &other.terms {
            if !self.terms.contains_key(k) {
                worst = worst.max(b.norm());
            }
        }
        Ok(worst)
    }

    /// Equality up to a global phase: the phase is taken from the overlap.
    pub fn max_abs_diff_up_to_phase(&self, other: &PureState) -> Result<f64> {
        let ov = self.inner(other)?;
        if ov.norm() == 0.0 {
            return self.max_abs_diff(other);
        }
        let phase = ov / ov.norm();
        self.scale(phase).max_abs_diff(other)
    }

    pub(crate) fn same_registry(&self, other: &PureState) -> Result<()> {
        if Arc::ptr_eq(&self.registry, &other.registry) || self.registry == other.registry {
            Ok(())
        } else {
            Err(FockError::RegistryMismatch)
        }
    }

    /// Renders the state as a ket expression, e.g. `0.7071|1_H 2_V> - ...`.
    pub fn ket_string(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        for (k, a) in &self.terms {
            let mut labels = Vec::new();
            for (m, &n) in k.0.iter().enumerate() {
                if n > 0 {
                    let mode = self.registry.mode(m);
                    if n == 1 {
                        labels.push(mode.to_string());
                    } else {
                        labels.push(format!("{}^{}", mode, n));
                    }
                }
            }
            let label = if labels.is_empty() {
                "vac".to_string()
            } else {
                labels.join(" ")
            };
            parts.push(format!("({:.6}{:+.6}i)|{}>", a.re, a.im, label));
        }
        parts.join(" + ")
    }
}

impl fmt::Display for PureState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.ket_string())
    }
}

pub(crate) fn check_truncation(occ: &OccupationVector, n_max: u32) -> Result<()> {
    let total = occ.total();
    if total > n_max {
        Err(FockError::TruncationExceeded {
            found: total,
            n_max,
        })
    } else {
        Ok(())
    }
}

/// Linear combination `sum_j c_j |s_j>`. The result is never flagged
/// normalized; call [`PureState::normalize`] explicitly.
pub fn superpose(parts: &[(Complex64, &PureState)]) -> Result<PureState> {
    let first = match parts.first() {
        Some((_, s)) => *s,
        None => return Err(FockError::DimensionMismatch("empty superposition".into())),
    };
    let mut terms: BTreeMap<OccupationVector, Complex64> = BTreeMap::new();
    for (c, s) in parts {
        first.same_registry(s)?;
        for (k, a) in &s.terms {
            *terms.entry(k.clone()).or_default() += c * a;
        }
    }
    Ok(PureState::from_map_unchecked(
        first.registry(),
        terms,
        false,
    ))
}

/// The four two-photon Bell states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bell {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl Bell {
    pub const ALL: [Bell; 4] = [Bell::PhiPlus, Bell::PhiMinus, Bell::PsiPlus, Bell::PsiMinus];

    pub fn name(self) -> &'static str {
        match self {
            Bell::PhiPlus => "phi+",
            Bell::PhiMinus => "phi-",
            Bell::PsiPlus => "psi+",
            Bell::PsiMinus => "psi-",
        }
    }
}

/// A Bell state with one photon on each of two spatial paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BellState {
    pub kind: Bell,
    pub first: String,
    pub second: String,
}

impl BellState {
    pub fn new(kind: Bell, first: impl Into<String>, second: impl Into<String>) -> Self {
        BellState {
            kind,
            first: first.into(),
            second: second.into(),
        }
    }

    /// `Phi± = (|H>|H> ± |V>|V>)/sqrt2`, `Psi± = (|H>|V> ± |V>|H>)/sqrt2`.
    pub fn to_state(&self, registry: &Arc<ModeRegistry>) -> Result<PureState> {
        use Polarization::{H, V};
        let (a, b) = (self.first.as_str(), self.second.as_str());
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let (p1, p2, sign) = match self.kind {
            Bell::PhiPlus => ((H, H), (V, V), 1.0),
            Bell::PhiMinus => ((H, H), (V, V), -1.0),
            Bell::PsiPlus => ((H, V), (V, H), 1.0),
            Bell::PsiMinus => ((H, V), (V, H), -1.0),
        };
        let t1: &[(&str, Polarization)] = &[(a, p1.0), (b, p1.1)];
        let t2: &[(&str, Polarization)] = &[(a, p2.0), (b, p2.1)];
        let mut s = PureState::from_monomials(
            registry,
            &[
                (Complex64::new(r, 0.0), t1),
                (Complex64::new(sign * r, 0.0), t2),
            ],
        )?;
        s.normalized = true;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Polarization::{H, V};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn reg() -> Arc<ModeRegistry> {
        ModeRegistry::new(["1", "2", "3", "4"]).unwrap()
    }

    #[test]
    fn single_photon_basis_vector() {
        let r = reg();
        let s = PureState::single_photon(&r, "1", V).unwrap();
        assert_eq!(s.len(), 1);
        let (k, a) = s.terms().iter().next().unwrap();
        assert_eq!(k.get(r.mode_index("1", V).unwrap()), 1);
        assert_eq!(k.total(), 1);
        assert_eq!(*a, c(1.0));
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unknown_path_is_registry_error() {
        assert_eq!(
            PureState::single_photon(&reg(), "7", H).unwrap_err(),
            FockError::UnknownPath("7".into())
        );
    }

    #[test]
    fn four_fold_tensor_has_four_photons() {
        let r = reg();
        let mut s = PureState::vacuum(&r);
        for p in ["1", "2", "3", "4"] {
            s = s
                .tensor(&PureState::single_photon(&r, p, H).unwrap())
                .unwrap();
        }
        assert_eq!(s.photon_numbers(), vec![4]);
        assert!(s.is_normalized());
    }

    #[test]
    fn superposition_and_cancellation() {
        let r = reg();
        let h = PureState::single_photon(&r, "1", H).unwrap();
        let v = PureState::single_photon(&r, "1", V).unwrap();
        let s = superpose(&[(c(0.5f64.sqrt()), &h), (c(0.5f64.sqrt()), &v)]).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
        assert!(!s.is_normalized());
        let z = superpose(&[(c(1.0), &h), (c(-1.0), &h)]).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.normalize().unwrap_err(), FockError::ZeroNorm);
    }

    #[test]
    fn tilted_vertical_photon_after_normalization() {
        let r = reg();
        let eps = 0.05;
        let h = PureState::single_photon(&r, "1", H).unwrap();
        let v = PureState::single_photon(&r, "1", V).unwrap();
        let s = superpose(&[(c(eps), &h), (c(-1.0), &v)])
            .unwrap()
            .normalize()
            .unwrap();
        let n = 1.0 / (1.0 + eps * eps).sqrt();
        assert!((s.amplitude(h.terms().keys().next().unwrap()) - c(eps * n)).norm() < 1e-15);
        assert!((s.amplitude(v.terms().keys().next().unwrap()) - c(-n)).norm() < 1e-15);
    }

    #[test]
    fn vacuum_is_tensor_identity() {
        let r = reg();
        let s = PureState::polarized_photon(&r, "2", c(0.6), c(0.8)).unwrap();
        let t = PureState::vacuum(&r).tensor(&s).unwrap();
        assert!(t.max_abs_diff(&s).unwrap() < 1e-15);
    }

    #[test]
    fn tensor_rejects_overlap() {
        let r = reg();
        let a = PureState::single_photon(&r, "1", H).unwrap();
        let b = PureState::single_photon(&r, "1", V).unwrap();
        assert!(matches!(
            a.tensor(&b),
            Err(FockError::OverlappingSupport(_))
        ));
    }

    #[test]
    fn bell_orthonormality() {
        let r = reg();
        for (i, x) in Bell::ALL.iter().enumerate() {
            for (j, y) in Bell::ALL.iter().enumerate() {
                let a = BellState::new(*x, "1", "3").to_state(&r).unwrap();
                let b = BellState::new(*y, "1", "3").to_state(&r).unwrap();
                let ip = a.inner(&b).unwrap();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ip - c(expect)).norm() < 1e-15, "{x:?} {y:?}");
            }
        }
    }

    #[test]
    fn from_monomials_applies_bosonic_factor() {
        let r = reg();
        let ops: &[(&str, Polarization)] = &[("1", H), ("1", H)];
        let s = PureState::from_monomials(&r, &[(c(1.0), ops)]).unwrap();
        assert!((s.norm_sqr() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn truncation_enforced() {
        let r = ModeRegistry::with_n_max(["1", "2"], 1).unwrap();
        let a = PureState::single_photon(&r, "1", H).unwrap();
        let b = PureState::single_photon(&r, "2", H).unwrap();
        assert_eq!(
            a.tensor(&b).unwrap_err(),
            FockError::TruncationExceeded { found: 2, n_max: 1 }
        );
    }
}
