//! Density operators on a subset of spatial paths, stored densely over an
//! explicit list of Fock basis labels.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{FockError, Result};
use crate::mode::OccupationVector;
use crate::state::{PureState, NORM_TOLERANCE};

/// Fidelities inside `[-FIDELITY_CLAMP, 1 + FIDELITY_CLAMP]` are clamped to
/// `[0, 1]`; anything further out is an error.
pub const FIDELITY_CLAMP: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    /// Sorted spatial paths; each contributes an H and a V mode.
    paths: Vec<String>,
    /// Occupation vectors over `paths` (length `2 * paths.len()`), sorted.
    basis: Vec<OccupationVector>,
    matrix: DMatrix<Complex64>,
}

impl DensityOperator {
    pub fn from_parts(
        paths: Vec<String>,
        basis: Vec<OccupationVector>,
        matrix: DMatrix<Complex64>,
    ) -> Result<Self> {
        let mut sorted = paths.clone();
        sorted.sort();
        sorted.dedup();
        if sorted != paths {
            return Err(FockError::DimensionMismatch(
                "paths must be sorted and unique".into(),
            ));
        }
        if matrix.nrows() != basis.len() || matrix.ncols() != basis.len() {
            return Err(FockError::DimensionMismatch(format!(
                "{}x{} matrix for a basis of {}",
                matrix.nrows(),
                matrix.ncols(),
                basis.len()
            )));
        }
        if basis.iter().any(|b| b.len() != 2 * paths.len()) {
            return Err(FockError::DimensionMismatch("basis vector length".into()));
        }
        if basis.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FockError::DimensionMismatch(
                "basis must be sorted and unique".into(),
            ));
        }
        Ok(DensityOperator {
            paths,
            basis,
            matrix,
        })
    }

    /// `sum_j w_j |v_j><v_j|` where each vector is given sparsely over `paths`.
    pub(crate) fn from_weighted_vectors(
        paths: Vec<String>,
        vectors: &[(f64, BTreeMap<OccupationVector, Complex64>)],
    ) -> Self {
        let basis: Vec<OccupationVector> = vectors
            .iter()
            .flat_map(|(_, v)| v.keys().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: BTreeMap<&OccupationVector, usize> =
            basis.iter().enumerate().map(|(i, b)| (b, i)).collect();
        let mut matrix = DMatrix::zeros(basis.len(), basis.len());
        for (w, v) in vectors {
            let entries: Vec<(usize, Complex64)> = v.iter().map(|(k, a)| (index[k], *a)).collect();
            for &(i, a) in &entries {
                for &(j, b) in &entries {
                    matrix[(i, j)] += a * b.conj() * *w;
                }
            }
        }
        DensityOperator {
            paths,
            basis,
            matrix,
        }
    }

    pub fn paths(&self) -> &[String] {
        &self.paths
    }

    pub fn basis(&self) -> &[OccupationVector] {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Largest `|rho_ij - conj(rho_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        if self.dim() == 0 {
            return Vec::new();
        }
        let herm = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = nalgebra::SymmetricEigen::new(herm);
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        vals
    }

    pub fn normalized(&self) -> Result<Self> {
        let t = self.trace();
        if t <= 0.0 {
            return Err(FockError::ZeroProbability);
        }
        let mut out = self.clone();
        out.matrix /= Complex64::new(t, 0.0);
        Ok(out)
    }

    /// Entry lookup by basis labels; zero outside the stored basis.
    pub fn element(&self, row: &OccupationVector, col: &OccupationVector) -> Complex64 {
        match (self.basis.binary_search(row), self.basis.binary_search(col)) {
            (Ok(i), Ok(j)) => self.matrix[(i, j)],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// Reduced operator on `keep`, tracing out every other path.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<Self> {
        if keep.is_empty() {
            return Err(FockError::EmptyKeep);
        }
        let mut keep_idx = Vec::new();
        for k in keep {
            let i = self
                .paths
                .iter()
                .position(|p| p == k)
                .ok_or_else(|| FockError::UnknownPath(k.to_string()))?;
            keep_idx.push(i);
        }
        keep_idx.sort_unstable();
        keep_idx.dedup();
        let rest_idx: Vec<usize> = (0..self.paths.len())
            .filter(|i| !keep_idx.contains(i))
            .collect();

        let kept: Vec<OccupationVector> =
            self.basis.iter().map(|b| b.restrict(&keep_idx)).collect();
        let rest: Vec<OccupationVector> =
            self.basis.iter().map(|b| b.restrict(&rest_idx)).collect();
        let new_basis: Vec<OccupationVector> = kept
            .iter()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut matrix = DMatrix::zeros(new_basis.len(), new_basis.len());
        let pos: Vec<usize> = kept
            .iter()
            .map(|k| new_basis.binary_search(k).expect("kept label"))
            .collect();
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if rest[i] == rest[j] {
                    matrix[(pos[i], pos[j])] += self.matrix[(i, j)];
                }
            }
        }
        let paths = keep_idx.iter().map(|&i| self.paths[i].clone()).collect();
        Ok(DensityOperator {
            paths,
            basis: new_basis,
            matrix,
        })
    }

    /// `<psi|rho|psi>`, with `psi` given on a registry containing this
    /// operator's paths and carrying no photons anywhere else.
    pub fn fidelity_pure(&self, psi: &PureState) -> Result<f64> {
        let reg = psi.registry();
        if (psi.norm_sqr() - 1.0).abs() > NORM_TOLERANCE {
            return Err(FockError::NotNormalized(psi.norm_sqr()));
        }
        let idx: Vec<usize> = self
            .paths
            .iter()
            .map(|p| reg.path_index(p))
            .collect::<Result<_>>()?;
        let mut vec: Vec<(usize, Complex64)> = Vec::new();
        for (k, a) in psi.terms() {
            let outside: u32 = (0..reg.num_paths())
                .filter(|p| !idx.contains(p))
                .map(|p| k.path_count(p))
                .sum();
            if outside > 0 {
                return Err(FockError::DimensionMismatch(
                    "target state occupies paths outside the operator".into(),
                ));
            }
            if let Ok(i) = self.basis.binary_search(&k.restrict(&idx)) {
                vec.push((i, *a));
            }
        }
        let mut f = Complex64::new(0.0, 0.0);
        for &(i, a) in &vec {
            for &(j, b) in &vec {
                f += a.conj() * self.matrix[(i, j)] * b;
            }
        }
        clamp_fidelity(f.re)
    }
}

fn clamp_fidelity(f: f64) -> Result<f64> {
    if !(-FIDELITY_CLAMP..=1.0 + FIDELITY_CLAMP).contains(&f) || f.is_nan() {
        return Err(FockError::FidelityOutOfRange(f));
    }
    Ok(f.clamp(0.0, 1.0))
}

/// `|s><s|` over every path of the state's registry.
pub fn to_density(s: &PureState) -> Result<DensityOperator> {
    let n2 = s.norm_sqr();
    if (n2 - 1.0).abs() > NORM_TOLERANCE {
        return Err(FockError::NotNormalized(n2));
    }
    let paths = s.registry().paths().to_vec();
    Ok(DensityOperator::from_weighted_vectors(
        paths,
        &[(1.0, s.terms().clone())],
    ))
}

/// Convex combination of operators on the same paths.
pub fn mix(parts: &[(f64, &DensityOperator)]) -> Result<DensityOperator> {
    let first = parts
        .first()
        .ok_or_else(|| FockError::DimensionMismatch("empty mixture".into()))?
        .1;
    let mut total = 0.0;
    for (p, rho) in parts {
        if *p < 0.0 {
            return Err(FockError::NegativeProbability(*p));
        }
        if rho.paths != first.paths {
            return Err(FockError::DimensionMismatch(
                "mixture over different paths".into(),
            ));
        }
        total += p;
    }
    if (total - 1.0).abs() > NORM_TOLERANCE {
        return Err(FockError::ProbabilitySum(total));
    }
    let basis: Vec<OccupationVector> = parts
        .iter()
        .flat_map(|(_, r)| r.basis.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut matrix = DMatrix::zeros(basis.len(), basis.len());
    for (p, rho) in parts {
        let pos: Vec<usize> = rho
            .basis
            .iter()
            .map(|b| basis.binary_search(b).expect("merged basis"))
            .collect();
        for i in 0..rho.dim() {
            for j in 0..rho.dim() {
                matrix[(pos[i], pos[j])] += rho.matrix[(i, j)] * *p;
            }
        }
    }
    Ok(DensityOperator {
        paths: first.paths.clone(),
        basis,
        matrix,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode::ModeRegistry;
    use crate::state::{Bell, BellState};
    use std::sync::Arc;

    fn reg() -> Arc<ModeRegistry> {
        ModeRegistry::new(["1'", "2'", "3'", "4'"]).unwrap()
    }

    fn bell(kind: Bell, a: &str, b: &str) -> PureState {
        BellState::new(kind, a, b).to_state(&reg()).unwrap()
    }

    #[test]
    fn pure_projector_properties() {
        let rho = to_density(&bell(Bell::PsiMinus, "2'", "4'")).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-14);
        assert!((rho.purity() - 1.0).abs() < 1e-14);
        let ev = rho.eigenvalues();
        assert!((ev[0] - 1.0).abs() < 1e-12);
        assert!(ev[1..].iter().all(|e| e.abs() < 1e-12));
        assert!(
            (rho.fidelity_pure(&bell(Bell::PsiMinus, "2'", "4'"))
                .unwrap()
                - 1.0)
                .abs()
                < 1e-12
        );
        assert!(
            rho.fidelity_pure(&bell(Bell::PsiPlus, "2'", "4'"))
                .unwrap()
                .abs()
                < 1e-12
        );
    }

    #[test]
    fn even_mixture_of_orthogonal_projectors() {
        let a = to_density(&bell(Bell::PsiMinus, "1'", "3'")).unwrap();
        let b = to_density(&bell(Bell::PhiPlus, "1'", "3'")).unwrap();
        let m = mix(&[(0.5, &a), (0.5, &b)]).unwrap();
        let ev = m.eigenvalues();
        assert!((ev[0] - 0.5).abs() < 1e-12 && (ev[1] - 0.5).abs() < 1e-12);
        assert!(ev[2..].iter().all(|e| e.abs() < 1e-12));
        assert_eq!(
            mix(&[(-0.1, &a), (1.1, &b)]).unwrap_err(),
            FockError::NegativeProbability(-0.1)
        );
        assert!(matches!(
            mix(&[(0.4, &a), (0.4, &b)]),
            Err(FockError::ProbabilitySum(_))
        ));
    }

    #[test]
    fn partial_trace_over_nothing_is_identity() {
        let rho = to_density(&bell(Bell::PsiMinus, "1'", "3'")).unwrap();
        let all: Vec<&str> = rho.paths().iter().map(String::as_str).collect();
        let same = rho.partial_trace(&all).unwrap();
        assert_eq!(same, rho);
        assert_eq!(rho.partial_trace(&[]).unwrap_err(), FockError::EmptyKeep);
    }

    #[test]
    fn partial_trace_of_product_of_singlets() {
        let r = reg();
        let s = BellState::new(Bell::PsiMinus, "1'", "3'")
            .to_state(&r)
            .unwrap()
            .tensor(
                &BellState::new(Bell::PsiMinus, "2'", "4'")
                    .to_state(&r)
                    .unwrap(),
            )
            .unwrap();
        let red = to_density(&s)
            .unwrap()
            .partial_trace(&["2'", "4'"])
            .unwrap();
        assert_eq!(red.paths(), &["2'", "4'"]);
        assert!((red.trace() - 1.0).abs() < 1e-12);
        assert!(red.hermiticity_error() < 1e-12);
        assert!(
            (red.fidelity_pure(&bell(Bell::PsiMinus, "2'", "4'"))
                .unwrap()
                - 1.0)
                .abs()
                < 1e-12
        );
        assert!((red.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reduced_bell_state_is_maximally_mixed() {
        let red = to_density(&bell(Bell::PhiPlus, "1'", "3'"))
            .unwrap()
            .partial_trace(&["1'"])
            .unwrap();
        let ev = red.eigenvalues();
        assert_eq!(ev.len(), 2);
        assert!((ev[0] - 0.5).abs() < 1e-12 && (ev[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fidelity_rejects_target_outside_paths() {
        let red = to_density(&bell(Bell::PhiPlus, "1'", "3'"))
            .unwrap()
            .partial_trace(&["1'", "3'"])
            .unwrap();
        assert!(matches!(
            red.fidelity_pure(&bell(Bell::PsiMinus, "2'", "4'")),
            Err(FockError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn unnormalized_state_rejected() {
        let s = bell(Bell::PhiPlus, "1'", "3'").scale(Complex64::new(2.0, 0.0));
        assert!(matches!(to_density(&s), Err(FockError::NotNormalized(_))));
    }
}
