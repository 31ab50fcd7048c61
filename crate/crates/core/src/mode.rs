//! Mode bookkeeping: polarizations, spatial paths and the occupation-number
//! labels of the Fock basis.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{FockError, Result};

/// Default photon-number truncation; four single photons enter the heralding
/// circuit, so nothing above four photons is ever generated.
pub const DEFAULT_N_MAX: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::H, Polarization::V];

    pub fn index(self) -> usize {
        match self {
            Polarization::H => 0,
            Polarization::V => 1,
        }
    }
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarization::H => write!(f, "H"),
            Polarization::V => write!(f, "V"),
        }
    }
}

/// A field mode: one polarization of one spatial path.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mode {
    pub path: String,
    pub pol: Polarization,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.path, self.pol)
    }
}

/// Ordered set of spatial paths. Every path carries an H and a V mode; mode
/// `2 * i + pol` belongs to path `i`. Paths are kept sorted lexicographically,
/// so the mode order is lexicographic in `(path, pol)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeRegistry {
    paths: Vec<String>,
    n_max: u32,
}

impl ModeRegistry {
    pub fn new<I, S>(paths: I) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::with_n_max(paths, DEFAULT_N_MAX)
    }

    pub fn with_n_max<I, S>(paths: I, n_max: u32) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut paths: Vec<String> = paths.into_iter().map(Into::into).collect();
        paths.sort();
        for w in paths.windows(2) {
            if w[0] == w[1] {
                return Err(FockError::DuplicatePath(w[0].clone()));
            }
        }
        Ok(Arc::new(ModeRegistry { paths, n_max }))
    }

    pub fn paths(&self) -> &[String] {
        &self.paths
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn num_modes(&self) -> usize {
        2 * self.paths.len()
    }

    pub fn path_index(&self, path: &str) -> Result<usize> {
        self.paths
            .binary_search_by(|p| p.as_str().cmp(path))
            .map_err(|_| FockError::UnknownPath(path.to_string()))
    }

    pub fn mode_index(&self, path: &str, pol: Polarization) -> Result<usize> {
        Ok(2 * self.path_index(path)? + pol.index())
    }

    pub fn mode(&self, index: usize) -> Mode {
        Mode {
            path: self.paths[index / 2].clone(),
            pol: if index.is_multiple_of(2) {
                Polarization::H
            } else {
                Polarization::V
            },
        }
    }

    pub fn contains(&self, path: &str) -> bool {
        self.path_index(path).is_ok()
    }

    pub fn vacuum(&self) -> OccupationVector {
        OccupationVector(vec![0; self.num_modes()])
    }
}

/// Photon counts per registered mode.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OccupationVector(pub(crate) Vec<u8>);

impl OccupationVector {
    pub fn from_counts(counts: Vec<u8>) -> Self {
        OccupationVector(counts)
    }

    pub fn counts(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, mode: usize) -> u8 {
        self.0[mode]
    }

    pub fn total(&self) -> u32 {
        self.0.iter().map(|&n| n as u32).sum()
    }

    /// Photons on a path, both polarizations summed.
    pub fn path_count(&self, path_index: usize) -> u32 {
        self.0[2 * path_index] as u32 + self.0[2 * path_index + 1] as u32
    }

    /// Sub-vector over the listed path indices, in the order given.
    pub fn restrict(&self, path_indices: &[usize]) -> OccupationVector {
        let mut out = Vec::with_capacity(2 * path_indices.len());
        for &p in path_indices {
            out.push(self.0[2 * p]);
            out.push(self.0[2 * p + 1]);
        }
        OccupationVector(out)
    }

    /// `sqrt(prod n_k!)`, the norm of the unnormalized monomial
    /// `prod (a_k^dag)^{n_k} |0>`.
    pub fn factorial_sqrt(&self) -> f64 {
        self.0
            .iter()
            .map(|&n| (1..=n as u32).map(f64::from).product::<f64>())
            .product::<f64>()
            .sqrt()
    }
}

/// Enumerates every occupation vector over `num_modes` modes with total photon
/// number at most `n_max`, in lexicographic order.
pub fn enumerate_basis(num_modes: usize, n_max: u32) -> Vec<OccupationVector> {
    fn rec(acc: &mut Vec<u8>, left: u32, num_modes: usize, out: &mut Vec<OccupationVector>) {
        if acc.len() == num_modes {
            out.push(OccupationVector(acc.clone()));
            return;
        }
        for n in 0..=left {
            acc.push(n as u8);
            rec(acc, left - n, num_modes, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(
        &mut Vec::with_capacity(num_modes),
        n_max,
        num_modes,
        &mut out,
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_sorts_paths_and_indexes_modes() {
        let reg = ModeRegistry::new(["3'", "1", "1''", "1'"]).unwrap();
        assert_eq!(reg.paths(), &["1", "1'", "1''", "3'"]);
        assert_eq!(reg.mode_index("1'", Polarization::V).unwrap(), 3);
        assert_eq!(reg.mode(3).to_string(), "1'_V");
        assert!(matches!(
            reg.path_index("9"),
            Err(FockError::UnknownPath(_))
        ));
    }

    #[test]
    fn duplicate_paths_rejected() {
        assert_eq!(
            ModeRegistry::new(["a", "b", "a"]).unwrap_err(),
            FockError::DuplicatePath("a".into())
        );
    }

    #[test]
    fn basis_size_matches_stars_and_bars() {
        // C(n_max + modes, modes)
        assert_eq!(enumerate_basis(8, 4).len(), 495);
        assert_eq!(enumerate_basis(4, 4).len(), 70);
        assert_eq!(enumerate_basis(2, 0).len(), 1);
    }

    #[test]
    fn factorial_sqrt_of_double_occupation() {
        let occ = OccupationVector(vec![2, 0, 1, 3]);
        assert!((occ.factorial_sqrt() - (2.0f64 * 6.0).sqrt()).abs() < 1e-15);
    }
}
