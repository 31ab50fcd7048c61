//! Brute-force reference for the heralding circuit, sharing no code with the
//! sparse pipeline.
//!
//! Paths are folded into four in-place lanes (lane k carries beams k, k', and
//! for lanes 0 and 2 also k'' and the analyzer outputs), giving 8 modes. The
//! full Fock space up to 4 photons (495 states) is enumerated, each element's
//! single-photon matrix is lifted to that space through matrix permanents,
//! and the lifted matrices are applied by dense matrix-vector products. The
//! analyzing PBS are then the identity: x, y, w, z are the H and V modes of
//! lanes 0 and 2.

use std::collections::HashMap;

use num_complex::Complex64;

const MODES: usize = 8;
const N_MAX: usize = 4;

type Single = [[Complex64; MODES]; MODES];
type Occ = [u8; MODES];

fn mode(lane: usize, v: bool) -> usize {
    2 * lane + v as usize
}

fn identity() -> Single {
    let mut u = [[Complex64::new(0.0, 0.0); MODES]; MODES];
    for (i, row) in u.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    u
}

/// H stays in its lane, V swaps lanes.
fn pbs(l1: usize, l2: usize) -> Single {
    let mut u = identity();
    let (a, b) = (mode(l1, true), mode(l2, true));
    u[a][a] = Complex64::new(0.0, 0.0);
    u[b][b] = Complex64::new(0.0, 0.0);
    u[a][b] = Complex64::new(1.0, 0.0);
    u[b][a] = Complex64::new(1.0, 0.0);
    u
}

/// `u[out][in]` for a 2x2 block `t` placed on modes `(m0, m1)`.
fn embed(m0: usize, m1: usize, t: [[f64; 2]; 2], mut u: Single) -> Single {
    let idx = [m0, m1];
    for i in 0..2 {
        for j in 0..2 {
            u[idx[i]][idx[j]] = Complex64::new(t[i][j], 0.0);
        }
    }
    u
}

fn hadamard_block() -> [[f64; 2]; 2] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    [[r, r], [r, -r]]
}

fn bs(l1: usize, l2: usize, t: [[f64; 2]; 2]) -> Single {
    let u = embed(mode(l1, false), mode(l2, false), t, identity());
    embed(mode(l1, true), mode(l2, true), t, u)
}

fn hwp(lane: usize) -> Single {
    embed(
        mode(lane, false),
        mode(lane, true),
        hadamard_block(),
        identity(),
    )
}

fn factorial(n: u8) -> f64 {
    (1..=n as u32).map(f64::from).product()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Permanent of `u[rows[i]][cols[j]]` by summing over all permutations.
fn permanent(u: &Single, rows: &[usize], cols: &[usize], perms: &[Vec<usize>]) -> Complex64 {
    perms
        .iter()
        .map(|p| {
            rows.iter()
                .zip(p)
                .map(|(&r, &k)| u[r][cols[k]])
                .product::<Complex64>()
        })
        .sum()
}

pub struct DenseOracle {
    basis: Vec<Occ>,
    index: HashMap<Occ, usize>,
    /// Lifted PBS1, PBS2, BS, HWP, HWP.
    circuit: Vec<Vec<Vec<Complex64>>>,
}

/// Everything the oracle reports for one `(eps, eta)` point.
#[derive(Debug, Clone)]
pub struct OracleResult {
    /// Probabilities of all 16 patterns, D1 as the most significant bit.
    pub pattern_probabilities: Vec<f64>,
    pub p_strict: f64,
    pub p_lenient: f64,
    pub fidelity_strict: Option<f64>,
    pub fidelity_lenient: Option<f64>,
}

impl Default for DenseOracle {
    fn default() -> Self {
        Self::new()
    }
}

impl DenseOracle {
    pub fn new() -> Self {
        let mut basis = Vec::new();
        let mut occ = [0u8; MODES];
        fn rec(k: usize, left: usize, occ: &mut Occ, out: &mut Vec<Occ>) {
            if k == MODES {
                out.push(*occ);
                return;
            }
            for n in 0..=left {
                occ[k] = n as u8;
                rec(k + 1, left - n, occ, out);
            }
            occ[k] = 0;
        }
        rec(0, N_MAX, &mut occ, &mut basis);
        let index = basis.iter().enumerate().map(|(i, b)| (*b, i)).collect();
        let mut oracle = DenseOracle {
            basis,
            index,
            circuit: Vec::new(),
        };
        oracle.circuit = oracle.lift_circuit(hadamard_block());
        oracle
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// `<m| U_lift |n> = perm(U[m, n]) / sqrt(m! n!)` on equal photon numbers.
    fn lift(&self, u: &Single) -> Vec<Vec<Complex64>> {
        let d = self.dim();
        let expanded: Vec<Vec<usize>> = self
            .basis
            .iter()
            .map(|o| {
                (0..MODES)
                    .flat_map(|k| std::iter::repeat_n(k, o[k] as usize))
                    .collect()
            })
            .collect();
        let norms: Vec<f64> = self
            .basis
            .iter()
            .map(|o| o.iter().map(|&k| factorial(k)).product::<f64>().sqrt())
            .collect();
        let perms: Vec<Vec<Vec<usize>>> = (0..=N_MAX).map(permutations).collect();
        let mut out = vec![vec![Complex64::new(0.0, 0.0); d]; d];
        for i in 0..d {
            for j in 0..d {
                let n = expanded[i].len();
                if n != expanded[j].len() {
                    continue;
                }
                out[i][j] =
                    permanent(u, &expanded[i], &expanded[j], &perms[n]) / (norms[i] * norms[j]);
            }
        }
        out
    }

    fn apply(mat: &[Vec<Complex64>], v: &[Complex64]) -> Vec<Complex64> {
        mat.iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn input(&self, eps: Complex64) -> Vec<Complex64> {
        let n = 1.0 / (1.0 + eps.norm_sqr()).sqrt();
        // (H, V) amplitudes of the tilted photons on lanes 0..3.
        let tilted_v = [eps * n, Complex64::new(-n, 0.0)];
        let tilted_h = [Complex64::new(n, 0.0), eps * n];
        let lanes = [tilted_v, tilted_h, tilted_v, tilted_h];
        let mut v = vec![Complex64::new(0.0, 0.0); self.dim()];
        for choice in 0..16usize {
            let mut occ = [0u8; MODES];
            let mut amp = Complex64::new(1.0, 0.0);
            for (lane, c) in lanes.iter().enumerate() {
                let pol = choice >> lane & 1;
                occ[2 * lane + pol] += 1;
                amp *= c[pol];
            }
            v[self.index[&occ]] += amp;
        }
        v
    }

    fn lift_circuit(&self, bs_block: [[f64; 2]; 2]) -> Vec<Vec<Vec<Complex64>>> {
        [pbs(0, 1), pbs(2, 3), bs(0, 2, bs_block), hwp(0), hwp(2)]
            .iter()
            .map(|u| self.lift(u))
            .collect()
    }

    /// Final state behind the circuit.
    pub fn evolve(&self, eps: Complex64) -> Vec<Complex64> {
        self.circuit
            .iter()
            .fold(self.input(eps), |v, m| Self::apply(m, &v))
    }

    pub fn run(&self, eps: Complex64, eta: f64) -> OracleResult {
        self.run_state(&self.evolve(eps), eta)
    }

    fn run_state(&self, v: &[Complex64], eta: f64) -> OracleResult {
        // D1..D4 on x = (0,H), y = (0,V), w = (2,H), z = (2,V).
        let det = [mode(0, false), mode(0, true), mode(2, false), mode(2, true)];
        let weight = |o: &Occ, pattern: usize| -> f64 {
            (0..4)
                .map(|d| {
                    let miss = (1.0 - eta).powi(o[det[d]] as i32);
                    if pattern >> (3 - d) & 1 == 1 {
                        1.0 - miss
                    } else {
                        miss
                    }
                })
                .product()
        };
        let pattern_probabilities: Vec<f64> = (0..16)
            .map(|p| {
                self.basis
                    .iter()
                    .zip(v)
                    .map(|(o, a)| a.norm_sqr() * weight(o, p))
                    .sum()
            })
            .collect();

        let strict = [0b1001usize, 0b0110];
        let lenient: Vec<usize> = (0..16)
            .filter(|p| (p & 0b1001) == 0b1001 || (p & 0b0110) == 0b0110)
            .collect();

        // Singlet on lanes 1 and 3: (|H>_1 |V>_3 - |V>_1 |H>_3) / sqrt2.
        let (h2, v2, h4, v4) = (mode(1, false), mode(1, true), mode(3, false), mode(3, true));
        let fidelity_numerator = |patterns: &[usize]| -> f64 {
            let mut acc = 0.0;
            for (o, _) in self.basis.iter().zip(v) {
                // Visit each detected/spectator configuration once, via its
                // vacuum-on-lanes-1,3 representative.
                if o[h2] + o[v2] + o[h4] + o[v4] != 0 {
                    continue;
                }
                let w: f64 = patterns.iter().map(|&p| weight(o, p)).sum();
                let amp = |a: usize, b: usize| {
                    let mut k = *o;
                    k[a] += 1;
                    k[b] += 1;
                    self.index
                        .get(&k)
                        .map_or(Complex64::new(0.0, 0.0), |&i| v[i])
                };
                let overlap = (amp(h2, v4) - amp(v2, h4)) * std::f64::consts::FRAC_1_SQRT_2;
                acc += w * overlap.norm_sqr();
            }
            acc
        };
        let p_strict: f64 = strict.iter().map(|&p| pattern_probabilities[p]).sum();
        let p_lenient: f64 = lenient.iter().map(|&p| pattern_probabilities[p]).sum();
        let fid = |num: f64, p: f64| (p > 0.0).then(|| num / p);
        OracleResult {
            fidelity_strict: fid(fidelity_numerator(&strict), p_strict),
            fidelity_lenient: fid(fidelity_numerator(&lenient), p_lenient),
            pattern_probabilities,
            p_strict,
            p_lenient,
        }
    }
}
