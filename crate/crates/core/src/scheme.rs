//! The heralded singlet source: four tilted single photons, two PBS, a
//! balanced BS, two half-wave plates, two analyzing PBS and four bucket
//! detectors. A coincidence on (D1, D4) or (D2, D3) heralds the singlet on
//! paths 2' and 4'.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytics::AnalyticReport;
use crate::density::DensityOperator;
use crate::detection::{
    check_eta, coincidence_event, conditional_state_unnormalized, pattern_distribution,
    pattern_probability, ClickPattern, CoincidenceMode, DetectorBank, DetectorModel,
};
use crate::error::{FockError, Result};
use crate::mode::{ModeRegistry, Polarization};
use crate::optics::{apply_circuit, Circuit, ElementSpec};
use crate::state::{Bell, BellState, PureState};

pub const PRESET_NAME: &str = "heralded-singlet";

/// Every path of the preset circuit.
pub const PATHS: [&str; 14] = [
    "1", "2", "3", "4", "1'", "2'", "3'", "4'", "1''", "3''", "x", "y", "w", "z",
];

/// Output paths carrying the heralded pair.
pub const KEPT: [&str; 2] = ["2'", "4'"];

/// Detector pairs whose joint click heralds the singlet.
pub const HERALD_PAIRS: [(&str, &str); 2] = [("D1", "D4"), ("D2", "D3")];

/// Number of leading elements (the two input PBS) after which components
/// are classified.
pub const FIRST_LAYER: usize = 2;

/// Above this `|eps|` the low-order picture stops being a good guide.
pub const PERTURBATIVE_LIMIT: f64 = 0.3;

pub fn scheme_registry() -> Arc<ModeRegistry> {
    ModeRegistry::new(PATHS).expect("preset paths are unique")
}

/// PBS1(1,2 -> 1',2'), PBS2(3,4 -> 3',4'), BS(1',3' -> 1'',3''), HWP(1''),
/// HWP(3''), PBS3(1'' -> x,y), PBS4(3'' -> w,z).
pub fn heralded_singlet_circuit() -> Circuit {
    Circuit::named(
        PRESET_NAME,
        vec![
            ElementSpec::pbs(&["1", "2"], "1'", "2'"),
            ElementSpec::pbs(&["3", "4"], "3'", "4'"),
            ElementSpec::bs("1'", "3'", "1''", "3''"),
            ElementSpec::hwp("1''"),
            ElementSpec::hwp("3''"),
            ElementSpec::pbs(&["1''"], "x", "y"),
            ElementSpec::pbs(&["3''"], "w", "z"),
        ],
    )
}

/// Looks up a circuit preset by name.
pub fn preset_circuit(name: &str) -> Option<Circuit> {
    (name == PRESET_NAME).then(heralded_singlet_circuit)
}

/// D1 on x (H port of PBS3), D2 on y (V port of PBS3), D3 on w (H port of
/// PBS4), D4 on z (V port of PBS4).
pub fn heralded_singlet_detectors(eta: f64) -> Result<DetectorBank> {
    DetectorBank::new(vec![
        DetectorModel::new("D1", "x", eta)?,
        DetectorModel::new("D2", "y", eta)?,
        DetectorModel::new("D3", "w", eta)?,
        DetectorModel::new("D4", "z", eta)?,
    ])
}

/// The singlet on the kept paths.
pub fn target_singlet(registry: &Arc<ModeRegistry>) -> Result<PureState> {
    BellState::new(Bell::PsiMinus, KEPT[0], KEPT[1]).to_state(registry)
}

/// `|V'>_1 |H'>_2 |V'>_3 |H'>_4` with `|H'> = (|H> + e|V>)/sqrt(1+|e|^2)` and
/// `|V'> = (e|H> - |V>)/sqrt(1+|e|^2)`.
pub fn prepare_inputs(registry: &Arc<ModeRegistry>, eps: Complex64) -> Result<PureState> {
    let n = 1.0 / (1.0 + eps.norm_sqr()).sqrt();
    let one = Complex64::new(n, 0.0);
    let tilted_v = |p: &str| PureState::polarized_photon(registry, p, eps * n, -one);
    let tilted_h = |p: &str| PureState::polarized_photon(registry, p, one, eps * n);
    let s = tilted_v("1")?
        .tensor(&tilted_h("2")?)?
        .tensor(&tilted_v("3")?)?
        .tensor(&tilted_h("4")?)?;
    s.normalize()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    #[serde(with = "complex_pair")]
    pub epsilon: Complex64,
    pub eta: f64,
    pub mode: CoincidenceMode,
}

impl SchemeConfig {
    pub fn new(epsilon: Complex64, eta: f64, mode: CoincidenceMode) -> Result<Self> {
        check_eta(eta)?;
        if epsilon.norm() > PERTURBATIVE_LIMIT {
            log::warn!(
                "|epsilon| = {} is above {}; low-order component picture is not a good guide",
                epsilon.norm(),
                PERTURBATIVE_LIMIT
            );
        }
        Ok(SchemeConfig { epsilon, eta, mode })
    }

    pub fn real(epsilon: f64, eta: f64) -> Result<Self> {
        Self::new(Complex64::new(epsilon, 0.0), eta, CoincidenceMode::Strict)
    }
}

/// Components of the post-PBS state in its expansion in powers of `eps`.
///
/// Label states are normalized and carry these phases (`h1` is the H
/// creation operator on path 1', and so on):
/// - `X0 = v2 h2 v4 h4`
/// - `X1 = [(v1 v2 - h1 h2) v4 h4 + (v3 v4 - h3 h4) v2 h2] / 2`
/// - `A = h1 v1 v4 h4`, `B = v2 h2 h3 v3`
/// - `C_xy = |x>_{1'3'} |y>_{2'4'}` for the four Bell states, so that
///   `(h1 h2 - v1 v2)(h3 h4 - v3 v4) = C_phi+ + C_phi- - C_psi+ - C_psi-`.
///
/// `HigherOrder` is whatever remains after projecting out the others.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ComponentLabel {
    X0,
    X1,
    A,
    B,
    #[serde(rename = "C_phi+phi+")]
    CPhiPlus,
    #[serde(rename = "C_phi-phi-")]
    CPhiMinus,
    #[serde(rename = "C_psi+psi+")]
    CPsiPlus,
    #[serde(rename = "C_psi-psi-")]
    CPsiMinus,
    #[serde(rename = "higher_order")]
    HigherOrder,
}

impl ComponentLabel {
    pub const ALL: [ComponentLabel; 9] = [
        ComponentLabel::X0,
        ComponentLabel::X1,
        ComponentLabel::A,
        ComponentLabel::B,
        ComponentLabel::CPhiPlus,
        ComponentLabel::CPhiMinus,
        ComponentLabel::CPsiPlus,
        ComponentLabel::CPsiMinus,
        ComponentLabel::HigherOrder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ComponentLabel::X0 => "X0",
            ComponentLabel::X1 => "X1",
            ComponentLabel::A => "A",
            ComponentLabel::B => "B",
            ComponentLabel::CPhiPlus => "C_phi+phi+",
            ComponentLabel::CPhiMinus => "C_phi-phi-",
            ComponentLabel::CPsiPlus => "C_psi+psi+",
            ComponentLabel::CPsiMinus => "C_psi-psi-",
            ComponentLabel::HigherOrder => "higher_order",
        }
    }

    /// Order in `eps` of the component's amplitude (`None` for the residual).
    pub fn order(self) -> Option<u32> {
        match self {
            ComponentLabel::X0 => Some(0),
            ComponentLabel::X1 => Some(1),
            ComponentLabel::HigherOrder => None,
            _ => Some(2),
        }
    }

    /// Normalized label state on paths 1'..4'; `None` for `HigherOrder`.
    pub fn state(self, registry: &Arc<ModeRegistry>) -> Result<Option<PureState>> {
        use Polarization::{H, V};
        let m =
            |c: f64, ops: &[(&'static str, Polarization)]| (Complex64::new(c, 0.0), ops.to_vec());
        let build = |monos: Vec<(Complex64, Vec<(&str, Polarization)>)>| -> Result<PureState> {
            let refs: Vec<(Complex64, &[(&str, Polarization)])> =
                monos.iter().map(|(c, o)| (*c, o.as_slice())).collect();
            PureState::from_monomials(registry, &refs)?.normalize()
        };
        let bell_pair = |kind: Bell| -> Result<PureState> {
            BellState::new(kind, "1'", "3'")
                .to_state(registry)?
                .tensor(&BellState::new(kind, "2'", "4'").to_state(registry)?)
        };
        let s = match self {
            ComponentLabel::X0 => {
                build(vec![m(1.0, &[("2'", V), ("2'", H), ("4'", V), ("4'", H)])])?
            }
            ComponentLabel::X1 => build(vec![
                m(1.0, &[("1'", V), ("2'", V), ("4'", V), ("4'", H)]),
                m(-1.0, &[("1'", H), ("2'", H), ("4'", V), ("4'", H)]),
                m(1.0, &[("3'", V), ("4'", V), ("2'", V), ("2'", H)]),
                m(-1.0, &[("3'", H), ("4'", H), ("2'", V), ("2'", H)]),
            ])?,
            ComponentLabel::A => {
                build(vec![m(1.0, &[("1'", H), ("1'", V), ("4'", V), ("4'", H)])])?
            }
            ComponentLabel::B => {
                build(vec![m(1.0, &[("2'", V), ("2'", H), ("3'", H), ("3'", V)])])?
            }
            ComponentLabel::CPhiPlus => bell_pair(Bell::PhiPlus)?,
            ComponentLabel::CPhiMinus => bell_pair(Bell::PhiMinus)?,
            ComponentLabel::CPsiPlus => bell_pair(Bell::PsiPlus)?,
            ComponentLabel::CPsiMinus => bell_pair(Bell::PsiMinus)?,
            ComponentLabel::HigherOrder => return Ok(None),
        };
        Ok(Some(s))
    }
}

impl fmt::Display for ComponentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct ComponentEntry {
    pub label: ComponentLabel,
    /// `<label|state>`; for `HigherOrder` the (real, non-negative) residual norm.
    pub amplitude: Complex64,
    pub prior: f64,
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub entries: Vec<ComponentEntry>,
    /// Normalized residual, absent when it vanishes.
    pub higher_order: Option<PureState>,
}

impl Decomposition {
    pub fn prior(&self, label: ComponentLabel) -> f64 {
        self.entries
            .iter()
            .find(|e| e.label == label)
            .map_or(0.0, |e| e.prior)
    }

    pub fn amplitude(&self, label: ComponentLabel) -> Complex64 {
        self.entries
            .iter()
            .find(|e| e.label == label)
            .map_or(Complex64::default(), |e| e.amplitude)
    }

    pub fn total_prior(&self) -> f64 {
        self.entries.iter().map(|e| e.prior).sum()
    }
}

/// Projects the state after the two input PBS onto the labeled components.
pub fn classify_components(state: &PureState) -> Result<Decomposition> {
    let numbers = state.photon_numbers();
    if numbers != [4] {
        return Err(FockError::PhotonNumber {
            expected: 4,
            found: numbers.iter().copied().max().unwrap_or(0),
        });
    }
    let reg = state.registry();
    let mut entries = Vec::new();
    let mut residual = state.clone();
    for label in ComponentLabel::ALL {
        if let Some(ls) = label.state(reg)? {
            let amp = ls.inner(state)?;
            residual =
                crate::state::superpose(&[(Complex64::new(1.0, 0.0), &residual), (-amp, &ls)])?;
            entries.push(ComponentEntry {
                label,
                amplitude: amp,
                prior: amp.norm_sqr(),
            });
        }
    }
    let rest = residual.norm();
    entries.push(ComponentEntry {
        label: ComponentLabel::HigherOrder,
        amplitude: Complex64::new(rest, 0.0),
        prior: rest * rest,
    });
    let higher_order = if residual.is_zero() {
        None
    } else {
        Some(residual.normalize()?)
    };
    Ok(Decomposition {
        entries,
        higher_order,
    })
}

fn downstream() -> Circuit {
    heralded_singlet_circuit().split_at(FIRST_LAYER).1
}

/// Probability that the component alone, sent through the rest of the
/// circuit, produces the coincidence. `eps` only matters for `HigherOrder`.
pub fn component_coincidence(
    label: ComponentLabel,
    eps: Complex64,
    eta: f64,
    mode: CoincidenceMode,
) -> Result<f64> {
    let reg = scheme_registry();
    let state = match label.state(&reg)? {
        Some(s) => s,
        None => {
            let (first, _) = heralded_singlet_circuit().split_at(FIRST_LAYER);
            let after = apply_circuit(&prepare_inputs(&reg, eps)?, &first)?;
            match classify_components(&after)?.higher_order {
                Some(s) => s,
                None => return Ok(0.0),
            }
        }
    };
    let out = apply_circuit(&state, &downstream())?;
    let bank = heralded_singlet_detectors(eta)?;
    let mut p = 0.0;
    for pattern in coincidence_event(&bank, &HERALD_PAIRS, mode)? {
        p += pattern_probability(&out, &pattern, &bank)?;
    }
    Ok(p)
}

#[derive(Debug, Clone, Serialize)]
pub struct PatternRecord {
    pub pattern: String,
    pub probability: f64,
    pub fidelity: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComponentRecord {
    pub label: ComponentLabel,
    pub order: Option<u32>,
    pub amplitude: [f64; 2],
    pub prior: f64,
    pub coincidence_given_component: f64,
    pub contribution: f64,
    pub excluded: bool,
}

/// Components whose coincidence probability is below this are excluded.
pub const EXCLUSION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct SchemeReport {
    pub config: SchemeConfig,
    pub epsilon_abs: f64,
    pub p_coincidence: f64,
    /// `<psi-|rho|psi->` on 2', 4'; `None` when nothing heralds.
    pub fidelity: Option<f64>,
    pub purity: Option<f64>,
    /// Weight of the one-photon-per-path sector of the heralded state.
    pub two_photon_weight: Option<f64>,
    pub rho: Option<DensityOperator>,
    pub patterns: Vec<PatternRecord>,
    pub click_distribution: BTreeMap<String, f64>,
    pub components: Vec<ComponentRecord>,
    pub analytics: AnalyticReport,
    /// `p_coincidence / (eta^2 |eps|^4)`.
    pub rate_ratio: Option<f64>,
}

impl SchemeReport {
    pub fn component(&self, label: ComponentLabel) -> Option<&ComponentRecord> {
        self.components.iter().find(|c| c.label == label)
    }
}

fn one_per_path_weight(rho: &DensityOperator) -> f64 {
    rho.basis()
        .iter()
        .enumerate()
        .filter(|(_, b)| b.path_count(0) == 1 && b.path_count(1) == 1)
        .map(|(i, _)| rho.matrix()[(i, i)].re)
        .sum()
}

/// State behind the full circuit plus the heralded state on 2', 4'.
#[derive(Debug, Clone)]
pub struct HeraldOutcome {
    pub output: PureState,
    pub p_coincidence: f64,
    pub rho: Option<DensityOperator>,
    pub fidelity: Option<f64>,
}

/// Evolves the inputs and conditions on the coincidence, without the
/// component breakdown.
pub fn herald(config: &SchemeConfig) -> Result<HeraldOutcome> {
    let reg = scheme_registry();
    let output = apply_circuit(
        &prepare_inputs(&reg, config.epsilon)?,
        &heralded_singlet_circuit(),
    )?;
    let bank = heralded_singlet_detectors(config.eta)?;
    let event = coincidence_event(&bank, &HERALD_PAIRS, config.mode)?;
    let (p_coincidence, rho_raw) = conditional_state_unnormalized(&output, &event, &bank, &KEPT)?;
    let rho = if p_coincidence > 0.0 {
        Some(rho_raw.normalized()?)
    } else {
        None
    };
    let fidelity = rho
        .as_ref()
        .map(|r| r.fidelity_pure(&target_singlet(&reg)?))
        .transpose()?;
    Ok(HeraldOutcome {
        output,
        p_coincidence,
        rho,
        fidelity,
    })
}

/// Runs the full heralding pipeline at one `(eps, eta)` point.
pub fn run_scheme(config: &SchemeConfig) -> Result<SchemeReport> {
    let reg = scheme_registry();
    let circuit = heralded_singlet_circuit();
    let (first, rest) = circuit.split_at(FIRST_LAYER);
    let input = prepare_inputs(&reg, config.epsilon)?;
    let after_first = apply_circuit(&input, &first)?;
    let decomposition = classify_components(&after_first)?;
    let output = apply_circuit(&after_first, &rest)?;

    let bank = heralded_singlet_detectors(config.eta)?;
    let event = coincidence_event(&bank, &HERALD_PAIRS, config.mode)?;
    let target = target_singlet(&reg)?;

    let click_distribution = pattern_distribution(&output, &bank)?
        .into_iter()
        .map(|(p, prob)| (p.label(&bank), prob))
        .collect();

    let mut patterns = Vec::new();
    for pattern in &event {
        let (p, rho) =
            conditional_state_unnormalized(&output, std::slice::from_ref(pattern), &bank, &KEPT)?;
        let fidelity = if p > 0.0 {
            Some(rho.normalized()?.fidelity_pure(&target)?)
        } else {
            None
        };
        patterns.push(PatternRecord {
            pattern: pattern.label(&bank),
            probability: p,
            fidelity,
        });
    }

    let (p_coincidence, rho_raw) = conditional_state_unnormalized(&output, &event, &bank, &KEPT)?;
    let rho = if p_coincidence > 0.0 {
        Some(rho_raw.normalized()?)
    } else {
        None
    };
    let fidelity = rho.as_ref().map(|r| r.fidelity_pure(&target)).transpose()?;

    let mut components = Vec::new();
    for e in &decomposition.entries {
        let given = if e.prior > 0.0 {
            component_coincidence(e.label, config.epsilon, config.eta, config.mode)?
        } else {
            0.0
        };
        components.push(ComponentRecord {
            label: e.label,
            order: e.label.order(),
            amplitude: [e.amplitude.re, e.amplitude.im],
            prior: e.prior,
            coincidence_given_component: given,
            contribution: e.prior * given,
            excluded: given < EXCLUSION_TOLERANCE,
        });
    }

    let eps_abs = config.epsilon.norm();
    let analytics = AnalyticReport::new(eps_abs, config.eta)?;
    let rate_ratio =
        (analytics.approx_coincidence > 0.0).then(|| p_coincidence / analytics.approx_coincidence);
    Ok(SchemeReport {
        config: *config,
        epsilon_abs: eps_abs,
        p_coincidence,
        fidelity,
        purity: rho.as_ref().map(DensityOperator::purity),
        two_photon_weight: rho.as_ref().map(one_per_path_weight),
        rho,
        patterns,
        click_distribution,
        components,
        analytics,
        rate_ratio,
    })
}

/// The strict single patterns `(D1, D4)` and `(D2, D3)`.
pub fn herald_patterns(bank: &DetectorBank) -> Result<Vec<ClickPattern>> {
    coincidence_event(bank, &HERALD_PAIRS, CoincidenceMode::Strict)
}

mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}
