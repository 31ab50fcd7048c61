//! Exact simulation of passive linear optics on polarized Fock states, with
//! bucket-detector heralding of a two-photon polarization singlet.

pub mod analytics;
pub mod density;
pub mod detection;
pub mod error;
pub mod io;
pub mod mode;
pub mod optics;
pub mod oracle;
pub mod scheme;
pub mod state;
pub mod verify;

pub use density::{mix, to_density, DensityOperator};
pub use detection::{
    coincidence_event, conditional_state, conditional_state_unnormalized, no_click_weight,
    pattern_distribution, pattern_probability, ClickPattern, CoincidenceMode, DetectorBank,
    DetectorModel,
};
pub use error::{FockError, Result};
pub use mode::{Mode, ModeRegistry, OccupationVector, Polarization};
pub use optics::{
    apply_beamsplitter, apply_circuit, apply_hwp, apply_pbs, Circuit, ElementKind, ElementSpec,
    TransferMatrix,
};
pub use scheme::{
    classify_components, component_coincidence, herald, heralded_singlet_circuit,
    heralded_singlet_detectors, prepare_inputs, run_scheme, ComponentLabel, HeraldOutcome,
    SchemeConfig, SchemeReport,
};
pub use state::{superpose, Bell, BellState, PureState};
