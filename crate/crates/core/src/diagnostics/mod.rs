//! Morawetz weight, virial quantities, coercivity monitors and the
//! threshold classifier.

pub mod coercivity;
pub mod record;
pub mod virial;
pub mod weight;

pub use coercivity::{
    choose_coercivity_radius, classify_threshold, coercivity_monitor, Classification,
    CoercivityRecord, ThresholdVerdict, BOUNDARY_TOL,
};
pub use record::{DiagnosticsRadii, DiagnosticsRecord, Recorder};
pub use virial::{
    averaged_morawetz, averaged_morawetz_states, localized_l3, localized_mass, strauss_ratio,
    virial_m, virial_mprime, virial_mprime_discrete,
};
pub use weight::{cutoff_at, make_weight, weight_at, CutoffChi, MorawetzWeight, WeightPoint};
