//! Decay of a discrete level coupled to a band of finite width.
//!
//! A single level |d⟩ at energy ε hybridizes with a continuum supported on
//! a finite interval [E_bottom, E_top] through a coupling profile Δ(E).
//! Because the band has edges, the survival probability p(t) = |⟨d|e^{-iHt}|d⟩|²
//! is never a pure exponential: bound states can split off below and above
//! the band, the golden-rule stage acquires corrections, and the long-time
//! behaviour is a power law set by how Δ vanishes at the edges.
//!
//! The crate computes this decay by three independent routes and checks
//! them against each other:
//!
//! * the **spectral route** ([`survival_amplitude`]): bound poles of the
//!   propagator plus the Fourier transform of the continuum density;
//! * the **contour route** ([`second_sheet_amplitude`]): the resonance pole
//!   on the analytically continued sheet plus vertical cut integrals
//!   hanging from the band edges — the natural decomposition into an
//!   exponential stage and its power-law corrections;
//! * the **discretized oracle** ([`OracleSystem`]): the band replaced by N
//!   sampled levels and the (N+1)-level problem solved exactly.
//!
//! Three coupling profiles are built in ([`BandKind`]): a flat profile, the
//! semicircular profile of a nearest-neighbour chain (with a closed-form
//! amplitude, [`chain_closed_form`]), and a power-law edge profile with
//! adjustable edge exponents.

pub mod band_models;
pub mod error;
pub mod numerics;
pub mod oracle;
pub mod poles;

pub mod amplitude;

pub use amplitude::{
    chain_closed_form, cut_integral, fgr_probability, second_sheet_amplitude, short_time_check,
    spectral_density, survival_amplitude, survival_series, tail_exponent, QuadraticOnset,
    SpectralDensity, SurvivalSeries,
};
pub use band_models::{BandEdge, BandKind, BandModel, SystemParams};
pub use error::{Error, Result};
pub use numerics::{FitResult, QuadratureSpec};
pub use oracle::{NodeRule, OracleSystem};
pub use poles::{
    bound_state_overlap, find_real_poles, find_resonance_pole, BoundPole, ResonancePole, Sheet,
    Side,
};
