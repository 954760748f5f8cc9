//! Synthetic line-scan wavefields and non-uniform 2D-DFT dispersion extraction.

pub mod archive;
pub mod excitation;
pub mod extract;
pub mod roundtrip;
pub mod synth;
pub mod window;

pub use excitation::{build_excitation, ExcitationSpec, Window};
pub use extract::{
    default_nu_grid, extract_dispersion, to_phase_velocity, DEFAULT_NU_POINTS, ExtractOptions, ExtractedPairs, Pair, PairFlag,
    PhaseTrack,
};
pub use roundtrip::{compare, label_tracks, pair_rows, RoundTripReport};
pub use synth::{synthesize_wavefield, MeasurementPath, ModeCurve, SynthesisOptions, WavefieldRecord};
pub use window::{evaluation_window, EvaluationWindow};
