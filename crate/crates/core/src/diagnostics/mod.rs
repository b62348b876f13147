//! Energies, amplitude and frequency tables, resonance classification and
//! velocity-field synthesis.

pub mod energy;
pub mod field;
pub mod resonance;
pub mod svg;
pub mod tables;

pub use energy::{dominant_wavenumber, fourier_component, kinetic_energy, EnergySpectrum};
pub use field::{velocity_field_rz, HarmonicSelector, RzField};
pub use resonance::{classify_resonances, Resonance, ResonanceKind, ResonanceReport};
pub use tables::{
    amplitude_table, frequency_table, phase_frequency, standing_wave_pairs, FrequencyTable, ModeTable,
    StandingPair,
};
