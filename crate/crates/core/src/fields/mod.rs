//! Discrete deformation fields, jump sets, and Griffith energies.

pub mod curl;
pub mod energy;
pub mod field;
pub mod io;

pub use curl::{curl_defect, curl_density, curl_report, CurlReport};
pub use energy::{
    cell_energy, energy_density, griffith_energy, linear_strain, relaxed_density, relaxed_energy, EnergyBreakdown,
};
pub use field::{corner_gradient, DeformationField, JumpSet, CORNER_OFFSETS};
pub use io::{read_field, write_field, FieldFile, JumpEdgeRecord};
