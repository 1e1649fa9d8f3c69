//! Pieces, motions, the displacement `u`, the separator and the report.

pub mod extract;
pub mod output;
pub mod report;
pub mod separator;

pub use extract::{extract_partition, omega_rho, PieceLabels};
pub use report::{
    assemble_extension, assign_rigid_motions, build_displacement, decompose, model_energy, report, BudgetFlag,
    CaccioppoliPartition, ChainCheck, Decomposition, PieceSummary, RigidityReport, JUMP_TOL,
};
pub use separator::{jordan_separator, separator_edges, SeparatorReport};
