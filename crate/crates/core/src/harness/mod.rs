//! Example generators, scaling probes and end-to-end runs.

pub mod generators;
pub mod pipeline;
pub mod probe;

pub use generators::{
    beam_map, gen_beam, gen_bent_slit, gen_perturbed_rigid, gen_piecewise_rigid, gen_twopiece, smooth_perturbation,
    twopiece_jump_length, Ambient, Block, PiecewiseRigid,
};
pub use pipeline::{
    exit_code, frozen_corpus, read_config, run_decompose, run_field, CorpusEntry, DecomposeOutcome, ModelKind,
    OutputFiles, EXIT_BUDGET, EXIT_INFEASIBLE, EXIT_IO, EXIT_OK,
};
pub use probe::{write_rows, loglog_fit, probe_beam, probe_constant, probe_strip, probe_strip_sweep, LogLogFit, ProbePoint, ProbeResult, StripPoint};
