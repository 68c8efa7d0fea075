//! Excitation energy transfer in randomly disordered chromophore networks.
//!
//! The crate models multichromophoric complexes as point dipoles placed
//! uniformly at random inside a bounding sphere, with the donor pinned to
//! the north pole and the acceptor (trap) to the south pole. Site energies
//! are drawn from a uniform static-disorder window and couplings follow the
//! point-dipole law J = C·κ/r³. Transfer efficiency is computed from a
//! time-nonlocal (TC2) quantum master equation with an exponentially
//! decaying bath correlation, either by a Laplace-domain linear solve at
//! s = 0 or by explicit time propagation, and ensembles of random networks
//! are swept, summarized, and correlated against structural descriptors
//! (exciton gaps, ground–trap overlap, pathway strengths, axis proximity).
//!
//! Modules:
//! - [`geometry`]: random configurations and dipole couplings.
//! - [`exciton`]: Hamiltonian assembly and spectral descriptors.
//! - [`bath`]: bath correlation, spectral density, mean phonon energy.
//! - [`tc2`]: the TC2 solver (Laplace and time-domain routes).
//! - [`pathways`]: spatial path enumeration and strengths.
//! - [`ensemble`]: Monte Carlo sweeps, statistics, persistence.

pub mod bath;
pub mod constants;
pub mod ensemble;
pub mod error;
pub mod exciton;
pub mod geometry;
pub mod linalg;
pub mod pathways;
pub mod tc2;

pub use bath::{correlation_amplitude, mean_phonon_energy, spectral_density, BathSpec};
pub use ensemble::{
    correlation_report, run_cell, run_plan, select_extremes, summarize_cells, CellParams,
    CorrelationReport, SampleRecord, SweepPlan,
};
pub use error::{Error, Result};
pub use exciton::{
    build_hamiltonian, spectral_descriptors, ExcitonHamiltonian, SpectralDescriptors,
};
pub use geometry::{
    coupling_matrix, dipole_coupling, sample_configuration, Chromophore, Configuration,
    CouplingModel,
};
pub use pathways::{
    dominant_path_count, enumerate_paths, path_metrics, path_strength, z_axis_proximity, Path,
    PathMetrics,
};
pub use tc2::{
    ete_laplace, ete_time_domain, propagate_time_domain, propagate_with_options, Method,
    PropagateOptions, SinkSpec, StepMode, Trajectory, TransportResult,
};
