//! Classical simulation of boson sampling through lossy linear-optical
//! networks.
//!
//! The crate is organised bottom-up:
//!
//! - [`complexmat`]: dense complex matrices, unitarity checks, submatrix
//!   construction and permanents (Gray-code Glynn and the repeated-row/column
//!   expansion used for collision inputs), plus their cost model.
//! - [`fock`]: occupation vectors, mode assignments and the sub-configuration
//!   combinatorics behind the marginal probabilities.
//! - [`network`]: meshes of lossy beam splitters, shortest input-output paths
//!   and the extraction of a nonuniform loss layer to the network input.
//! - [`sampler`]: the chain-rule sequential sampler for arbitrary Fock inputs.
//! - [`lossy`]: loss channels, total-variation bound calculators and the
//!   end-to-end approximate pipeline for unbalanced lossy networks.
//! - [`oracle`]: brute-force ground truth used to validate everything above.
//! - [`bench`] and [`validate`]: operation-count sweeps and invariant
//!   batteries exposed through the command-line tool.
//!
//! Modes are 0-based in the API and 1-based in every serialized format.

pub mod bench;
pub mod complexmat;
mod error;
pub mod fock;
pub mod lossy;
pub mod network;
pub mod oracle;
pub mod sampler;
pub mod validate;

pub use complexmat::{
    build_submatrix, cost_estimate, permanent_exact, permanent_repeated, CMatrix, CostModel,
    OutputSpec, SubmatrixSpec, UnitaryMatrix, C64,
};
pub use error::{Error, Result};
pub use fock::{ModeAssignment, OccupationVector, SubConfiguration};
pub use lossy::{
    default_strategy, simulate_unbalanced, tv_bound, tv_bound_network, ApproximationStrategy,
    Certificate, LossChannelSpec, PipelineConfig, TvBound, UnbalancedSimulation,
};
pub use network::{BeamSplitterElement, ExtractionResult, LossVector, LossyNetwork, StandaloneLoss};
pub use oracle::{DeskLimits, ExactDistribution, OutcomeDistribution};
pub use sampler::{sample, sample_batch, SampleOutcome};
