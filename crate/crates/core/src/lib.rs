pub mod basis;
pub mod boundary;
pub mod error;
pub mod flux;
pub mod limiters;
pub mod mesh;
pub mod operator;
pub mod pipeline;
pub mod problems;
pub mod reconstruction;
pub mod state;
pub mod time;

pub use basis::{PolyBasis, QuadratureRule};
pub use boundary::{BoundaryCondition, BoundaryKind, Side};
pub use error::{CutDgError, Result};
pub use flux::{Dissipation, FluxFunction, FluxModel};
pub use limiters::{PositivityParams, ScalarBounds};
pub use mesh::{InterfaceSet, MeshComplex};
pub use operator::{assemble, OperatorConfig, PenaltyWeights, SemiDiscreteOperator};
pub use pipeline::{LimiterConfig, Pipeline, PipelineStats};
pub use problems::{problem_by_name, Admissible, CutLayout, ProblemKind, ProblemSpec, Reference};
pub use reconstruction::ReconstructionMode;
pub use state::DgState;
pub use time::{DtLaw, Integrator, LambdaRefresh, RunResult, Solver, Stage, StepRecord, TimeConfig};
