//! Density-matrix simulation and training for variational state diagonalization.
//!
//! A parameterized unitary `U(theta)` is trained so that `U rho U^dagger`
//! becomes diagonal in the computational basis. Its diagonal then holds the
//! eigenvalues of `rho`.

pub mod ansatz;
pub mod cost;
pub mod error;
pub mod linalg;
pub mod objective;
pub mod optimizer;
pub mod oracle;
pub mod pauli;
pub mod state;
pub mod trainer;

pub use ansatz::{universal_params_from_unitary, AnsatzDescriptor, AnsatzKind, AnsatzParams};
pub use cost::{CostFunction, GradientMethod};
pub use error::{Error, Result};
pub use linalg::{eigh, ComplexMatrix, EigenDecomposition};
pub use objective::ObjectiveKind;
pub use optimizer::{AdamConfig, AdamState};
pub use pauli::{Pauli, PauliString};
pub use state::{BasisDistribution, DensityMatrix};
pub use trainer::{
    grow_depth, train, verify_diagonalization, DepthSweepConfig, DepthSweepResult, StateSource, TrainConfig,
    TrainOutcome, TrainRecord, VerificationReport, VerifyThresholds,
};

pub use num_complex::Complex64;
