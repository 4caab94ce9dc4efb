//! Finite groupoid algebras, quantum Markov kernels, GNS spaces and
//! Cramer-Rao bounds.
//!
//! Elements of a finite groupoid are transitions between outcomes. Functions
//! on the groupoid form a convolution *-algebra; states are normalized
//! positive-definite functions on it. On the pair groupoid of `n` outcomes
//! everything reduces to `n × n` matrices and density matrices; on the
//! trivial groupoid it reduces to probability vectors and stochastic matrices.

// `!(x > tol)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod channels;
pub mod estimation;
pub mod gns;
pub mod groupoid;
pub mod io;
pub mod numkit;
pub mod random;
pub mod states;

pub use algebra::{convolve, star, AlgebraElement, AlgebraError};
pub use channels::{ChannelError, ClassicalKernel, QuantumKernel};
pub use estimation::{EstimationError, Estimator, StatisticalModel};
pub use gns::{build_gns, GnsError, GnsSpace};
pub use groupoid::{FiniteGroupoid, GroupoidError, GroupoidSpec};
pub use io::IoError;
pub use numkit::{ComplexMatrix, NumError};
pub use states::{DensityMatrix, State, StateError};

/// Coarse failure category, mapped to process exit codes by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// An object fails its axioms or invariants.
    Validation,
    /// Unreadable, malformed or inconsistent input.
    Input,
    /// A numerical procedure failed or hit a degenerate case.
    Numerical,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Validation => 1,
            ErrorClass::Input => 2,
            ErrorClass::Numerical => 3,
        }
    }
}

pub trait Classify {
    fn class(&self) -> ErrorClass;
}

impl Classify for NumError {
    fn class(&self) -> ErrorClass {
        match self {
            NumError::NotHermitian { .. } => ErrorClass::Validation,
            NumError::NotSquare { .. } | NumError::DimensionMismatch { .. } => ErrorClass::Input,
            NumError::NoConvergence { .. } | NumError::NonFinite => ErrorClass::Numerical,
        }
    }
}

impl Classify for GroupoidError {
    fn class(&self) -> ErrorClass {
        ErrorClass::Validation
    }
}

impl Classify for AlgebraError {
    fn class(&self) -> ErrorClass {
        match self {
            AlgebraError::DimensionMismatch { .. } => ErrorClass::Input,
            _ => ErrorClass::Validation,
        }
    }
}

impl Classify for StateError {
    fn class(&self) -> ErrorClass {
        match self {
            StateError::DimensionMismatch { .. } => ErrorClass::Input,
            StateError::Algebra(e) => e.class(),
            StateError::Numeric(e) => e.class(),
            _ => ErrorClass::Validation,
        }
    }
}

impl Classify for ChannelError {
    fn class(&self) -> ErrorClass {
        match self {
            ChannelError::DimensionMismatch { .. } | ChannelError::EmptyKraus => ErrorClass::Input,
            ChannelError::Algebra(e) => e.class(),
            ChannelError::State(e) => e.class(),
            ChannelError::Numeric(e) => e.class(),
            _ => ErrorClass::Validation,
        }
    }
}

impl Classify for GnsError {
    fn class(&self) -> ErrorClass {
        match self {
            GnsError::DegenerateState => ErrorClass::Numerical,
            GnsError::DimensionMismatch { .. } => ErrorClass::Input,
            GnsError::GroupoidMismatch => ErrorClass::Validation,
            GnsError::Algebra(e) => e.class(),
            GnsError::State(e) => e.class(),
            GnsError::Numeric(e) => e.class(),
        }
    }
}

impl Classify for EstimationError {
    fn class(&self) -> ErrorClass {
        use EstimationError as E;
        match self {
            E::FoliumViolation { .. } | E::ZeroInformation { .. } | E::SupportBoundary { .. } => {
                ErrorClass::Numerical
            }
            E::InvalidStep(_) | E::InvalidModel(_) => ErrorClass::Input,
            E::Algebra(e) => e.class(),
            E::State(e) => e.class(),
            E::Channel(e) => e.class(),
            E::Gns(e) => e.class(),
            E::Numeric(e) => e.class(),
            _ => ErrorClass::Validation,
        }
    }
}

impl Classify for IoError {
    fn class(&self) -> ErrorClass {
        match self {
            IoError::Groupoid(e) => e.class(),
            IoError::Algebra(e) => e.class(),
            IoError::State(e) => e.class(),
            IoError::Channel(e) => e.class(),
            IoError::Estimation(e) => e.class(),
            _ => ErrorClass::Input,
        }
    }
}
