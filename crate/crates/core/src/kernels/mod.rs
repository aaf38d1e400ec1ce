//! Structured covariance kernels: CAR in space, AR(1) in time, their
//! Kronecker product, and a sparse envelope Cholesky for full conditionals.

pub mod ar1;
pub mod car;
pub mod envelope;
pub mod kron;
pub mod mvn;

pub use ar1::{ar1_logdet, Ar1Kernel};
pub use car::{car_logdet_from_parts, car_logdet_precision, CarKernel};
pub use envelope::{reverse_cuthill_mckee, EnvelopeCholesky, SparsePattern};
pub use kron::{
    block_ar1_logdet, block_ar1_quadform, kron_logdet, kron_logdet_from_parts, kron_precision_quadform,
    KroneckerKernel,
};
pub use mvn::sample_mvn_canonical;
