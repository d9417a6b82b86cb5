//! Weight laws, connection kernels and replication streams.

pub mod kernel;
pub mod law;
pub mod rng;

pub use kernel::{Kernel, KernelError, KernelProperty, KernelValidationReport, KernelViolation};
pub use law::{
    normalize_factorisable, Atom, ComponentMap, ExactPair, LawError, LawMap, Marginal, Moments, SupportBox,
    WeightLaw, WeightPair,
};
pub use rng::ReplicationStream;
