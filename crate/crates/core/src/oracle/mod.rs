//! Exact probabilities on small instances, zero functions and comparison checks.

mod comparison;
mod corpus;
mod counterexample;
mod enumerate;
mod reparam;
mod zero;

pub use comparison::{
    compare_zero_function_premise, default_bond_parameter, exact_expected_cluster_size, verify_bond_upper_bound,
    verify_cluster_size_bound, verify_site_lower_bound, verify_zero_function_comparison, CheckKind, CheckRecord, Verdict,
};
pub use corpus::{random_instance, render_law, Instance, KernelChoice};
pub use counterexample::{counterexample_laws, crossing_paths, reproduce_counterexample, CounterexampleReport};
pub use enumerate::{
    exact_event_probability, exact_event_probability_with, inclusion_exclusion_probability, OracleCaps,
};
pub use reparam::{check_kernel_reparametrization, JointComparison, MarginalCheck, ReparametrizationReport};
pub use zero::{
    compare_zero_functions, multisets, zero_function, ZeroComparison, ZeroOrdering, ZeroQuery, ZeroRow, ZeroWitness,
};

use std::fmt;

use num_traits::{One, Signed};
use serde::Serialize;
use thiserror::Error;

use crate::rational::{self, Rational};
use crate::stochastics::{Kernel, KernelError, LawError, LawMap, WeightLaw};

/// Comparison tolerance when a value carries kernel rounding.
pub const ROUNDED_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("instance too large: {edges} relevant edges (cap {edge_cap}), {assignments} weight assignments (cap {assignment_cap})")]
    InstanceTooLarge { edges: usize, edge_cap: usize, assignments: f64, assignment_cap: u64 },
    #[error("vertex {vertex} has a law without finite support")]
    NotFiniteSupport { vertex: usize },
    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Law(#[from] LawError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    WeightAndEdgeEnumeration,
    InclusionExclusion,
    ClosedForm,
}

/// An event probability from the oracle.
///
/// Values are exact rationals. When a kernel value had to be computed in
/// floating point (the exponential kernel) the rational is the exact value of
/// that double, and `exact` is false: comparisons then use [`ROUNDED_TOLERANCE`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactProbability {
    pub value: Rational,
    pub exact: bool,
    pub method: Method,
}

impl ExactProbability {
    pub fn exact(value: Rational, method: Method) -> Self {
        Self { value, exact: true, method }
    }

    pub fn to_f64(&self) -> f64 {
        rational::to_f64(&self.value)
    }

    pub fn render(&self) -> String {
        rational::render(&self.value)
    }
}

impl fmt::Display for ExactProbability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exact {
            write!(f, "{}", self.render())
        } else {
            write!(f, "{:.17e}", self.to_f64())
        }
    }
}

/// `lhs ≤ rhs`, exactly or within [`ROUNDED_TOLERANCE`] when either side is rounded.
pub fn at_most(lhs: &ExactProbability, rhs: &ExactProbability) -> bool {
    if lhs.exact && rhs.exact {
        lhs.value <= rhs.value
    } else {
        rational::to_f64(&(&lhs.value - &rhs.value)) <= ROUNDED_TOLERANCE
    }
}

/// The three models the oracle evaluates.
#[derive(Debug, Clone)]
pub enum ExactModel {
    Weighted { laws: LawMap, kernel: Kernel },
    Bond { p: Rational },
    Site { p: Rational },
}

impl ExactModel {
    pub fn weighted(law: WeightLaw, kernel: Kernel) -> Self {
        ExactModel::Weighted { laws: LawMap::uniform(law), kernel }
    }

    pub(crate) fn validate(&self) -> Result<(), OracleError> {
        let p = match self {
            ExactModel::Bond { p } | ExactModel::Site { p } => p,
            ExactModel::Weighted { .. } => return Ok(()),
        };
        if p.is_negative() || *p > Rational::one() {
            return Err(OracleError::InvalidArgument(format!("p = {} outside [0, 1]", rational::render(p))));
        }
        Ok(())
    }
}
