//! Connection kernels `κ(x, y) = κ(xy)`.

use std::fmt;
use std::sync::Arc;

use num_traits::Signed;
use serde::Serialize;
use thiserror::Error;

use crate::rational::{self, Rational};

/// Tolerance for grid-based monotonicity and concavity checks.
pub const VALIDATION_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("kernel {kernel} produced {value} at z = {z}, outside [0, 1]")]
    Range { kernel: String, z: f64, value: f64 },
    #[error("kernel arguments must be non-negative, got ({x}, {y})")]
    NegativeArgument { x: f64, y: f64 },
    #[error("invalid kernel parameter: {0}")]
    InvalidParameter(String),
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A kernel given by an arbitrary scalar function of the product `z = xy`.
#[derive(Clone)]
pub struct CustomKernel {
    name: String,
    f: ScalarFn,
}

impl CustomKernel {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), f: Arc::new(f) }
    }
}

impl fmt::Debug for CustomKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomKernel({})", self.name)
    }
}

#[derive(Debug, Clone)]
pub enum Kernel {
    /// `κ(x, y) = xy`, for weights in `[0, 1]²`.
    Product,
    /// `κ(x, y) = 1 − exp(−α xy)`.
    Exponential { alpha: f64 },
    /// `κ(x, y) = xy / (β + xy)`. `beta` is kept exact so rational inputs stay rational.
    Geometric { beta: Rational, beta_f64: f64 },
    Custom(CustomKernel),
}

impl Kernel {
    pub fn exponential(alpha: f64) -> Result<Self, KernelError> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(KernelError::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Kernel::Exponential { alpha })
    }

    pub fn geometric(beta: Rational) -> Result<Self, KernelError> {
        if !beta.is_positive() {
            return Err(KernelError::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        let beta_f64 = rational::to_f64(&beta);
        Ok(Kernel::Geometric { beta, beta_f64 })
    }

    pub fn custom(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Kernel::Custom(CustomKernel::new(name, f))
    }

    pub fn name(&self) -> String {
        match self {
            Kernel::Product => "product".into(),
            Kernel::Exponential { alpha } => format!("exponential(alpha={alpha})"),
            Kernel::Geometric { beta, .. } => format!("geometric(beta={})", rational::render(beta)),
            Kernel::Custom(c) => format!("custom({})", c.name),
        }
    }

    pub fn is_product(&self) -> bool {
        matches!(self, Kernel::Product)
    }

    /// `κ(z)` without range checking. Used on hot paths after validation.
    #[inline]
    pub fn eval_z(&self, z: f64) -> f64 {
        match self {
            Kernel::Product => z,
            Kernel::Exponential { alpha } => -(-alpha * z).exp_m1(),
            Kernel::Geometric { beta_f64, .. } => z / (beta_f64 + z),
            Kernel::Custom(c) => (c.f)(z),
        }
    }

    /// `κ(x, y)`, checked to be a probability.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64, KernelError> {
        if x < 0.0 || y < 0.0 {
            return Err(KernelError::NegativeArgument { x, y });
        }
        let z = x * y;
        let value = self.eval_z(z);
        if (0.0..=1.0).contains(&value) {
            Ok(value)
        } else {
            Err(KernelError::Range { kernel: self.name(), z, value })
        }
    }

    /// Exact `κ(z)` when the kernel maps rationals to rationals.
    pub fn eval_exact(&self, z: &Rational) -> Option<Rational> {
        match self {
            Kernel::Product => Some(z.clone()),
            Kernel::Geometric { beta, .. } => Some(z / (beta + z)),
            _ => None,
        }
    }

    /// `κ(z)` as a rational plus a flag telling whether it is exact. Non-rational
    /// kernels are evaluated in double precision and converted exactly, so the only
    /// error is the single rounding of `κ(z)`.
    pub fn eval_rational(&self, z: &Rational) -> Result<(Rational, bool), KernelError> {
        let (value, exact) = match self.eval_exact(z) {
            Some(v) => (v, true),
            None => {
                let zf = rational::to_f64(z);
                let v = self.eval_z(zf);
                let r = rational::from_f64(v).ok_or(KernelError::Range { kernel: self.name(), z: zf, value: v })?;
                (r, false)
            }
        };
        if !rational::is_probability(&value) {
            return Err(KernelError::Range {
                kernel: self.name(),
                z: rational::to_f64(z),
                value: rational::to_f64(&value),
            });
        }
        Ok((value, exact))
    }

    /// Whether the kernel is known analytically to be nondecreasing, concave and in `[0, 1]`
    /// (on `z ∈ [0, 1]` for the product kernel, on `z ≥ 0` otherwise).
    pub fn analytic_certificate(&self) -> bool {
        !matches!(self, Kernel::Custom(_))
    }

    /// Grid check of range, monotonicity and concavity on sorted nonnegative `z` values.
    pub fn validate(&self, z_grid: &[f64]) -> KernelValidationReport {
        let values: Vec<f64> = z_grid.iter().map(|&z| self.eval_z(z)).collect();
        let mut violations = Vec::new();
        if z_grid.len() < 3 {
            violations.push(KernelViolation { z: f64::NAN, property: KernelProperty::Grid, measured: z_grid.len() as f64 });
        }
        if z_grid.windows(2).any(|w| !(w[0] < w[1])) || z_grid.iter().any(|&z| z < 0.0) {
            violations.push(KernelViolation { z: f64::NAN, property: KernelProperty::Grid, measured: f64::NAN });
        }
        for (&z, &v) in z_grid.iter().zip(&values) {
            if !(0.0..=1.0).contains(&v) {
                violations.push(KernelViolation { z, property: KernelProperty::Range, measured: v });
            }
        }
        let mut strictly_increasing = true;
        for i in 1..values.len() {
            let diff = values[i] - values[i - 1];
            if diff < -VALIDATION_TOL {
                violations.push(KernelViolation { z: z_grid[i], property: KernelProperty::Monotonicity, measured: diff });
            }
            if diff <= 0.0 {
                strictly_increasing = false;
            }
        }
        // Concave iff successive slopes are nonincreasing.
        for i in 1..values.len().saturating_sub(1) {
            let left = (values[i] - values[i - 1]) / (z_grid[i] - z_grid[i - 1]);
            let right = (values[i + 1] - values[i]) / (z_grid[i + 1] - z_grid[i]);
            let second = right - left;
            if second > VALIDATION_TOL {
                violations.push(KernelViolation { z: z_grid[i], property: KernelProperty::Concavity, measured: second });
            }
        }
        KernelValidationReport {
            passed: violations.is_empty(),
            violations,
            strictly_increasing,
            analytic_certificate: self.analytic_certificate(),
        }
    }
}

/// Evenly spaced grid on `[0, z_max]` with `points` points.
pub fn uniform_grid(z_max: f64, points: usize) -> Vec<f64> {
    let n = points.max(2) - 1;
    (0..=n).map(|i| z_max * i as f64 / n as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelProperty {
    Range,
    Monotonicity,
    Concavity,
    /// The grid itself is unusable (too short, unsorted or negative).
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelViolation {
    pub z: f64,
    pub property: KernelProperty,
    pub measured: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelValidationReport {
    pub passed: bool,
    pub violations: Vec<KernelViolation>,
    /// Weak monotonicity is what `passed` requires; strictness is recorded here.
    pub strictly_increasing: bool,
    pub analytic_certificate: bool,
}
