//! Geometric kernel versus the exponential kernel with an exponentially
//! distributed infectivity factor `Λ`: `(W, W̄) ↦ (ΛW/α, W̄)` under `κ_b`.

use num_traits::{One, Signed, Zero};
use quadrature::double_exponential;

use super::OracleError;
use crate::rational::{self, Rational};
use crate::stochastics::Kernel;

/// Largest star size handled by the joint comparison.
const MAX_MULTIPLICITY: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct MarginalCheck {
    pub w: Rational,
    pub w_bar: Rational,
    /// `w w̄ / (β + w w̄)`.
    pub closed_form: f64,
    /// `E_Λ[κ_b(Λw/α, w̄)]` by numerical integration.
    pub quadrature: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointComparison {
    pub w: Rational,
    pub w_bar: Rational,
    pub multiplicity: usize,
    /// `(open-edge mask, P under κ_c, P under κ_b with Λ)` for every state.
    pub states: Vec<(u32, Rational, Rational)>,
    pub total_variation: Rational,
}

impl JointComparison {
    /// Probability that every edge of the star is open, under each parametrization.
    pub fn all_open(&self) -> (Rational, Rational) {
        let full = (1u32 << self.multiplicity) - 1;
        let s = self.states.iter().find(|s| s.0 == full).expect("full state");
        (s.1.clone(), s.2.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReparametrizationReport {
    pub alpha: f64,
    pub beta: Rational,
    pub marginals: Vec<MarginalCheck>,
    pub max_marginal_error: f64,
    pub joints: Vec<JointComparison>,
    pub max_total_variation: Rational,
}

/// `E e^{−kΛ}` for `Λ` exponential with rate `β`.
fn laplace(beta: &Rational, k: &Rational) -> Rational {
    beta / (beta + k)
}

fn joint(w: &Rational, w_bar: &Rational, beta: &Rational, m: usize) -> JointComparison {
    let z = w * w_bar;
    let q = &z / (beta + &z);
    let mut states = Vec::with_capacity(1 << m);
    let mut tv = Rational::zero();
    for mask in 0u32..(1 << m) {
        let open = mask.count_ones() as usize;
        let closed = m - open;
        let mut product = Rational::one();
        for _ in 0..open {
            product *= &q;
        }
        for _ in 0..closed {
            product *= Rational::one() - &q;
        }
        // Π_open (1 − e^{−Λz}) Π_closed e^{−Λz}, expanded over subsets of the open edges.
        let mut mixed = Rational::zero();
        for s in 0u32..(1 << open) {
            let k = Rational::from_integer(((s.count_ones() as usize) + closed).into()) * &z;
            let term = laplace(beta, &k);
            if s.count_ones() % 2 == 0 {
                mixed += term;
            } else {
                mixed -= term;
            }
        }
        tv += (&product - &mixed).abs();
        states.push((mask, product, mixed));
    }
    JointComparison {
        w: w.clone(),
        w_bar: w_bar.clone(),
        multiplicity: m,
        states,
        total_variation: tv / Rational::from_integer(2.into()),
    }
}

/// Checks the single-edge identity `E_Λ[κ_b(Λw/α, w̄)] = κ_c(w, w̄)` at every grid
/// point and compares the joint law of a star's `m` out-edges under both forms.
pub fn check_kernel_reparametrization(
    w_grid: &[Rational],
    w_bar_grid: &[Rational],
    alpha: f64,
    beta: &Rational,
    multiplicity: usize,
) -> Result<ReparametrizationReport, OracleError> {
    if multiplicity == 0 || multiplicity > MAX_MULTIPLICITY {
        return Err(OracleError::InvalidArgument(format!("edge multiplicity must be in 1..={MAX_MULTIPLICITY}")));
    }
    if w_grid.iter().chain(w_bar_grid).any(|v| v.is_negative()) {
        return Err(OracleError::InvalidArgument("weights must be nonnegative".into()));
    }
    let kb = Kernel::exponential(alpha)?;
    let kc = Kernel::geometric(beta.clone())?;
    let beta_f = rational::to_f64(beta);
    let mut marginals = Vec::new();
    let mut joints = Vec::new();
    for w in w_grid {
        for wb in w_bar_grid {
            let (wf, wbf) = (rational::to_f64(w), rational::to_f64(wb));
            let closed_form = kc.eval_z(wf * wbf);
            // With t = e^{−βλ} the exponential density turns into dt on (0, 1).
            let integrand = |t: f64| {
                let lambda = -t.ln() / beta_f;
                kb.eval_z(lambda * wf / alpha * wbf)
            };
            let quadrature = double_exponential::integrate(integrand, 0.0, 1.0, 1e-14).integral;
            marginals.push(MarginalCheck {
                w: w.clone(),
                w_bar: wb.clone(),
                closed_form,
                quadrature,
                abs_error: (closed_form - quadrature).abs(),
            });
            joints.push(joint(w, wb, beta, multiplicity));
        }
    }
    let max_marginal_error = marginals.iter().map(|m| m.abs_error).fold(0.0, f64::max);
    let max_total_variation = joints.iter().map(|j| j.total_variation.clone()).max().unwrap_or_else(Rational::zero);
    Ok(ReparametrizationReport { alpha, beta: beta.clone(), marginals, max_marginal_error, joints, max_total_variation })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    #[test]
    fn marginals_agree() {
        let grid: Vec<Rational> = (0..5).map(|i| frac(i, 2)).collect();
        let r = check_kernel_reparametrization(&grid, &grid, 1.5, &frac(1, 2), 1).unwrap();
        assert_eq!(r.marginals.len(), 25);
        assert!(r.max_marginal_error < 1e-10, "{}", r.max_marginal_error);
        assert_eq!(r.max_total_variation, int(0));
    }

    #[test]
    fn joint_of_two_edges() {
        let r = check_kernel_reparametrization(&[int(1)], &[int(1)], 1.0, &int(1), 2).unwrap();
        let j = &r.joints[0];
        assert_eq!(j.all_open(), (frac(1, 4), frac(1, 3)));
        // States: none open 1/4 vs 1/3, one open 1/4 vs 1/6 twice, both 1/4 vs 1/3.
        assert_eq!(j.total_variation, frac(1, 6));
        let zero = check_kernel_reparametrization(&[int(0)], &[int(1)], 1.0, &int(1), 2).unwrap();
        assert_eq!(zero.joints[0].total_variation, int(0));
        assert_eq!(zero.joints[0].states[0].1, int(1));
    }
}
