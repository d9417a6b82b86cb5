//! Joint laws of the vertex weight pair (infectivity `W`, susceptibility `W̄`).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use rand::RngCore;
use serde::Serialize;
use thiserror::Error;

use super::rng::open_unit;
use crate::graph::VertexId;
use crate::rational::{self, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LawError {
    #[error("probabilities sum to {sum}, expected 1")]
    ProbabilitySum { sum: String },
    #[error("atom {index} has non-positive probability {prob}")]
    NonPositiveProbability { index: usize, prob: String },
    #[error("weights must be non-negative (atom {index})")]
    NegativeWeight { index: usize },
    #[error("law has no atoms")]
    Empty,
    #[error("invalid law parameter: {0}")]
    InvalidParameter(String),
    #[error("normalization failed: {0}")]
    Normalization(String),
}

/// One realised weight pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightPair {
    pub w: f64,
    pub w_bar: f64,
}

/// A weight pair with exact coordinates, used by atoms of finite laws.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExactPair {
    pub w: Rational,
    pub w_bar: Rational,
}

impl ExactPair {
    pub fn new(w: Rational, w_bar: Rational) -> Self {
        Self { w, w_bar }
    }

    pub fn to_f64(&self) -> WeightPair {
        WeightPair { w: rational::to_f64(&self.w), w_bar: rational::to_f64(&self.w_bar) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub pair: ExactPair,
    pub prob: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments<T> {
    pub e_w: T,
    pub e_wbar: T,
    pub e_wwbar: T,
}

impl Moments<Rational> {
    pub fn to_f64(&self) -> Moments<f64> {
        Moments {
            e_w: rational::to_f64(&self.e_w),
            e_wbar: rational::to_f64(&self.e_wbar),
            e_wwbar: rational::to_f64(&self.e_wwbar),
        }
    }
}

/// Closed intervals containing the projections `S_1` (of `W`) and `S_2` (of `W̄`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SupportBox {
    pub w: (f64, f64),
    pub w_bar: (f64, f64),
}

impl SupportBox {
    pub fn within_unit_square(&self) -> bool {
        self.w.0 >= 0.0 && self.w.1 <= 1.0 && self.w_bar.0 >= 0.0 && self.w_bar.1 <= 1.0
    }
}

fn check_probabilities<'a>(probs: impl Iterator<Item = &'a Rational>) -> Result<(), LawError> {
    let mut sum = Rational::zero();
    let mut count = 0;
    for (index, p) in probs.enumerate() {
        if !p.is_positive() {
            return Err(LawError::NonPositiveProbability { index, prob: rational::render(p) });
        }
        sum += p;
        count += 1;
    }
    if count == 0 {
        return Err(LawError::Empty);
    }
    if !sum.is_one() {
        let sum = if sum.is_integer() { sum.numer().to_string() } else { format!("{}/{}", sum.numer(), sum.denom()) };
        return Err(LawError::ProbabilitySum { sum });
    }
    Ok(())
}

fn cumulative(probs: impl Iterator<Item = Rational>) -> Vec<f64> {
    let mut acc = Rational::zero();
    let mut out: Vec<f64> = probs
        .map(|p| {
            acc += p;
            rational::to_f64(&acc)
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    out
}

#[inline]
fn pick(cumulative: &[f64], u: f64) -> usize {
    cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1)
}

/// Finite joint law given by atoms with exact probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteLaw {
    atoms: Vec<Atom>,
    values: Vec<WeightPair>,
    cumulative: Vec<f64>,
}

impl DiscreteLaw {
    pub fn new(atoms: Vec<Atom>) -> Result<Self, LawError> {
        check_probabilities(atoms.iter().map(|a| &a.prob))?;
        if let Some(index) = atoms.iter().position(|a| a.pair.w.is_negative() || a.pair.w_bar.is_negative()) {
            return Err(LawError::NegativeWeight { index });
        }
        let values = atoms.iter().map(|a| a.pair.to_f64()).collect();
        let cumulative = cumulative(atoms.iter().map(|a| a.prob.clone()));
        Ok(Self { atoms, values, cumulative })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }
}

/// One-dimensional law used as a factor of a product law.
#[derive(Debug, Clone, PartialEq)]
pub enum Marginal {
    Discrete { atoms: Vec<(Rational, Rational)>, values: Vec<f64>, cumulative: Vec<f64> },
    Uniform { lo: f64, hi: f64 },
    Point(Rational),
}

impl Marginal {
    pub fn discrete(atoms: Vec<(Rational, Rational)>) -> Result<Self, LawError> {
        check_probabilities(atoms.iter().map(|(_, p)| p))?;
        if let Some(index) = atoms.iter().position(|(v, _)| v.is_negative()) {
            return Err(LawError::NegativeWeight { index });
        }
        let values = atoms.iter().map(|(v, _)| rational::to_f64(v)).collect();
        let cumulative = cumulative(atoms.iter().map(|(_, p)| p.clone()));
        Ok(Marginal::Discrete { atoms, values, cumulative })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self, LawError> {
        if !(0.0 <= lo && lo < hi && hi.is_finite()) {
            return Err(LawError::InvalidParameter(format!("uniform marginal needs 0 <= lo < hi, got ({lo}, {hi})")));
        }
        Ok(Marginal::Uniform { lo, hi })
    }

    pub fn point(v: Rational) -> Result<Self, LawError> {
        if v.is_negative() {
            return Err(LawError::NegativeWeight { index: 0 });
        }
        Ok(Marginal::Point(v))
    }

    fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = open_unit(rng.next_u64());
        match self {
            Marginal::Discrete { values, cumulative, .. } => values[pick(cumulative, u)],
            Marginal::Uniform { lo, hi } => lo + (hi - lo) * u,
            Marginal::Point(v) => rational::to_f64(v),
        }
    }

    fn mean(&self) -> f64 {
        match self {
            Marginal::Uniform { lo, hi } => 0.5 * (lo + hi),
            _ => rational::to_f64(&self.exact_mean().expect("finite marginal")),
        }
    }

    fn exact_mean(&self) -> Option<Rational> {
        match self {
            Marginal::Discrete { atoms, .. } => Some(atoms.iter().map(|(v, p)| v * p).sum()),
            Marginal::Point(v) => Some(v.clone()),
            Marginal::Uniform { .. } => None,
        }
    }

    fn exact_atoms(&self) -> Option<Vec<(Rational, Rational)>> {
        match self {
            Marginal::Discrete { atoms, .. } => Some(atoms.clone()),
            Marginal::Point(v) => Some(vec![(v.clone(), Rational::one())]),
            Marginal::Uniform { .. } => None,
        }
    }

    fn range(&self) -> (f64, f64) {
        match self {
            Marginal::Discrete { values, .. } => values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v))),
            Marginal::Uniform { lo, hi } => (*lo, *hi),
            Marginal::Point(v) => (rational::to_f64(v), rational::to_f64(v)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WeightLaw {
    Discrete(DiscreteLaw),
    /// `W` and `W̄` independent with the given marginals.
    Product(Marginal, Marginal),
    /// `W = W̄ ~ Uniform(a, 1)`.
    IdenticalUniform { a: f64 },
    PointMass(ExactPair),
}

impl WeightLaw {
    pub fn discrete(atoms: Vec<Atom>) -> Result<Self, LawError> {
        Ok(WeightLaw::Discrete(DiscreteLaw::new(atoms)?))
    }

    /// Convenience constructor from `(w, w_bar, prob)` triples.
    pub fn from_triples(triples: &[(Rational, Rational, Rational)]) -> Result<Self, LawError> {
        Self::discrete(
            triples
                .iter()
                .map(|(w, wb, p)| Atom { pair: ExactPair::new(w.clone(), wb.clone()), prob: p.clone() })
                .collect(),
        )
    }

    pub fn point_mass(w: Rational, w_bar: Rational) -> Result<Self, LawError> {
        if w.is_negative() || w_bar.is_negative() {
            return Err(LawError::NegativeWeight { index: 0 });
        }
        Ok(WeightLaw::PointMass(ExactPair::new(w, w_bar)))
    }

    pub fn identical_uniform(a: f64) -> Result<Self, LawError> {
        if !(0.0..1.0).contains(&a) {
            return Err(LawError::InvalidParameter(format!("identical_uniform needs a in [0, 1), got {a}")));
        }
        Ok(WeightLaw::IdenticalUniform { a })
    }

    pub fn product(w: Marginal, w_bar: Marginal) -> Self {
        WeightLaw::Product(w, w_bar)
    }

    /// `P(W = W̄ = 1) = p`, `P(W = W̄ = 0) = 1 − p`: the weighted encoding of site percolation.
    pub fn site(p: &Rational) -> Result<Self, LawError> {
        if !rational::is_probability(p) {
            return Err(LawError::InvalidParameter(format!("site parameter {p} outside [0, 1]")));
        }
        let one = Rational::one();
        let zero = Rational::zero();
        let mut triples = Vec::new();
        if p.is_positive() {
            triples.push((one.clone(), one.clone(), p.clone()));
        }
        if *p < one {
            triples.push((zero.clone(), zero, &one - p));
        }
        Self::from_triples(&triples)
    }

    /// Draws one weight pair, using at most two 64-bit words from `rng`.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> WeightPair {
        match self {
            WeightLaw::Discrete(t) => t.values[pick(&t.cumulative, open_unit(rng.next_u64()))],
            WeightLaw::Product(a, b) => {
                let w = a.sample(rng);
                let w_bar = b.sample(rng);
                WeightPair { w, w_bar }
            }
            WeightLaw::IdenticalUniform { a } => {
                let w = a + (1.0 - a) * open_unit(rng.next_u64());
                WeightPair { w, w_bar: w }
            }
            WeightLaw::PointMass(p) => p.to_f64(),
        }
    }

    /// Atoms of a finite-support law, `None` for continuous laws.
    pub fn atoms(&self) -> Option<Vec<Atom>> {
        match self {
            WeightLaw::Discrete(t) => Some(t.atoms.clone()),
            WeightLaw::PointMass(p) => Some(vec![Atom { pair: p.clone(), prob: Rational::one() }]),
            WeightLaw::Product(a, b) => {
                let (a, b) = (a.exact_atoms()?, b.exact_atoms()?);
                Some(
                    a.iter()
                        .flat_map(|(w, p)| {
                            b.iter().map(move |(wb, q)| Atom { pair: ExactPair::new(w.clone(), wb.clone()), prob: p * q })
                        })
                        .collect(),
                )
            }
            WeightLaw::IdenticalUniform { .. } => None,
        }
    }

    pub fn is_finite_support(&self) -> bool {
        !matches!(self, WeightLaw::IdenticalUniform { .. })
            && !matches!(self, WeightLaw::Product(a, b) if matches!(a, Marginal::Uniform { .. }) || matches!(b, Marginal::Uniform { .. }))
    }

    /// Exact `(E W, E W̄, E WW̄)` for finite-support laws.
    pub fn exact_moments(&self) -> Option<Moments<Rational>> {
        if let WeightLaw::Product(a, b) = self {
            let (ea, eb) = (a.exact_mean()?, b.exact_mean()?);
            return Some(Moments { e_wwbar: &ea * &eb, e_w: ea, e_wbar: eb });
        }
        let atoms = self.atoms()?;
        let mut m = Moments { e_w: Rational::zero(), e_wbar: Rational::zero(), e_wwbar: Rational::zero() };
        for a in &atoms {
            m.e_w += &a.pair.w * &a.prob;
            m.e_wbar += &a.pair.w_bar * &a.prob;
            m.e_wwbar += &a.pair.w * &a.pair.w_bar * &a.prob;
        }
        Some(m)
    }

    /// `(E W, E W̄, E WW̄)`; exact for finite laws, closed form otherwise.
    pub fn moments(&self) -> Moments<f64> {
        match self {
            WeightLaw::IdenticalUniform { a } => {
                let mean = 0.5 * (1.0 + a);
                let second = (1.0 + a + a * a) / 3.0;
                Moments { e_w: mean, e_wbar: mean, e_wwbar: second }
            }
            WeightLaw::Product(a, b) if self.exact_moments().is_none() => {
                let (ea, eb) = (a.mean(), b.mean());
                Moments { e_w: ea, e_wbar: eb, e_wwbar: ea * eb }
            }
            _ => self.exact_moments().expect("finite law").to_f64(),
        }
    }

    pub fn support(&self) -> SupportBox {
        match self {
            WeightLaw::Discrete(t) => {
                let fold = |f: fn(&WeightPair) -> f64| {
                    t.values.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
                };
                SupportBox { w: fold(|p| p.w), w_bar: fold(|p| p.w_bar) }
            }
            WeightLaw::Product(a, b) => SupportBox { w: a.range(), w_bar: b.range() },
            WeightLaw::IdenticalUniform { a } => SupportBox { w: (*a, 1.0), w_bar: (*a, 1.0) },
            WeightLaw::PointMass(p) => {
                let v = p.to_f64();
                SupportBox { w: (v.w, v.w), w_bar: (v.w_bar, v.w_bar) }
            }
        }
    }
}

impl fmt::Display for WeightLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightLaw::Discrete(t) => {
                write!(f, "discrete{{")?;
                for (i, a) in t.atoms.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "({}, {}): {}", a.pair.w, a.pair.w_bar, a.prob)?;
                }
                write!(f, "}}")
            }
            WeightLaw::Product(..) => write!(f, "product"),
            WeightLaw::IdenticalUniform { a } => write!(f, "identical_uniform(a={a})"),
            WeightLaw::PointMass(p) => write!(f, "point_mass({}, {})", p.w, p.w_bar),
        }
    }
}

type MapFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Monotone map applied to one weight coordinate when normalising a
/// factorisable kernel `κ(x, y) = κ₁(x) κ₂(y)` to `xy`.
#[derive(Clone)]
pub enum ComponentMap {
    Identity,
    /// `x ↦ c·x` with `c ≥ 0`.
    Scale(Rational),
    /// `x ↦ x / (1 + x)`.
    Squash,
    Custom(String, MapFn),
}

impl fmt::Debug for ComponentMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentMap::Identity => write!(f, "Identity"),
            ComponentMap::Scale(c) => write!(f, "Scale({c})"),
            ComponentMap::Squash => write!(f, "Squash"),
            ComponentMap::Custom(name, _) => write!(f, "Custom({name})"),
        }
    }
}

impl ComponentMap {
    fn apply_exact(&self, x: &Rational) -> Option<Rational> {
        match self {
            ComponentMap::Identity => Some(x.clone()),
            ComponentMap::Scale(c) => Some(c * x),
            ComponentMap::Squash => Some(x / (Rational::one() + x)),
            ComponentMap::Custom(_, f) => rational::from_f64(f(rational::to_f64(x))),
        }
    }

    fn apply(&self, x: f64) -> f64 {
        match self {
            ComponentMap::Identity => x,
            ComponentMap::Scale(c) => rational::to_f64(c) * x,
            ComponentMap::Squash => x / (1.0 + x),
            ComponentMap::Custom(_, f) => f(x),
        }
    }

    fn map_values(&self, values: &[Rational], coordinate: &str) -> Result<Vec<Rational>, LawError> {
        let mut sorted: Vec<&Rational> = values.iter().collect();
        sorted.sort();
        sorted.dedup();
        let mapped: Vec<Rational> = sorted
            .iter()
            .map(|v| {
                self.apply_exact(v)
                    .ok_or_else(|| LawError::Normalization(format!("{coordinate} map is not finite at {v}")))
            })
            .collect::<Result<_, _>>()?;
        if let Some(bad) = mapped.iter().find(|m| !rational::is_probability(m)) {
            return Err(LawError::Normalization(format!("{coordinate} map leaves [0, 1]: value {bad}")));
        }
        if mapped.windows(2).any(|w| w[1] < w[0]) {
            return Err(LawError::Normalization(format!("{coordinate} map is not monotone on the support")));
        }
        Ok(values.iter().map(|v| self.apply_exact(v).expect("checked above")).collect())
    }

    fn map_marginal(&self, m: &Marginal, coordinate: &str) -> Result<Marginal, LawError> {
        match (self, m) {
            (ComponentMap::Identity, _) => Ok(m.clone()),
            (_, Marginal::Uniform { lo, hi }) => match self {
                ComponentMap::Scale(_) => {
                    let (a, b) = (self.apply(*lo), self.apply(*hi));
                    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
                        return Err(LawError::Normalization(format!("{coordinate} map leaves [0, 1]")));
                    }
                    Marginal::uniform(a, b)
                }
                _ => Err(LawError::Normalization(format!(
                    "{coordinate}: pushforward of a uniform marginal by {self:?} is not a supported law"
                ))),
            },
            (_, Marginal::Point(v)) => Marginal::point(self.map_values(std::slice::from_ref(v), coordinate)?.remove(0)),
            (_, Marginal::Discrete { atoms, .. }) => {
                let values: Vec<Rational> = atoms.iter().map(|(v, _)| v.clone()).collect();
                let mapped = self.map_values(&values, coordinate)?;
                Marginal::discrete(mapped.into_iter().zip(atoms.iter().map(|(_, p)| p.clone())).collect())
            }
        }
    }
}

/// Pushforward of `law` by `(κ₁, κ₂)`, after which the kernel is `κ(x, y) = xy`.
pub fn normalize_factorisable(law: &WeightLaw, k1: &ComponentMap, k2: &ComponentMap) -> Result<WeightLaw, LawError> {
    let identity = |m: &ComponentMap| matches!(m, ComponentMap::Identity);
    match law {
        WeightLaw::IdenticalUniform { .. } if identity(k1) && identity(k2) => {
            if law.support().within_unit_square() {
                Ok(law.clone())
            } else {
                Err(LawError::Normalization("support leaves [0, 1]²".into()))
            }
        }
        WeightLaw::IdenticalUniform { .. } => Err(LawError::Normalization(
            "pushforward of identical_uniform by non-identity maps is not a supported law".into(),
        )),
        WeightLaw::Product(a, b) => Ok(WeightLaw::Product(k1.map_marginal(a, "W")?, k2.map_marginal(b, "W_bar")?)),
        WeightLaw::PointMass(p) => {
            let w = k1.map_values(std::slice::from_ref(&p.w), "W")?.remove(0);
            let wb = k2.map_values(std::slice::from_ref(&p.w_bar), "W_bar")?.remove(0);
            WeightLaw::point_mass(w, wb)
        }
        WeightLaw::Discrete(t) => {
            let ws: Vec<Rational> = t.atoms.iter().map(|a| a.pair.w.clone()).collect();
            let wbs: Vec<Rational> = t.atoms.iter().map(|a| a.pair.w_bar.clone()).collect();
            let ws = k1.map_values(&ws, "W")?;
            let wbs = k2.map_values(&wbs, "W_bar")?;
            let atoms = t
                .atoms
                .iter()
                .zip(ws.into_iter().zip(wbs))
                .map(|(a, (w, wb))| Atom { pair: ExactPair::new(w, wb), prob: a.prob.clone() })
                .collect::<Vec<_>>();
            // A single atom collapses to a point mass.
            if atoms.len() == 1 {
                let a = atoms.into_iter().next().expect("one atom");
                return WeightLaw::point_mass(a.pair.w, a.pair.w_bar);
            }
            WeightLaw::discrete(atoms)
        }
    }
}

/// Assignment of a weight law to every vertex: a shared default plus overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct LawMap {
    default: WeightLaw,
    overrides: BTreeMap<VertexId, WeightLaw>,
}

impl LawMap {
    pub fn uniform(law: WeightLaw) -> Self {
        Self { default: law, overrides: BTreeMap::new() }
    }

    pub fn with_override(mut self, v: VertexId, law: WeightLaw) -> Self {
        self.overrides.insert(v, law);
        self
    }

    pub fn set(&mut self, v: VertexId, law: WeightLaw) {
        self.overrides.insert(v, law);
    }

    #[inline]
    pub fn law_for(&self, v: VertexId) -> &WeightLaw {
        self.overrides.get(&v).unwrap_or(&self.default)
    }

    pub fn default_law(&self) -> &WeightLaw {
        &self.default
    }

    pub fn overrides(&self) -> &BTreeMap<VertexId, WeightLaw> {
        &self.overrides
    }

    /// True when every vertex uses the same law.
    pub fn is_identical(&self) -> bool {
        self.overrides.values().all(|l| *l == self.default)
    }

    /// Per-vertex laws as a dense vector; overrides beyond `n` are ignored.
    pub fn dense(&self, n: usize) -> Vec<&WeightLaw> {
        (0..n).map(|v| self.law_for(v)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};
    use crate::stochastics::rng::ReplicationStream;

    fn half_half() -> WeightLaw {
        WeightLaw::from_triples(&[(int(0), int(0), frac(3, 5)), (int(1), int(1), frac(2, 5))]).unwrap()
    }

    #[test]
    fn probability_sum_diagnostic() {
        let err = WeightLaw::from_triples(&[(int(0), int(0), frac(1, 2)), (int(1), int(1), frac(2, 5))]).unwrap_err();
        assert_eq!(err.to_string(), "probabilities sum to 9/10, expected 1");
        assert!(matches!(
            WeightLaw::from_triples(&[(int(0), int(0), int(0)), (int(1), int(1), int(1))]),
            Err(LawError::NonPositiveProbability { index: 0, .. })
        ));
        assert!(WeightLaw::from_triples(&[]).is_err());
        assert!(WeightLaw::identical_uniform(1.0).is_err());
    }

    #[test]
    fn samples() {
        let s = ReplicationStream::new(1, 2);
        let pm = WeightLaw::point_mass(frac(3, 10), frac(7, 10)).unwrap();
        for v in 0..10 {
            assert_eq!(pm.sample(&mut s.vertex_rng(v)), WeightPair { w: 0.3, w_bar: 0.7 });
        }
        let u = WeightLaw::identical_uniform(0.0).unwrap();
        for v in 0..1000 {
            let p = u.sample(&mut s.vertex_rng(v));
            assert_eq!(p.w, p.w_bar);
            assert!(p.w > 0.0 && p.w < 1.0);
        }
    }

    #[test]
    fn discrete_frequency_within_three_sigma() {
        let law = half_half();
        let n = 100_000;
        let s = ReplicationStream::new(99, 0);
        let hits = (0..n).filter(|&v| law.sample(&mut s.vertex_rng(v)).w == 1.0).count();
        let sigma = (0.4f64 * 0.6 / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - 0.4).abs() < 3.0 * sigma);
    }

    #[test]
    fn moments() {
        let m = WeightLaw::identical_uniform(0.0).unwrap().moments();
        assert!((m.e_w - 0.5).abs() < 1e-15 && (m.e_wwbar - 1.0 / 3.0).abs() < 1e-15);
        let a = (0.75f64).sqrt() - 0.5;
        let m = WeightLaw::identical_uniform(a).unwrap().moments();
        assert!((m.e_wwbar - 0.5).abs() < 1e-15);
        let pm = WeightLaw::point_mass(frac(1, 3), frac(3, 4)).unwrap().exact_moments().unwrap();
        assert_eq!((pm.e_w, pm.e_wbar, pm.e_wwbar), (frac(1, 3), frac(3, 4), frac(1, 4)));
        let prod = WeightLaw::product(
            Marginal::discrete(vec![(int(0), frac(1, 2)), (int(1), frac(1, 2))]).unwrap(),
            Marginal::point(frac(1, 2)).unwrap(),
        );
        let m = prod.exact_moments().unwrap();
        assert_eq!(m.e_wwbar, frac(1, 4));
        assert_eq!(prod.atoms().unwrap().len(), 2);
        let cont = WeightLaw::product(Marginal::uniform(0.0, 1.0).unwrap(), Marginal::point(int(1)).unwrap());
        assert!(!cont.is_finite_support());
        assert_eq!(cont.moments().e_wwbar, 0.5);
    }

    #[test]
    fn normalization() {
        let law = half_half();
        assert_eq!(normalize_factorisable(&law, &ComponentMap::Identity, &ComponentMap::Identity).unwrap(), law);
        let big = WeightLaw::from_triples(&[(int(2), int(2), int(1))]).unwrap();
        let n = normalize_factorisable(&big, &ComponentMap::Scale(frac(1, 2)), &ComponentMap::Scale(frac(1, 4))).unwrap();
        assert_eq!(n, WeightLaw::point_mass(int(1), frac(1, 2)).unwrap());
        let prod = WeightLaw::product(
            Marginal::discrete(vec![(int(1), frac(1, 2)), (int(3), frac(1, 2))]).unwrap(),
            Marginal::point(int(1)).unwrap(),
        );
        let squashed = normalize_factorisable(&prod, &ComponentMap::Squash, &ComponentMap::Squash).unwrap();
        let atoms = squashed.atoms().unwrap();
        assert_eq!(atoms[0].pair, ExactPair::new(frac(1, 2), frac(1, 2)));
        assert_eq!(atoms[1].pair, ExactPair::new(frac(3, 4), frac(1, 2)));
        assert_eq!(atoms[0].prob, frac(1, 2));
        assert!(matches!(
            normalize_factorisable(&big, &ComponentMap::Identity, &ComponentMap::Identity),
            Err(LawError::Normalization(_))
        ));
    }

    #[test]
    fn law_maps() {
        let m = LawMap::uniform(half_half());
        assert!(m.is_identical());
        let m = m.with_override(3, WeightLaw::point_mass(int(1), int(1)).unwrap());
        assert!(!m.is_identical());
        assert_eq!(m.law_for(3), &WeightLaw::point_mass(int(1), int(1)).unwrap());
        assert_eq!(m.law_for(2), &half_half());
    }
}
