//! Zero functions `z_u(P; A, B; x, y)` and grid comparisons between two laws.
//!
//! The value depends on `A` and `B` only through their sizes, so a query is
//! just the two weight vectors `x` (partners' `W̄`) and `y` (partners' `W`).

use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use super::{at_most, ExactProbability, Method, OracleError};
use crate::rational::{self, Rational};
use crate::stochastics::{Kernel, WeightLaw};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ZeroQuery {
    /// `W̄` weights at the heads of the out-edges in `A`.
    pub x: Vec<Rational>,
    /// `W` weights at the tails of the in-edges in `B`.
    pub y: Vec<Rational>,
}

impl ZeroQuery {
    pub fn new(x: Vec<Rational>, y: Vec<Rational>) -> Self {
        Self { x, y }
    }
}

fn render_vec(v: &[Rational]) -> String {
    let parts: Vec<String> = v.iter().map(rational::render).collect();
    format!("({})", parts.join(","))
}

impl fmt::Display for ZeroQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|A|={} |B|={} x={} y={}", self.x.len(), self.y.len(), render_vec(&self.x), render_vec(&self.y))
    }
}

/// `Π (1 − κ(w · v_i))` with exactness tracking.
fn survival(kernel: &Kernel, w: &Rational, partners: &[Rational]) -> Result<(Rational, bool), OracleError> {
    let mut prod = Rational::one();
    let mut exact = true;
    for v in partners {
        let (q, e) = kernel.eval_rational(&(w * v))?;
        exact &= e;
        prod *= Rational::one() - q;
    }
    Ok((prod, exact))
}

/// The zero function, evaluated from its definition in each of the four cases.
pub fn zero_function(query: &ZeroQuery, law: &WeightLaw, kernel: &Kernel) -> Result<ExactProbability, OracleError> {
    let (a, b) = (query.x.len(), query.y.len());
    if a == 0 && b == 0 {
        return Ok(ExactProbability::exact(Rational::one(), Method::ClosedForm));
    }
    let atoms = law.atoms().ok_or(OracleError::NotFiniteSupport { vertex: 0 })?;
    let mut total = Rational::zero();
    let mut exact = true;
    for atom in &atoms {
        let (out, e1) = survival(kernel, &atom.pair.w, &query.x)?;
        let (inn, e2) = if b > 0 {
            // κ(y_j, W̄) depends on the product y_j W̄ only.
            survival(kernel, &atom.pair.w_bar, &query.y)?
        } else {
            (Rational::one(), true)
        };
        exact &= e1 && e2;
        let value = match (a > 0, b > 0) {
            (true, true) => Rational::one() - (Rational::one() - out) * (Rational::one() - inn),
            (true, false) => out,
            (false, true) => inn,
            (false, false) => unreachable!(),
        };
        total += &atom.prob * value;
    }
    Ok(ExactProbability { value: total, exact, method: Method::ClosedForm })
}

/// All multisets of `size` elements drawn from `grid`, as nondecreasing index sequences.
pub fn multisets<T: Clone>(grid: &[T], size: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    let mut idx = vec![0usize; size];
    if grid.is_empty() {
        if size == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    loop {
        out.push(idx.iter().map(|&i| grid[i].clone()).collect());
        let Some(pos) = (0..size).rev().find(|&p| idx[p] + 1 < grid.len()) else {
            return out;
        };
        idx[pos] += 1;
        let v = idx[pos];
        idx[pos..].iter_mut().for_each(|i| *i = v);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroOrdering {
    Equal,
    /// `z(P^a) ≥ z(P^b)` everywhere on the grid, strictly somewhere.
    ADominates,
    BDominates,
    Incomparable,
}

impl fmt::Display for ZeroOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ZeroOrdering::Equal => "equal",
            ZeroOrdering::ADominates => "a_dominates",
            ZeroOrdering::BDominates => "b_dominates",
            ZeroOrdering::Incomparable => "incomparable",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroWitness {
    pub query: ZeroQuery,
    pub z_a: ExactProbability,
    pub z_b: ExactProbability,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroRow {
    pub query: ZeroQuery,
    pub z_a: ExactProbability,
    pub z_b: ExactProbability,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroComparison {
    /// `z(P^a) ≥ z(P^b)` at every evaluated point.
    pub a_ge_b: bool,
    pub b_ge_a: bool,
    pub ordering: ZeroOrdering,
    /// A point with `z(P^a) < z(P^b)`, if any.
    pub a_below: Option<ZeroWitness>,
    /// A point with `z(P^b) < z(P^a)`, if any.
    pub b_below: Option<ZeroWitness>,
    pub evaluated: usize,
    pub rows: Vec<ZeroRow>,
}

/// Per-atom survival products for every multiset on one side.
struct Side {
    vectors: Vec<Vec<Rational>>,
    /// `products[k][m]`: atom `k`, multiset `m`.
    products: Vec<Vec<Rational>>,
}

fn side(law_atoms: &[(Rational, Rational, Rational)], kernel: &Kernel, grid: &[Rational], size: usize, use_w: bool) -> Result<(Side, bool), OracleError> {
    let vectors = multisets(grid, size);
    let mut exact = true;
    let mut products = Vec::with_capacity(law_atoms.len());
    for (w, wb, _) in law_atoms {
        let own = if use_w { w } else { wb };
        let mut row = Vec::with_capacity(vectors.len());
        for v in &vectors {
            let (p, e) = survival(kernel, own, v)?;
            exact &= e;
            row.push(p);
        }
        products.push(row);
    }
    Ok((Side { vectors, products }, exact))
}

fn evaluate(atoms: &[(Rational, Rational, Rational)], a: &Side, b: &Side, i: usize, j: usize, sizes: (usize, usize)) -> Rational {
    match sizes {
        (0, 0) => Rational::one(),
        (_, 0) => atoms.iter().enumerate().map(|(k, at)| &at.2 * &a.products[k][i]).sum(),
        (0, _) => atoms.iter().enumerate().map(|(k, at)| &at.2 * &b.products[k][j]).sum(),
        _ => {
            let miss: Rational = atoms
                .iter()
                .enumerate()
                .map(|(k, at)| &at.2 * (Rational::one() - &a.products[k][i]) * (Rational::one() - &b.products[k][j]))
                .sum();
            Rational::one() - miss
        }
    }
}

fn triples(law: &WeightLaw) -> Result<Vec<(Rational, Rational, Rational)>, OracleError> {
    let atoms = law.atoms().ok_or(OracleError::NotFiniteSupport { vertex: 0 })?;
    Ok(atoms.into_iter().map(|a| (a.pair.w, a.pair.w_bar, a.prob)).collect())
}

/// Compares `z(P^a)` and `z(P^b)` for all `|A| ≤ max_a`, `|B| ≤ max_b` and all
/// multisets of grid values. `x_grid` ranges over `S_2`, `y_grid` over `S_1`.
#[allow(clippy::too_many_arguments)]
pub fn compare_zero_functions(
    law_a: &WeightLaw,
    law_b: &WeightLaw,
    kernel: &Kernel,
    max_a: usize,
    max_b: usize,
    x_grid: &[Rational],
    y_grid: &[Rational],
    with_rows: bool,
) -> Result<ZeroComparison, OracleError> {
    let (ta, tb) = (triples(law_a)?, triples(law_b)?);
    let mut cmp = ZeroComparison {
        a_ge_b: true,
        b_ge_a: true,
        ordering: ZeroOrdering::Equal,
        a_below: None,
        b_below: None,
        evaluated: 0,
        rows: Vec::new(),
    };
    for na in 0..=max_a {
        let (sa_a, ea1) = side(&ta, kernel, x_grid, na, true)?;
        let (sa_b, eb1) = side(&tb, kernel, x_grid, na, true)?;
        for nb in 0..=max_b {
            let (sb_a, ea2) = side(&ta, kernel, y_grid, nb, false)?;
            let (sb_b, eb2) = side(&tb, kernel, y_grid, nb, false)?;
            let exact_a = ea1 && ea2;
            let exact_b = eb1 && eb2;
            for i in 0..sa_a.vectors.len() {
                for j in 0..sb_a.vectors.len() {
                    let method = Method::ClosedForm;
                    let za = ExactProbability { value: evaluate(&ta, &sa_a, &sb_a, i, j, (na, nb)), exact: exact_a, method };
                    let zb = ExactProbability { value: evaluate(&tb, &sa_b, &sb_b, i, j, (na, nb)), exact: exact_b, method };
                    cmp.evaluated += 1;
                    let query = || ZeroQuery::new(sa_a.vectors[i].clone(), sb_a.vectors[j].clone());
                    if !at_most(&zb, &za) {
                        cmp.a_ge_b = false;
                        if cmp.a_below.is_none() {
                            cmp.a_below = Some(ZeroWitness { query: query(), z_a: za.clone(), z_b: zb.clone() });
                        }
                    }
                    if !at_most(&za, &zb) {
                        cmp.b_ge_a = false;
                        if cmp.b_below.is_none() {
                            cmp.b_below = Some(ZeroWitness { query: query(), z_a: za.clone(), z_b: zb.clone() });
                        }
                    }
                    if with_rows {
                        cmp.rows.push(ZeroRow { query: query(), z_a: za, z_b: zb });
                    }
                }
            }
        }
    }
    cmp.ordering = match (cmp.a_ge_b, cmp.b_ge_a) {
        (true, true) => ZeroOrdering::Equal,
        (true, false) => ZeroOrdering::ADominates,
        (false, true) => ZeroOrdering::BDominates,
        (false, false) => ZeroOrdering::Incomparable,
    };
    Ok(cmp)
}
