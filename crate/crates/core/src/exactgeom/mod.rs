//! Exact linear algebra and complete facet enumeration for full-dimensional
//! integer polytopes given by their vertices.
//!
//! Two complete methods are provided: a double description run on the
//! homogenized vertex cone ([`FacetMethod::DoubleDescription`]) and a facet
//! graph traversal from known facets ([`FacetMethod::Adjacency`]), where each
//! facet's ridges come from a double description of the facet itself and
//! are rotated onto the neighboring facets. The traversal optionally works
//! up to a symmetry group through a caller-supplied canonicalizer, which is
//! what turns it into an adjacency decomposition.

mod adjacency;
mod bitset;
mod dd;
mod int;
mod linalg;

use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigInt;

pub use adjacency::{adjacency_decomposition, find_facet, ridges, rotate, AdjacencyOptions, AdjacencyStats};
pub use linalg::{affine_rank, rank};

use crate::budget::{Budget, Unlimited};
use crate::scenario::{Scenario, ScenarioError};
use dd::DdError;
use int::{primitive, ExactInt};

/// Exact rational numbers (coprime, positive denominator).
pub type ExactRational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeomError {
    #[error("no points given")]
    Empty,
    #[error("points have inconsistent dimensions")]
    DimensionMismatch,
    #[error("point set spans an affine space of dimension {rank}, ambient dimension is {dim}")]
    NotFullDimensional { rank: usize, dim: usize },
    #[error("seed {index} is violated by vertex {vertex}")]
    InvalidSeed { index: usize, vertex: usize },
    #[error("enumeration budget exhausted")]
    BudgetExhausted,
    #[error("more than {limit} facets or intermediate rays")]
    TooManyFacets { limit: usize },
    #[error("facet coefficient does not fit in 64 bits")]
    CoefficientOverflow,
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

/// `coeffs · x <= bound`, kept primitive (gcd of coefficients and bound is 1).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Halfspace {
    pub coeffs: Vec<i64>,
    pub bound: i64,
}

impl Halfspace {
    /// Builds a halfspace and divides out the common content.
    pub fn new(coeffs: Vec<i64>, bound: i64) -> Self {
        let mut h = Halfspace { coeffs, bound };
        h.normalize();
        h
    }

    pub fn normalize(&mut self) {
        let mut all: Vec<i64> = self.coeffs.clone();
        all.push(self.bound);
        if primitive(&mut all) {
            self.bound = all.pop().expect("nonempty");
            self.coeffs = all;
        }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn value(&self, p: &[i64]) -> i64 {
        self.coeffs.iter().zip(p).map(|(a, b)| a * b).sum()
    }

    /// `bound - coeffs · p`; non-negative on the valid side.
    pub fn slack(&self, p: &[i64]) -> i64 {
        self.bound - self.value(p)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// Descending lexicographic comparison of `[coeffs..., bound]`:
    /// `Greater` means `self` is preferred as a class representative.
    pub fn lex_cmp(&self, other: &Halfspace) -> Ordering {
        self.coeffs.cmp(&other.coeffs).then(self.bound.cmp(&other.bound))
    }

    pub fn tight_set(&self, points: &[Vec<i64>]) -> Vec<usize> {
        points.iter().enumerate().filter(|(_, p)| self.slack(p) == 0).map(|(i, _)| i).collect()
    }
}

impl fmt::Display for Halfspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.coeffs {
            write!(f, "{c} ")?;
        }
        write!(f, "{}", self.bound)
    }
}

/// A Bell inequality `α · v <= L` in CG coordinates of a scenario.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Inequality {
    scenario: Scenario,
    h: Halfspace,
}

impl Inequality {
    pub fn new(scenario: Scenario, coeffs: Vec<i64>, bound: i64) -> Result<Self, ScenarioError> {
        if coeffs.len() != scenario.cg_dimension() {
            return Err(ScenarioError::LengthMismatch {
                got: coeffs.len(),
                expected: scenario.cg_dimension(),
            });
        }
        Ok(Self { scenario, h: Halfspace::new(coeffs, bound) })
    }

    pub fn from_halfspace(scenario: Scenario, h: Halfspace) -> Result<Self, ScenarioError> {
        Self::new(scenario, h.coeffs, h.bound)
    }

    pub fn zero(scenario: Scenario) -> Self {
        Self { scenario, h: Halfspace { coeffs: alloc::vec![0; scenario.cg_dimension()], bound: 0 } }
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }
    pub fn coeffs(&self) -> &[i64] {
        &self.h.coeffs
    }
    pub fn bound(&self) -> i64 {
        self.h.bound
    }
    pub fn halfspace(&self) -> &Halfspace {
        &self.h
    }
    pub fn into_halfspace(self) -> Halfspace {
        self.h
    }

    /// Value of the functional on an integer CG point.
    pub fn value(&self, v: &[i64]) -> i64 {
        self.h.value(v)
    }

    pub fn value_f64(&self, v: &[f64]) -> f64 {
        self.h.coeffs.iter().zip(v).map(|(&a, b)| a as f64 * b).sum()
    }

    /// Maximum of the functional over the local vertices.
    pub fn local_bound(&self, vertices: &[Vec<i64>]) -> Option<i64> {
        vertices.iter().map(|v| self.value(v)).max()
    }

    pub fn lex_cmp(&self, other: &Inequality) -> Ordering {
        self.h.lex_cmp(&other.h)
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.h.fmt(f)
    }
}

/// Evidence that a halfspace defines a face.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceCertificate {
    pub saturating: Vec<usize>,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FacetRejection {
    Violated { vertex: usize },
    LowDimensional { saturating: Vec<usize>, rank: usize },
    ZeroFunctional,
}

/// Accepts iff no point violates `h` and the tight points span dimension `dim - 1`.
pub fn is_facet(h: &Halfspace, points: &[Vec<i64>], dim: usize) -> Result<FaceCertificate, FacetRejection> {
    if h.is_zero() {
        return Err(FacetRejection::ZeroFunctional);
    }
    let mut saturating = Vec::new();
    for (i, p) in points.iter().enumerate() {
        match h.slack(p) {
            s if s < 0 => return Err(FacetRejection::Violated { vertex: i }),
            0 => saturating.push(i),
            _ => {}
        }
    }
    if saturating.is_empty() {
        return Err(FacetRejection::LowDimensional { saturating, rank: 0 });
    }
    let tight: Vec<Vec<i64>> = saturating.iter().map(|&i| points[i].clone()).collect();
    let rank = affine_rank(&tight);
    if rank + 1 == dim {
        Ok(FaceCertificate { saturating, rank })
    } else {
        Err(FacetRejection::LowDimensional { saturating, rank })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FacetMethod {
    /// Adjacency traversal when facet seeds are available, else double description.
    #[default]
    Auto,
    DoubleDescription,
    Adjacency,
}

#[derive(Debug, Clone, Copy)]
pub struct FacetEnumOptions {
    pub method: FacetMethod,
    /// Cap on facets and on intermediate double-description rays.
    pub max_facets: usize,
}

impl Default for FacetEnumOptions {
    fn default() -> Self {
        Self { method: FacetMethod::Auto, max_facets: 5_000_000 }
    }
}

pub(crate) fn check_points(points: &[Vec<i64>]) -> Result<usize, GeomError> {
    let dim = points.first().ok_or(GeomError::Empty)?.len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(GeomError::DimensionMismatch);
    }
    Ok(dim)
}

fn ray_to_halfspace<T: ExactInt>(ray: &[T]) -> Result<Halfspace, GeomError> {
    let bound = ray[0].to_i64().ok_or(GeomError::CoefficientOverflow)?;
    let coeffs = ray[1..]
        .iter()
        .map(|c| c.to_i64().and_then(|v| v.checked_neg()).ok_or(GeomError::CoefficientOverflow))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Halfspace { coeffs, bound })
}

fn map_dd(e: DdError, dim: usize) -> GeomError {
    match e {
        DdError::NotFullDimensional { rank } => GeomError::NotFullDimensional { rank: rank.saturating_sub(1), dim },
        DdError::BudgetExhausted => GeomError::BudgetExhausted,
        DdError::TooManyRays { limit } => GeomError::TooManyFacets { limit },
        DdError::Overflow => GeomError::CoefficientOverflow,
    }
}

/// All facets of `conv(points)` by double description. The result is sorted
/// in descending lexicographic order.
pub fn dd_facets(points: &[Vec<i64>], max_rays: usize, budget: &dyn Budget) -> Result<Vec<Halfspace>, GeomError> {
    let dim = check_points(points)?;
    let mut rows: Vec<Vec<i64>> = points
        .iter()
        .map(|p| core::iter::once(1).chain(p.iter().copied()).collect())
        .collect();
    rows.sort_unstable();
    rows.dedup();
    let rays = match dd::extreme_rays(&rows, max_rays, budget) {
        Ok(r) => r.iter().map(|r| ray_to_halfspace(r)).collect::<Result<Vec<_>, _>>()?,
        Err(DdError::Overflow) => {
            let big: Vec<Vec<BigInt>> = rows.iter().map(|r| int::to_big(r)).collect();
            let r = dd::extreme_rays(&big, max_rays, budget).map_err(|e| map_dd(e, dim))?;
            r.iter().map(|r| ray_to_halfspace(r)).collect::<Result<Vec<_>, _>>()?
        }
        Err(e) => return Err(map_dd(e, dim)),
    };
    let mut out = rays;
    out.sort_unstable_by(|a, b| b.lex_cmp(a));
    Ok(out)
}

/// The complete irredundant facet list of `conv(points)`.
///
/// Seeds must be valid for every point; those that are facets start an
/// adjacency traversal. Output is sorted in descending lexicographic order.
pub fn facet_enum(
    points: &[Vec<i64>],
    seeds: &[Halfspace],
    opts: &FacetEnumOptions,
    budget: &dyn Budget,
) -> Result<Vec<Halfspace>, GeomError> {
    let dim = check_points(points)?;
    let rank = affine_rank(points);
    if rank != dim {
        return Err(GeomError::NotFullDimensional { rank, dim });
    }
    let mut facet_seeds = Vec::new();
    for (index, s) in seeds.iter().enumerate() {
        if s.dim() != dim {
            return Err(GeomError::DimensionMismatch);
        }
        if let Some(vertex) = points.iter().position(|p| s.slack(p) < 0) {
            return Err(GeomError::InvalidSeed { index, vertex });
        }
        let mut h = s.clone();
        h.normalize();
        if is_facet(&h, points, dim).is_ok() {
            facet_seeds.push(h);
        }
    }
    let use_adjacency = match opts.method {
        FacetMethod::DoubleDescription => false,
        FacetMethod::Adjacency => true,
        FacetMethod::Auto => !facet_seeds.is_empty(),
    };
    let mut out = if use_adjacency {
        let aopts = AdjacencyOptions { max_classes: opts.max_facets, ridge_max_rays: opts.max_facets };
        adjacency_decomposition(points, &facet_seeds, |h: &Halfspace| h.clone(), &aopts, budget)?.0
    } else {
        dd_facets(points, opts.max_facets, budget)?
    };
    out.sort_unstable_by(|a, b| b.lex_cmp(a));
    Ok(out)
}

/// [`facet_enum`] with no seeds and no budget.
pub fn facets(points: &[Vec<i64>]) -> Result<Vec<Halfspace>, GeomError> {
    facet_enum(points, &[], &FacetEnumOptions::default(), &Unlimited)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn square() -> Vec<Vec<i64>> {
        vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
    }

    #[test]
    fn unit_square_has_four_facets() {
        let f = facets(&square()).unwrap();
        assert_eq!(f.len(), 4);
        assert!(f.contains(&Halfspace::new(vec![1, 0], 1)));
        assert!(f.contains(&Halfspace::new(vec![-1, 0], 0)));
    }

    #[test]
    fn normalization_divides_bound_too() {
        let h = Halfspace::new(vec![2, -4], 6);
        assert_eq!(h, Halfspace { coeffs: vec![1, -2], bound: 3 });
    }

    #[test]
    fn loose_bound_is_rejected() {
        let h = Halfspace::new(vec![1, 1], 3);
        match is_facet(&h, &square(), 2) {
            Err(FacetRejection::LowDimensional { saturating, .. }) => assert!(saturating.is_empty()),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(is_facet(&Halfspace::new(vec![1, 1], 1), &square(), 2), Err(FacetRejection::Violated { vertex: 3 }));
    }

    #[test]
    fn low_dimensional_input_is_refused() {
        let pts = vec![vec![0, 0], vec![1, 1], vec![2, 2]];
        assert_eq!(facets(&pts), Err(GeomError::NotFullDimensional { rank: 1, dim: 2 }));
    }

    #[test]
    fn invalid_seed_is_diagnosed() {
        let seeds = [Halfspace::new(vec![1, 0], 0)];
        let err = facet_enum(&square(), &seeds, &FacetEnumOptions::default(), &Unlimited).unwrap_err();
        assert_eq!(err, GeomError::InvalidSeed { index: 0, vertex: 2 });
    }

    #[test]
    fn seeded_and_unseeded_agree_on_cube() {
        let cube: Vec<Vec<i64>> = (0..8).map(|k| vec![k & 1, (k >> 1) & 1, (k >> 2) & 1]).collect();
        let plain = facets(&cube).unwrap();
        let seeded =
            facet_enum(&cube, &[Halfspace::new(vec![1, 0, 0], 1)], &FacetEnumOptions::default(), &Unlimited).unwrap();
        assert_eq!(plain.len(), 6);
        assert_eq!(plain, seeded);
    }

    #[test]
    fn exhausted_budget_aborts() {
        let cube: Vec<Vec<i64>> = (0..8).map(|k| vec![k & 1, (k >> 1) & 1, (k >> 2) & 1]).collect();
        let always = || true;
        assert_eq!(dd_facets(&cube, 100, &always), Err(GeomError::BudgetExhausted));
    }
}
