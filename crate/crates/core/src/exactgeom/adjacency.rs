//! Facet graph traversal: ridges of a facet are computed inside the facet,
//! then each ridge is rotated around to the unique neighboring facet.

use alloc::vec::Vec;

use hashbrown::HashSet;
use num_traits::ToPrimitive;

use super::linalg::{affine_rank, kernel};
use super::{check_points, dd_facets, GeomError, Halfspace};
use crate::budget::Budget;

#[derive(Debug, Clone, Copy)]
pub struct AdjacencyOptions {
    /// Stop after this many distinct representatives.
    pub max_classes: usize,
    /// Ray cap for each ridge computation.
    pub ridge_max_rays: usize,
}

impl Default for AdjacencyOptions {
    fn default() -> Self {
        Self { max_classes: 1_000_000, ridge_max_rays: 2_000_000 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AdjacencyStats {
    pub facets_expanded: usize,
    pub ridges: usize,
    pub canonicalizations: usize,
}

/// Ridges of the facet `f` (which must be a facet of `conv(points)`),
/// expressed as halfspaces of the ambient space that are valid on the
/// facet's vertices and never involve the dropped coordinate.
pub fn ridges(points: &[Vec<i64>], f: &Halfspace, max_rays: usize, budget: &dyn Budget) -> Result<Vec<Halfspace>, GeomError> {
    let tight: Vec<&Vec<i64>> = points.iter().filter(|p| f.slack(p) == 0).collect();
    // drop a coordinate the facet depends on, preferring unit coefficients
    let drop = f
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0)
        .min_by_key(|(_, c)| c.unsigned_abs())
        .map(|(j, _)| j)
        .ok_or(GeomError::DimensionMismatch)?;
    let projected: Vec<Vec<i64>> = tight
        .iter()
        .map(|p| p.iter().enumerate().filter(|(j, _)| *j != drop).map(|(_, v)| *v).collect())
        .collect();
    let inner = dd_facets(&projected, max_rays, budget)?;
    Ok(inner
        .into_iter()
        .map(|h| {
            let mut coeffs = h.coeffs;
            coeffs.insert(drop, 0);
            Halfspace { coeffs, bound: h.bound }
        })
        .collect())
}

/// Rotates the valid halfspace `r` around `face ∩ {r tight}` until it hits a
/// point outside `face`. Returns `None` if every point lies on `face`.
///
/// `r` must be valid on the points tight for `face`; the result is valid for
/// all points and contains every point tight for both.
pub fn rotate(points: &[Vec<i64>], face: &Halfspace, r: &Halfspace) -> Option<Halfspace> {
    // minimize (M - b·v) / (L - a·v) over v with a·v < L
    let mut best: Option<(i128, i128)> = None;
    for v in points {
        let den = face.slack(v) as i128;
        if den == 0 {
            continue;
        }
        let num = r.slack(v) as i128;
        best = match best {
            Some((bn, bd)) if num * bd >= bn * den => Some((bn, bd)),
            _ => Some((num, den)),
        };
    }
    let (p, q) = best?;
    let coeffs: Option<Vec<i64>> = r
        .coeffs
        .iter()
        .zip(&face.coeffs)
        .map(|(&b, &a)| (q * b as i128 - p * a as i128).to_i64())
        .collect();
    let bound = (q * r.bound as i128 - p * face.bound as i128).to_i64()?;
    Some(Halfspace::new(coeffs?, bound))
}

/// Finds one facet of a full-dimensional `conv(points)` by repeatedly
/// rotating a supporting hyperplane onto further vertices.
pub fn find_facet(points: &[Vec<i64>]) -> Result<Halfspace, GeomError> {
    let dim = check_points(points)?;
    let j = (0..dim)
        .find(|&j| points.iter().any(|p| p[j] != points[0][j]))
        .ok_or(GeomError::NotFullDimensional { rank: 0, dim })?;
    let mut coeffs = alloc::vec![0; dim];
    coeffs[j] = 1;
    let max = points.iter().map(|p| p[j]).max().expect("nonempty");
    let mut h = Halfspace::new(coeffs, max);
    loop {
        let tight: Vec<Vec<i64>> = points.iter().filter(|p| h.slack(p) == 0).cloned().collect();
        let r = affine_rank(&tight);
        if r + 1 >= dim {
            return Ok(h);
        }
        // (g, -c) with g·p = c on the tight set, independent of h
        let rows: Vec<Vec<i64>> =
            tight.iter().map(|p| p.iter().copied().chain(core::iter::once(-1)).collect()).collect();
        let mut target: Vec<i64> = h.coeffs.clone();
        target.push(-h.bound);
        let pick = kernel(&rows, dim + 1).into_iter().find_map(|k| {
            let k: Option<Vec<i64>> = k.iter().map(|x| x.to_i64()).collect();
            let k = k?;
            let proportional = (0..=dim)
                .all(|a| (0..=dim).all(|b| k[a] as i128 * target[b] as i128 == k[b] as i128 * target[a] as i128));
            (!proportional).then_some(k)
        });
        let Some(k) = pick else {
            return Err(GeomError::CoefficientOverflow);
        };
        let g = Halfspace { coeffs: k[..dim].to_vec(), bound: -k[dim] };
        h = rotate(points, &h, &g).ok_or(GeomError::NotFullDimensional { rank: r, dim })?;
    }
}

/// Traverses the facet graph from `seeds`, keeping one representative per
/// class as decided by `canon` (identity gives the plain facet list).
///
/// Every returned halfspace is `canon(f)` for some facet `f`; the list is in
/// discovery order and complete whenever `canon` is constant on the orbits
/// of a symmetry group of the point set.
pub fn adjacency_decomposition<C>(
    points: &[Vec<i64>],
    seeds: &[Halfspace],
    mut canon: C,
    opts: &AdjacencyOptions,
    budget: &dyn Budget,
) -> Result<(Vec<Halfspace>, AdjacencyStats), GeomError>
where
    C: FnMut(&Halfspace) -> Halfspace,
{
    check_points(points)?;
    let mut stats = AdjacencyStats::default();
    let mut reps: Vec<Halfspace> = Vec::new();
    let mut known: HashSet<Halfspace> = HashSet::new();
    let mut seen_raw: HashSet<Halfspace> = HashSet::new();
    let start: Vec<Halfspace> = if seeds.is_empty() { alloc::vec![find_facet(points)?] } else { seeds.to_vec() };
    for s in &start {
        stats.canonicalizations += 1;
        let c = canon(s);
        if known.insert(c.clone()) {
            reps.push(c);
        }
    }
    let mut next = 0;
    while next < reps.len() {
        if budget.exhausted() {
            return Err(GeomError::BudgetExhausted);
        }
        let f = reps[next].clone();
        next += 1;
        stats.facets_expanded += 1;
        let rs = ridges(points, &f, opts.ridge_max_rays, budget)?;
        stats.ridges += rs.len();
        for r in &rs {
            let Some(nb) = rotate(points, &f, r) else { continue };
            if !seen_raw.insert(nb.clone()) {
                continue;
            }
            stats.canonicalizations += 1;
            let c = canon(&nb);
            if known.insert(c.clone()) {
                reps.push(c);
                if reps.len() > opts.max_classes {
                    return Err(GeomError::TooManyFacets { limit: opts.max_classes });
                }
            }
        }
    }
    Ok((reps, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::Unlimited;
    use alloc::vec;

    fn cube() -> Vec<Vec<i64>> {
        (0..8).map(|k| vec![k & 1, (k >> 1) & 1, (k >> 2) & 1]).collect()
    }

    #[test]
    fn rotation_reaches_neighbor() {
        // x <= 1 with ridge z <= 1 rotates to z <= 1
        let f = Halfspace::new(vec![1, 0, 0], 1);
        let r = Halfspace::new(vec![0, 0, 1], 1);
        assert_eq!(rotate(&cube(), &f, &r), Some(Halfspace::new(vec![0, 0, 1], 1)));
    }

    #[test]
    fn finds_a_facet_of_a_simplex() {
        let pts = vec![vec![0, 0, 0], vec![2, 0, 0], vec![0, 3, 0], vec![0, 0, 5]];
        let f = find_facet(&pts).unwrap();
        assert_eq!(f.tight_set(&pts).len(), 3);
    }

    #[test]
    fn cube_traversal_from_nothing() {
        let (all, stats) =
            adjacency_decomposition(&cube(), &[], |h: &Halfspace| h.clone(), &AdjacencyOptions::default(), &Unlimited)
                .unwrap();
        assert_eq!(all.len(), 6);
        assert_eq!(stats.facets_expanded, 6);
        assert_eq!(stats.ridges, 24);
    }
}
