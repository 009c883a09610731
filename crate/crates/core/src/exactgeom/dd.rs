//! Double description method for the cone `{y : rows · y >= 0}`.
//!
//! Rows are homogenized points `(1, p)`, so an extreme ray `y = (L, -α)` is a
//! facet `α · p <= L` of the convex hull. Adjacency of rays is decided with the
//! combinatorial test on zero sets.

use alloc::vec;
use alloc::vec::Vec;

use super::bitset::BitSet;
use super::int::{dot, primitive, ExactInt, Overflow};
use super::linalg::Echelon;
use crate::budget::Budget;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum DdError {
    Overflow,
    NotFullDimensional { rank: usize },
    BudgetExhausted,
    TooManyRays { limit: usize },
}

impl From<Overflow> for DdError {
    fn from(_: Overflow) -> Self {
        DdError::Overflow
    }
}

struct Ray<T> {
    v: Vec<T>,
    zeros: BitSet,
}

/// Extreme rays of `{y : row · y >= 0 for all rows}`. The rows must span the
/// whole space; rays come back primitive.
pub(crate) fn extreme_rays<T: ExactInt>(
    rows: &[Vec<T>],
    max_rays: usize,
    budget: &dyn Budget,
) -> Result<Vec<Vec<T>>, DdError> {
    let n = rows.len();
    let cols = rows.first().map_or(0, |r| r.len());
    let mut ech = Echelon::new(cols);
    let mut basis = Vec::with_capacity(cols);
    for (i, r) in rows.iter().enumerate() {
        if ech.insert(r.clone())? {
            basis.push(i);
            if basis.len() == cols {
                break;
            }
        }
    }
    if basis.len() < cols {
        return Err(DdError::NotFullDimensional { rank: basis.len() });
    }

    let mut rays: Vec<Ray<T>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut e = Echelon::new(cols);
        let mut zeros = BitSet::new(n);
        for (k, &bi) in basis.iter().enumerate() {
            if k != j {
                e.insert(rows[bi].clone())?;
                zeros.insert(bi);
            }
        }
        let mut v = e.kernel_vector()?.expect("basis minus one row has corank one");
        if dot(&rows[basis[j]], &v)?.sign() < 0 {
            for x in v.iter_mut() {
                *x = x.neg()?;
            }
        }
        rays.push(Ray { v, zeros });
    }

    let mut in_basis = vec![false; n];
    for &b in &basis {
        in_basis[b] = true;
    }
    let need = cols.saturating_sub(2);
    let mut values: Vec<T> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if in_basis[i] {
            continue;
        }
        if budget.exhausted() {
            return Err(DdError::BudgetExhausted);
        }
        values.clear();
        for r in &rays {
            values.push(dot(row, &r.v)?);
        }
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        for (k, s) in values.iter().enumerate() {
            match s.sign() {
                1 => pos.push(k),
                -1 => neg.push(k),
                _ => {}
            }
        }
        if neg.is_empty() {
            for (k, s) in values.iter().enumerate() {
                if s.is_zero() {
                    rays[k].zeros.insert(i);
                }
            }
            continue;
        }

        let mut fresh: Vec<Ray<T>> = Vec::new();
        let mut checks = 0usize;
        for &p in &pos {
            for &q in &neg {
                if rays[p].zeros.intersection_len(&rays[q].zeros) < need {
                    continue;
                }
                let common = rays[p].zeros.intersection(&rays[q].zeros);
                let blocked = rays
                    .iter()
                    .enumerate()
                    .any(|(k, r)| k != p && k != q && common.is_subset_of(&r.zeros));
                checks += 1;
                if checks.is_multiple_of(4096) && budget.exhausted() {
                    return Err(DdError::BudgetExhausted);
                }
                if blocked {
                    continue;
                }
                let sp = &values[p];
                let sq = values[q].neg()?;
                let mut v = Vec::with_capacity(cols);
                for (a, b) in rays[q].v.iter().zip(&rays[p].v) {
                    v.push(a.mul(sp)?.add(&b.mul(&sq)?)?);
                }
                primitive(&mut v);
                let mut zeros = common;
                zeros.insert(i);
                fresh.push(Ray { v, zeros });
            }
        }

        let mut next: Vec<Ray<T>> = Vec::with_capacity(rays.len() - neg.len() + fresh.len());
        for (k, mut r) in rays.into_iter().enumerate() {
            match values[k].sign() {
                -1 => {}
                0 => {
                    r.zeros.insert(i);
                    next.push(r);
                }
                _ => next.push(r),
            }
        }
        next.extend(fresh);
        if next.len() > max_rays {
            return Err(DdError::TooManyRays { limit: max_rays });
        }
        rays = next;
    }
    Ok(rays.into_iter().map(|r| r.v).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::Unlimited;

    #[test]
    fn square_cone() {
        let rows: Vec<Vec<i64>> =
            [[0, 0], [0, 1], [1, 0], [1, 1]].iter().map(|p| vec![1, p[0], p[1]]).collect();
        let rays = extreme_rays(&rows, 1000, &Unlimited).unwrap();
        assert_eq!(rays.len(), 4);
        for r in &rays {
            for row in &rows {
                assert!(dot(row, r).unwrap() >= 0);
            }
        }
    }

    #[test]
    fn degenerate_input_is_reported() {
        let rows: Vec<Vec<i64>> = [[0, 0], [1, 1], [2, 2]].iter().map(|p| vec![1, p[0], p[1]]).collect();
        assert_eq!(
            extreme_rays(&rows, 1000, &Unlimited).unwrap_err(),
            DdError::NotFullDimensional { rank: 2 }
        );
    }
}
