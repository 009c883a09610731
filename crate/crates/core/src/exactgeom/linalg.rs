//! Fraction-free integer elimination.

use alloc::vec::Vec;

use num_bigint::BigInt;

use super::int::{primitive, to_big, ExactInt, Overflow};

/// A row basis in semi-echelon form: row `k` vanishes on the pivot columns
/// of rows `0..k`.
#[derive(Debug, Clone)]
pub(crate) struct Echelon<T> {
    cols: usize,
    rows: Vec<Vec<T>>,
    pivots: Vec<usize>,
}

impl<T: ExactInt> Echelon<T> {
    pub(crate) fn new(cols: usize) -> Self {
        Self { cols, rows: Vec::new(), pivots: Vec::new() }
    }

    pub(crate) fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduces `row` against the basis. Returns the reduced row, which is
    /// zero iff `row` lies in the span.
    pub(crate) fn reduce(&self, mut row: Vec<T>) -> Result<Vec<T>, Overflow> {
        debug_assert_eq!(row.len(), self.cols);
        for (basis, &c) in self.rows.iter().zip(&self.pivots) {
            if row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            let p = basis[c].clone();
            for (r, b) in row.iter_mut().zip(basis) {
                let scaled = r.mul(&p)?;
                *r = if b.is_zero() { scaled } else { scaled.sub(&b.mul(&f)?)? };
            }
            primitive(&mut row);
        }
        Ok(row)
    }

    /// Adds `row` if it is independent of the basis.
    pub(crate) fn insert(&mut self, row: Vec<T>) -> Result<bool, Overflow> {
        let mut row = self.reduce(row)?;
        let Some(pivot) = row.iter().position(|v| !v.is_zero()) else {
            return Ok(false);
        };
        primitive(&mut row);
        self.rows.push(row);
        self.pivots.push(pivot);
        Ok(true)
    }

    /// A primitive integer vector spanning the kernel, when the basis has
    /// rank `cols - 1`.
    pub(crate) fn kernel_vector(&self) -> Result<Option<Vec<T>>, Overflow> {
        if self.rank() + 1 != self.cols {
            return Ok(None);
        }
        let free = self.free_columns().next().expect("one free column");
        self.kernel_for_free(free).map(Some)
    }

    fn free_columns(&self) -> impl Iterator<Item = usize> + '_ {
        let mut is_pivot = alloc::vec![false; self.cols];
        for &c in &self.pivots {
            is_pivot[c] = true;
        }
        (0..self.cols).filter(move |&c| !is_pivot[c])
    }

    /// One integer kernel vector per free column.
    pub(crate) fn kernel_basis(&self) -> Result<Vec<Vec<T>>, Overflow> {
        let free: Vec<usize> = self.free_columns().collect();
        free.into_iter().map(|f| self.kernel_for_free(f)).collect()
    }

    /// The kernel vector with `x[free] > 0` and every other free column zero.
    fn kernel_for_free(&self, free: usize) -> Result<Vec<T>, Overflow> {
        let mut x: Vec<T> = (0..self.cols).map(|_| T::from_i64(0)).collect();
        x[free] = T::from_i64(1);
        for k in (0..self.rows.len()).rev() {
            let row = &self.rows[k];
            let c = self.pivots[k];
            // row[c] * x[c] + sum_{j != c} row[j] * x[j] = 0, with x[c] still zero
            let mut num = T::from_i64(0);
            for (j, rj) in row.iter().enumerate() {
                if j != c && !rj.is_zero() && !x[j].is_zero() {
                    num = num.add(&rj.mul(&x[j])?)?;
                }
            }
            let num = num.neg()?;
            if num.is_zero() {
                continue;
            }
            let p = row[c].clone();
            let g = num.gcd(&p);
            let mut scale = p.div_exact(&g);
            if scale.sign() < 0 {
                scale = scale.neg()?;
            }
            if scale != T::from_i64(1) {
                for v in x.iter_mut() {
                    *v = v.mul(&scale)?;
                }
            }
            x[c] = num.mul(&scale)?.div_exact(&p);
        }
        primitive(&mut x);
        Ok(x)
    }
}

/// Integer basis of the kernel of `rows` (which must be nonempty).
pub(crate) fn kernel(rows: &[Vec<i64>], cols: usize) -> Vec<Vec<BigInt>> {
    let mut e = Echelon::<BigInt>::new(cols);
    for r in rows {
        e.insert(to_big(r)).expect("BigInt cannot overflow");
    }
    e.kernel_basis().expect("BigInt cannot overflow")
}

fn rank_with<T: ExactInt>(rows: &[Vec<T>], cols: usize) -> Result<usize, Overflow> {
    let mut e = Echelon::new(cols);
    for r in rows {
        e.insert(r.clone())?;
        if e.rank() == cols {
            break;
        }
    }
    Ok(e.rank())
}

/// Exact rank of an integer matrix.
pub fn rank(rows: &[Vec<i64>]) -> usize {
    let Some(cols) = rows.first().map(|r| r.len()) else {
        return 0;
    };
    match rank_with(rows, cols) {
        Ok(r) => r,
        Err(Overflow) => {
            let big: Vec<Vec<BigInt>> = rows.iter().map(|r| to_big(r)).collect();
            rank_with(&big, cols).expect("BigInt cannot overflow")
        }
    }
}

/// Dimension of the affine hull of `points` (0 for a single point).
pub fn affine_rank(points: &[Vec<i64>]) -> usize {
    let Some(p0) = points.first() else {
        return 0;
    };
    let diffs: Vec<Vec<i64>> = points[1..]
        .iter()
        .map(|p| p.iter().zip(p0).map(|(a, b)| a - b).collect())
        .collect();
    rank(&diffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&[vec![1, 2], vec![2, 4]]), 1);
        assert_eq!(rank(&[vec![1, 2, 3], vec![0, 1, 1], vec![1, 3, 4]]), 2);
        assert_eq!(affine_rank(&[vec![3, 4]]), 0);
        assert_eq!(affine_rank(&[vec![0, 0], vec![1, 1], vec![2, 2]]), 1);
    }

    #[test]
    fn kernel_of_hyperplane() {
        let mut e = Echelon::<i64>::new(3);
        e.insert(vec![1, 1, 1]).unwrap();
        e.insert(vec![1, -1, 2]).unwrap();
        let k = e.kernel_vector().unwrap().unwrap();
        assert_eq!(k[0] + k[1] + k[2], 0);
        assert_eq!(k[0] - k[1] + 2 * k[2], 0);
        assert!(k.iter().any(|&v| v != 0));
    }

    #[test]
    fn big_fallback_matches() {
        let big = i64::MAX / 3;
        let rows = vec![vec![big, 1, 0], vec![1, big, 1], vec![big, 1, 0]];
        assert_eq!(rank(&rows), 2);
    }
}
