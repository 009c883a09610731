//! A first-order solver for block-diagonal semidefinite programs
//!
//! ```text
//! maximize  tr(C M)   subject to  tr(A_k M) = b_k,  M ⪰ 0
//! ```
//!
//! using the alternating direction augmented Lagrangian method on the dual
//! (Wen, Goldfarb, Yin). Matrices are given by their upper triangles; an
//! entry `(i, j, v)` with `i != j` stands for both `(i, j)` and `(j, i)`.
//!
//! Besides the primal value the solver reports the dual objective, and
//! [`SdpSolver::certified_bound`] turns any multiplier vector into a rigorous
//! upper bound once a bound on the trace of feasible matrices is known.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

impl Entry {
    pub fn new(block: usize, i: usize, j: usize, value: f64) -> Self {
        Entry { block, i, j, value }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Constraint {
    pub entries: Vec<Entry>,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SdpProblem {
    /// Orders of the diagonal blocks of `M`.
    pub blocks: Vec<usize>,
    /// Entries of `C`.
    pub objective: Vec<Entry>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SdpError {
    #[error("entry ({i}, {j}) outside block {block}")]
    OutOfRange { block: usize, i: usize, j: usize },
    #[error("problem has no blocks")]
    Empty,
    #[error("warm start has the wrong shape")]
    BadWarmStart,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    MaxIterations,
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct SdpOptions {
    /// Target for the relative primal residual and the relative duality gap.
    pub tol: f64,
    pub max_iters: usize,
    /// Initial penalty parameter.
    pub mu: f64,
    /// Optional starting point: primal blocks and constraint multipliers.
    pub warm_start: Option<(Vec<DMatrix<f64>>, Vec<f64>)>,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions { tol: 1e-6, max_iters: 200_000, mu: 1.0, warm_start: None }
    }
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// `tr(C M)` at the returned `M`.
    pub value: f64,
    /// Objective of the dual iterate. It bounds the optimum from above up to
    /// the remaining dual infeasibility.
    pub dual_bound: f64,
    pub matrices: Vec<DMatrix<f64>>,
    /// Multipliers of the constraints, in the maximization convention
    /// (`C - Σ y_k A_k ⪯ 0` at optimality).
    pub dual: Vec<f64>,
    pub status: SdpStatus,
    /// `max_k |tr(A_k M) - b_k|`.
    pub primal_residual: f64,
    /// Relative dual infeasibility `‖C - Σ y_k A_k - S‖ / (1 + ‖C‖)`.
    pub dual_residual: f64,
    /// Relative gap between `value` and `dual_bound`.
    pub gap: f64,
    pub iterations: usize,
}

/// Upper-triangle sparse coefficients of one constraint.
#[derive(Clone)]
struct Row {
    entries: Vec<(usize, usize, usize, f64)>,
}

/// `(A A*)^{-1}` restricted to connected groups of constraints.
struct GramSolver {
    groups: Vec<(Vec<usize>, DMatrix<f64>)>,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

impl GramSolver {
    fn new(rows: &[Row]) -> Self {
        let m = rows.len();
        let mut parent: Vec<usize> = (0..m).collect();
        let mut owner: hashbrown::HashMap<(usize, usize, usize), usize> = hashbrown::HashMap::new();
        for (k, r) in rows.iter().enumerate() {
            for &(b, i, j, _) in &r.entries {
                if let Some(&o) = owner.get(&(b, i, j)) {
                    let (ra, rb) = (find(&mut parent, o), find(&mut parent, k));
                    parent[ra] = rb;
                } else {
                    owner.insert((b, i, j), k);
                }
            }
        }
        let mut members: hashbrown::HashMap<usize, Vec<usize>> = hashbrown::HashMap::new();
        for k in 0..m {
            let r = find(&mut parent, k);
            members.entry(r).or_default().push(k);
        }
        let mut groups: Vec<Vec<usize>> = members.into_values().collect();
        groups.sort();
        let groups = groups
            .into_iter()
            .map(|g| {
                let n = g.len();
                let mut gram = DMatrix::<f64>::zeros(n, n);
                let mut index: hashbrown::HashMap<(usize, usize, usize), Vec<(usize, f64)>> = hashbrown::HashMap::new();
                for (a, &k) in g.iter().enumerate() {
                    for &(b, i, j, v) in &rows[k].entries {
                        index.entry((b, i, j)).or_default().push((a, v));
                    }
                }
                for ((_, i, j), list) in &index {
                    let w = if i == j { 1.0 } else { 2.0 };
                    for &(a, va) in list {
                        for &(c, vc) in list {
                            gram[(a, c)] += w * va * vc;
                        }
                    }
                }
                (g, pseudo_inverse(gram))
            })
            .collect();
        GramSolver { groups }
    }

    fn solve(&self, rhs: &[f64], out: &mut [f64]) {
        for (g, inv) in &self.groups {
            let r = DVector::from_iterator(g.len(), g.iter().map(|&k| rhs[k]));
            let y = inv * r;
            for (a, &k) in g.iter().enumerate() {
                out[k] = y[a];
            }
        }
    }
}

/// Inverse of a symmetric positive semidefinite matrix, pseudo-inverse when
/// constraints are linearly dependent.
fn pseudo_inverse(g: DMatrix<f64>) -> DMatrix<f64> {
    if let Some(ch) = g.clone().cholesky() {
        let scale = g.diagonal().max();
        let inv = ch.inverse();
        if inv.iter().all(|v| v.is_finite()) && inv.diagonal().max() * scale < 1e12 {
            return inv;
        }
    }
    let n = g.nrows();
    let eig = g.symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut inv = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let l = eig.eigenvalues[k];
        if l.abs() > 1e-10 * top.max(1.0) {
            let v = eig.eigenvectors.column(k);
            inv += (v * v.transpose()) / l;
        }
    }
    inv
}

fn normalize_entries(p: &SdpProblem, list: &[Entry]) -> Result<Vec<(usize, usize, usize, f64)>, SdpError> {
    let mut map: hashbrown::HashMap<(usize, usize, usize), f64> = hashbrown::HashMap::new();
    for e in list {
        let n = *p.blocks.get(e.block).ok_or(SdpError::OutOfRange { block: e.block, i: e.i, j: e.j })?;
        if e.i >= n || e.j >= n {
            return Err(SdpError::OutOfRange { block: e.block, i: e.i, j: e.j });
        }
        let (i, j) = if e.i <= e.j { (e.i, e.j) } else { (e.j, e.i) };
        *map.entry((e.block, i, j)).or_insert(0.0) += e.value;
    }
    let mut out: Vec<(usize, usize, usize, f64)> =
        map.into_iter().filter(|(_, v)| *v != 0.0).map(|((b, i, j), v)| (b, i, j, v)).collect();
    out.sort_by_key(|a| (a.0, a.1, a.2));
    Ok(out)
}

/// `tr(A M)` for upper-triangle coefficients.
fn inner(entries: &[(usize, usize, usize, f64)], m: &[DMatrix<f64>]) -> f64 {
    entries
        .iter()
        .map(|&(b, i, j, v)| if i == j { v * m[b][(i, i)] } else { 2.0 * v * m[b][(i, j)] })
        .sum()
}

fn add_sym(m: &mut [DMatrix<f64>], entries: &[(usize, usize, usize, f64)], scale: f64) {
    for &(b, i, j, v) in entries {
        m[b][(i, j)] += scale * v;
        if i != j {
            m[b][(j, i)] += scale * v;
        }
    }
}

fn frob(m: &[DMatrix<f64>]) -> f64 {
    libm::sqrt(m.iter().map(|b| b.norm_squared()).sum::<f64>())
}

/// Splits a symmetric matrix into positive and negative parts `V = P - N`.
fn split_psd(v: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let sym = (v + v.transpose()) * 0.5;
    let eig = sym.clone().symmetric_eigen();
    let positive = eig.eigenvalues.iter().filter(|&&l| l > 0.0).count();
    // build the part with fewer eigenvectors, the other one by difference
    let want_pos = 2 * positive <= eig.eigenvalues.len();
    let cols: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&k| (eig.eigenvalues[k] > 0.0) == want_pos && eig.eigenvalues[k] != 0.0).collect();
    let q = eig.eigenvectors.select_columns(&cols);
    let mut scaled = q.clone();
    for (c, mut col) in scaled.column_iter_mut().enumerate() {
        col *= eig.eigenvalues[cols[c]].abs();
    }
    let part = &scaled * q.transpose();
    if want_pos {
        let neg = &part - sym;
        (part, neg)
    } else {
        let pos = sym + &part;
        (pos, part)
    }
}

/// Constraints compiled once, for solving several objectives over the same
/// feasible set.
pub struct SdpSolver {
    blocks: Vec<usize>,
    rows: Vec<Row>,
    b: Vec<f64>,
    gram: GramSolver,
}

impl SdpSolver {
    /// Compiles the blocks and constraints of `p`; the objective is ignored.
    pub fn new(p: &SdpProblem) -> Result<Self, SdpError> {
        if p.blocks.is_empty() {
            return Err(SdpError::Empty);
        }
        let rows: Vec<Row> = p
            .constraints
            .iter()
            .map(|c| normalize_entries(p, &c.entries).map(|entries| Row { entries }))
            .collect::<Result<_, _>>()?;
        let b = p.constraints.iter().map(|c| c.rhs).collect();
        let gram = GramSolver::new(&rows);
        Ok(SdpSolver { blocks: p.blocks.clone(), rows, b, gram })
    }

    pub fn constraint_count(&self) -> usize {
        self.rows.len()
    }

    /// Solves `max tr(C M)` for the objective entries `objective`.
    pub fn solve(&self, objective: &[Entry], opts: &SdpOptions) -> Result<SdpSolution, SdpError> {
        let shape = SdpProblem { blocks: self.blocks.clone(), ..Default::default() };
        let c_entries = normalize_entries(&shape, objective)?;
        run(self, &c_entries, opts)
    }
}

impl SdpSolver {
    /// `b·y + t · max(0, λ_max(C - Σ y_k A_k))`, an upper bound on
    /// `tr(C M)` over feasible `M` whenever every feasible `M` has trace at
    /// most `t`. Valid for any `y`, in particular an inexact one.
    pub fn certified_bound(&self, objective: &[Entry], dual: &[f64], trace_bound: f64) -> Result<f64, SdpError> {
        if dual.len() != self.rows.len() {
            return Err(SdpError::BadWarmStart);
        }
        let shape = SdpProblem { blocks: self.blocks.clone(), ..Default::default() };
        let c_entries = normalize_entries(&shape, objective)?;
        let mut z: Vec<DMatrix<f64>> = self.blocks.iter().map(|&n| DMatrix::zeros(n, n)).collect();
        add_sym(&mut z, &c_entries, 1.0);
        for (k, r) in self.rows.iter().enumerate() {
            add_sym(&mut z, &r.entries, -dual[k]);
        }
        let top = z
            .iter()
            .map(|b| b.clone().symmetric_eigen().eigenvalues.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v)))
            .fold(f64::NEG_INFINITY, f64::max);
        let by: f64 = self.b.iter().zip(dual).map(|(b, y)| b * y).sum();
        Ok(by + trace_bound * top.max(0.0))
    }
}

/// Solves `max tr(C M)` subject to the constraints and `M ⪰ 0`.
pub fn solve(p: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution, SdpError> {
    SdpSolver::new(p)?.solve(&p.objective, opts)
}

/// Step length of the primal update; values in `(1, 1.618)` over-relax.
const RELAX: f64 = 1.6;

fn run(solver: &SdpSolver, c_entries: &[(usize, usize, usize, f64)], opts: &SdpOptions) -> Result<SdpSolution, SdpError> {
    // internally: minimize <Cm, X> with Cm = -C
    let SdpSolver { blocks, rows, b, gram } = solver;
    let m = rows.len();
    let zero_blocks = || blocks.iter().map(|&n| DMatrix::<f64>::zeros(n, n)).collect::<Vec<_>>();
    let mut cm = zero_blocks();
    add_sym(&mut cm, c_entries, -1.0);
    let norm_b = 1.0 + libm::sqrt(b.iter().map(|v| v * v).sum::<f64>());
    let norm_c = 1.0 + frob(&cm);

    let (mut x, mut y) = match &opts.warm_start {
        Some((xs, ys)) => {
            if xs.len() != blocks.len()
                || ys.len() != m
                || xs.iter().zip(blocks).any(|(x, &n)| x.nrows() != n || x.ncols() != n)
            {
                return Err(SdpError::BadWarmStart);
            }
            (xs.clone(), ys.iter().map(|v| -v).collect::<Vec<f64>>())
        }
        None => (zero_blocks(), vec![0.0; m]),
    };
    let mut mu = opts.mu;
    // S from the warm start, as the PSD part of Cm - A*y
    let mut s = {
        let mut v = cm.clone();
        for (k, r) in rows.iter().enumerate() {
            add_sym(&mut v, &r.entries, -y[k]);
        }
        v.iter().map(|b| split_psd(b).0).collect::<Vec<_>>()
    };
    let mut rhs = vec![0.0; m];
    let mut status = SdpStatus::MaxIterations;
    let mut iterations = 0;
    let mut rp = f64::INFINITY;
    let mut rd = f64::INFINITY;
    let mut gap = f64::INFINITY;
    let mut primal_obj = 0.0;
    let mut dual_obj = 0.0;
    let mut balance = 0i32;
    for it in 0..opts.max_iters {
        iterations = it + 1;
        // y = (AA*)^{-1} (mu (b - A(X)) + A(Cm - S))
        let mut cms = cm.clone();
        for (blk, sblk) in cms.iter_mut().zip(&s) {
            *blk -= sblk;
        }
        for (k, r) in rows.iter().enumerate() {
            rhs[k] = mu * (b[k] - inner(&r.entries, &x)) + inner(&r.entries, &cms);
        }
        gram.solve(&rhs, &mut y);
        // V = Cm - A*(y) - mu X
        let mut v = cm.clone();
        for (k, r) in rows.iter().enumerate() {
            add_sym(&mut v, &r.entries, -y[k]);
        }
        let s_prev_norm = frob(&s);
        let mut ds = 0.0;
        let mut dx = 0.0;
        for blk in 0..v.len() {
            v[blk] -= &x[blk] * mu;
            let (pos, neg) = split_psd(&v[blk]);
            ds += (&pos - &s[blk]).norm_squared();
            s[blk] = pos;
            let target = neg / mu;
            // the dual slack misses feasibility by mu (X_old - X_target)
            dx += (&target - &x[blk]).norm_squared();
            x[blk] = &x[blk] * (1.0 - RELAX) + target * RELAX;
        }
        let ds = libm::sqrt(ds) / (1.0 + s_prev_norm);
        rd = mu * libm::sqrt(dx) / norm_c;
        // residuals
        rp = 0.0f64;
        let mut rp2 = 0.0;
        for (k, r) in rows.iter().enumerate() {
            let d = inner(&r.entries, &x) - b[k];
            rp = rp.max(d.abs());
            rp2 += d * d;
        }
        let rel_p = libm::sqrt(rp2) / norm_b;
        primal_obj = inner(c_entries, &x);
        dual_obj = -b.iter().zip(&y).map(|(a, c)| a * c).sum::<f64>();
        gap = (primal_obj - dual_obj).abs() / (1.0 + primal_obj.abs() + dual_obj.abs());
        if rel_p <= opts.tol && gap <= opts.tol && rd <= opts.tol {
            status = SdpStatus::Optimal;
            break;
        }
        if dual_obj.abs() > 1e10 * norm_c {
            status = SdpStatus::Infeasible;
            break;
        }
        // keep primal and dual progress balanced
        if rel_p > 10.0 * ds {
            balance += 1;
        } else if ds > 10.0 * rel_p {
            balance -= 1;
        } else {
            balance = 0;
        }
        if balance > 20 {
            mu = (mu / 1.6).max(1e-6);
            balance = 0;
        } else if balance < -20 {
            mu = (mu * 1.6).min(1e6);
            balance = 0;
        }
    }
    if status == SdpStatus::MaxIterations && rp > 1e-2 * norm_b && dual_obj.abs() > 1e6 * norm_c {
        status = SdpStatus::Infeasible;
    }
    Ok(SdpSolution {
        value: primal_obj,
        dual_bound: dual_obj,
        matrices: x,
        dual: y.iter().map(|v| -v).collect(),
        status,
        primal_residual: rp,
        dual_residual: rd,
        gap,
        iterations,
    })
}

/// `tr(A M)` for a list of entries, with the same conventions as the solver.
pub fn trace_product(entries: &[Entry], m: &[DMatrix<f64>]) -> f64 {
    entries
        .iter()
        .map(|e| if e.i == e.j { e.value * m[e.block][(e.i, e.i)] } else { 2.0 * e.value * m[e.block][(e.i, e.j)] })
        .sum()
}

/// Smallest eigenvalue over all blocks.
pub fn min_eigenvalue(m: &[DMatrix<f64>]) -> f64 {
    m.iter()
        .map(|b| b.clone().symmetric_eigen().eigenvalues.iter().fold(f64::INFINITY, |a, &v| a.min(v)))
        .fold(f64::INFINITY, f64::min)
}

/// Real symmetric embedding `[[Re, -Im], [Im, Re]]` of a Hermitian matrix.
pub fn embed_hermitian(h: &DMatrix<nalgebra::Complex<f64>>) -> DMatrix<f64> {
    let n = h.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = h[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Inverse of [`embed_hermitian`], averaging the redundant copies.
pub fn extract_hermitian(m: &DMatrix<f64>) -> DMatrix<nalgebra::Complex<f64>> {
    let n = m.nrows() / 2;
    DMatrix::from_fn(n, n, |r, c| {
        let re = 0.5 * (m[(r, c)] + m[(r + n, c + n)]);
        let im = 0.5 * (m[(r + n, c)] - m[(r, c + n)]);
        nalgebra::Complex::new(re, im)
    })
}

/// Constraints forcing block `block` (order `2n`) to be the embedding of a
/// Hermitian matrix.
pub fn hermitian_structure(block: usize, n: usize) -> Vec<Constraint> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            // Re part: top-left equals bottom-right
            out.push(Constraint {
                entries: vec![Entry::new(block, i, j, 1.0), Entry::new(block, i + n, j + n, -1.0)],
                rhs: 0.0,
            });
        }
        for j in 0..n {
            // Im part: top-right block is antisymmetric
            if i == j {
                out.push(Constraint { entries: vec![Entry::new(block, i, j + n, 1.0)], rhs: 0.0 });
            } else if i < j {
                out.push(Constraint {
                    entries: vec![Entry::new(block, i, j + n, 1.0), Entry::new(block, j, i + n, 1.0)],
                    rhs: 0.0,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_with_unit_diagonal() {
        // max tr(J M) with M_ii = 1 on 3x3 gives 9 (all-ones J)
        let n = 3;
        let mut obj = Vec::new();
        for i in 0..n {
            for j in i..n {
                obj.push(Entry::new(0, i, j, 1.0));
            }
        }
        let constraints = (0..n).map(|i| Constraint { entries: vec![Entry::new(0, i, i, 1.0)], rhs: 1.0 }).collect();
        let p = SdpProblem { blocks: vec![n], objective: obj, constraints };
        let s = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.value - 9.0).abs() < 1e-4, "{}", s.value);
        assert!(s.dual_bound >= s.value - 1e-4);
    }

    #[test]
    fn trace_max_is_three() {
        // max tr(M) with M ⪰ 0, M_00 + M_11 + M_22 <= 3 written as diag(M) = 1
        let p = SdpProblem {
            blocks: vec![3],
            objective: (0..3).map(|i| Entry::new(0, i, i, 1.0)).collect(),
            constraints: (0..3).map(|i| Constraint { entries: vec![Entry::new(0, i, i, 1.0)], rhs: 1.0 }).collect(),
        };
        let s = solve(&p, &SdpOptions::default()).unwrap();
        assert!((s.value - 3.0).abs() < 1e-5);
    }

    #[test]
    fn off_diagonal_bound() {
        // max 2 M_01 subject to M_00 = M_11 = 1 gives 2
        let p = SdpProblem {
            blocks: vec![2],
            objective: vec![Entry::new(0, 0, 1, 1.0)],
            constraints: vec![
                Constraint { entries: vec![Entry::new(0, 0, 0, 1.0)], rhs: 1.0 },
                Constraint { entries: vec![Entry::new(0, 1, 1, 1.0)], rhs: 1.0 },
            ],
        };
        let s = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(s.status, SdpStatus::Optimal);
        assert!((s.value - 2.0).abs() < 1e-5);
        assert!(min_eigenvalue(&s.matrices) > -1e-6);
    }

    #[test]
    fn dependent_constraints_are_tolerated() {
        let c = Constraint { entries: vec![Entry::new(0, 0, 0, 1.0)], rhs: 1.0 };
        let p = SdpProblem {
            blocks: vec![2],
            objective: vec![Entry::new(0, 0, 1, 1.0)],
            constraints: vec![c.clone(), c, Constraint { entries: vec![Entry::new(0, 1, 1, 1.0)], rhs: 1.0 }],
        };
        let s = solve(&p, &SdpOptions::default()).unwrap();
        assert!((s.value - 2.0).abs() < 1e-4);
    }

    #[test]
    fn hermitian_embedding_round_trip() {
        use nalgebra::Complex;
        let h = DMatrix::from_row_slice(
            2,
            2,
            &[Complex::new(1.0, 0.0), Complex::new(0.5, -0.25), Complex::new(0.5, 0.25), Complex::new(2.0, 0.0)],
        );
        let e = embed_hermitian(&h);
        assert_eq!(e.clone(), e.transpose());
        assert_eq!(extract_hermitian(&e), h);
        let p = SdpProblem { blocks: vec![4], objective: vec![], constraints: hermitian_structure(0, 2) };
        for c in &p.constraints {
            assert!(trace_product(&c.entries, &[e.clone()]).abs() < 1e-12);
        }
    }

    #[test]
    fn infeasible_or_unbounded_is_not_optimal() {
        // M_00 = -1 is infeasible for M ⪰ 0
        let p = SdpProblem {
            blocks: vec![1],
            objective: vec![Entry::new(0, 0, 0, 1.0)],
            constraints: vec![Constraint { entries: vec![Entry::new(0, 0, 0, 1.0)], rhs: -1.0 }],
        };
        let s = solve(&p, &SdpOptions { max_iters: 5000, ..Default::default() }).unwrap();
        assert_ne!(s.status, SdpStatus::Optimal);
    }
}
