//! Bell scenarios, Collins-Gisin coordinates and deterministic local strategies.
//!
//! Outcomes and inputs are 0-based throughout. In CG coordinates the last
//! outcome of every measurement is suppressed, and single-party marginals are
//! read off the first context of the other party.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_rational::BigRational;
use num_traits::{Num, Zero};

use crate::exactgeom::Inequality;

/// Default upper limit on the number of local vertices materialized at once.
pub const DEFAULT_VERTEX_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScenarioError {
    #[error("invalid scenario ({x},{y},{a},{b}): need X,Y >= 1 and A,B >= 2")]
    Invalid { x: usize, y: usize, a: usize, b: usize },
    #[error("scenario has {count} local vertices, above the cap of {cap}")]
    TooManyVertices { count: u128, cap: u64 },
    #[error("vector has length {got}, expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("joint table is signalling: {0}")]
    Signalling(&'static str),
    #[error("joint table is not normalized in context ({x},{y})")]
    NotNormalized { x: usize, y: usize },
}

/// A bipartite Bell scenario `(X, Y, A, B)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scenario {
    x: usize,
    y: usize,
    a: usize,
    b: usize,
}

impl Scenario {
    pub fn new(x: usize, y: usize, a: usize, b: usize) -> Result<Self, ScenarioError> {
        if x == 0 || y == 0 || a < 2 || b < 2 {
            return Err(ScenarioError::Invalid { x, y, a, b });
        }
        Ok(Self { x, y, a, b })
    }

    /// Alice's number of inputs.
    pub fn inputs_a(&self) -> usize {
        self.x
    }
    /// Bob's number of inputs.
    pub fn inputs_b(&self) -> usize {
        self.y
    }
    /// Alice's number of outcomes per input.
    pub fn outputs_a(&self) -> usize {
        self.a
    }
    /// Bob's number of outcomes per input.
    pub fn outputs_b(&self) -> usize {
        self.b
    }

    /// `(A-1)(B-1)XY + (A-1)X + (B-1)Y`.
    pub fn cg_dimension(&self) -> usize {
        (self.a - 1) * (self.b - 1) * self.x * self.y + (self.a - 1) * self.x + (self.b - 1) * self.y
    }

    pub fn layout(&self) -> CgLayout {
        CgLayout { s: *self }
    }

    /// `A^X * B^Y`, or `None` if it does not fit in 128 bits.
    pub fn vertex_count(&self) -> Option<u128> {
        let a = (self.a as u128).checked_pow(self.x as u32)?;
        let b = (self.b as u128).checked_pow(self.y as u32)?;
        a.checked_mul(b)
    }

    /// Whether the party swap is a symmetry (`X = Y` and `A = B`).
    pub fn is_symmetric(&self) -> bool {
        self.x == self.y && self.a == self.b
    }

    /// Componentwise `self >= other`.
    pub fn dominates(&self, other: &Scenario) -> bool {
        self.x >= other.x && self.y >= other.y && self.a >= other.a && self.b >= other.b
    }

    /// Number of entries `X*Y*A*B` of a full joint table.
    pub fn table_len(&self) -> usize {
        self.x * self.y * self.a * self.b
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.x, self.y, self.a, self.b)
    }
}

/// One CG coordinate, identified by its symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CgEntry {
    Joint { x: usize, y: usize, a: usize, b: usize },
    Alice { x: usize, a: usize },
    Bob { y: usize, b: usize },
}

/// Index map for CG coordinates: joints ordered by `(x, y, a, b)`, then
/// Alice marginals by `(x, a)`, then Bob marginals by `(y, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CgLayout {
    s: Scenario,
}

impl CgLayout {
    pub fn scenario(&self) -> Scenario {
        self.s
    }

    pub fn len(&self) -> usize {
        self.s.cg_dimension()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn joint_len(&self) -> usize {
        (self.s.a - 1) * (self.s.b - 1) * self.s.x * self.s.y
    }

    /// Position of `p(ab|xy)`, with `a < A-1` and `b < B-1`.
    pub fn joint(&self, x: usize, y: usize, a: usize, b: usize) -> usize {
        debug_assert!(x < self.s.x && y < self.s.y && a + 1 < self.s.a && b + 1 < self.s.b);
        ((x * self.s.y + y) * (self.s.a - 1) + a) * (self.s.b - 1) + b
    }

    /// Position of `p^A(a|x)`, with `a < A-1`.
    pub fn alice(&self, x: usize, a: usize) -> usize {
        debug_assert!(x < self.s.x && a + 1 < self.s.a);
        self.joint_len() + x * (self.s.a - 1) + a
    }

    /// Position of `p^B(b|y)`, with `b < B-1`.
    pub fn bob(&self, y: usize, b: usize) -> usize {
        debug_assert!(y < self.s.y && b + 1 < self.s.b);
        self.joint_len() + self.s.x * (self.s.a - 1) + y * (self.s.b - 1) + b
    }

    pub fn position(&self, e: CgEntry) -> usize {
        match e {
            CgEntry::Joint { x, y, a, b } => self.joint(x, y, a, b),
            CgEntry::Alice { x, a } => self.alice(x, a),
            CgEntry::Bob { y, b } => self.bob(y, b),
        }
    }

    /// The entry stored at `pos`.
    pub fn entry(&self, pos: usize) -> Option<CgEntry> {
        let (ra, rb) = (self.s.a - 1, self.s.b - 1);
        let jl = self.joint_len();
        if pos < jl {
            let b = pos % rb;
            let rest = pos / rb;
            let a = rest % ra;
            let rest = rest / ra;
            Some(CgEntry::Joint { x: rest / self.s.y, y: rest % self.s.y, a, b })
        } else if pos < jl + self.s.x * ra {
            let p = pos - jl;
            Some(CgEntry::Alice { x: p / ra, a: p % ra })
        } else if pos < self.len() {
            let p = pos - jl - self.s.x * ra;
            Some(CgEntry::Bob { y: p / rb, b: p % rb })
        } else {
            None
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = CgEntry> + '_ {
        (0..self.len()).map(move |p| self.entry(p).expect("position in range"))
    }
}

/// A deterministic local strategy: one output per input for each party.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeterministicStrategy {
    pub alice: Vec<usize>,
    pub bob: Vec<usize>,
}

impl DeterministicStrategy {
    /// The CG image of this strategy (a 0/1 vector).
    pub fn vertex(&self, s: &Scenario) -> Vec<i64> {
        let l = s.layout();
        let mut v = vec![0i64; l.len()];
        for x in 0..s.x {
            let a = self.alice[x];
            if a + 1 < s.a {
                v[l.alice(x, a)] = 1;
            }
        }
        for y in 0..s.y {
            let b = self.bob[y];
            if b + 1 < s.b {
                v[l.bob(y, b)] = 1;
            }
        }
        for x in 0..s.x {
            for y in 0..s.y {
                let (a, b) = (self.alice[x], self.bob[y]);
                if a + 1 < s.a && b + 1 < s.b {
                    v[l.joint(x, y, a, b)] = 1;
                }
            }
        }
        v
    }
}

/// All `A^X` Alice output maps, in lexicographic order (input 0 most significant).
pub fn party_strategies(inputs: usize, outputs: usize) -> Vec<Vec<usize>> {
    let total = outputs.pow(inputs as u32);
    (0..total)
        .map(|mut k| {
            let mut s = vec![0; inputs];
            for slot in s.iter_mut().rev() {
                *slot = k % outputs;
                k /= outputs;
            }
            s
        })
        .collect()
}

/// Every deterministic strategy, Alice's map varying slowest.
pub fn strategies(s: &Scenario) -> impl Iterator<Item = DeterministicStrategy> {
    let alice = party_strategies(s.x, s.a);
    let bob = party_strategies(s.y, s.b);
    alice.into_iter().flat_map(move |a| {
        bob.clone().into_iter().map(move |b| DeterministicStrategy { alice: a.clone(), bob: b })
    })
}

/// The `A^X * B^Y` vertices of the local polytope in CG coordinates.
pub fn enumerate_vertices(s: &Scenario, cap: u64) -> Result<Vec<Vec<i64>>, ScenarioError> {
    let count = s.vertex_count().unwrap_or(u128::MAX);
    if count > cap as u128 {
        return Err(ScenarioError::TooManyVertices { count, cap });
    }
    Ok(strategies(s).map(|st| st.vertex(s)).collect())
}

/// A full table `t[x][y][a][b]`, stored flat.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JointTable<T> {
    s: Scenario,
    data: Vec<T>,
}

impl<T: Clone> JointTable<T> {
    pub fn filled(s: Scenario, value: T) -> Self {
        Self { s, data: vec![value; s.table_len()] }
    }

    pub fn from_fn(s: Scenario, mut f: impl FnMut(usize, usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(s.table_len());
        for x in 0..s.x {
            for y in 0..s.y {
                for a in 0..s.a {
                    for b in 0..s.b {
                        data.push(f(x, y, a, b));
                    }
                }
            }
        }
        Self { s, data }
    }
}

impl<T> JointTable<T> {
    pub fn scenario(&self) -> Scenario {
        self.s
    }

    fn idx(&self, x: usize, y: usize, a: usize, b: usize) -> usize {
        ((x * self.s.y + y) * self.s.a + a) * self.s.b + b
    }

    pub fn get(&self, x: usize, y: usize, a: usize, b: usize) -> &T {
        &self.data[self.idx(x, y, a, b)]
    }

    pub fn get_mut(&mut self, x: usize, y: usize, a: usize, b: usize) -> &mut T {
        let i = self.idx(x, y, a, b);
        &mut self.data[i]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

/// A point in CG coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BehaviorVector<T = BigRational> {
    pub scenario: Scenario,
    pub coords: Vec<T>,
}

impl<T> BehaviorVector<T> {
    pub fn new(scenario: Scenario, coords: Vec<T>) -> Result<Self, ScenarioError> {
        if coords.len() != scenario.cg_dimension() {
            return Err(ScenarioError::LengthMismatch {
                got: coords.len(),
                expected: scenario.cg_dimension(),
            });
        }
        Ok(Self { scenario, coords })
    }
}

impl BehaviorVector<BigRational> {
    pub fn from_integers(scenario: Scenario, coords: &[i64]) -> Result<Self, ScenarioError> {
        Self::new(scenario, coords.iter().map(|&c| BigRational::from_integer(c.into())).collect())
    }
}

/// Alice's marginal `p^A(a|x)` from context `(x, y)`.
fn alice_marginal<T: Num + Clone>(t: &JointTable<T>, x: usize, y: usize, a: usize) -> T {
    (0..t.s.b).fold(T::zero(), |acc, b| acc + t.get(x, y, a, b).clone())
}

fn bob_marginal<T: Num + Clone>(t: &JointTable<T>, x: usize, y: usize, b: usize) -> T {
    (0..t.s.a).fold(T::zero(), |acc, a| acc + t.get(x, y, a, b).clone())
}

/// P → CG. Requires an exactly normalized, no-signalling table.
pub fn p_to_cg<T: Num + Clone>(table: &JointTable<T>) -> Result<BehaviorVector<T>, ScenarioError> {
    let s = table.s;
    for x in 0..s.x {
        for y in 0..s.y {
            let total = (0..s.a).fold(T::zero(), |acc, a| acc + alice_marginal(table, x, y, a));
            if total != T::one() {
                return Err(ScenarioError::NotNormalized { x, y });
            }
        }
    }
    for x in 0..s.x {
        for a in 0..s.a {
            let first = alice_marginal(table, x, 0, a);
            if (1..s.y).any(|y| alice_marginal(table, x, y, a) != first) {
                return Err(ScenarioError::Signalling("Alice marginal depends on Bob's input"));
            }
        }
    }
    for y in 0..s.y {
        for b in 0..s.b {
            let first = bob_marginal(table, 0, y, b);
            if (1..s.x).any(|x| bob_marginal(table, x, y, b) != first) {
                return Err(ScenarioError::Signalling("Bob marginal depends on Alice's input"));
            }
        }
    }
    Ok(p_to_cg_unchecked(table))
}

/// P → CG without validation, marginals read from the first context.
pub fn p_to_cg_unchecked<T: Num + Clone>(table: &JointTable<T>) -> BehaviorVector<T> {
    let s = table.s;
    let l = s.layout();
    let mut coords = vec![T::zero(); l.len()];
    for x in 0..s.x {
        for y in 0..s.y {
            for a in 0..s.a - 1 {
                for b in 0..s.b - 1 {
                    coords[l.joint(x, y, a, b)] = table.get(x, y, a, b).clone();
                }
            }
        }
    }
    for x in 0..s.x {
        for a in 0..s.a - 1 {
            coords[l.alice(x, a)] = alice_marginal(table, x, 0, a);
        }
    }
    for y in 0..s.y {
        for b in 0..s.b - 1 {
            coords[l.bob(y, b)] = bob_marginal(table, 0, y, b);
        }
    }
    BehaviorVector { scenario: s, coords }
}

/// CG → P, reconstructing the suppressed outcomes from normalization.
pub fn cg_to_p<T: Num + Clone>(
    s: &Scenario,
    coords: &[T],
) -> Result<JointTable<T>, ScenarioError> {
    let l = s.layout();
    if coords.len() != l.len() {
        return Err(ScenarioError::LengthMismatch { got: coords.len(), expected: l.len() });
    }
    let (la, lb) = (s.a - 1, s.b - 1);
    let pa = |x: usize, a: usize| -> T {
        if a < la {
            coords[l.alice(x, a)].clone()
        } else {
            (0..la).fold(T::one(), |acc, a2| acc - coords[l.alice(x, a2)].clone())
        }
    };
    let pb = |y: usize, b: usize| -> T {
        if b < lb {
            coords[l.bob(y, b)].clone()
        } else {
            (0..lb).fold(T::one(), |acc, b2| acc - coords[l.bob(y, b2)].clone())
        }
    };
    let j = |x: usize, y: usize, a: usize, b: usize| coords[l.joint(x, y, a, b)].clone();
    Ok(JointTable::from_fn(*s, |x, y, a, b| match (a < la, b < lb) {
        (true, true) => j(x, y, a, b),
        (true, false) => (0..lb).fold(pa(x, a), |acc, b2| acc - j(x, y, a, b2)),
        (false, true) => (0..la).fold(pb(y, b), |acc, a2| acc - j(x, y, a2, b)),
        (false, false) => {
            let mut v = T::one();
            for a2 in 0..la {
                v = v - pa(x, a2);
            }
            for b2 in 0..lb {
                v = v - pb(y, b2);
            }
            for a2 in 0..la {
                for b2 in 0..lb {
                    v = v + j(x, y, a2, b2);
                }
            }
            v
        }
    }))
}

/// Largest deviation from normalization and no-signalling in a real table.
pub fn signalling_residual(table: &JointTable<f64>) -> f64 {
    let s = table.s;
    let mut worst: f64 = 0.0;
    for x in 0..s.x {
        for y in 0..s.y {
            let total: f64 = table.data[table.idx(x, y, 0, 0)..][..s.a * s.b].iter().sum();
            worst = worst.max((total - 1.0).abs());
        }
    }
    for x in 0..s.x {
        for a in 0..s.a {
            let first = alice_marginal(table, x, 0, a);
            for y in 1..s.y {
                worst = worst.max((alice_marginal(table, x, y, a) - first).abs());
            }
        }
    }
    for y in 0..s.y {
        for b in 0..s.b {
            let first = bob_marginal(table, 0, y, b);
            for x in 1..s.x {
                worst = worst.max((bob_marginal(table, x, y, b) - first).abs());
            }
        }
    }
    worst
}

/// Rewrites a CG functional as coefficients on the full table.
///
/// For every no-signalling `p`, `sum(table * p) == coeffs · p_to_cg(p)`.
/// Marginal coefficients are attached to the first context of the other party.
pub fn expand_functional(s: &Scenario, coeffs: &[i64]) -> JointTable<i64> {
    let l = s.layout();
    let mut t = JointTable::filled(*s, 0i64);
    for (pos, entry) in l.entries().enumerate() {
        let c = coeffs[pos];
        if c == 0 {
            continue;
        }
        match entry {
            CgEntry::Joint { x, y, a, b } => *t.get_mut(x, y, a, b) += c,
            CgEntry::Alice { x, a } => {
                for b in 0..s.b {
                    *t.get_mut(x, 0, a, b) += c;
                }
            }
            CgEntry::Bob { y, b } => {
                for a in 0..s.a {
                    *t.get_mut(0, y, a, b) += c;
                }
            }
        }
    }
    t
}

/// Inverse of [`expand_functional`] on functionals: returns CG coefficients
/// and a constant `k` with `sum(table * p) == coeffs · cg(p) + k` for every
/// normalized no-signalling `p`.
pub fn contract_functional(table: &JointTable<i64>) -> (Vec<i64>, i64) {
    let s = table.s;
    let l = s.layout();
    let (la, lb) = (s.a - 1, s.b - 1);
    let mut out = vec![0i64; l.len()];
    let mut constant = 0i64;
    for x in 0..s.x {
        for y in 0..s.y {
            let c = |a: usize, b: usize| *table.get(x, y, a, b);
            let corner = c(la, lb);
            constant += corner;
            for a in 0..la {
                // p(a, B-1) = pA(a) - sum_b J(a,b); p(A-1,B-1) contributes -pA(a)
                out[l.alice(x, a)] += c(a, lb) - corner;
                for b in 0..lb {
                    out[l.joint(x, y, a, b)] += c(a, b) - c(a, lb) - c(la, b) + corner;
                }
            }
            for b in 0..lb {
                out[l.bob(y, b)] += c(la, b) - corner;
            }
        }
    }
    (out, constant)
}

/// `ineq · v` (the bound is not involved).
pub fn evaluate(ineq: &Inequality, v: &BehaviorVector) -> Result<BigRational, ScenarioError> {
    if v.scenario != ineq.scenario() {
        return Err(ScenarioError::LengthMismatch {
            got: v.coords.len(),
            expected: ineq.scenario().cg_dimension(),
        });
    }
    Ok(ineq
        .coeffs()
        .iter()
        .zip(&v.coords)
        .filter(|(c, _)| **c != 0)
        .fold(BigRational::zero(), |acc, (c, x)| acc + x * BigRational::from_integer((*c).into())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn sc(x: usize, y: usize, a: usize, b: usize) -> Scenario {
        Scenario::new(x, y, a, b).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn cg_dimensions() {
        assert_eq!(sc(2, 2, 2, 2).cg_dimension(), 8);
        assert_eq!(sc(3, 3, 2, 2).cg_dimension(), 15);
        assert_eq!(sc(2, 2, 3, 3).cg_dimension(), 24);
    }

    #[test]
    fn rejects_degenerate_scenarios() {
        assert!(Scenario::new(0, 2, 2, 2).is_err());
        assert!(Scenario::new(2, 2, 1, 2).is_err());
    }

    #[test]
    fn layout_is_a_bijection() {
        for s in [sc(2, 2, 2, 2), sc(3, 2, 3, 4), sc(2, 3, 4, 2)] {
            let l = s.layout();
            for (pos, e) in l.entries().enumerate() {
                assert_eq!(l.position(e), pos);
            }
            assert_eq!(l.entry(l.len()), None);
        }
    }

    #[test]
    fn vertex_counts() {
        let cap = DEFAULT_VERTEX_CAP;
        assert_eq!(enumerate_vertices(&sc(2, 2, 2, 2), cap).unwrap().len(), 16);
        assert_eq!(enumerate_vertices(&sc(3, 3, 2, 2), cap).unwrap().len(), 64);
        let v = enumerate_vertices(&sc(2, 2, 3, 5), cap).unwrap();
        assert_eq!(v.len(), 225);
        let mut sorted = v.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 225);
        assert!(v.iter().flatten().all(|&c| c == 0 || c == 1));
    }

    #[test]
    fn vertex_cap_is_enforced() {
        let err = enumerate_vertices(&sc(3, 3, 2, 2), 63).unwrap_err();
        assert_eq!(err, ScenarioError::TooManyVertices { count: 64, cap: 63 });
    }

    #[test]
    fn constant_zero_strategy_is_all_ones() {
        let s = sc(2, 2, 2, 2);
        let st = DeterministicStrategy { alice: vec![0, 0], bob: vec![0, 0] };
        let table = JointTable::from_fn(s, |_, _, a, b| {
            if a == 0 && b == 0 {
                q(1, 1)
            } else {
                q(0, 1)
            }
        });
        let cg = p_to_cg(&table).unwrap();
        assert!(cg.coords.iter().all(|c| *c == q(1, 1)));
        assert_eq!(st.vertex(&s), vec![1; 8]);
    }

    #[test]
    fn uniform_table() {
        let s = sc(2, 2, 2, 2);
        let table = JointTable::filled(s, q(1, 4));
        let cg = p_to_cg(&table).unwrap();
        let l = s.layout();
        assert_eq!(cg.coords[l.joint(1, 0, 0, 0)], q(1, 4));
        assert_eq!(cg.coords[l.alice(1, 0)], q(1, 2));
        assert_eq!(cg.coords[l.bob(0, 0)], q(1, 2));
    }

    #[test]
    fn all_zero_cg_vector_is_last_outcome() {
        let s = sc(2, 2, 2, 2);
        let zeros = vec![q(0, 1); 8];
        let t = cg_to_p(&s, &zeros).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                assert_eq!(*t.get(x, y, 1, 1), q(1, 1));
                assert_eq!(*t.get(x, y, 0, 1), q(0, 1));
            }
        }
    }

    #[test]
    fn signalling_table_is_rejected() {
        let s = sc(2, 2, 2, 2);
        // Alice copies Bob's input: p(a=y) = 1.
        let t = JointTable::from_fn(s, |_, y, a, b| if a == y && b == 0 { q(1, 1) } else { q(0, 1) });
        assert!(matches!(p_to_cg(&t), Err(ScenarioError::Signalling(_))));
    }

    #[test]
    fn length_mismatch() {
        let s = sc(2, 2, 2, 2);
        assert!(cg_to_p(&s, &vec![q(0, 1); 7]).is_err());
    }

    #[test]
    fn expand_contract_roundtrip() {
        let s = sc(2, 3, 3, 2);
        let coeffs: Vec<i64> = (0..s.cg_dimension() as i64).map(|i| (i * 7) % 5 - 2).collect();
        let t = expand_functional(&s, &coeffs);
        let (back, k) = contract_functional(&t);
        assert_eq!(back, coeffs);
        assert_eq!(k, 0);
    }

    #[test]
    fn contract_matches_table_functional_on_vertices() {
        let s = sc(2, 2, 3, 2);
        let t = JointTable::from_fn(s, |x, y, a, b| ((x + 2 * y + 3 * a + 5 * b) % 4) as i64 - 1);
        let (cg, k) = contract_functional(&t);
        for st in strategies(&s) {
            let direct: i64 = (0..2)
                .flat_map(|x| (0..2).map(move |y| (x, y)))
                .map(|(x, y)| *t.get(x, y, st.alice[x], st.bob[y]))
                .sum();
            let v = st.vertex(&s);
            let via: i64 = cg.iter().zip(&v).map(|(c, x)| c * x).sum::<i64>() + k;
            assert_eq!(direct, via);
        }
    }
}
