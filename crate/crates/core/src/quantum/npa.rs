use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use super::QuantumError;
use crate::exactgeom::Inequality;
use crate::sdp::{Constraint, Entry, SdpOptions, SdpProblem, SdpSolver, SdpStatus};

/// Levels of the moment-matrix hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NpaLevel {
    One,
    /// Level 1 plus all products of one Alice and one Bob projector.
    OneAB,
    Two,
}

#[derive(Debug, Clone)]
pub struct NpaResult {
    /// Certified upper bound on the quantum value.
    pub value: f64,
    /// Dual objective reported by the solver.
    pub dual_objective: f64,
    /// Objective at the returned moment matrix.
    pub primal: f64,
    pub status: SdpStatus,
    pub order: usize,
}

/// A projector word: Alice part and Bob part, which commute.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Word {
    alice: Vec<(u8, u8)>,
    bob: Vec<(u8, u8)>,
}

/// Applies `P_{a|x} P_{a'|x} = δ P_{a|x}`; `None` for the zero operator.
fn reduce(mut w: Vec<(u8, u8)>) -> Option<Vec<(u8, u8)>> {
    let mut i = 0;
    while i + 1 < w.len() {
        if w[i].0 == w[i + 1].0 {
            if w[i].1 != w[i + 1].1 {
                return None;
            }
            w.remove(i + 1);
            i = i.saturating_sub(1);
        } else {
            i += 1;
        }
    }
    Some(w)
}

impl Word {
    fn identity() -> Self {
        Word { alice: Vec::new(), bob: Vec::new() }
    }

    fn dagger(&self) -> Self {
        let mut a = self.alice.clone();
        a.reverse();
        let mut b = self.bob.clone();
        b.reverse();
        Word { alice: a, bob: b }
    }

    /// `self† · other`, reduced.
    fn pair(&self, other: &Word) -> Option<Word> {
        let d = self.dagger();
        let alice = reduce(d.alice.into_iter().chain(other.alice.iter().copied()).collect())?;
        let bob = reduce(d.bob.into_iter().chain(other.bob.iter().copied()).collect())?;
        Some(Word { alice, bob })
    }

    /// Representative of `{w, w†}`; the real part of the moment matrix
    /// cannot tell them apart.
    fn key(self) -> Word {
        let d = self.dagger();
        if d < self {
            d
        } else {
            self
        }
    }
}

fn monomials(x: usize, y: usize, a: usize, b: usize, level: NpaLevel) -> Vec<Word> {
    let alice: Vec<(u8, u8)> = (0..x).flat_map(|i| (0..a - 1).map(move |o| (i as u8, o as u8))).collect();
    let bob: Vec<(u8, u8)> = (0..y).flat_map(|j| (0..b - 1).map(move |o| (j as u8, o as u8))).collect();
    let mut out = vec![Word::identity()];
    out.extend(alice.iter().map(|&p| Word { alice: vec![p], bob: Vec::new() }));
    out.extend(bob.iter().map(|&p| Word { alice: Vec::new(), bob: vec![p] }));
    if level == NpaLevel::Two {
        for &p in &alice {
            for &q in &alice {
                if p.0 != q.0 {
                    out.push(Word { alice: vec![p, q], bob: Vec::new() });
                }
            }
        }
        for &p in &bob {
            for &q in &bob {
                if p.0 != q.0 {
                    out.push(Word { alice: Vec::new(), bob: vec![p, q] });
                }
            }
        }
    }
    if level != NpaLevel::One {
        for &p in &alice {
            for &q in &bob {
                out.push(Word { alice: vec![p], bob: vec![q] });
            }
        }
    }
    out
}

/// Coefficient on an off-diagonal entry that contributes `v · M_ij`.
fn cell(i: usize, j: usize, v: f64) -> Entry {
    Entry::new(0, i, j, if i == j { v } else { 0.5 * v })
}

/// Moment-matrix program for the CG projectors, real symmetric form.
pub fn npa_problem(ineq: &Inequality, level: NpaLevel) -> SdpProblem {
    let s = ineq.scenario();
    let words = monomials(s.inputs_a(), s.inputs_b(), s.outputs_a(), s.outputs_b(), level);
    let n = words.len();
    let mut first: HashMap<Word, (usize, usize)> = HashMap::new();
    let mut constraints = vec![Constraint { entries: vec![Entry::new(0, 0, 0, 1.0)], rhs: 1.0 }];
    for i in 0..n {
        for j in i..n {
            match words[i].pair(&words[j]) {
                None => constraints.push(Constraint { entries: vec![cell(i, j, 1.0)], rhs: 0.0 }),
                Some(w) => match first.entry(w.key()) {
                    hashbrown::hash_map::Entry::Occupied(e) => {
                        let (i0, j0) = *e.get();
                        constraints.push(Constraint { entries: vec![cell(i, j, 1.0), cell(i0, j0, -1.0)], rhs: 0.0 });
                    }
                    hashbrown::hash_map::Entry::Vacant(e) => {
                        e.insert((i, j));
                    }
                },
            }
        }
    }
    let layout = s.layout();
    let locate = |w: Word| -> (usize, usize) { first[&w.key()] };
    let mut objective = Vec::new();
    for (pos, &c) in ineq.coeffs().iter().enumerate() {
        if c == 0 {
            continue;
        }
        let w = match layout.entry(pos).expect("position inside layout") {
            crate::scenario::CgEntry::Joint { x, y, a, b } => {
                Word { alice: vec![(x as u8, a as u8)], bob: vec![(y as u8, b as u8)] }
            }
            crate::scenario::CgEntry::Alice { x, a } => Word { alice: vec![(x as u8, a as u8)], bob: Vec::new() },
            crate::scenario::CgEntry::Bob { y, b } => Word { alice: Vec::new(), bob: vec![(y as u8, b as u8)] },
        };
        let (i, j) = locate(w);
        objective.push(cell(i, j, c as f64));
    }
    SdpProblem { blocks: vec![n], objective, constraints }
}

/// Upper bound on the quantum value from the moment-matrix relaxation.
///
/// The reported value is certified from the solver's multipliers: every
/// diagonal moment is at most 1, so feasible moment matrices have trace at
/// most their order.
pub fn npa_upper_bound(ineq: &Inequality, level: NpaLevel, tol: f64) -> Result<NpaResult, QuantumError> {
    let p = npa_problem(ineq, level);
    let solver = SdpSolver::new(&p)?;
    let sol = solver.solve(&p.objective, &SdpOptions { tol, ..Default::default() })?;
    let n = p.blocks[0];
    let value = solver.certified_bound(&p.objective, &sol.dual, n as f64)?;
    Ok(NpaResult { value, dual_objective: sol.dual_bound, primal: sol.value, status: sol.status, order: n })
}
