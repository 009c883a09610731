//! Relabeling symmetries of a Bell scenario, canonical class representatives
//! and orbit sizes.
//!
//! A symmetry relabels Alice's inputs, each of Alice's measurements' outcomes
//! (independently per input), the same for Bob, and optionally exchanges the
//! parties. It acts on full joint tables by moving entries; inequalities are
//! expanded to the full table, permuted and contracted back to CG form.
//!
//! Class representatives are the lexicographic maximum of `[α..., L]` over
//! the orbit. [`canonical_form`] finds it with a branch-and-bound search over
//! the group that fixes the CG joint blocks in layout order, so whole subtrees
//! are skipped as soon as a block falls below the best seen so far.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use hashbrown::{HashMap, HashSet};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::exactgeom::Inequality;
use crate::scenario::{contract_functional, expand_functional, JointTable, Scenario};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymmetryError {
    #[error("party swap requires X = Y and A = B, scenario is {0}")]
    SwapOnAsymmetric(Scenario),
    #[error("symmetry element does not match scenario {0}")]
    WrongShape(Scenario),
    #[error("facet list mixes scenarios {0} and {1}")]
    MixedScenarios(Scenario, Scenario),
}

/// One relabeling: inputs and per-input outputs for both parties, then an
/// optional exchange of the parties.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymmetryElement {
    pub swap: bool,
    pub alice_inputs: Vec<usize>,
    /// `alice_outputs[x]` relabels the outcomes of Alice's original input `x`.
    pub alice_outputs: Vec<Vec<usize>>,
    pub bob_inputs: Vec<usize>,
    pub bob_outputs: Vec<Vec<usize>>,
}

fn identity_perm(n: usize) -> Vec<usize> {
    (0..n).collect()
}

fn is_perm(p: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    p.len() == n && p.iter().all(|&v| v < n && !core::mem::replace(&mut seen[v], true))
}

fn inverse(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &v) in p.iter().enumerate() {
        inv[v] = i;
    }
    inv
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = identity_perm(n);
    loop {
        out.push(cur.clone());
        // next lexicographic permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            return out;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).expect("successor exists");
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
}

impl SymmetryElement {
    pub fn identity(s: &Scenario) -> Self {
        SymmetryElement {
            swap: false,
            alice_inputs: identity_perm(s.inputs_a()),
            alice_outputs: vec![identity_perm(s.outputs_a()); s.inputs_a()],
            bob_inputs: identity_perm(s.inputs_b()),
            bob_outputs: vec![identity_perm(s.outputs_b()); s.inputs_b()],
        }
    }

    /// The party exchange alone.
    pub fn party_swap(s: &Scenario) -> Result<Self, SymmetryError> {
        if !s.is_symmetric() {
            return Err(SymmetryError::SwapOnAsymmetric(*s));
        }
        Ok(SymmetryElement { swap: true, ..Self::identity(s) })
    }

    pub fn validate(&self, s: &Scenario) -> Result<(), SymmetryError> {
        if self.swap && !s.is_symmetric() {
            return Err(SymmetryError::SwapOnAsymmetric(*s));
        }
        let ok = is_perm(&self.alice_inputs, s.inputs_a())
            && is_perm(&self.bob_inputs, s.inputs_b())
            && self.alice_outputs.len() == s.inputs_a()
            && self.bob_outputs.len() == s.inputs_b()
            && self.alice_outputs.iter().all(|p| is_perm(p, s.outputs_a()))
            && self.bob_outputs.iter().all(|p| is_perm(p, s.outputs_b()));
        if ok {
            Ok(())
        } else {
            Err(SymmetryError::WrongShape(*s))
        }
    }

    /// Image of Alice's label `(x, a)` as `(party_is_bob, input, output)`.
    fn map_alice(&self, x: usize, a: usize) -> (bool, usize, usize) {
        (self.swap, self.alice_inputs[x], self.alice_outputs[x][a])
    }

    fn map_bob(&self, y: usize, b: usize) -> (bool, usize, usize) {
        (!self.swap, self.bob_inputs[y], self.bob_outputs[y][b])
    }

    fn map_label(&self, is_bob: bool, i: usize, o: usize) -> (bool, usize, usize) {
        if is_bob {
            self.map_bob(i, o)
        } else {
            self.map_alice(i, o)
        }
    }

    fn from_label_map(s: &Scenario, f: impl Fn(bool, usize, usize) -> (bool, usize, usize)) -> Self {
        let swap = f(false, 0, 0).0;
        let alice_inputs = (0..s.inputs_a()).map(|x| f(false, x, 0).1).collect();
        let alice_outputs =
            (0..s.inputs_a()).map(|x| (0..s.outputs_a()).map(|a| f(false, x, a).2).collect()).collect();
        let bob_inputs = (0..s.inputs_b()).map(|y| f(true, y, 0).1).collect();
        let bob_outputs =
            (0..s.inputs_b()).map(|y| (0..s.outputs_b()).map(|b| f(true, y, b).2).collect()).collect();
        SymmetryElement { swap, alice_inputs, alice_outputs, bob_inputs, bob_outputs }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &SymmetryElement, s: &Scenario) -> Self {
        Self::from_label_map(s, |p, i, o| {
            let (p2, i2, o2) = other.map_label(p, i, o);
            self.map_label(p2, i2, o2)
        })
    }

    pub fn inverse(&self, s: &Scenario) -> Self {
        let mut table: HashMap<(bool, usize, usize), (bool, usize, usize)> = HashMap::new();
        for x in 0..s.inputs_a() {
            for a in 0..s.outputs_a() {
                table.insert(self.map_alice(x, a), (false, x, a));
            }
        }
        for y in 0..s.inputs_b() {
            for b in 0..s.outputs_b() {
                table.insert(self.map_bob(y, b), (true, y, b));
            }
        }
        Self::from_label_map(s, |p, i, o| table[&(p, i, o)])
    }

    /// A uniformly random element of the scenario's group.
    pub fn random<R: Rng + ?Sized>(s: &Scenario, rng: &mut R) -> Self {
        let mut perm = |n: usize| {
            let mut p = identity_perm(n);
            p.shuffle(rng);
            p
        };
        let alice_inputs = perm(s.inputs_a());
        let alice_outputs = (0..s.inputs_a()).map(|_| perm(s.outputs_a())).collect();
        let bob_inputs = perm(s.inputs_b());
        let bob_outputs = (0..s.inputs_b()).map(|_| perm(s.outputs_b())).collect();
        let swap = s.is_symmetric() && rng.gen_bool(0.5);
        SymmetryElement { swap, alice_inputs, alice_outputs, bob_inputs, bob_outputs }
    }

    /// Adjacent input transpositions, single-input adjacent output
    /// transpositions, and the party swap when legal.
    pub fn generators(s: &Scenario) -> Vec<SymmetryElement> {
        let id = Self::identity(s);
        let mut out = Vec::new();
        for i in 0..s.inputs_a().saturating_sub(1) {
            let mut g = id.clone();
            g.alice_inputs.swap(i, i + 1);
            out.push(g);
        }
        for x in 0..s.inputs_a() {
            for a in 0..s.outputs_a() - 1 {
                let mut g = id.clone();
                g.alice_outputs[x].swap(a, a + 1);
                out.push(g);
            }
        }
        for i in 0..s.inputs_b().saturating_sub(1) {
            let mut g = id.clone();
            g.bob_inputs.swap(i, i + 1);
            out.push(g);
        }
        for y in 0..s.inputs_b() {
            for b in 0..s.outputs_b() - 1 {
                let mut g = id.clone();
                g.bob_outputs[y].swap(b, b + 1);
                out.push(g);
            }
        }
        if s.is_symmetric() {
            out.push(SymmetryElement { swap: true, ..id });
        }
        out
    }

    /// Moves every entry of a full table to its relabeled position.
    pub fn permute_table<T: Clone>(&self, t: &JointTable<T>) -> JointTable<T> {
        let s = t.scenario();
        let mut out = t.clone();
        for x in 0..s.inputs_a() {
            for y in 0..s.inputs_b() {
                for a in 0..s.outputs_a() {
                    for b in 0..s.outputs_b() {
                        let (_, i1, o1) = self.map_alice(x, a);
                        let (_, i2, o2) = self.map_bob(y, b);
                        let (nx, ny, na, nb) = if self.swap { (i2, i1, o2, o1) } else { (i1, i2, o1, o2) };
                        *out.get_mut(nx, ny, na, nb) = t.get(x, y, a, b).clone();
                    }
                }
            }
        }
        out
    }
}

/// `X! (A!)^X Y! (B!)^Y`, doubled when the party swap is legal.
pub fn group_order(s: &Scenario) -> u128 {
    let fact = |n: usize| (1..=n as u128).product::<u128>();
    let alice = fact(s.inputs_a()) * fact(s.outputs_a()).pow(s.inputs_a() as u32);
    let bob = fact(s.inputs_b()) * fact(s.outputs_b()).pow(s.inputs_b() as u32);
    alice * bob * if s.is_symmetric() { 2 } else { 1 }
}

/// The image of `ineq` under `g`, renormalized.
pub fn apply_symmetry(ineq: &Inequality, g: &SymmetryElement) -> Result<Inequality, SymmetryError> {
    let s = ineq.scenario();
    g.validate(&s)?;
    let table = expand_functional(&s, ineq.coeffs());
    let (coeffs, shift) = contract_functional(&g.permute_table(&table));
    Ok(Inequality::new(s, coeffs, ineq.bound() - shift).expect("layout preserved"))
}

/// Orbit of `ineq` by breadth-first closure under [`SymmetryElement::generators`].
pub fn orbit_bfs(ineq: &Inequality) -> Vec<Inequality> {
    let gens = SymmetryElement::generators(&ineq.scenario());
    let mut seen: HashSet<Inequality> = HashSet::new();
    let mut out = vec![ineq.clone()];
    seen.insert(ineq.clone());
    let mut next = 0;
    while next < out.len() {
        let cur = out[next].clone();
        next += 1;
        for g in &gens {
            let img = apply_symmetry(&cur, g).expect("generators are valid");
            if seen.insert(img.clone()) {
                out.push(img);
            }
        }
    }
    out
}

/// Canonical representative and stabilizer order of an inequality's orbit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Canonical {
    pub representative: Inequality,
    pub stabilizer: u128,
    pub orbit_size: u128,
}

/// The search state for one canonicalization.
struct Search<'a> {
    s: Scenario,
    table: &'a JointTable<i64>,
    bound: i64,
    inv_a: &'a [Vec<usize>],
    inv_b: &'a [Vec<usize>],
    block: usize,
    cur: Vec<i64>,
    best: Vec<i64>,
    count: u128,
    xs: Vec<usize>,
    sa: Vec<usize>,
    ys: Vec<usize>,
    sb: Vec<usize>,
    used_x: Vec<bool>,
    used_y: Vec<bool>,
}

impl Search<'_> {
    /// Permuted entry `T'(a', b')` of context `(x, y)` using inverse output maps.
    #[inline]
    fn entry(&self, x: usize, ia: &[usize], y: usize, ib: &[usize], a: usize, b: usize) -> i64 {
        *self.table.get(x, y, ia[a], ib[b])
    }

    /// Writes the joint block for target context `(xt, yt)`.
    fn write_block(&mut self, xt: usize, yt: usize) {
        let (na, nb) = (self.s.outputs_a(), self.s.outputs_b());
        let (x, y) = (self.xs[xt], self.ys[yt]);
        let ia = &self.inv_a[self.sa[xt]];
        let ib = &self.inv_b[self.sb[yt]];
        let corner = self.entry(x, ia, y, ib, na - 1, nb - 1);
        let start = (xt * self.s.inputs_b() + yt) * self.block;
        let mut k = start;
        for a in 0..na - 1 {
            let right = self.entry(x, ia, y, ib, a, nb - 1);
            for b in 0..nb - 1 {
                let v = self.entry(x, ia, y, ib, a, b) - right - self.entry(x, ia, y, ib, na - 1, b) + corner;
                self.cur[k] = v;
                k += 1;
            }
        }
    }

    /// Is the prefix `cur[..end]` at least `best[..end]`?
    fn keep(&self, end: usize) -> bool {
        self.cur[..end].cmp(&self.best[..end]) != Ordering::Less
    }

    fn leaf(&mut self) {
        let s = self.s;
        let (na, nb) = (s.outputs_a(), s.outputs_b());
        let jl = s.inputs_a() * s.inputs_b() * self.block;
        let base_b = jl + s.inputs_a() * (na - 1);
        for v in &mut self.cur[jl..] {
            *v = 0;
        }
        let mut shift = 0;
        for xt in 0..s.inputs_a() {
            for yt in 0..s.inputs_b() {
                let (x, y) = (self.xs[xt], self.ys[yt]);
                let ia = &self.inv_a[self.sa[xt]];
                let ib = &self.inv_b[self.sb[yt]];
                let corner = self.entry(x, ia, y, ib, na - 1, nb - 1);
                shift += corner;
                for a in 0..na - 1 {
                    let d = self.entry(x, ia, y, ib, a, nb - 1) - corner;
                    self.cur[jl + xt * (na - 1) + a] += d;
                }
                for b in 0..nb - 1 {
                    let d = self.entry(x, ia, y, ib, na - 1, b) - corner;
                    self.cur[base_b + yt * (nb - 1) + b] += d;
                }
            }
        }
        let last = self.cur.len() - 1;
        self.cur[last] = self.bound - shift;
        match self.cur.cmp(&self.best) {
            Ordering::Greater => {
                self.best.clone_from(&self.cur);
                self.count = 1;
            }
            Ordering::Equal => self.count += 1,
            Ordering::Less => {}
        }
    }

    /// Step order: Alice row 0, then Bob inputs one by one, then remaining Alice rows.
    fn step(&mut self, depth: usize) {
        let (nx, ny) = (self.s.inputs_a(), self.s.inputs_b());
        if depth == 0 {
            for x in 0..nx {
                self.used_x[x] = true;
                self.xs[0] = x;
                for p in 0..self.inv_a.len() {
                    self.sa[0] = p;
                    self.step(1);
                }
                self.used_x[x] = false;
            }
        } else if depth <= ny {
            let yt = depth - 1;
            for y in 0..ny {
                if self.used_y[y] {
                    continue;
                }
                self.used_y[y] = true;
                self.ys[yt] = y;
                for p in 0..self.inv_b.len() {
                    self.sb[yt] = p;
                    self.write_block(0, yt);
                    if self.keep((yt + 1) * self.block) {
                        self.step(depth + 1);
                    }
                }
                self.used_y[y] = false;
            }
        } else if depth < ny + nx {
            let xt = depth - ny;
            for x in 0..nx {
                if self.used_x[x] {
                    continue;
                }
                self.used_x[x] = true;
                self.xs[xt] = x;
                for p in 0..self.inv_a.len() {
                    self.sa[xt] = p;
                    for yt in 0..ny {
                        self.write_block(xt, yt);
                    }
                    if self.keep((xt + 1) * ny * self.block) {
                        self.step(depth + 1);
                    }
                }
                self.used_x[x] = false;
            }
        } else {
            self.leaf();
        }
    }
}

fn transpose(t: &JointTable<i64>) -> JointTable<i64> {
    let s = t.scenario();
    JointTable::from_fn(s, |x, y, a, b| *t.get(y, x, b, a))
}

fn key(ineq: &Inequality) -> Vec<i64> {
    ineq.coeffs().iter().copied().chain(core::iter::once(ineq.bound())).collect()
}

/// Canonical representative (lexicographic maximum of `[α..., L]` over the
/// orbit) together with stabilizer and orbit sizes.
pub fn canonicalize(ineq: &Inequality) -> Canonical {
    let s = ineq.scenario();
    let inv_a: Vec<Vec<usize>> = permutations(s.outputs_a()).iter().map(|p| inverse(p)).collect();
    let inv_b: Vec<Vec<usize>> = permutations(s.outputs_b()).iter().map(|p| inverse(p)).collect();
    let base = expand_functional(&s, ineq.coeffs());
    let mut tables = vec![base];
    if s.is_symmetric() {
        let t = transpose(&tables[0]);
        tables.push(t);
    }
    let start = key(ineq);
    let mut best = start.clone();
    let mut count = 0u128;
    let mut first = true;
    for t in &tables {
        let mut search = Search {
            s,
            table: t,
            bound: ineq.bound(),
            inv_a: &inv_a,
            inv_b: &inv_b,
            block: (s.outputs_a() - 1) * (s.outputs_b() - 1),
            cur: start.clone(),
            best: core::mem::take(&mut best),
            count,
            xs: vec![0; s.inputs_a()],
            sa: vec![0; s.inputs_a()],
            ys: vec![0; s.inputs_b()],
            sb: vec![0; s.inputs_b()],
            used_x: vec![false; s.inputs_a()],
            used_y: vec![false; s.inputs_b()],
        };
        if first {
            // the identity leaf always matches the starting point
            search.count = 0;
            first = false;
        }
        search.step(0);
        best = search.best;
        count = search.count;
    }
    let bound = *best.last().expect("nonempty key");
    best.pop();
    let representative = Inequality::new(s, best, bound).expect("layout preserved");
    let order = group_order(&s);
    Canonical { representative, stabilizer: count, orbit_size: order / count }
}

/// The class representative of `ineq`.
pub fn canonical_form(ineq: &Inequality) -> Inequality {
    canonicalize(ineq).representative
}

/// Number of distinct images of `ineq` under the full group.
pub fn orbit_size(ineq: &Inequality) -> u128 {
    canonicalize(ineq).orbit_size
}

/// How a class entered a facet list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub enum Provenance {
    /// Found by enumerating the whole polytope.
    #[default]
    Direct,
    /// Harvested from slice `slice_id` cut by a lift of `source`.
    Slice { slice_id: usize, source: String },
    /// Supplied as a seed.
    Seed,
}

/// One symmetry class of facets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacetClass {
    pub representative: Inequality,
    pub orbit_size: u128,
    /// Whether every orbit member was present in the classified list.
    pub complete: bool,
    pub provenance: Provenance,
}

/// Partitions inequalities into symmetry classes, sorted by representative in
/// descending lexicographic order.
pub fn classify(facets: &[Inequality]) -> Result<Vec<FacetClass>, SymmetryError> {
    let Some(first) = facets.first() else {
        return Ok(Vec::new());
    };
    let s = first.scenario();
    if let Some(other) = facets.iter().find(|f| f.scenario() != s) {
        return Err(SymmetryError::MixedScenarios(s, other.scenario()));
    }
    let mut classes: HashMap<Inequality, (u128, HashSet<Inequality>)> = HashMap::new();
    for f in facets {
        let c = canonicalize(f);
        classes.entry(c.representative).or_insert_with(|| (c.orbit_size, HashSet::new())).1.insert(f.clone());
    }
    Ok(finish_classes(classes.into_iter().map(|(rep, (orbit, members))| (rep, orbit, members.len() as u128))))
}

/// Builds sorted classes from `(representative, orbit size, distinct members seen)`.
pub fn finish_classes(items: impl Iterator<Item = (Inequality, u128, u128)>) -> Vec<FacetClass> {
    let mut out: Vec<FacetClass> = items
        .map(|(representative, orbit_size, seen)| FacetClass {
            representative,
            orbit_size,
            complete: seen == orbit_size,
            provenance: Provenance::Direct,
        })
        .collect();
    out.sort_by(|a, b| b.representative.lex_cmp(&a.representative));
    out
}
