//! Slicing a local polytope with lifted inequalities.
//!
//! A slice keeps the vertices with `A·x >= c` for a lifted inequality `A`
//! and solves the smaller polytope; facets that are not facets of the full
//! polytope are discarded. A cut at the local bound keeps only the face
//! saturated by `A`; such face slices are solved inside the face and every
//! ridge found there is rotated onto the neighbouring facet.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use hashbrown::{HashMap, HashSet};

use crate::budget::Budget;
use crate::exactgeom::{affine_rank, dd_facets, is_facet, ridges, rotate, GeomError, Halfspace, Inequality};
use crate::scenario::{contract_functional, expand_functional, JointTable, Scenario};
use crate::symmetry::{canonicalize, FacetClass, Provenance};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SliceError {
    #[error("target {to} does not dominate source {from}")]
    NonDominating { from: Scenario, to: Scenario },
    #[error("malformed lifting plan: {0}")]
    MalformedPlan(&'static str),
    #[error("vacuous slice: {retained} of {total} vertices retained")]
    Vacuous { retained: usize, total: usize },
    #[error("degenerate slice: retained vertices have affine rank {rank} < {dim}")]
    Degenerate { rank: usize, dim: usize },
    #[error("hyperplane has {got} coefficients, vertices have {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Which existing outcome a new outcome copies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Duplicate {
    /// The last outcome, whose CG columns are suppressed; the new CG columns are zero.
    Suppressed,
    /// Outcome 0.
    First,
}

/// How an inequality of a smaller scenario is embedded into a larger one.
///
/// Target input `x` either copies source input `alice_inputs[x]` or gets
/// zero coefficients (`None`). For a copied input, target outcome `a`
/// inherits the coefficients of source outcome `alice_outputs[x][a]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LiftingPlan {
    pub alice_inputs: Vec<Option<usize>>,
    pub alice_outputs: Vec<Vec<usize>>,
    pub bob_inputs: Vec<Option<usize>>,
    pub bob_outputs: Vec<Vec<usize>>,
}

fn outcome_map(from: usize, to: usize, d: Duplicate) -> Vec<usize> {
    let extra = match d {
        Duplicate::Suppressed => from - 1,
        Duplicate::First => 0,
    };
    (0..to).map(|a| if a < from { a } else { extra }).collect()
}

impl LiftingPlan {
    /// Identity embedding of inputs and outcomes; each input's new outcomes
    /// copy the outcome chosen by `alice_dup[x]` / `bob_dup[y]`.
    pub fn new(from: &Scenario, to: &Scenario, alice_dup: &[Duplicate], bob_dup: &[Duplicate]) -> Result<Self, SliceError> {
        if !to.dominates(from) {
            return Err(SliceError::NonDominating { from: *from, to: *to });
        }
        if alice_dup.len() != from.inputs_a() || bob_dup.len() != from.inputs_b() {
            return Err(SliceError::MalformedPlan("one duplication choice per source input"));
        }
        let side = |n_from: usize, n_to: usize, o_from: usize, o_to: usize, dup: &[Duplicate]| {
            let inputs: Vec<Option<usize>> = (0..n_to).map(|x| (x < n_from).then_some(x)).collect();
            let outputs = (0..n_to)
                .map(|x| if x < n_from { outcome_map(o_from, o_to, dup[x]) } else { (0..o_to).map(|_| 0).collect() })
                .collect();
            (inputs, outputs)
        };
        let (alice_inputs, alice_outputs) =
            side(from.inputs_a(), to.inputs_a(), from.outputs_a(), to.outputs_a(), alice_dup);
        let (bob_inputs, bob_outputs) = side(from.inputs_b(), to.inputs_b(), from.outputs_b(), to.outputs_b(), bob_dup);
        Ok(Self { alice_inputs, alice_outputs, bob_inputs, bob_outputs })
    }

    /// Inputs padded with zeros and every new outcome copying `dup`.
    pub fn uniform(from: &Scenario, to: &Scenario, dup: Duplicate) -> Result<Self, SliceError> {
        Self::new(from, to, &vec![dup; from.inputs_a()], &vec![dup; from.inputs_b()])
    }

    fn validate(&self, from: &Scenario, to: &Scenario) -> Result<(), SliceError> {
        if !to.dominates(from) {
            return Err(SliceError::NonDominating { from: *from, to: *to });
        }
        let side = |inputs: &[Option<usize>], outputs: &[Vec<usize>], nf: usize, nt: usize, of: usize, ot: usize| {
            if inputs.len() != nt || outputs.len() != nt {
                return Err(SliceError::MalformedPlan("plan length differs from target inputs"));
            }
            let mut used = vec![false; nf];
            for (x, src) in inputs.iter().enumerate() {
                let Some(sx) = *src else { continue };
                if sx >= nf || core::mem::replace(&mut used[sx], true) {
                    return Err(SliceError::MalformedPlan("source inputs must be used at most once"));
                }
                let m = &outputs[x];
                let mut hit = vec![false; of];
                if m.len() != ot || m.iter().any(|&a| a >= of) {
                    return Err(SliceError::MalformedPlan("outcome map out of range"));
                }
                m.iter().for_each(|&a| hit[a] = true);
                if hit.contains(&false) {
                    return Err(SliceError::MalformedPlan("every source outcome needs a target outcome"));
                }
            }
            if used.contains(&false) {
                return Err(SliceError::MalformedPlan("every source input must be embedded"));
            }
            Ok(())
        };
        side(&self.alice_inputs, &self.alice_outputs, from.inputs_a(), to.inputs_a(), from.outputs_a(), to.outputs_a())?;
        side(&self.bob_inputs, &self.bob_outputs, from.inputs_b(), to.inputs_b(), from.outputs_b(), to.outputs_b())
    }

    /// Short human-readable description, e.g. `in` or `out[S,S;F,S]`.
    pub fn describe(&self, from: &Scenario) -> String {
        let tag = |outputs: &[Vec<usize>], n: usize, o: usize| -> String {
            (0..n)
                .map(|x| {
                    let m = &outputs[x];
                    if m.len() == o {
                        "-"
                    } else if m[o] == o - 1 {
                        "S"
                    } else {
                        "F"
                    }
                })
                .collect::<Vec<_>>()
                .join(",")
        };
        let a = tag(&self.alice_outputs, from.inputs_a(), from.outputs_a());
        let b = tag(&self.bob_outputs, from.inputs_b(), from.outputs_b());
        format!("[{a};{b}]")
    }
}

/// Lifts `ineq` into `to` following `plan`. A facet stays a facet.
pub fn lift_inequality(ineq: &Inequality, to: &Scenario, plan: &LiftingPlan) -> Result<Inequality, SliceError> {
    let from = ineq.scenario();
    plan.validate(&from, to)?;
    let src = expand_functional(&from, ineq.coeffs());
    let table = JointTable::from_fn(*to, |x, y, a, b| match (plan.alice_inputs[x], plan.bob_inputs[y]) {
        (Some(sx), Some(sy)) => *src.get(sx, sy, plan.alice_outputs[x][a], plan.bob_outputs[y][b]),
        _ => 0,
    });
    let (coeffs, shift) = contract_functional(&table);
    Ok(Inequality::new(*to, coeffs, ineq.bound() - shift).expect("target layout"))
}

/// Lifting plans from `from` to `to` in campaign order: pure input lifting
/// when no outcome is added; otherwise all new outcomes duplicating the
/// suppressed outcome, then all duplicating outcome 0, then the mixed
/// per-input choices.
pub fn lifting_plans(from: &Scenario, to: &Scenario) -> Result<Vec<LiftingPlan>, SliceError> {
    if !to.dominates(from) {
        return Err(SliceError::NonDominating { from: *from, to: *to });
    }
    let grow_a = to.outputs_a() > from.outputs_a();
    let grow_b = to.outputs_b() > from.outputs_b();
    let na = if grow_a { from.inputs_a() } else { 0 };
    let nb = if grow_b { from.inputs_b() } else { 0 };
    let n = na + nb;
    if n == 0 {
        return Ok(vec![LiftingPlan::uniform(from, to, Duplicate::Suppressed)?]);
    }
    assert!(n < 24, "too many lifting patterns");
    let all = (1u32 << n) - 1;
    let mut masks = vec![0, all];
    masks.extend((1..all).filter(|m| *m != all));
    let mut out = Vec::new();
    for m in masks {
        let pick = |i: usize| if m >> i & 1 == 0 { Duplicate::Suppressed } else { Duplicate::First };
        let ad: Vec<Duplicate> = (0..from.inputs_a()).map(|x| if grow_a { pick(x) } else { Duplicate::Suppressed }).collect();
        let bd: Vec<Duplicate> =
            (0..from.inputs_b()).map(|y| if grow_b { pick(na + y) } else { Duplicate::Suppressed }).collect();
        out.push(LiftingPlan::new(from, to, &ad, &bd)?);
    }
    Ok(out)
}

/// Where a slice hyperplane came from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SliceProvenance {
    /// The seed class's representative as an inequality line.
    pub source: String,
    /// The source scenario.
    pub from: Option<Scenario>,
    pub plan: String,
}

impl fmt::Display for SliceProvenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.from {
            Some(s) => write!(f, "{s}{} {}", self.plan, self.source),
            None => write!(f, "{}", self.source),
        }
    }
}

/// A hyperplane `A` and cut bound `c`; the slice keeps `{x : A·x >= c}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceSpec {
    pub hyperplane: Inequality,
    pub cut: i64,
    pub provenance: SliceProvenance,
}

/// Indices of the vertices with `A·x >= c`.
pub fn retained(vertices: &[Vec<i64>], spec: &SliceSpec) -> Vec<usize> {
    (0..vertices.len()).filter(|&i| spec.hyperplane.value(&vertices[i]) >= spec.cut).collect()
}

/// Vertices kept by the slice. Fails when everything or nothing is kept, or
/// when the kept vertices are not full-dimensional.
pub fn slice(vertices: &[Vec<i64>], spec: &SliceSpec) -> Result<Vec<Vec<i64>>, SliceError> {
    let dim = spec.hyperplane.coeffs().len();
    if let Some(v) = vertices.first() {
        if v.len() != dim {
            return Err(SliceError::DimensionMismatch { got: dim, expected: v.len() });
        }
    }
    let keep = retained(vertices, spec);
    if keep.is_empty() || keep.len() == vertices.len() {
        return Err(SliceError::Vacuous { retained: keep.len(), total: vertices.len() });
    }
    let pts: Vec<Vec<i64>> = keep.iter().map(|&i| vertices[i].clone()).collect();
    let rank = affine_rank(&pts);
    if rank < dim {
        return Err(SliceError::Degenerate { rank, dim });
    }
    Ok(pts)
}

/// Keeps the candidates that are facets of the full polytope.
pub fn filter_artificial(candidates: &[Inequality], full_vertices: &[Vec<i64>], dim: usize) -> Vec<Inequality> {
    candidates.iter().filter(|c| is_facet(c.halfspace(), full_vertices, dim).is_ok()).cloned().collect()
}

/// Facets of the polytope that are found through one slice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceYield {
    pub retained: usize,
    pub candidates: usize,
    pub facets: Vec<Inequality>,
}

/// Solves one slice: full-dimensional slices by double description of the
/// kept vertices, face slices by ridges of the face and rotation.
pub fn solve_slice(full_vertices: &[Vec<i64>], spec: &SliceSpec, max_rays: usize, budget: &dyn Budget) -> Result<SliceYield, SliceError> {
    let s = spec.hyperplane.scenario();
    let dim = s.cg_dimension();
    let keep = retained(full_vertices, spec);
    let max = spec.hyperplane.local_bound(full_vertices);
    let is_face = max == Some(spec.cut) && keep.len() < full_vertices.len();
    let (candidates, retained_count) = if is_face {
        let h = spec.hyperplane.halfspace();
        if is_facet(h, full_vertices, dim).is_err() {
            let pts: Vec<Vec<i64>> = keep.iter().map(|&i| full_vertices[i].clone()).collect();
            return Err(SliceError::Degenerate { rank: affine_rank(&pts), dim });
        }
        let rs = ridges(full_vertices, h, max_rays, budget)?;
        let mut c: Vec<Halfspace> = rs.iter().filter_map(|r| rotate(full_vertices, h, r)).collect();
        c.push(h.clone());
        (c, keep.len())
    } else {
        let pts = slice(full_vertices, spec)?;
        (dd_facets(&pts, max_rays, budget)?, pts.len())
    };
    let mut uniq: HashSet<Halfspace> = HashSet::new();
    let ineqs: Vec<Inequality> = candidates
        .into_iter()
        .filter(|h| uniq.insert(h.clone()))
        .map(|h| Inequality::from_halfspace(s, h).expect("scenario layout"))
        .collect();
    let n = ineqs.len();
    let facets = filter_artificial(&ineqs, full_vertices, dim);
    Ok(SliceYield { retained: retained_count, candidates: n, facets })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceStatus {
    Solved,
    /// Skipped: the kept vertex set was already solved in an earlier slice.
    Duplicate,
    Vacuous,
    Degenerate,
    OverVertexBudget,
    BudgetExceeded,
    Failed,
}

impl fmt::Display for SliceStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SliceStatus::Solved => "solved",
            SliceStatus::Duplicate => "duplicate",
            SliceStatus::Vacuous => "vacuous",
            SliceStatus::Degenerate => "degenerate",
            SliceStatus::OverVertexBudget => "over-vertex-budget",
            SliceStatus::BudgetExceeded => "budget-exceeded",
            SliceStatus::Failed => "failed",
        };
        f.write_str(s)
    }
}

/// One line of a campaign report.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceRecord {
    pub id: usize,
    pub provenance: SliceProvenance,
    pub cut: i64,
    pub retained: usize,
    pub candidates: usize,
    pub facets: usize,
    pub new_classes: usize,
    pub cumulative_classes: usize,
    pub status: SliceStatus,
    pub seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CampaignReport {
    pub records: Vec<SliceRecord>,
}

impl CampaignReport {
    pub fn attempted(&self) -> usize {
        self.records.len()
    }

    pub fn kept(&self) -> usize {
        self.records.iter().filter(|r| r.status == SliceStatus::Solved).count()
    }

    /// Class count after each solved slice.
    pub fn class_curve(&self) -> Vec<usize> {
        self.records.iter().filter(|r| r.status == SliceStatus::Solved).map(|r| r.cumulative_classes).collect()
    }
}

/// Campaign parameters.
pub struct CampaignOptions<'a> {
    /// Number of slices to solve.
    pub n_slices: usize,
    /// Slices keeping more vertices than this are skipped; the bound
    /// schedule for a seed stops at the first such cut.
    pub vertex_budget: usize,
    /// Ray cap for each slice.
    pub max_rays: usize,
    /// Re-seed with classes found along the way (identity lifting).
    pub reseed: bool,
    /// Fresh budget for each slice.
    pub slice_budget: &'a dyn Fn() -> Box<dyn Budget>,
    /// Optional clock in seconds for per-slice timings.
    pub clock: Option<&'a dyn Fn() -> f64>,
}

fn unlimited() -> Box<dyn Budget> {
    Box::new(crate::budget::Unlimited)
}

impl Default for CampaignOptions<'_> {
    fn default() -> Self {
        Self {
            n_slices: 5,
            vertex_budget: 5000,
            max_rays: 5_000_000,
            reseed: true,
            slice_budget: &unlimited,
            clock: None,
        }
    }
}

/// A stream of cuts `L, L-1, ...` for one lifted seed.
struct Stream {
    hyperplane: Inequality,
    provenance: SliceProvenance,
    next_cut: i64,
    values: Vec<i64>,
    done: bool,
}

impl Stream {
    /// Next cut whose kept set is nonvacuous and within the vertex budget.
    fn next(&mut self, vertex_budget: usize) -> Option<(i64, usize)> {
        if self.done {
            return None;
        }
        let c = self.next_cut;
        self.next_cut -= 1;
        let kept = self.values.iter().filter(|&&v| v >= c).count();
        if kept >= self.values.len() || kept > vertex_budget {
            self.done = true;
            return None;
        }
        Some((c, kept))
    }
}

/// A slice chosen by a campaign, ready to be solved.
#[derive(Debug, Clone)]
pub struct PlannedSlice {
    pub id: usize,
    pub spec: SliceSpec,
    pub retained: usize,
}

/// State of a slicing campaign over one scenario: accumulated classes and
/// the round-robin of seed liftings.
pub struct Campaign {
    scenario: Scenario,
    vertices: Vec<Vec<i64>>,
    streams: Vec<Stream>,
    cursor: usize,
    classes: HashMap<Inequality, (FacetClass, HashSet<Inequality>)>,
    seen_slices: HashSet<Vec<usize>>,
    seeded: HashSet<Inequality>,
    next_id: usize,
    pub report: CampaignReport,
}

impl Campaign {
    /// Seeds must be facets of scenarios dominated by `s`.
    pub fn new(s: Scenario, vertices: Vec<Vec<i64>>, seeds: &[Inequality]) -> Result<Self, SliceError> {
        let mut c = Campaign {
            scenario: s,
            vertices,
            streams: Vec::new(),
            cursor: 0,
            classes: HashMap::new(),
            seen_slices: HashSet::new(),
            seeded: HashSet::new(),
            next_id: 0,
            report: CampaignReport::default(),
        };
        for seed in seeds {
            c.add_seed(seed)?;
        }
        Ok(c)
    }

    fn add_seed(&mut self, seed: &Inequality) -> Result<(), SliceError> {
        if !self.seeded.insert(seed.clone()) {
            return Ok(());
        }
        let from = seed.scenario();
        for plan in lifting_plans(&from, &self.scenario)? {
            let h = lift_inequality(seed, &self.scenario, &plan)?;
            let values: Vec<i64> = self.vertices.iter().map(|v| h.value(v)).collect();
            let top = values.iter().copied().max().unwrap_or(0);
            let provenance = SliceProvenance {
                source: format!("{seed}"),
                from: (from != self.scenario).then_some(from),
                plan: if from == self.scenario { String::new() } else { plan.describe(&from) },
            };
            self.streams.push(Stream { hyperplane: h, provenance, next_cut: top, values, done: false });
        }
        Ok(())
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn vertices(&self) -> &[Vec<i64>] {
        &self.vertices
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// Current classes sorted by representative, descending.
    pub fn classes(&self) -> Vec<FacetClass> {
        let mut out: Vec<FacetClass> = self
            .classes
            .values()
            .map(|(c, members)| FacetClass { complete: members.len() as u128 == c.orbit_size, ..c.clone() })
            .collect();
        out.sort_by(|a, b| b.representative.lex_cmp(&a.representative));
        out
    }

    /// Picks up to `n` new slices round-robin over the seed streams.
    /// Skipped cuts (duplicate kept sets, budget) are recorded in the report.
    pub fn plan(&mut self, n: usize, vertex_budget: usize) -> Vec<PlannedSlice> {
        let mut out = Vec::new();
        while out.len() < n {
            let live: Vec<usize> = (0..self.streams.len()).filter(|&i| !self.streams[i].done).collect();
            if live.is_empty() {
                break;
            }
            let i = *live.iter().find(|&&i| i >= self.cursor).unwrap_or(&live[0]);
            self.cursor = i + 1;
            let stream = &mut self.streams[i];
            let Some((cut, kept)) = stream.next(vertex_budget) else { continue };
            let key: Vec<usize> = (0..stream.values.len()).filter(|&k| stream.values[k] >= cut).collect();
            let spec = SliceSpec { hyperplane: stream.hyperplane.clone(), cut, provenance: stream.provenance.clone() };
            let id = self.next_id;
            self.next_id += 1;
            if !self.seen_slices.insert(key) {
                self.record(id, &spec, kept, 0, 0, 0, SliceStatus::Duplicate, None);
                continue;
            }
            out.push(PlannedSlice { id, spec, retained: kept });
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn record(
        &mut self,
        id: usize,
        spec: &SliceSpec,
        retained: usize,
        candidates: usize,
        facets: usize,
        new_classes: usize,
        status: SliceStatus,
        seconds: Option<f64>,
    ) {
        self.report.records.push(SliceRecord {
            id,
            provenance: spec.provenance.clone(),
            cut: spec.cut,
            retained,
            candidates,
            facets,
            new_classes,
            cumulative_classes: self.classes.len(),
            status,
            seconds,
        });
    }

    /// Merges the outcome of a planned slice. Returns the number of new classes.
    pub fn merge(&mut self, planned: &PlannedSlice, outcome: Result<SliceYield, SliceError>, seconds: Option<f64>, reseed: bool) -> usize {
        let y = match outcome {
            Ok(y) => y,
            Err(e) => {
                let status = match e {
                    SliceError::Vacuous { .. } => SliceStatus::Vacuous,
                    SliceError::Degenerate { .. } => SliceStatus::Degenerate,
                    SliceError::Geom(GeomError::BudgetExhausted) | SliceError::Geom(GeomError::TooManyFacets { .. }) => {
                        SliceStatus::BudgetExceeded
                    }
                    _ => SliceStatus::Failed,
                };
                self.record(planned.id, &planned.spec, planned.retained, 0, 0, 0, status, seconds);
                return 0;
            }
        };
        let source = format!("{}", planned.spec.provenance);
        let mut fresh = Vec::new();
        for f in &y.facets {
            let c = canonicalize(f);
            let entry = self.classes.entry(c.representative.clone()).or_insert_with(|| {
                fresh.push(c.representative.clone());
                (
                    FacetClass {
                        representative: c.representative.clone(),
                        orbit_size: c.orbit_size,
                        complete: false,
                        provenance: Provenance::Slice { slice_id: planned.id, source: source.clone() },
                    },
                    HashSet::new(),
                )
            });
            entry.1.insert(f.clone());
        }
        self.record(planned.id, &planned.spec, y.retained, y.candidates, y.facets.len(), fresh.len(), SliceStatus::Solved, seconds);
        if reseed {
            for r in &fresh {
                self.add_seed(r).expect("same-scenario seed");
            }
        }
        fresh.len()
    }

    /// Runs slices one at a time until `opts.n_slices` are solved or no cut is left.
    pub fn run(&mut self, opts: &CampaignOptions<'_>) {
        let mut solved = 0;
        while solved < opts.n_slices {
            let batch = self.plan(1, opts.vertex_budget);
            let Some(p) = batch.first() else { break };
            let t0 = opts.clock.map(|c| c());
            let budget = (opts.slice_budget)();
            let out = solve_slice(&self.vertices, &p.spec, opts.max_rays, budget.as_ref());
            let secs = opts.clock.zip(t0).map(|(c, t)| c() - t);
            if out.is_ok() {
                solved += 1;
            }
            self.merge(p, out, secs, opts.reseed);
        }
    }
}

/// Runs a campaign from seed classes and returns the discovered classes with
/// the per-slice report.
pub fn run_slicing_campaign(
    s: Scenario,
    vertices: Vec<Vec<i64>>,
    seed_classes: &[FacetClass],
    opts: &CampaignOptions<'_>,
) -> Result<(Vec<FacetClass>, CampaignReport), SliceError> {
    let seeds: Vec<Inequality> = seed_classes.iter().map(|c| c.representative.clone()).collect();
    let mut c = Campaign::new(s, vertices, &seeds)?;
    c.run(opts);
    Ok((c.classes(), c.report))
}

#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    /// Classes whose facets contain more vertices than this are kept but
    /// not expanded.
    pub max_tight: usize,
    pub ridge_max_rays: usize,
    pub max_classes: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { max_tight: usize::MAX, ridge_max_rays: 5_000_000, max_classes: 100_000 }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SearchReport {
    pub expanded: usize,
    pub ridges: usize,
    /// Representatives left unexpanded because of `max_tight`.
    pub skipped: Vec<Inequality>,
}

impl SearchReport {
    /// True when every class was expanded, so the class list is the full
    /// facet list up to symmetry.
    pub fn exhaustive(&self) -> bool {
        self.skipped.is_empty()
    }
}

/// Walks the facet graph of `vertices` modulo relabelings, starting from
/// every lifting of the seeds. Classes are expanded in order of increasing
/// tight-vertex count.
pub fn seeded_search(
    s: Scenario,
    vertices: &[Vec<i64>],
    seeds: &[Inequality],
    opts: &SearchOptions,
    budget: &dyn Budget,
) -> Result<(Vec<FacetClass>, SearchReport), SliceError> {
    let dim = s.cg_dimension();
    let mut reps: Vec<(FacetClass, usize)> = Vec::new();
    let mut known: HashSet<Inequality> = HashSet::new();
    let mut push = |reps: &mut Vec<(FacetClass, usize)>, f: &Inequality, provenance: Provenance| -> bool {
        let c = canonicalize(f);
        if !known.insert(c.representative.clone()) {
            return false;
        }
        let tight = c.representative.halfspace().tight_set(vertices).len();
        let class = FacetClass { representative: c.representative, orbit_size: c.orbit_size, complete: false, provenance };
        reps.push((class, tight));
        true
    };
    for seed in seeds {
        for plan in lifting_plans(&seed.scenario(), &s)? {
            let lifted = lift_inequality(seed, &s, &plan)?;
            if is_facet(lifted.halfspace(), vertices, dim).is_ok() {
                push(&mut reps, &lifted, Provenance::Seed);
            }
        }
    }
    let mut report = SearchReport::default();
    let mut done: Vec<bool> = vec![false; reps.len()];
    loop {
        done.resize(reps.len(), false);
        let next = (0..reps.len())
            .filter(|&i| !done[i] && reps[i].1 <= opts.max_tight)
            .min_by_key(|&i| (reps[i].1, i));
        let Some(i) = next else { break };
        done[i] = true;
        if budget.exhausted() {
            return Err(SliceError::Geom(GeomError::BudgetExhausted));
        }
        let f = reps[i].0.representative.halfspace().clone();
        let rs = ridges(vertices, &f, opts.ridge_max_rays, budget)?;
        report.expanded += 1;
        report.ridges += rs.len();
        for r in &rs {
            let Some(nb) = rotate(vertices, &f, r) else { continue };
            let ineq = Inequality::from_halfspace(s, nb).expect("rotation keeps the dimension");
            push(&mut reps, &ineq, Provenance::Direct);
            if reps.len() > opts.max_classes {
                return Err(SliceError::Geom(GeomError::TooManyFacets { limit: opts.max_classes }));
            }
        }
    }
    done.resize(reps.len(), false);
    report.skipped = (0..reps.len()).filter(|&i| !done[i]).map(|i| reps[i].0.representative.clone()).collect();
    let mut classes: Vec<FacetClass> = reps.into_iter().map(|(c, _)| c).collect();
    classes.sort_by(|a, b| b.representative.lex_cmp(&a.representative));
    Ok((classes, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactgeom::facets;
    use crate::scenario::enumerate_vertices;
    use crate::symmetry::classify;

    fn sc(x: usize, y: usize, a: usize, b: usize) -> Scenario {
        Scenario::new(x, y, a, b).unwrap()
    }

    fn chsh() -> Inequality {
        Inequality::new(sc(2, 2, 2, 2), vec![1, 1, 1, -1, -1, 0, -1, 0], 0).unwrap()
    }

    fn verts(s: Scenario) -> Vec<Vec<i64>> {
        enumerate_vertices(&s, 100_000).unwrap()
    }

    #[test]
    fn input_lifting_pads_with_zeros() {
        let to = sc(3, 3, 2, 2);
        let plan = LiftingPlan::uniform(&sc(2, 2, 2, 2), &to, Duplicate::Suppressed).unwrap();
        let l = lift_inequality(&chsh(), &to, &plan).unwrap();
        let lay = to.layout();
        assert_eq!(l.bound(), 0);
        assert_eq!(l.coeffs()[lay.joint(0, 0, 0, 0)], 1);
        assert_eq!(l.coeffs()[lay.joint(1, 1, 0, 0)], -1);
        assert_eq!(l.coeffs()[lay.joint(2, 0, 0, 0)], 0);
        assert_eq!(l.coeffs()[lay.alice(0, 0)], -1);
        assert_eq!(l.coeffs()[lay.bob(2, 0)], 0);
        assert_eq!(l.local_bound(&verts(to)), Some(0));
        assert!(is_facet(l.halfspace(), &verts(to), 15).is_ok());
    }

    #[test]
    fn output_lifting_keeps_facets() {
        let to = sc(2, 2, 3, 3);
        let v = verts(to);
        for plan in lifting_plans(&sc(2, 2, 2, 2), &to).unwrap() {
            let l = lift_inequality(&chsh(), &to, &plan).unwrap();
            assert!(is_facet(l.halfspace(), &v, to.cg_dimension()).is_ok(), "{}", plan.describe(&sc(2, 2, 2, 2)));
        }
        // duplicating the suppressed outcome leaves new CG columns at zero
        let plan = LiftingPlan::uniform(&sc(2, 2, 2, 2), &to, Duplicate::Suppressed).unwrap();
        let l = lift_inequality(&chsh(), &to, &plan).unwrap();
        let lay = to.layout();
        assert_eq!(l.coeffs()[lay.joint(0, 0, 1, 1)], 0);
        assert_eq!(l.coeffs()[lay.alice(0, 1)], 0);
        assert_eq!(l.coeffs()[lay.joint(1, 1, 0, 0)], -1);
    }

    #[test]
    fn plan_order_and_errors() {
        let plans = lifting_plans(&sc(2, 2, 2, 2), &sc(2, 2, 3, 3)).unwrap();
        assert_eq!(plans.len(), 16);
        assert_eq!(plans[0].describe(&sc(2, 2, 2, 2)), "[S,S;S,S]");
        assert_eq!(plans[1].describe(&sc(2, 2, 2, 2)), "[F,F;F,F]");
        assert_eq!(lifting_plans(&sc(2, 2, 2, 2), &sc(4, 4, 2, 2)).unwrap().len(), 1);
        assert!(matches!(lifting_plans(&sc(3, 2, 2, 2), &sc(2, 2, 2, 2)), Err(SliceError::NonDominating { .. })));
        let mut bad = plans[0].clone();
        bad.alice_inputs[1] = Some(0);
        assert!(matches!(
            lift_inequality(&chsh(), &sc(2, 2, 3, 3), &bad),
            Err(SliceError::MalformedPlan(_))
        ));
    }

    #[test]
    fn slice_examples() {
        let s = sc(2, 2, 2, 2);
        let v = verts(s);
        let spec = SliceSpec { hyperplane: chsh(), cut: 0, provenance: SliceProvenance::default() };
        assert_eq!(retained(&v, &spec).len(), 8);
        assert!(matches!(slice(&v, &spec), Err(SliceError::Degenerate { rank: 7, dim: 8 })));
        let zero = SliceSpec { hyperplane: Inequality::zero(s), cut: 0, provenance: SliceProvenance::default() };
        assert!(matches!(slice(&v, &zero), Err(SliceError::Vacuous { retained: 16, total: 16 })));
    }

    #[test]
    fn face_slice_of_chsh_finds_neighbours() {
        let s = sc(2, 2, 2, 2);
        let v = verts(s);
        let spec = SliceSpec { hyperplane: chsh(), cut: 0, provenance: SliceProvenance::default() };
        let y = solve_slice(&v, &spec, 100_000, &crate::budget::Unlimited).unwrap();
        let all = facets(&v).unwrap();
        assert!(y.facets.iter().all(|f| all.contains(f.halfspace())));
        assert!(y.facets.contains(&chsh()));
        let classes = classify(&y.facets).unwrap();
        assert_eq!(classes.len(), 2);
    }

    #[test]
    fn full_dimensional_slice_filters_cut() {
        let s = sc(3, 3, 2, 2);
        let v = verts(s);
        let i3322 = Inequality::new(s, vec![1, 1, 1, 1, 1, -1, 1, -1, 0, -1, 0, 0, -2, -1, 0], 0).unwrap();
        let spec = SliceSpec { hyperplane: i3322.clone(), cut: -1, provenance: SliceProvenance::default() };
        let pts = slice(&v, &spec).unwrap();
        assert!(pts.len() < v.len());
        let y = solve_slice(&v, &spec, 1_000_000, &crate::budget::Unlimited).unwrap();
        assert!(y.candidates > y.facets.len());
        let all = facets(&v).unwrap();
        assert!(y.facets.iter().all(|f| all.contains(f.halfspace())));
    }

    #[test]
    fn campaign_is_monotone_and_sound() {
        let s = sc(3, 3, 2, 2);
        let v = verts(s);
        let all = facets(&v).unwrap();
        let seed = classify(&[chsh()]).unwrap();
        let opts = CampaignOptions { n_slices: 5, ..Default::default() };
        let (classes, report) = run_slicing_campaign(s, v, &seed, &opts).unwrap();
        let curve = report.class_curve();
        assert!(curve.windows(2).all(|w| w[0] <= w[1]));
        assert!(classes.iter().all(|c| all.contains(c.representative.halfspace())));
    }
}
