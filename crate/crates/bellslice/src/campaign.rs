//! Parallel slicing campaigns and classification.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use bellslice_core::slicer::{solve_slice, Campaign, CampaignReport};
use bellslice_core::symmetry::{canonicalize, finish_classes};
use bellslice_core::{FacetClass, Inequality};
use rayon::prelude::*;

use crate::clock::Deadline;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub n_slices: usize,
    pub vertex_budget: usize,
    pub max_rays: usize,
    pub reseed: bool,
    /// Slices planned and solved together before merging.
    pub batch: usize,
    pub slice_time: Option<Duration>,
    pub deadline: Deadline,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            n_slices: 5,
            vertex_budget: 5000,
            max_rays: 5_000_000,
            reseed: true,
            batch: 1,
            slice_time: None,
            deadline: Deadline::never(),
        }
    }
}

/// Runs slices until `n_slices` are solved, no cut is left, or the overall
/// deadline passes. Slices of a batch run on the rayon pool and are merged
/// in planning order. Returns false when cut short by the deadline.
pub fn run_campaign(c: &mut Campaign, o: &RunOptions) -> bool {
    let mut solved = 0;
    while solved < o.n_slices {
        if o.deadline.expired() {
            return false;
        }
        let want = o.batch.max(1).min(o.n_slices - solved);
        let plan = c.plan(want, o.vertex_budget);
        if plan.is_empty() {
            break;
        }
        let vertices = c.vertices();
        let outcomes: Vec<_> = plan
            .par_iter()
            .map(|p| {
                let budget = o.deadline.child(o.slice_time);
                let t = Instant::now();
                tracing::debug!(slice = p.id, cut = p.spec.cut, retained = p.retained, "solving slice");
                let r = solve_slice(vertices, &p.spec, o.max_rays, &budget);
                (r, t.elapsed().as_secs_f64())
            })
            .collect();
        for (p, (r, secs)) in plan.iter().zip(outcomes) {
            if r.is_ok() {
                solved += 1;
            }
            let new = c.merge(p, r, Some(secs), o.reseed);
            tracing::info!(slice = p.id, new, total = c.class_count(), "merged slice");
        }
    }
    !o.deadline.expired() || solved >= o.n_slices
}

/// Per-slice TSV. Timings are the only nondeterministic column.
pub fn write_report(report: &CampaignReport) -> String {
    let mut out = String::from("id\tsource\tcut\tretained\tcandidates\tfacets\tnew_classes\tcumulative_classes\tstatus\tseconds\n");
    for r in &report.records {
        let secs = r.seconds.map(|s| format!("{s:.3}")).unwrap_or_default();
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.id,
            r.provenance,
            r.cut,
            r.retained,
            r.candidates,
            r.facets,
            r.new_classes,
            r.cumulative_classes,
            r.status,
            secs
        )
        .expect("write to string");
    }
    out
}

/// Same result as the core `classify`, canonicalizing on the rayon pool.
/// All inequalities must share a scenario.
pub fn classify_parallel(facets: &[Inequality]) -> Vec<FacetClass> {
    let canon: Vec<(Inequality, u128)> = facets
        .par_iter()
        .map(|f| {
            let c = canonicalize(f);
            (c.representative, c.orbit_size)
        })
        .collect();
    let mut map: std::collections::HashMap<Inequality, (u128, std::collections::HashSet<&Inequality>)> =
        std::collections::HashMap::new();
    for (f, (rep, orbit)) in facets.iter().zip(canon) {
        map.entry(rep).or_insert_with(|| (orbit, Default::default())).1.insert(f);
    }
    finish_classes(map.into_iter().map(|(rep, (orbit, seen))| (rep, orbit, seen.len() as u128)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use bellslice_core::exactgeom::facets;
    use bellslice_core::scenario::enumerate_vertices;
    use bellslice_core::symmetry::classify;
    use bellslice_core::Scenario;

    #[test]
    fn parallel_classification_matches_core() {
        let s = Scenario::new(3, 2, 2, 2).unwrap();
        let v = enumerate_vertices(&s, 1000).unwrap();
        let f: Vec<Inequality> = facets(&v).unwrap().into_iter().map(|h| Inequality::from_halfspace(s, h).unwrap()).collect();
        assert_eq!(classify_parallel(&f), classify(&f).unwrap());
    }
}
