//! Class names and analysis tables.

use std::collections::HashMap;
use std::fmt::Write as _;

use bellslice_core::quantum::{analyze, AnalysisRow, NpaLevel, QuantumError, SeesawOptions};
use bellslice_core::slicer::{lift_inequality, lifting_plans};
use bellslice_core::symmetry::canonical_form;
use bellslice_core::{Inequality, Scenario};
use rayon::prelude::*;

use crate::formats::{parse_scenario, FormatError};

fn ineq(s: (usize, usize, usize, usize), coeffs: &[i64], bound: i64) -> Inequality {
    Inequality::new(Scenario::new(s.0, s.1, s.2, s.3).expect("valid scenario"), coeffs.to_vec(), bound).expect("layout")
}

pub fn chsh() -> Inequality {
    ineq((2, 2, 2, 2), &[1, 1, 1, -1, -1, 0, -1, 0], 0)
}

pub fn positivity() -> Inequality {
    ineq((2, 2, 2, 2), &[-1, 0, 0, 0, 0, 0, 0, 0], 0)
}

pub fn i3322() -> Inequality {
    ineq((3, 3, 2, 2), &[1, 1, 1, 1, 1, -1, 1, -1, 0, -1, 0, 0, -2, -1, 0], 0)
}

pub fn cglmp() -> Inequality {
    ineq((2, 2, 3, 3), &[1, 1, 1, 0, 1, 0, 1, 1, 1, 1, 0, 1, -1, -1, -1, 0, -1, -1, 0, 0, -1, -1, 0, 0], 0)
}

pub fn i2244_9() -> Inequality {
    ineq(
        (2, 2, 4, 4),
        &[
            2, 2, 2, 2, 2, 1, 2, 1, 1, 2, 1, 0, 2, 1, 1, 2, 2, 1, 2, 2, 2, 1, 1, 2, 0, 1, 1, -2, -2, -1, -2, -1, 0, -1, 0, 0,
            -2, -2, -2, 0, 0, 0, -2, -2, -2, 0, 0, 0,
        ],
        0,
    )
}

/// Literature names for classes, matched on canonical forms. An entry also
/// names the lifts of its inequality into larger scenarios.
#[derive(Debug, Clone, Default)]
pub struct AliasTable {
    entries: Vec<(String, Inequality)>,
    cache: HashMap<Scenario, HashMap<Inequality, String>>,
}

impl AliasTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Positivity, CHSH, I3322, CGLMP (named I2233) and I2244^9.
    pub fn builtin() -> Self {
        let mut t = Self::new();
        for (n, i) in
            [("Positivity", positivity()), ("CHSH", chsh()), ("I3322", i3322()), ("I2233", cglmp()), ("I2244^9", i2244_9())]
        {
            t.insert(n, i);
        }
        t
    }

    /// Later entries do not override earlier ones for the same class.
    pub fn insert(&mut self, name: &str, ineq: Inequality) {
        self.entries.push((name.to_string(), canonical_form(&ineq)));
        self.cache.clear();
    }

    /// Lines `Name X,Y,A,B c1 ... cn L`; `#` starts a comment.
    pub fn parse(&mut self, text: &str) -> Result<(), FormatError> {
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let l = raw.split('#').next().unwrap_or("").trim();
            if l.is_empty() {
                continue;
            }
            let err = |msg: String| FormatError::Syntax { line: n, msg };
            let mut t = l.split_whitespace();
            let name = t.next().expect("nonempty line");
            let s = parse_scenario(t.next().ok_or_else(|| err("missing scenario".into()))?).map_err(err)?;
            let v: Vec<i64> = t.map(|x| x.parse::<i64>().map_err(|e| err(format!("`{x}`: {e}")))).collect::<Result<_, _>>()?;
            let dim = s.cg_dimension();
            if v.len() != dim + 1 {
                return Err(err(format!("expected {} coefficients and a bound, found {} numbers", dim, v.len())));
            }
            let i = Inequality::new(s, v[..dim].to_vec(), v[dim]).map_err(|e| err(e.to_string()))?;
            self.insert(name, i);
        }
        Ok(())
    }

    fn table(&mut self, s: Scenario) -> &HashMap<Inequality, String> {
        let entries = &self.entries;
        self.cache.entry(s).or_insert_with(|| {
            let mut m = HashMap::new();
            for (name, i) in entries {
                let from = i.scenario();
                if from == s {
                    m.entry(i.clone()).or_insert_with(|| name.clone());
                    continue;
                }
                let Ok(plans) = lifting_plans(&from, &s) else { continue };
                for p in plans {
                    let lifted = lift_inequality(i, &s, &p).expect("plan for this pair");
                    m.entry(canonical_form(&lifted)).or_insert_with(|| format!("{name} (lifted)"));
                }
            }
            m
        })
    }

    /// Name of the class of `ineq`, if listed.
    pub fn name(&mut self, ineq: &Inequality) -> Option<String> {
        let c = canonical_form(ineq);
        self.table(ineq.scenario()).get(&c).cloned()
    }
}

/// Analysis settings shared by every row.
#[derive(Debug, Clone)]
pub struct AnalysisOptions {
    pub dims: Vec<usize>,
    pub restarts: usize,
    pub seed: u64,
    pub level: Option<NpaLevel>,
    pub npa_tol: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions { dims: vec![2, 3, 4], restarts: 20, seed: 0, level: Some(NpaLevel::Two), npa_tol: 1e-6 }
    }
}

/// Seed of the `k`-th task.
pub fn task_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_add((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Analyzes every inequality on the rayon pool; rows stay in input order.
pub fn analyze_all(items: &[(String, Inequality)], o: &AnalysisOptions) -> Vec<Result<AnalysisRow, QuantumError>> {
    items
        .par_iter()
        .enumerate()
        .map(|(k, (name, i))| {
            let opts = SeesawOptions { restarts: o.restarts, seed: task_seed(o.seed, k), ..Default::default() };
            tracing::info!(name = name.as_str(), "analyzing");
            analyze(name, i, &o.dims, &opts, o.level, o.npa_tol)
        })
        .collect()
}

pub const COLUMNS: &str = "Name\tScenario\tL\tQ\tQ_NPA\tλ\tη_min\tC";

fn four(v: f64) -> String {
    // avoid printing -0.0000
    let r = (v * 1e4).round() / 1e4;
    format!("{:.4}", if r == 0.0 { 0.0 } else { r })
}

/// One table per dimension in `dims`. Values are rounded to 4 decimals;
/// `-` marks λ and η_min of rows without violation, and C is left blank
/// for d > 2.
pub fn write_analysis(rows: &[AnalysisRow], dims: &[usize], seed: u64, level: Option<NpaLevel>) -> String {
    let level = match level {
        None => "none",
        Some(NpaLevel::One) => "1",
        Some(NpaLevel::OneAB) => "1ab",
        Some(NpaLevel::Two) => "2",
    };
    let mut dims = dims.to_vec();
    dims.sort_unstable();
    dims.dedup();
    let mut out = format!("# seed {seed} npa-level {level}\n");
    for d in dims {
        writeln!(out, "# d={d}").expect("write to string");
        writeln!(out, "{COLUMNS}").expect("write to string");
        for r in rows {
            let Some(f) = r.dims.iter().find(|f| f.d == d) else { continue };
            let npa = r.npa.map(four).unwrap_or_default();
            let (lambda, eta) = if f.violated { (four(f.lambda), four(f.eta)) } else { ("-".into(), "-".into()) };
            let c = f.concurrence.map(four).unwrap_or_default();
            writeln!(out, "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}", r.name, r.scenario, r.local_bound, four(f.q), npa, lambda, eta, c)
                .expect("write to string");
        }
    }
    out
}

/// Rows of one dimension's table, each split into its 8 fields.
pub type AnalysisBlock = (usize, Vec<Vec<String>>);

pub fn read_analysis(text: &str) -> Result<Vec<AnalysisBlock>, FormatError> {
    let mut out: Vec<AnalysisBlock> = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let n = i + 1;
        if let Some(d) = l.strip_prefix("# d=") {
            let d = d.trim().parse().map_err(|e| FormatError::Syntax { line: n, msg: format!("dimension: {e}") })?;
            out.push((d, Vec::new()));
        } else if l.starts_with('#') || l == COLUMNS || l.trim().is_empty() {
            continue;
        } else {
            let fields: Vec<String> = l.split('\t').map(str::to_string).collect();
            if fields.len() != 8 {
                return Err(FormatError::Syntax { line: n, msg: format!("expected 8 columns, found {}", fields.len()) });
            }
            let block = out.last_mut().ok_or(FormatError::Syntax { line: n, msg: "row before `# d=` line".into() })?;
            block.1.push(fields);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use bellslice_core::scenario::enumerate_vertices;
    use bellslice_core::exactgeom::is_facet;
    use bellslice_core::symmetry::apply_symmetry;
    use bellslice_core::SymmetryElement;

    #[test]
    fn builtins_are_facets() {
        for i in [positivity(), chsh(), i3322(), cglmp(), i2244_9()] {
            let s = i.scenario();
            let v = enumerate_vertices(&s, 1 << 20).unwrap();
            assert_eq!(i.local_bound(&v), Some(i.bound()));
            assert!(is_facet(i.halfspace(), &v, s.cg_dimension()).is_ok(), "{s}");
        }
    }

    #[test]
    fn names_follow_relabelings_and_lifts() {
        let mut t = AliasTable::builtin();
        let g = SymmetryElement::party_swap(&chsh().scenario()).unwrap();
        assert_eq!(t.name(&apply_symmetry(&chsh(), &g).unwrap()).as_deref(), Some("CHSH"));
        assert_eq!(t.name(&i3322()), Some("I3322".to_string()));
        assert_eq!(t.name(&Inequality::zero(chsh().scenario())), None);
        let s = Scenario::new(3, 3, 2, 2).unwrap();
        let lifted = lift_inequality(&chsh(), &s, &lifting_plans(&chsh().scenario(), &s).unwrap()[0]).unwrap();
        assert_eq!(t.name(&lifted).as_deref(), Some("CHSH (lifted)"));
        t.parse("Mine 2,2,2,2 0 0 0 0 -1 0 0 0 0 # a positivity facet\n").unwrap();
        assert_eq!(t.name(&positivity()).as_deref(), Some("Positivity"));
        assert!(t.parse("Bad 2,2,2,2 1 2").is_err());
    }

    #[test]
    fn rounding() {
        assert_eq!(four(-0.00001), "0.0000");
        assert_eq!(four(0.20710678), "0.2071");
        assert_eq!(four(1.0), "1.0000");
    }
}
