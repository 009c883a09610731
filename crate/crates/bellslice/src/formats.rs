//! Plain-text file formats.
//!
//! Every file starts with a header naming its kind and scenario, e.g.
//! `#CG 2 2 2 2`. Later lines starting with `#` are comments.
//!
//! - vertex file `#CG X Y A B`: one vertex per line, CG coordinates.
//! - inequality file `#INEQ X Y A B`: coefficients then the bound `L`, for `α·v <= L`.
//! - class file `#CLASSES X Y A B`: class index, orbit size, then an inequality line.

use std::fmt::Write as _;
use std::str::FromStr;

use bellslice_core::{FacetClass, Inequality, Scenario};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("empty input")]
    Empty,
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, msg: msg.into() }
}

/// Parses `X,Y,A,B` (commas or whitespace).
pub fn parse_scenario(text: &str) -> Result<Scenario, String> {
    let parts: Vec<usize> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(usize::from_str)
        .collect::<Result<_, _>>()
        .map_err(|e| format!("scenario `{text}`: {e}"))?;
    let [x, y, a, b] = parts[..] else {
        return Err(format!("scenario `{text}`: expected four integers"));
    };
    Scenario::new(x, y, a, b).map_err(|e| e.to_string())
}

fn scenario_fields(s: &Scenario) -> String {
    format!("{} {} {} {}", s.inputs_a(), s.inputs_b(), s.outputs_a(), s.outputs_b())
}

/// Which file a header announces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileKind {
    Vertices,
    Inequalities,
    Classes,
}

impl FileKind {
    fn tag(self) -> &'static str {
        match self {
            FileKind::Vertices => "#CG",
            FileKind::Inequalities => "#INEQ",
            FileKind::Classes => "#CLASSES",
        }
    }
}

/// Numbered data lines after the header.
struct Body<'a> {
    kind: FileKind,
    scenario: Scenario,
    lines: Vec<(usize, &'a str)>,
}

fn parse_body(text: &str) -> Result<Body<'_>, FormatError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
    let (n, header) = lines.next().ok_or(FormatError::Empty)?;
    let (tag, rest) = header.split_once(char::is_whitespace).unwrap_or((header, ""));
    let kind = [FileKind::Vertices, FileKind::Inequalities, FileKind::Classes]
        .into_iter()
        .find(|k| k.tag() == tag)
        .ok_or_else(|| syntax(n, format!("unknown header `{tag}`")))?;
    let scenario = parse_scenario(rest).map_err(|e| syntax(n, e))?;
    let lines = lines.filter(|(_, l)| !l.starts_with('#')).collect();
    Ok(Body { kind, scenario, lines })
}

fn integers(n: usize, line: &str) -> Result<Vec<i64>, FormatError> {
    line.split_whitespace().map(|t| t.parse::<i64>().map_err(|e| syntax(n, format!("`{t}`: {e}")))).collect()
}

fn inequality_from(s: Scenario, n: usize, v: &[i64]) -> Result<Inequality, FormatError> {
    let dim = s.cg_dimension();
    if v.len() != dim + 1 {
        return Err(syntax(n, format!("expected {} coefficients and a bound, found {} numbers", dim, v.len())));
    }
    Inequality::new(s, v[..dim].to_vec(), v[dim]).map_err(|e| syntax(n, e.to_string()))
}

fn expect_kind(b: &Body<'_>, kind: FileKind) -> Result<(), FormatError> {
    if b.kind != kind {
        return Err(syntax(1, format!("expected a `{}` file, found `{}`", kind.tag(), b.kind.tag())));
    }
    Ok(())
}

pub fn write_vertices(s: &Scenario, vertices: &[Vec<i64>]) -> String {
    let mut out = format!("#CG {}\n", scenario_fields(s));
    for v in vertices {
        let line: Vec<String> = v.iter().map(i64::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_vertices(text: &str) -> Result<(Scenario, Vec<Vec<i64>>), FormatError> {
    let b = parse_body(text)?;
    expect_kind(&b, FileKind::Vertices)?;
    let dim = b.scenario.cg_dimension();
    let mut out = Vec::with_capacity(b.lines.len());
    for (n, l) in &b.lines {
        let v = integers(*n, l)?;
        if v.len() != dim {
            return Err(syntax(*n, format!("expected {dim} coordinates, found {}", v.len())));
        }
        out.push(v);
    }
    Ok((b.scenario, out))
}

pub fn write_inequalities(s: &Scenario, ineqs: &[Inequality]) -> String {
    let mut out = format!("#INEQ {}\n", scenario_fields(s));
    for i in ineqs {
        writeln!(out, "{i}").expect("write to string");
    }
    out
}

pub fn read_inequalities(text: &str) -> Result<(Scenario, Vec<Inequality>), FormatError> {
    let b = parse_body(text)?;
    expect_kind(&b, FileKind::Inequalities)?;
    let out = b.lines.iter().map(|(n, l)| inequality_from(b.scenario, *n, &integers(*n, l)?)).collect::<Result<_, _>>()?;
    Ok((b.scenario, out))
}

/// Class file body. Indices start at 1.
pub fn write_classes(s: &Scenario, classes: &[FacetClass]) -> String {
    let mut out = format!("#CLASSES {}\n", scenario_fields(s));
    for (k, c) in classes.iter().enumerate() {
        writeln!(out, "{} {} {}", k + 1, c.orbit_size, c.representative).expect("write to string");
    }
    out
}

/// A parsed class-file line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassLine {
    pub index: usize,
    pub orbit_size: u128,
    pub representative: Inequality,
}

pub fn read_classes(text: &str) -> Result<(Scenario, Vec<ClassLine>), FormatError> {
    let b = parse_body(text)?;
    expect_kind(&b, FileKind::Classes)?;
    let mut out = Vec::new();
    for (n, l) in &b.lines {
        let mut tokens = l.split_whitespace();
        let mut next = |what| tokens.next().ok_or_else(|| syntax(*n, format!("missing {what}")));
        let index = next("class index")?.parse().map_err(|e| syntax(*n, format!("class index: {e}")))?;
        let orbit_size = next("orbit size")?.parse().map_err(|e| syntax(*n, format!("orbit size: {e}")))?;
        let rest: Vec<&str> = tokens.collect();
        let representative = inequality_from(b.scenario, *n, &integers(*n, &rest.join(" "))?)?;
        out.push(ClassLine { index, orbit_size, representative });
    }
    Ok((b.scenario, out))
}

/// A list of inequalities with display names, read from either an
/// inequality file (names `#k`) or a class file (names `F_k`).
pub fn read_named_inequalities(text: &str) -> Result<(Scenario, Vec<(String, Inequality)>), FormatError> {
    let b = parse_body(text)?;
    match b.kind {
        FileKind::Inequalities => {
            let (s, v) = read_inequalities(text)?;
            Ok((s, v.into_iter().enumerate().map(|(k, i)| (format!("#{}", k + 1), i)).collect()))
        }
        FileKind::Classes => {
            let (s, v) = read_classes(text)?;
            Ok((s, v.into_iter().map(|c| (format!("F_{}", c.index), c.representative)).collect()))
        }
        FileKind::Vertices => Err(syntax(1, "expected an inequality or class file, found a vertex file")),
    }
}

/// Campaign configuration, `key = value` per line.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub scenario: Option<Scenario>,
    pub seeds: Option<String>,
    pub n_slices: usize,
    pub vertex_budget: usize,
    pub time_budget_per_slice_secs: Option<f64>,
    /// Slices solved concurrently between two merges. Does not depend on
    /// the worker count, so results do not either.
    pub batch: usize,
    pub reseed: bool,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            scenario: None,
            seeds: None,
            n_slices: 5,
            vertex_budget: 5000,
            time_budget_per_slice_secs: None,
            batch: 1,
            reseed: true,
        }
    }
}

pub fn read_campaign_config(text: &str) -> Result<CampaignConfig, FormatError> {
    let mut c = CampaignConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let l = raw.split('#').next().unwrap_or("").trim();
        if l.is_empty() {
            continue;
        }
        let (k, v) = l.split_once('=').ok_or_else(|| syntax(n, "expected `key = value`"))?;
        let (k, v) = (k.trim(), v.trim());
        let num = |v: &str| v.parse::<usize>().map_err(|e| syntax(n, format!("{k}: {e}")));
        match k {
            "scenario" => c.scenario = Some(parse_scenario(v).map_err(|e| syntax(n, e))?),
            "seeds" => c.seeds = Some(v.to_string()),
            "n_slices" => c.n_slices = num(v)?,
            "vertex_budget" => c.vertex_budget = num(v)?,
            "batch" => c.batch = num(v)?.max(1),
            "time_budget_per_slice_secs" => {
                let t: f64 = v.parse().map_err(|e| syntax(n, format!("{k}: {e}")))?;
                c.time_budget_per_slice_secs = (t > 0.0).then_some(t);
            }
            "reseed" => c.reseed = v.parse().map_err(|e| syntax(n, format!("{k}: {e}")))?,
            _ => return Err(syntax(n, format!("unknown key `{k}`"))),
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chsh() -> Inequality {
        Inequality::new(Scenario::new(2, 2, 2, 2).unwrap(), vec![1, 1, 1, -1, -1, 0, -1, 0], 0).unwrap()
    }

    #[test]
    fn scenario_parsing() {
        assert_eq!(parse_scenario("2,3,4,2").unwrap(), Scenario::new(2, 3, 4, 2).unwrap());
        assert_eq!(parse_scenario("2 3 4 2").unwrap(), Scenario::new(2, 3, 4, 2).unwrap());
        assert!(parse_scenario("2,2,2").is_err());
        assert!(parse_scenario("2,2,1,2").is_err());
        assert!(parse_scenario("a,2,2,2").is_err());
    }

    #[test]
    fn inequality_round_trip() {
        let s = chsh().scenario();
        let text = write_inequalities(&s, &[chsh()]);
        assert_eq!(text, "#INEQ 2 2 2 2\n1 1 1 -1 -1 0 -1 0 0\n");
        assert_eq!(read_inequalities(&text).unwrap(), (s, vec![chsh()]));
    }

    #[test]
    fn malformed_lines_report_their_number() {
        let e = read_inequalities("#INEQ 2 2 2 2\n# note\n1 1 1 -1 -1 0 -1 0\n").unwrap_err();
        assert!(matches!(e, FormatError::Syntax { line: 3, .. }), "{e}");
        assert!(read_vertices("#INEQ 2 2 2 2\n").is_err());
        assert!(read_vertices("").is_err());
        assert!(read_classes("#CLASSES 2 2 2 2\n1\n").is_err());
    }

    #[test]
    fn config_keys() {
        let c = read_campaign_config("scenario = 3,3,2,2\nseeds=chsh.txt # seed file\nn_slices = 7\ntime_budget_per_slice_secs = 2.5\n")
            .unwrap();
        assert_eq!(c.scenario, Some(Scenario::new(3, 3, 2, 2).unwrap()));
        assert_eq!(c.seeds.as_deref(), Some("chsh.txt"));
        assert_eq!(c.n_slices, 7);
        assert_eq!(c.vertex_budget, 5000);
        assert_eq!(c.time_budget_per_slice_secs, Some(2.5));
        assert!(read_campaign_config("bogus = 1").is_err());
    }
}
