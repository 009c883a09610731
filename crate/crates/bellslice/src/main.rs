use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bellslice::analysis::{analyze_all, read_analysis, write_analysis, AliasTable, AnalysisOptions};
use bellslice::campaign::{classify_parallel, run_campaign, write_report, RunOptions};
use bellslice::clock::{seconds, Deadline};
use bellslice::formats::{
    parse_scenario, read_campaign_config, read_classes, read_named_inequalities, write_classes, write_inequalities,
    write_vertices, CampaignConfig, FormatError,
};
use bellslice::report;
use bellslice_core::exactgeom::{facet_enum, FacetEnumOptions, GeomError};
use bellslice_core::quantum::NpaLevel;
use bellslice_core::scenario::{enumerate_vertices, DEFAULT_VERTEX_CAP};
use bellslice_core::slicer::{lift_inequality, lifting_plans, seeded_search, Campaign, SearchOptions, SliceError};
use bellslice_core::{FacetClass, Inequality, Scenario};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bellslice", version, about = "Facets, symmetry classes and quantum bounds of bipartite Bell polytopes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory; without it the main result goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    #[value(name = "1")]
    One,
    #[value(name = "1ab")]
    OneAB,
    #[value(name = "2")]
    Two,
    None,
}

#[derive(Subcommand)]
enum Command {
    /// Local deterministic vertices in CG coordinates.
    Vertices {
        #[arg(long, value_parser = parse_scenario)]
        scenario: Scenario,
    },
    /// All facets and their classes.
    Enumerate {
        #[arg(long, value_parser = parse_scenario)]
        scenario: Scenario,
        /// Walk the facet graph modulo symmetry from these facets instead
        /// of running the plain enumeration; writes only the class file.
        #[arg(long)]
        seeds: Option<PathBuf>,
        /// With --seeds: classes with more tight vertices are not expanded.
        #[arg(long)]
        max_tight: Option<usize>,
        /// Wall-clock limit in seconds.
        #[arg(long)]
        time_budget: Option<f64>,
    },
    /// Slicing campaign seeded by known facets.
    Slice {
        #[arg(long, value_parser = parse_scenario)]
        scenario: Option<Scenario>,
        #[arg(long)]
        seeds: Option<PathBuf>,
        #[arg(long)]
        slices: Option<usize>,
        /// `key = value` campaign file; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        vertex_budget: Option<usize>,
        /// Per-slice limit in seconds; slow slices are skipped.
        #[arg(long)]
        slice_time: Option<f64>,
        /// Limit for the whole campaign in seconds.
        #[arg(long)]
        time_budget: Option<f64>,
        /// Slices solved concurrently between merges.
        #[arg(long)]
        batch: Option<usize>,
        #[arg(long)]
        no_reseed: bool,
    },
    /// Re-classify an inequality file.
    Classify {
        #[arg(long)]
        input: PathBuf,
    },
    /// All liftings of each input inequality into a larger scenario.
    Lift {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_parser = parse_scenario)]
        scenario: Scenario,
    },
    /// Seesaw, NPA, noise resistance, detection efficiency and concurrence.
    Analyze {
        /// Inequality or class file.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        dims: Vec<usize>,
        #[arg(long, value_enum, default_value = "2")]
        level: Level,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 1e-6)]
        npa_tol: f64,
        /// Extra names, lines `Name X,Y,A,B c1 ... cn L`.
        #[arg(long)]
        aliases: Option<PathBuf>,
    },
    /// Markdown report from a class file and an analysis table.
    Report {
        /// Class file.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        analysis: Option<PathBuf>,
        #[arg(long)]
        aliases: Option<PathBuf>,
    },
}

/// A computation stopped by a time budget; partial output was written.
#[derive(Debug, thiserror::Error)]
#[error("time budget exceeded{}", if *.0 { "; partial output written" } else { "" })]
struct BudgetExceeded(bool);

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

struct Output {
    dir: Option<PathBuf>,
    inputs: Vec<PathBuf>,
}

impl Output {
    /// Writes `name` under the output directory, or to stdout when `main`
    /// and no directory was given.
    fn emit(&self, name: &str, text: &str, main: bool) -> Result<()> {
        match &self.dir {
            Some(d) => {
                std::fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
                let p = d.join(name);
                if self.inputs.iter().any(|i| same_file(i, &p)) {
                    bail!("output {} would overwrite an input", p.display());
                }
                std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))
            }
            None if main => {
                print!("{text}");
                Ok(())
            }
            None => Ok(()),
        }
    }
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    }
}

fn vertices_of(s: &Scenario) -> Result<Vec<Vec<i64>>> {
    Ok(enumerate_vertices(s, DEFAULT_VERTEX_CAP)?)
}

fn with_partial_mark(text: String) -> String {
    let (head, rest) = text.split_once('\n').unwrap_or((&text, ""));
    format!("{head}\n# partial: time budget exceeded\n{rest}")
}

fn read_seeds(path: &Path) -> Result<Vec<Inequality>> {
    let (_, v) = read_named_inequalities(&read(path)?)?;
    Ok(v.into_iter().map(|(_, i)| i).collect())
}

fn sorted(mut hs: Vec<Inequality>) -> Vec<Inequality> {
    hs.sort_by(|a, b| b.lex_cmp(a));
    hs
}

fn enumerate(
    out: &Output,
    s: Scenario,
    seeds: Option<PathBuf>,
    max_tight: Option<usize>,
    time_budget: Option<f64>,
) -> Result<()> {
    let v = vertices_of(&s)?;
    let deadline = Deadline::after(seconds(time_budget));
    let header_only = || write_classes(&s, &[]);
    if let Some(p) = seeds {
        let seeds = read_seeds(&p)?;
        let opts = SearchOptions { max_tight: max_tight.unwrap_or(usize::MAX), ..Default::default() };
        return match seeded_search(s, &v, &seeds, &opts, &deadline) {
            Ok((classes, rep)) => {
                let mut text = write_classes(&s, &classes);
                if !rep.exhaustive() {
                    let (head, rest) = text.split_once('\n').expect("header line");
                    text = format!("{head}\n# unexpanded classes: {}\n{rest}", rep.skipped.len());
                }
                out.emit("classes.txt", &text, true)
            }
            Err(SliceError::Geom(GeomError::BudgetExhausted)) => {
                out.emit("classes.txt", &with_partial_mark(header_only()), true)?;
                Err(BudgetExceeded(true).into())
            }
            Err(e) => Err(e.into()),
        };
    }
    match facet_enum(&v, &[], &FacetEnumOptions::default(), &deadline) {
        Ok(hs) => {
            let ineqs = sorted(hs.into_iter().map(|h| Inequality::from_halfspace(s, h)).collect::<Result<_, _>>()?);
            let classes = classify_parallel(&ineqs);
            out.emit("facets.txt", &write_inequalities(&s, &ineqs), false)?;
            out.emit("classes.txt", &write_classes(&s, &classes), true)
        }
        Err(GeomError::BudgetExhausted) => {
            out.emit("classes.txt", &with_partial_mark(header_only()), true)?;
            Err(BudgetExceeded(true).into())
        }
        Err(e) => Err(e.into()),
    }
}

#[allow(clippy::too_many_arguments)]
fn slice(
    out: &Output,
    mut cfg: CampaignConfig,
    seeds: Option<PathBuf>,
    time_budget: Option<f64>,
    no_reseed: bool,
    config_dir: Option<&Path>,
) -> Result<()> {
    if no_reseed {
        cfg.reseed = false;
    }
    let Some(s) = cfg.scenario else { bail!(FormatError::Syntax { line: 0, msg: "no scenario given".into() }) };
    let seed_path = match (seeds, &cfg.seeds) {
        (Some(p), _) => p,
        (None, Some(p)) => config_dir.map(|d| d.join(p)).unwrap_or_else(|| PathBuf::from(p)),
        (None, None) => bail!(FormatError::Syntax { line: 0, msg: "no seed file given".into() }),
    };
    let seeds = read_seeds(&seed_path)?;
    let v = vertices_of(&s)?;
    let mut c = Campaign::new(s, v, &seeds)?;
    let opts = RunOptions {
        n_slices: cfg.n_slices,
        vertex_budget: cfg.vertex_budget,
        reseed: cfg.reseed,
        batch: cfg.batch,
        slice_time: seconds(cfg.time_budget_per_slice_secs),
        deadline: Deadline::after(seconds(time_budget)),
        ..Default::default()
    };
    let complete = run_campaign(&mut c, &opts);
    let classes: Vec<FacetClass> = c.classes();
    let mut text = write_classes(&s, &classes);
    let mut tsv = write_report(&c.report);
    if !complete {
        text = with_partial_mark(text);
        tsv = format!("# partial: time budget exceeded\n{tsv}");
    }
    out.emit("campaign.tsv", &tsv, false)?;
    out.emit("classes.txt", &text, true)?;
    if complete {
        Ok(())
    } else {
        Err(BudgetExceeded(true).into())
    }
}

fn aliases(path: Option<&Path>) -> Result<AliasTable> {
    let mut t = AliasTable::builtin();
    if let Some(p) = path {
        t.parse(&read(p)?)?;
    }
    Ok(t)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(j) = cli.common.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global()?;
    }
    let mut out = Output { dir: cli.common.out.clone(), inputs: Vec::new() };
    match cli.command {
        Command::Vertices { scenario } => {
            let v = vertices_of(&scenario)?;
            out.emit("vertices.txt", &write_vertices(&scenario, &v), true)
        }
        Command::Enumerate { scenario, seeds, max_tight, time_budget } => {
            out.inputs.extend(seeds.clone());
            enumerate(&out, scenario, seeds, max_tight, time_budget)
        }
        Command::Slice { scenario, seeds, slices, config, vertex_budget, slice_time, time_budget, batch, no_reseed } => {
            let mut cfg = match &config {
                Some(p) => read_campaign_config(&read(p)?)?,
                None => CampaignConfig::default(),
            };
            cfg.scenario = scenario.or(cfg.scenario);
            cfg.n_slices = slices.unwrap_or(cfg.n_slices);
            cfg.vertex_budget = vertex_budget.unwrap_or(cfg.vertex_budget);
            cfg.time_budget_per_slice_secs = slice_time.or(cfg.time_budget_per_slice_secs);
            cfg.batch = batch.unwrap_or(cfg.batch).max(1);
            out.inputs.extend(seeds.clone());
            out.inputs.extend(config.clone());
            slice(&out, cfg, seeds, time_budget, no_reseed, config.as_deref().and_then(Path::parent))
        }
        Command::Classify { input } => {
            out.inputs.push(input.clone());
            let (s, items) = read_named_inequalities(&read(&input)?)?;
            let ineqs: Vec<Inequality> = items.into_iter().map(|(_, i)| i).collect();
            out.emit("classes.txt", &write_classes(&s, &classify_parallel(&ineqs)), true)
        }
        Command::Lift { input, scenario } => {
            out.inputs.push(input.clone());
            let (from, items) = read_named_inequalities(&read(&input)?)?;
            let mut lifted = Vec::new();
            for (_, i) in &items {
                for p in lifting_plans(&from, &scenario)? {
                    let l = lift_inequality(i, &scenario, &p)?;
                    if !lifted.contains(&l) {
                        lifted.push(l);
                    }
                }
            }
            out.emit("lifted.txt", &write_inequalities(&scenario, &lifted), true)
        }
        Command::Analyze { input, dims, level, restarts, npa_tol, aliases: alias_path } => {
            out.inputs.push(input.clone());
            out.inputs.extend(alias_path.clone());
            if dims.is_empty() || dims.iter().any(|&d| !(1..=8).contains(&d)) {
                bail!(FormatError::Syntax { line: 0, msg: "--dims must list dimensions between 1 and 8".into() });
            }
            let mut names = aliases(alias_path.as_deref())?;
            let (_, items) = read_named_inequalities(&read(&input)?)?;
            let items: Vec<(String, Inequality)> =
                items.into_iter().map(|(n, i)| (names.name(&i).unwrap_or(n), i)).collect();
            let level = match level {
                Level::One => Some(NpaLevel::One),
                Level::OneAB => Some(NpaLevel::OneAB),
                Level::Two => Some(NpaLevel::Two),
                Level::None => None,
            };
            let o = AnalysisOptions { dims: dims.clone(), restarts, seed: cli.common.seed, level, npa_tol };
            let rows = analyze_all(&items, &o).into_iter().collect::<Result<Vec<_>, _>>()?;
            out.emit("analysis.tsv", &write_analysis(&rows, &dims, cli.common.seed, level), true)
        }
        Command::Report { input, analysis, aliases: alias_path } => {
            out.inputs.push(input.clone());
            out.inputs.extend(analysis.clone());
            out.inputs.extend(alias_path.clone());
            let mut names = aliases(alias_path.as_deref())?;
            let (s, classes) = read_classes(&read(&input)?)?;
            let tables = match &analysis {
                Some(p) => read_analysis(&read(p)?)?,
                None => Vec::new(),
            };
            out.emit("report.md", &report::write_report(&s, &classes, &mut names, &tables), true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()))
        .with_writer(std::io::stderr)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<BudgetExceeded>().is_some() {
                ExitCode::from(2)
            } else if e.downcast_ref::<FormatError>().is_some() {
                ExitCode::from(3)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
