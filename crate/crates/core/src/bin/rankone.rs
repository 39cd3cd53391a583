use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::json;

use rankone::config::{parse_level_set, resolve_family, resolve_stages, SHORTHANDS};
use rankone::construction::{stages_to_json, ConstructionSpec};
use rankone::epsilon::{epsilon_csv, DEFAULT_EPS_CAP};
use rankone::statistics::{dyadic_schedule, srwm_construct, stats_series};
use rankone::suites::{run_suite, with_geometry, SuiteOptions, SuiteReport, Target, TheoremId, SCHEMA_VERSION};
use rankone::{Budgets, Correlator, Error, HistogramCache, KernelChoice};

#[derive(Parser)]
#[command(name = "rankone", version, about = "Exact computations on rank-one cutting-and-stacking transformations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stage table: stage, h_n, w_n, H_n, M_n.
    Geometry(GeometryArgs),
    /// mu(A ∩ T^k B) for |k| <= window.
    Correlate(CorrelateArgs),
    /// Weights, quotient and deficit series for n = 1..=window.
    Stats(StatsArgs),
    /// Run a theorem suite, or `all`.
    Theorem(TheoremArgs),
    /// Multiplicity table of signed digit patterns in a power family.
    Epsilon(EpsilonArgs),
    /// Adaptive construction with dyadic tolerances.
    Srwm(SrwmArgs),
    /// List the family shorthands.
    Families,
}

#[derive(Args, Clone)]
struct FamilyArgs {
    /// Shorthand, family name, JSON document or path to one.
    #[arg(long, conflicts_with = "stages")]
    family: Option<String>,
    /// Explicit stages `[[r, [s0, ..]], ..]`, inline or as a path.
    #[arg(long)]
    stages: Option<String>,
}

impl FamilyArgs {
    fn resolve(&self) -> anyhow::Result<Option<(String, ConstructionSpec)>> {
        Ok(match (&self.family, &self.stages) {
            (Some(f), _) => Some(resolve_family(f)?),
            (None, Some(s)) => Some(resolve_stages(s)?),
            (None, None) => None,
        })
    }

    fn require(&self) -> anyhow::Result<(String, ConstructionSpec)> {
        match self.resolve()? {
            Some(x) => Ok(x),
            None => Err(Error::Config("one of --family or --stages is required".into()).into()),
        }
    }
}

#[derive(Args, Clone)]
struct Common {
    /// Pair budget for the sweep kernel.
    #[arg(long, default_value_t = Budgets::default().pairs)]
    pair_budget: u64,
    /// Directory for cached histograms.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Output file (or directory for `theorem`); stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print JSON instead of the text summary.
    #[arg(long)]
    json: bool,
    /// Record per-check runtimes.
    #[arg(long)]
    timings: bool,
}

impl Common {
    fn budgets(&self) -> anyhow::Result<Budgets> {
        if self.pair_budget == 0 {
            return Err(Error::Config("--pair-budget must be positive".into()).into());
        }
        Ok(Budgets { pairs: self.pair_budget, ..Budgets::default() })
    }

    fn cache(&self) -> anyhow::Result<Option<HistogramCache>> {
        Ok(match &self.cache_dir {
            Some(d) => Some(HistogramCache::open(d)?),
            None => None,
        })
    }

    fn emit(&self, text: &str) -> anyhow::Result<()> {
        match &self.out {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                std::io::stdout().write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }
}

#[derive(Args)]
struct GeometryArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, default_value_t = 8)]
    depth: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kernel {
    Auto,
    PairSweep,
    StageConvolution,
}

#[derive(Args)]
struct CorrelateArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Level selector: I, J1, J2, C<c>, C<c>:h or C<c>[h ..].
    #[arg(long = "A", default_value = "I")]
    a: String,
    #[arg(long = "B", default_value = "I")]
    b: String,
    #[arg(long)]
    window: BigInt,
    /// Stages to build; grows automatically when absent.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, value_enum, default_value = "auto")]
    kernel: Kernel,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long = "A", default_value = "C1")]
    a: String,
    #[arg(long = "B", default_value = "C1")]
    b: String,
    /// Largest n.
    #[arg(long)]
    window: usize,
    #[arg(long)]
    depth: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct TheoremArgs {
    /// Suite id, or `all`.
    id: String,
    #[command(flatten)]
    family: FamilyArgs,
    /// Suite depth parameter; defaults per suite.
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_EPS_CAP)]
    eps_cap: usize,
    #[arg(long, default_value_t = 20)]
    m_cap: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct EpsilonArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Base column j.
    #[arg(long, default_value_t = 0)]
    base: usize,
    /// Top column m.
    #[arg(long)]
    depth: usize,
    #[arg(long, default_value_t = DEFAULT_EPS_CAP)]
    eps_cap: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SrwmArgs {
    /// Number of phases; tolerance of phase i is 1/2^i.
    #[arg(long, default_value_t = 1)]
    phases: usize,
    #[arg(long, default_value_t = 20)]
    m_cap: usize,
    #[command(flatten)]
    common: Common,
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(
            Error::Config(_)
            | Error::UnknownFamily(_)
            | Error::InvalidParameter { .. }
            | Error::InvalidStage { .. }
            | Error::InvalidLevel(_)
            | Error::SpacerBound { .. },
        ) => 2,
        Some(
            Error::SizeBudget { .. }
            | Error::PairBudget { .. }
            | Error::EnumerationCap { .. }
            | Error::PrefixTooShallow { .. }
            | Error::DepthExceeded { .. },
        ) => 3,
        _ => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cmd: Command) -> anyhow::Result<bool> {
    match cmd {
        Command::Geometry(a) => {
            let (_, spec) = a.family.require()?;
            a.common.emit(&spec.geometry(a.depth)?.to_csv())?;
        }
        Command::Correlate(a) => {
            let (_, spec) = a.family.require()?;
            let spec = cap_depth(spec, a.depth);
            let budgets = a.common.budgets()?;
            let cache = a.common.cache()?;
            let kernel = match a.kernel {
                Kernel::Auto => KernelChoice::Auto,
                Kernel::PairSweep => KernelChoice::PairSweep,
                Kernel::StageConvolution => KernelChoice::StageConvolution,
            };
            let csv = with_geometry(&spec, 1, |g| {
                let mut c = Correlator::new(g).with_budgets(budgets).with_kernel(kernel);
                if let Some(cache) = &cache {
                    c = c.with_cache(cache);
                }
                let (sa, sb) = (parse_level_set(&a.a, g)?, parse_level_set(&a.b, g)?);
                Ok(c.correlation_series(&sa, &sb, &a.window)?.to_csv())
            })?;
            a.common.emit(&csv)?;
        }
        Command::Stats(a) => {
            let (_, spec) = a.family.require()?;
            let spec = cap_depth(spec, a.depth);
            let budgets = a.common.budgets()?;
            let cache = a.common.cache()?;
            let csv = with_geometry(&spec, 1, |g| {
                let mut c = Correlator::new(g).with_budgets(budgets);
                if let Some(cache) = &cache {
                    c = c.with_cache(cache);
                }
                let (sa, sb) = (parse_level_set(&a.a, g)?, parse_level_set(&a.b, g)?);
                stats_series(&c, &sa, &sb, a.window)
            })?;
            a.common.emit(&csv)?;
        }
        Command::Theorem(a) => return theorem(a),
        Command::Epsilon(a) => {
            let (_, spec) = a.family.require()?;
            let g = spec.geometry(a.depth)?;
            a.common.emit(&epsilon_csv(&g, a.base, a.depth, a.eps_cap)?)?;
        }
        Command::Srwm(a) => {
            let res = srwm_construct(&dyadic_schedule(a.phases), a.m_cap, a.common.budgets()?)?;
            let phases: Vec<_> = res
                .phases
                .iter()
                .map(|p| {
                    json!({
                        "phase": p.phase,
                        "m": p.m,
                        "tolerance": rankone::arith::to_pq(&p.tolerance),
                        "worst_phi": rankone::arith::to_pq(&p.worst_phi),
                        "worst_phi_decimal": rankone::arith::to_decimal(&p.worst_phi, 12),
                    })
                })
                .collect();
            let doc = json!({ "schema_version": SCHEMA_VERSION, "phases": phases, "stages": stages_to_json(&res.stages) });
            a.common.emit(&(serde_json::to_string_pretty(&doc)? + "\n"))?;
        }
        Command::Families => {
            for (name, desc) in SHORTHANDS {
                println!("{name:16} {desc}");
            }
        }
    }
    Ok(true)
}

fn cap_depth(spec: ConstructionSpec, depth: Option<usize>) -> ConstructionSpec {
    match depth {
        Some(d) => spec.with_depth_hint(d),
        None => spec,
    }
}

fn theorem(a: TheoremArgs) -> anyhow::Result<bool> {
    let ids: Vec<TheoremId> = if a.id == "all" { TheoremId::ALL.to_vec() } else { vec![a.id.parse::<TheoremId>()?] };
    let given = a.family.resolve()?;
    if a.eps_cap == 0 {
        bail!(Error::Config("--eps-cap must be positive".into()));
    }
    let opts = SuiteOptions { budgets: a.common.budgets()?, eps_cap: a.eps_cap, m_cap: a.m_cap, timings: a.common.timings };
    let cache = a.common.cache()?;
    let mut reports: Vec<SuiteReport> = Vec::new();
    for id in ids {
        let targets = match &given {
            Some((label, spec)) => vec![Target::new(label.clone(), spec.clone(), a.depth.unwrap_or(id.defaults()[0].1))],
            None => Target::defaults(id)?
                .into_iter()
                .map(|mut t| {
                    if let Some(d) = a.depth {
                        t.depth = d;
                    }
                    t
                })
                .collect(),
        };
        for t in &targets {
            reports.push(run_suite(id, t, &opts, cache.as_ref())?);
        }
    }
    let passed = reports.iter().all(SuiteReport::passed);
    if let Some(dir) = &a.common.out {
        write_artifacts(dir, &reports)?;
    }
    let text = if a.common.json {
        let doc = if reports.len() == 1 {
            serde_json::to_value(&reports[0])?
        } else {
            json!({ "schema_version": SCHEMA_VERSION, "passed": passed, "suites": reports })
        };
        serde_json::to_string_pretty(&doc)? + "\n"
    } else {
        summary(&reports)
    };
    std::io::stdout().write_all(text.as_bytes())?;
    Ok(passed)
}

fn summary(reports: &[SuiteReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let ok = r.checks.iter().filter(|c| c.pass).count();
        let status = if r.passed() { "PASS" } else { "FAIL" };
        out.push_str(&format!("{status} {} [{}, depth {}]: {ok}/{} checks\n", r.theorem, r.family, r.depth, r.checks.len()));
        for c in r.checks.iter().filter(|c| !c.pass) {
            out.push_str(&format!("  failed: {} ({} vs {})\n", c.name, c.lhs, c.rhs));
        }
    }
    out
}

fn write_artifacts(dir: &Path, reports: &[SuiteReport]) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for r in reports {
        let stem = format!("{}-{}", r.theorem, sanitize(&r.family));
        fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(r)? + "\n")?;
        fs::write(dir.join(format!("{stem}.checks.csv")), r.checks_csv())?;
        if let Some(series) = &r.series {
            fs::write(dir.join(format!("{stem}.csv")), series)?;
        }
    }
    Ok(())
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}
