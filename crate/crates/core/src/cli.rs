//! Command-line front end.
//!
//! Exit codes: 0 pass, 1 fail or numerical error, 2 config or parse error,
//! 3 inconclusive.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::dnsystem::{
    default_sphere, default_x_samples, lattice_samples, library, schema::load_system, solve_dn_numbers, DnSystem,
    OrderMatrix,
};
use crate::error::{Error, Result};
use crate::harness::{
    apriori_check, continuity_check, fredholm_check, regularity_check, AprioriOptions, RegularityOptions,
    DEFAULT_GRIDS,
};
use crate::hspace::{hnorm, io::read_field, vector_hnorm, Grid};
use crate::interp::verify_prop1;
use crate::report::{Report, Verdict};
use crate::roparam::{RoParam, RoParamSpec};

#[derive(Debug, Parser)]
#[command(name = "hormander", version, about = "Spectral checks for DN-elliptic systems in Hormander spaces on the torus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the JSON report(s) to this path.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Grid size N per axis; repeat for a refinement sequence.
    #[arg(long = "grid")]
    pub grids: Vec<usize>,
    /// Weight parameter KIND:ARGS (power:S, powerlog:S,R, powersinlog:S,DELTA); repeatable.
    #[arg(long = "phi")]
    pub phis: Vec<String>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for DN numbers of an order matrix.
    DnNumbers {
        /// System JSON file (or lib:NAME[:DIM]).
        system: Option<String>,
        /// Order matrix as JSON, `null` for zero blocks, e.g. "[[2,1],[1,0]]".
        #[arg(long)]
        orders: Option<String>,
    },
    /// Ellipticity margin of the principal symbol on the unit sphere.
    CheckElliptic {
        system: String,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Lower bound of |det A(x, xi)| / <xi>^q away from the origin.
    CheckConditionB {
        system: String,
        #[arg(long, default_value_t = 1.0)]
        c2: f64,
        /// Lattice size for the xi samples.
        #[arg(long, default_value_t = 32)]
        grid: usize,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// H^phi norms of a stored field.
    Norm {
        field: PathBuf,
        #[arg(long = "phi")]
        phis: Vec<String>,
    },
    /// A priori estimate with the parametrix constant.
    Apriori {
        system: String,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
        /// Parametrix cutoff radius (default: scanned).
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Regularity lifting, global and localized.
    Regularity {
        system: String,
        #[command(flatten)]
        common: Common,
        /// Project the data onto the range instead of reporting it unsolvable.
        #[arg(long)]
        project: bool,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        /// Skip the cutoff-localized variant.
        #[arg(long)]
        global_only: bool,
    },
    /// Continuity of derivatives up to order lambda of one solution component.
    Continuity {
        system: String,
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        lambda: u32,
        #[arg(long, default_value_t = 0)]
        component: usize,
    },
    /// Kernel, cokernel, index, solvability and projectors.
    Fredholm {
        system: String,
        #[command(flatten)]
        common: Common,
    },
    /// Interpolation norm equality for the Sobolev pair (s0, s1).
    InterpVerify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        s0: f64,
        #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
        s1: f64,
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
}

/// Parse a system argument: a JSON path or `lib:NAME[:DIM]`.
pub fn resolve_system(arg: &str) -> Result<DnSystem> {
    if let Some(rest) = arg.strip_prefix("lib:") {
        let (name, dim) = match rest.split_once(':') {
            Some((n, d)) => (
                n,
                d.parse::<usize>()
                    .map_err(|_| Error::Config(format!("bad dimension in {arg:?}")))?,
            ),
            None => (rest, 2),
        };
        return library::by_name(name, dim).unwrap_or_else(|| Err(Error::Config(format!("unknown library system {name:?}"))));
    }
    load_system(Path::new(arg))
}

fn parse_phis(specs: &[String]) -> Result<Vec<RoParam>> {
    if specs.is_empty() {
        return Ok(vec![RoParam::power(0.0)]);
    }
    specs.iter().map(|s| Ok(s.parse::<RoParamSpec>()?.build())).collect()
}

fn grid_sizes(common: &Common) -> Vec<usize> {
    if common.grids.is_empty() {
        DEFAULT_GRIDS.to_vec()
    } else {
        common.grids.clone()
    }
}

fn parse_orders(text: &str) -> Result<OrderMatrix> {
    let m: OrderMatrix = serde_json::from_str(text)?;
    Ok(m)
}

/// Run one command and return its reports.
pub fn execute(command: &Command) -> Result<Vec<Report>> {
    match command {
        Command::DnNumbers { system, orders } => {
            let om = match (system, orders) {
                (_, Some(o)) => parse_orders(o)?,
                (Some(s), None) => resolve_system(s)?.order_matrix(),
                (None, None) => return Err(Error::Config("pass a system file or --orders".into())),
            };
            let dn = solve_dn_numbers(&om)?;
            let mut r = Report::new("dn-numbers").with_config(serde_json::json!({
                "orders": om,
                "l": dn.l,
                "m": dn.m,
            }));
            r.constant("q", dn.q());
            r.check(
                "condition_i",
                "dnsystem: ord A_jk <= l_j + m_k with l_1 = 0",
                0.0,
                0.0,
                Verdict::from_bool(dn.satisfies(&om)),
            );
            Ok(vec![r])
        }
        Command::CheckElliptic { system, tolerance } => {
            let sys = resolve_system(system)?.with_computed_dn_if_missing()?;
            let tol = tolerance.unwrap_or(crate::dnsystem::MARGIN_TOL);
            Ok(vec![sys.ellipticity_margin_tol(&default_x_samples(&sys), &default_sphere(sys.dim()), tol)?])
        }
        Command::CheckConditionB { system, c2, grid, tolerance } => {
            let sys = resolve_system(system)?.with_computed_dn_if_missing()?;
            let tol = tolerance.unwrap_or(crate::dnsystem::MARGIN_TOL);
            let g = Grid::new(sys.dim(), *grid)?;
            Ok(vec![sys.condition_b_margin_tol(*c2, &default_x_samples(&sys), &lattice_samples(g), tol)?])
        }
        Command::Norm { field, phis } => {
            let u = read_field(field)?;
            let mut out = Vec::new();
            for phi in parse_phis(phis)? {
                let mut r = Report::new("norm").with_config(serde_json::json!({
                    "field": field.display().to_string(),
                    "phi": phi.label(),
                    "p": u.p(),
                }));
                r.grid_sizes.push(u.grid().size());
                for (k, c) in u.components().iter().enumerate() {
                    r.constant(format!("norm.{k}"), hnorm(c, &phi)?);
                }
                r.constant("norm", vector_hnorm(&u, &vec![phi.clone(); u.p()])?);
                out.push(r);
            }
            Ok(out)
        }
        Command::Apriori { system, common, sigma, radius } => {
            let sys = resolve_system(system)?.with_computed_dn_if_missing()?;
            let opts = AprioriOptions {
                sigma: *sigma,
                grids: grid_sizes(common),
                trials: common.trials,
                seed: common.seed,
                radius: *radius,
            };
            parse_phis(&common.phis)?.iter().map(|phi| apriori_check(&sys, phi, &opts)).collect()
        }
        Command::Regularity { system, common, project, eps, global_only } => {
            let sys = resolve_system(system)?.with_computed_dn_if_missing()?;
            let opts = RegularityOptions {
                grids: grid_sizes(common),
                eps: *eps,
                seed: common.seed,
                project: *project,
                localized: !global_only,
                ..RegularityOptions::default()
            };
            parse_phis(&common.phis)?.iter().map(|phi| regularity_check(&sys, phi, &opts)).collect()
        }
        Command::Continuity { system, common, lambda, component } => {
            let sys = resolve_system(system)?.with_computed_dn_if_missing()?;
            let grids = grid_sizes(common);
            parse_phis(&common.phis)?
                .iter()
                .map(|phi| continuity_check(&sys, phi, *lambda, *component, &grids, common.seed))
                .collect()
        }
        Command::Fredholm { system, common } => {
            let sys = resolve_system(system)?.with_computed_dn_if_missing()?;
            let grids = grid_sizes(common);
            let battery = parse_phis(&common.phis)?;
            let mut out = Vec::new();
            for n in grids {
                let (analysis, mut r) = fredholm_check(&sys, &battery, Grid::new(sys.dim(), n)?, common.trials, common.seed)?;
                r.constant("dim_N", analysis.dims.0 as f64);
                r.constant("dim_Nplus", analysis.dims.1 as f64);
                r.constant("index", analysis.index as f64);
                out.push(r);
            }
            Ok(out)
        }
        Command::InterpVerify { common, s0, s1, dim } => {
            let grids = grid_sizes(common)
                .into_iter()
                .map(|n| Grid::new(*dim, n))
                .collect::<Result<Vec<_>>>()?;
            parse_phis(&common.phis)?
                .iter()
                .map(|phi| verify_prop1(phi, *s0, *s1, &grids, common.trials, common.seed))
                .collect()
        }
    }
}

impl DnSystem {
    fn with_computed_dn_if_missing(self) -> Result<DnSystem> {
        if self.dn().is_some() {
            Ok(self)
        } else {
            self.with_computed_dn()
        }
    }
}

/// Human-readable summary; norms and constants in scientific notation with
/// 15 significant digits.
pub fn summary(report: &Report) -> String {
    let mut s = format!("{}: {}\n", report.theorem, verdict_word(report.verdict));
    if let Some(obj) = report.config.as_object() {
        for (k, v) in obj {
            s.push_str(&format!("  config {k} = {v}\n"));
        }
    }
    for (k, v) in &report.constants {
        s.push_str(&format!("  {k} = {v:.14e}\n"));
    }
    for c in &report.checks {
        s.push_str(&format!(
            "  [{}] {} ({}; value {:.14e}, tolerance {:e})\n",
            verdict_word(c.verdict),
            c.name,
            c.invariant,
            c.value,
            c.tolerance
        ));
    }
    for n in &report.notes {
        s.push_str(&format!("  note: {n}\n"));
    }
    s
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Inconclusive => "inconclusive",
    }
}

/// JSON for the report file: a single object, or an array for several.
pub fn reports_json(reports: &[Report]) -> String {
    if reports.len() == 1 {
        reports[0].to_json()
    } else {
        serde_json::to_string_pretty(reports).expect("reports serialize")
    }
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parse { .. } | Error::Io(_) | Error::InvalidSystem(_) => 2,
        _ => 1,
    }
}

/// Run the parsed command line, writing to `out`/`err`, and return the exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| execute(&cli.command)),
            Err(e) => Err(Error::Config(format!("thread pool: {e}"))),
        },
        None => execute(&cli.command),
    };
    let reports = match result {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return error_code(&e);
        }
    };
    for r in &reports {
        let _ = write!(out, "{}", summary(r));
    }
    if let Some(path) = &cli.report {
        if let Err(e) = std::fs::write(path, reports_json(&reports) + "\n") {
            let _ = writeln!(err, "error: writing {}: {e}", path.display());
            return 2;
        }
    }
    let verdict = reports.iter().fold(Verdict::Pass, |v, r| v.and(r.verdict));
    for r in &reports {
        for c in r.checks.iter().filter(|c| c.verdict == Verdict::Fail) {
            let _ = writeln!(err, "failed: {} / {} ({})", r.theorem, c.name, c.invariant);
        }
    }
    verdict.exit_code()
}

pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(&cli, &mut stdout.lock(), &mut stderr.lock())
}
