//! `lab`: build, verify and report on exact piecewise-affine interval maps.
//!
//! Exit status: 0 on success, 1 when a verifier refuses, 2 on usage errors.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use io::{closed_interval, report, write_atomic, CmdResult, Outcome};

#[derive(Parser, Serialize)]
#[command(name = "lab", version, about = "Exact-rational laboratory for pseudo-physical measures of interval maps")]
struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Evaluate, iterate and compare maps.
    #[command(subcommand)]
    Map(MapCmd),
    /// Empirical measures and weak* distances.
    #[command(subcommand)]
    Measure(MeasureCmd),
    /// Small perturbations with certified structure.
    #[command(subcommand)]
    Perturb(PerturbCmd),
    /// Horseshoe verification and atom generations.
    #[command(subcommand)]
    Horseshoe(HorseshoeCmd),
    /// Nested-horseshoe cascades indexed by triangular matrices.
    #[command(subcommand)]
    Cascade(CascadeCmd),
    /// Triangular-matrix shift: entropy and mixing.
    #[command(subcommand)]
    Symbolic(SymbolicCmd),
    /// Shadow a periodic pseudo-orbit by a true periodic orbit.
    Shadow(ShadowArgs),
    /// Grid estimate of the basin of a measure.
    Basin(BasinArgs),
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MapCmd {
    Eval {
        /// Map file or builtin name (`identity`, `tent`).
        #[arg(long)]
        map: String,
        #[arg(long)]
        x: String,
        #[arg(long, default_value_t = 1)]
        n: usize,
    },
    Iterate {
        #[arg(long)]
        map: String,
        #[arg(long)]
        n: usize,
    },
    FixedPoints {
        #[arg(long)]
        map: String,
        #[arg(long, default_value_t = 1)]
        r: usize,
    },
    Distance {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MeasureCmd {
    /// Empirical measures along an orbit, with a distance series.
    Birkhoff {
        #[arg(long)]
        map: String,
        #[arg(long)]
        x: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 12)]
        n_terms: usize,
        /// Measure to compare against; defaults to the horizon-`n` empirical measure.
        #[arg(long)]
        target: Option<PathBuf>,
        /// CSV file for the distance series.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    Dist {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = 12)]
        n_terms: usize,
    },
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum PerturbCmd {
    Shrinking {
        #[arg(long)]
        map: String,
        #[arg(long)]
        epsilon: String,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        k: u64,
    },
    FixedCluster {
        #[arg(long)]
        map: String,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        epsilon: String,
    },
    Horseshoe {
        #[arg(long)]
        map: String,
        /// Fixed point to plant at; defaults to the leftmost one.
        #[arg(long)]
        x0: Option<String>,
        #[arg(long)]
        epsilon: String,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    QrCover {
        #[arg(long)]
        map: String,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        epsilon: String,
    },
}

#[derive(Args, Serialize)]
struct HorseshoeInput {
    /// Intervals, or a horseshoe perturbation report.
    input: PathBuf,
    /// Overrides the map carried by the input.
    #[arg(long)]
    map: Option<String>,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum HorseshoeCmd {
    Verify {
        #[command(flatten)]
        #[serde(flatten)]
        input: HorseshoeInput,
    },
    Atoms {
        #[command(flatten)]
        #[serde(flatten)]
        input: HorseshoeInput,
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    Hyperbolic {
        #[command(flatten)]
        #[serde(flatten)]
        input: HorseshoeInput,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value = "1/2")]
        lambda: String,
    },
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum CascadeCmd {
    Build {
        #[arg(long)]
        depth: usize,
        /// Inner interval as "lo,hi".
        #[arg(long)]
        j: Option<String>,
        #[arg(long)]
        i: Option<String>,
        #[arg(long)]
        iprime: Option<String>,
    },
    Verify {
        cascade: PathBuf,
    },
    Itinerary {
        cascade: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SymbolicCmd {
    Entropy {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: u32,
        /// Confirm the closed form by enumerating the join.
        #[arg(long)]
        oracle: bool,
    },
    /// Check `m(σ^{-n}C_h ∩ C_k) = m(C_h) m(C_k)`; cylinders as "i,j=b;…".
    Mixing {
        #[arg(long)]
        h: String,
        #[arg(long)]
        k: String,
        #[arg(long)]
        n: u32,
    },
}

#[derive(Args, Serialize)]
struct ShadowArgs {
    #[arg(long)]
    map: String,
    #[arg(long)]
    pseudo_orbit: PathBuf,
    #[arg(long)]
    epsilon: String,
    #[arg(long)]
    tube_cap: Option<usize>,
}

#[derive(Args, Serialize)]
struct BasinArgs {
    #[arg(long)]
    map: String,
    #[arg(long)]
    measure: PathBuf,
    #[arg(long)]
    epsilon: String,
    #[arg(long, default_value_t = 64)]
    grid: usize,
    #[arg(long, default_value_t = 256)]
    horizon: usize,
    #[arg(long, default_value_t = 12)]
    n_terms: usize,
}

fn opt_interval(field: &str, s: &Option<String>) -> CmdResult<Option<srblab::Interval>> {
    s.as_deref().map(|s| closed_interval(field, s)).transpose()
}

fn dispatch(cmd: &Command) -> CmdResult<(&'static str, Outcome, Option<PathBuf>)> {
    use commands as c;
    let mut csv_path = None;
    let (name, outcome) = match cmd {
        Command::Map(m) => match m {
            MapCmd::Eval { map, x, n } => ("map eval", c::map_eval(map, x, *n)?),
            MapCmd::Iterate { map, n } => ("map iterate", c::map_iterate(map, *n)?),
            MapCmd::FixedPoints { map, r } => ("map fixed-points", c::map_fixed_points(map, *r)?),
            MapCmd::Distance { a, b } => ("map distance", c::map_distance(a, b)?),
        },
        Command::Measure(m) => match m {
            MeasureCmd::Birkhoff { map, x, n, n_terms, target, csv } => {
                csv_path = csv.clone();
                ("measure birkhoff", c::measure_birkhoff(map, x, *n, *n_terms, target.as_deref())?)
            }
            MeasureCmd::Dist { a, b, n_terms } => ("measure dist", c::measure_dist(a, b, *n_terms)?),
        },
        Command::Perturb(p) => match p {
            PerturbCmd::Shrinking { map, epsilon, q, k } => ("perturb shrinking", c::perturb_shrinking(map, epsilon, *q, *k)?),
            PerturbCmd::FixedCluster { map, q, epsilon } => ("perturb fixed-cluster", c::perturb_fixed_cluster(map, *q, epsilon)?),
            PerturbCmd::Horseshoe { map, x0, epsilon, m, q, depth } => {
                ("perturb horseshoe", c::perturb_horseshoe(map, x0.as_deref(), epsilon, *m, *q, *depth)?)
            }
            PerturbCmd::QrCover { map, q, r, epsilon } => ("perturb qr-cover", c::perturb_qr_cover(map, *q, *r, epsilon)?),
        },
        Command::Horseshoe(h) => match h {
            HorseshoeCmd::Verify { input } => ("horseshoe verify", c::horseshoe_verify(&input.input, input.map.as_deref())?),
            HorseshoeCmd::Atoms { input, depth } => ("horseshoe atoms", c::horseshoe_atoms(&input.input, input.map.as_deref(), *depth)?),
            HorseshoeCmd::Hyperbolic { input, depth, lambda } => {
                ("horseshoe hyperbolic", c::horseshoe_hyperbolic(&input.input, input.map.as_deref(), *depth, lambda)?)
            }
        },
        Command::Cascade(cc) => match cc {
            CascadeCmd::Build { depth, j, i, iprime } => (
                "cascade build",
                c::cascade_build(*depth, opt_interval("j", j)?, opt_interval("i", i)?, opt_interval("iprime", iprime)?)?,
            ),
            CascadeCmd::Verify { cascade } => ("cascade verify", c::cascade_verify(cascade)?),
            CascadeCmd::Itinerary { cascade, x, n } => ("cascade itinerary", c::cascade_itinerary(cascade, x, *n)?),
        },
        Command::Symbolic(s) => match s {
            SymbolicCmd::Entropy { k, n, oracle } => ("symbolic entropy", c::symbolic_entropy(*k, *n, *oracle)?),
            SymbolicCmd::Mixing { h, k, n } => ("symbolic mixing", c::symbolic_mixing(h, k, *n)?),
        },
        Command::Shadow(a) => ("shadow", c::shadow(&a.map, &a.pseudo_orbit, &a.epsilon, a.tube_cap)?),
        Command::Basin(a) => ("basin", c::basin(&a.map, &a.measure, &a.epsilon, a.grid, a.horizon, a.n_terms)?),
    };
    Ok((name, outcome, csv_path))
}

fn run(cli: &Cli) -> CmdResult<bool> {
    let (name, outcome, csv_path) = dispatch(&cli.command)?;
    let config = serde_json::to_value(&cli.command)?;
    let text = serde_json::to_string_pretty(&report(name, config, &outcome))? + "\n";
    match &cli.out {
        Some(p) => write_atomic(p, &text)?,
        None => print!("{text}"),
    }
    if let (Some(p), Some(csv)) = (csv_path, &outcome.csv) {
        write_atomic(&p, csv)?;
    }
    if let Some(r) = &outcome.refusal {
        eprintln!("refused: {r}");
    }
    Ok(outcome.refusal.is_none())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {}", e.0);
            ExitCode::from(2)
        }
    }
}
