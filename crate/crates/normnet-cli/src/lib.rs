//! `normnet`: build constructive norm-constrained networks, reproduce the
//! weak-regularity validation table and figures, sweep approximation rates,
//! verify randomized guarantees and audit Rademacher-complexity bounds.
//!
//! Exit codes: 0 on success, 1 on verification failure, 2 on usage errors.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod csvfmt;
pub mod plot;
pub mod table;

use plot::PlotFormat;

#[derive(Parser)]
#[command(name = "normnet", version, about = "Constructive norm-constrained neural networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Reproduce the weak-regularity validation table (cases A-D).
    TableC {
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Comma-separated k values.
        #[arg(long, default_value = "8,16,32,64")]
        k: String,
        /// Comma-separated cases out of A,B,C,D.
        #[arg(long, default_value = "A,B,C,D")]
        cases: String,
        /// Number of grid intervals on [0,1].
        #[arg(long, default_value_t = 100_000)]
        grid: usize,
        /// CSV output path (stdout table is always printed).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also print rows formatted for a LaTeX tabular.
        #[arg(long)]
        latex: bool,
    },
    /// Render approximation and absolute-error panels for a case.
    Plots {
        /// Case A, B or C.
        #[arg(long)]
        case: String,
        #[arg(long, default_value = "8,16,32,64")]
        k: String,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "svg")]
        format: String,
    },
    /// Measure approximation error against k and fit the decay exponent.
    RateSweep {
        /// square | product2 | product-d:<d> | lipr:<d>
        #[arg(long)]
        target: String,
        #[arg(long)]
        activation: String,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value = "8,16,32,64")]
        k: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo verification of the randomized builders' guarantees.
    RandVerify {
        /// Guarantee family: 6 (square), 7 (product2), 8 (product tree),
        /// 9 (glued Lipschitz target).
        #[arg(long)]
        lemma: u32,
        #[arg(long, default_value_t = 1000)]
        k: u64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Input dimension for families 8 and 9.
        #[arg(long, default_value_t = 4)]
        d: usize,
        /// Epsilon list; plain numbers are absolute, `2x` means 2·ε₀.
        #[arg(long, default_value = "2x,4x,8x")]
        eps: String,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Evaluation points, `:`-separated coordinates, comma-separated
        /// points (defaults depend on the family).
        #[arg(long)]
        points: Option<String>,
        #[arg(long, default_value = "silu")]
        activation: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate Rademacher complexity of a witness family on a panel and
    /// compare against the closed-form bounds.
    Rademacher {
        /// Panel spec, e.g. `random:seed=7,b=1`.
        #[arg(long, default_value = "random")]
        panel: String,
        /// Family spec: `relu-witness:k=2[,alpha=0.1]`,
        /// `general-witness:k=2,eps=0.1,activation=silu`,
        /// `random-lipschitz:count=4,width=6,depth=2,k=3`.
        #[arg(long)]
        family: String,
        #[arg(long, default_value_t = 10)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        d: usize,
        /// Monte-Carlo trials (exact enumeration when omitted, n <= 20).
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Construct a network and write its JSON document.
    Build {
        /// square | square-weak | product2 | product-d | random-square |
        /// random-product2 | random-product-d
        #[arg(long)]
        target: String,
        #[arg(long, default_value = "silu")]
        activation: String,
        #[arg(long, default_value_t = 16)]
        k: u64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Weak-path weight override.
        #[arg(long)]
        w: Option<f64>,
        /// RNG seed for the randomized targets.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a serialized network at a point.
    Eval {
        #[arg(long)]
        net: PathBuf,
        /// Comma-separated input coordinates.
        #[arg(long)]
        x: String,
    },
}

/// Outcome of a command run: verification commands distinguish "ran fine
/// but a bound was violated" (exit 1) from usage errors (exit 2).
pub enum Outcome {
    Pass,
    VerificationFailure,
}

pub fn run(cli: Cli) -> anyhow::Result<Outcome> {
    let ok = match cli.command {
        Command::TableC {
            alpha,
            k,
            cases,
            grid,
            out,
            latex,
        } => {
            let k_list = csvfmt::parse_u64_list(&k)?;
            let cases: Vec<String> = cases.split(',').map(|s| s.trim().to_string()).collect();
            commands::cmd_table_c(alpha, &k_list, &cases, grid, out.as_deref(), latex)?
        }
        Command::Plots {
            case,
            k,
            out,
            format,
        } => {
            let k_list = csvfmt::parse_u64_list(&k)?;
            let format: PlotFormat = format.parse()?;
            commands::cmd_plots(&case, &k_list, &out, format)?
        }
        Command::RateSweep {
            target,
            activation,
            alpha,
            k,
            out,
        } => {
            let target: commands::SweepTarget = target.parse()?;
            let k_list = csvfmt::parse_u64_list(&k)?;
            commands::cmd_rate_sweep(&target, &activation, alpha, &k_list, out.as_deref())?
        }
        Command::RandVerify {
            lemma,
            k,
            alpha,
            d,
            eps,
            trials,
            seed,
            points,
            activation,
            out,
        } => commands::cmd_rand_verify(
            lemma,
            k,
            alpha,
            d,
            &eps,
            trials,
            seed,
            points.as_deref(),
            &activation,
            out.as_deref(),
        )?,
        Command::Rademacher {
            panel,
            family,
            n,
            d,
            trials,
            seed,
            out,
        } => commands::cmd_rademacher(&panel, &family, n, d, trials, seed, out.as_deref())?,
        Command::Build {
            target,
            activation,
            k,
            alpha,
            d,
            w,
            seed,
            out,
        } => commands::cmd_build(&target, &activation, k, alpha, d, w, seed, &out)?,
        Command::Eval { net, x } => commands::cmd_eval(&net, &x)?,
    };
    Ok(if ok {
        Outcome::Pass
    } else {
        Outcome::VerificationFailure
    })
}
