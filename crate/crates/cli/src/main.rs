//! `cf`: command-line front end for the cf-core toolkit.
//!
//! Exit status: 0 when the command succeeds or the checked property holds,
//! 1 when a property was checked and found false, 2 on usage or input
//! errors.

mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub const EXIT_HOLDS: u8 = 0;
pub const EXIT_FALSE: u8 = 1;
pub const EXIT_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "cf", version, about = "Finite groups, anti-automorphisms and the canonical formula")]
pub struct Cli {
    /// Emit a single JSON object instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct GroupArgs {
    /// Built-in group: q8, klein, sign, c<n>, ea2-<k>.
    #[arg(long)]
    pub group: Option<String>,
    /// JSON group file; overrides --group.
    #[arg(long)]
    pub file: Option<std::path::PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct VariantArgs {
    /// Built-in variant: classic, dual or mosko.
    #[arg(long, conflicts_with = "formula")]
    pub variant: Option<String>,
    /// Formula text, e.g. "F_x(a):F_y(b) => F_x(b):F_a^-1(y)".
    #[arg(long)]
    pub formula: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a group table and report its structure.
    CheckGroup {
        #[command(flatten)]
        group: GroupArgs,
    },
    /// Classify a self-map (or a map into --target) as hom/anti/both/neither.
    ClassifyMap {
        #[command(flatten)]
        group: GroupArgs,
        /// Named map: id, inv, lambda, sigma, tau.
        #[arg(long, conflicts_with = "images")]
        map: Option<String>,
        /// Comma-separated image labels in source element order.
        #[arg(long)]
        images: Option<String>,
        /// Built-in target group (defaults to the source).
        #[arg(long)]
        target: Option<String>,
    },
    /// List automorphisms (and anti-automorphisms with --anti).
    Symmetries {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        anti: bool,
    },
    /// Build the group of automorphisms and anti-automorphisms.
    SymmetryGroup {
        #[command(flatten)]
        group: GroupArgs,
    },
    /// Order of the subgroup generated by named maps inside the symmetry group.
    GeneratedSubgroup {
        #[command(flatten)]
        group: GroupArgs,
        /// Comma-separated names from id, inv, lambda, sigma, tau.
        #[arg(long, required = true)]
        maps: String,
    },
    /// Find symmetries realizing a formula variant at an assignment.
    CfCheck {
        #[command(flatten)]
        group: GroupArgs,
        #[command(flatten)]
        variant: VariantArgs,
        /// x=<label>,y=<label>,a=<label>,b=<label>
        #[arg(long, required = true)]
        assign: String,
        /// Also accept anti-automorphisms.
        #[arg(long)]
        anti: bool,
        /// Allow roles to share an element.
        #[arg(long)]
        relax: bool,
    },
    /// Search all assignments that admit a realization.
    CfEnumerate {
        #[command(flatten)]
        group: GroupArgs,
        #[command(flatten)]
        variant: VariantArgs,
        /// Partial pins, e.g. x=1,y=j.
        #[arg(long)]
        pin: Option<String>,
        #[arg(long)]
        anti: bool,
        #[arg(long)]
        relax: bool,
    },
    /// Iterate a variant's rule and report its period.
    CfOrbit {
        #[command(flatten)]
        group: GroupArgs,
        #[command(flatten)]
        variant: VariantArgs,
        #[arg(long, default_value_t = 6)]
        steps: usize,
        /// Optional assignment for element-level tuples (needs a group).
        #[arg(long)]
        assign: Option<String>,
        #[arg(long)]
        relax: bool,
    },
    /// Check the fraction rule at one assignment, or over all assignments.
    FractionRule {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        assign: Option<String>,
    },
    /// Replay the quaternion computations end to end.
    Demo,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = cli.json;
    match commands::run(cli.command) {
        Ok(outcome) => {
            let body = if json {
                serde_json::to_string_pretty(&outcome.json).expect("values serialize") + "\n"
            } else {
                outcome.text
            };
            // a closed pipe (e.g. `| head`) is not an error worth reporting
            let _ = std::io::stdout().lock().write_all(body.as_bytes());
            ExitCode::from(if outcome.holds { EXIT_HOLDS } else { EXIT_FALSE })
        }
        Err(err) => {
            if json {
                println!("{}", serde_json::json!({ "error": err.to_string() }));
            }
            eprintln!("error: {err}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
