use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "rank1lab",
    version,
    about = "Rank-one constructions, their group extensions and product criteria"
)]
pub struct Cli {
    /// Output written to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Also write the JSON report to this file.
    #[arg(long, global = true, value_name = "PATH")]
    pub report: Option<PathBuf>,
    /// Print wall-clock time to stderr (never part of the report).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide ergodicity and power weak mixing.
    Check {
        /// Config file, or the name of a built-in example.
        source: String,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [PropertyArg::Ergodic, PropertyArg::Pwm])]
        properties: Vec<PropertyArg>,
    },
    /// Query the explicit column simulator.
    Simulate {
        /// Config file, or the name of a built-in example.
        source: String,
        #[command(subcommand)]
        query: Query,
    },
    /// Product conservativity criterion and equivalence classes.
    Products(ProductsArgs),
    /// The built-in example registry.
    Examples {
        #[command(subcommand)]
        action: ExamplesAction,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PropertyArg {
    Ergodic,
    Pwm,
    TotallyErgodic,
    Condition2,
    Condition2Simple,
}

/// Levels are written `generation:color:height`, e.g. `1:(0):2` or `1::0`
/// over the trivial group.
#[derive(Subcommand, Debug)]
pub enum Query {
    /// Exact mass of `T^n A ∩ B` for a range of shifts.
    Measure {
        #[arg(long = "a", required = true, num_args = 1..)]
        a: Vec<String>,
        #[arg(long = "b", required = true, num_args = 1..)]
        b: Vec<String>,
        /// Explicit shifts, comma separated.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with_all = ["from", "to"])]
        n: Vec<i64>,
        #[arg(long, allow_negative_numbers = true, requires = "to")]
        from: Option<i64>,
        /// Last shift, inclusive.
        #[arg(long, allow_negative_numbers = true, requires = "from")]
        to: Option<i64>,
        #[arg(long, default_value_t = 1)]
        step: i64,
        /// Generation at which the sets are resolved.
        #[arg(long)]
        resolution: usize,
    },
    /// Search for a multiple recurrence or product orbit witness.
    Witness {
        /// Level set for multiple recurrence.
        #[arg(long, num_args = 1..)]
        level: Vec<String>,
        /// Number of returns `T^n, ..., T^{dn}` required.
        #[arg(long, default_value_t = 1)]
        d: usize,
        /// Level pairs `I>J` for a product orbit, one per power.
        #[arg(long, num_args = 1..)]
        pair: Vec<String>,
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        powers: Vec<i64>,
        /// Largest `n` searched (defaults to the height at generation 4).
        #[arg(long)]
        nmax: Option<u64>,
        #[arg(long)]
        resolution: usize,
    },
    /// Residues of copy distances of two levels modulo `q`.
    Parity {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        i: String,
        #[arg(long)]
        j: String,
        #[arg(long)]
        max_generation: usize,
    },
}

#[derive(Args, Debug)]
pub struct ProductsArgs {
    /// Registered family, built-in example or config with a constant schedule.
    pub family: Option<String>,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 6)]
    pub nmax: usize,
    /// Powers `k_1, ..., k_d` for class enumeration.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub k: Vec<i64>,
    /// Explicit heights for class enumeration (no family needed).
    #[arg(long, value_delimiter = ',')]
    pub heights: Vec<u64>,
}

#[derive(Subcommand, Debug)]
pub enum ExamplesAction {
    /// Names and provenance of the built-in examples.
    List,
    /// Evaluate every expectation of every example.
    RunAll,
    /// Evaluate one example.
    Run { name: String },
}
