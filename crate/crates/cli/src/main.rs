// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use slplab_cli::demo::SEED_ENV;
use slplab_cli::{run_demo, serialize, CliError, Format, Options};

#[derive(Parser)]
#[command(
    name = "slplab",
    version,
    about = "Exact demonstrations of the likelihood-principle examples"
)]
struct Cli {
    #[command(subcommand)]
    demo: Demo,

    #[arg(long, global = true)]
    theta0: Option<String>,
    #[arg(long, global = true)]
    mu0: Option<String>,
    /// less | greater
    #[arg(long, global = true)]
    direction: Option<String>,
    #[arg(long, global = true)]
    sigma: Option<String>,
    #[arg(long = "n-max", global = true)]
    n_max: Option<String>,
    #[arg(long, global = true)]
    reps: Option<String>,
    /// Defaults to $SLPLAB_SEED, then 1962.
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    weight: Option<String>,
    /// <reading>,<reading>[,p1-first|p2-first] with reading = conditional | unconditional
    #[arg(long, global = true)]
    semantics: Option<String>,
    /// Observed mean for example3.
    #[arg(long, global = true)]
    xbar: Option<String>,
    /// Randomizer outcome j (1 or 2) for example3.
    #[arg(long, global = true)]
    component: Option<String>,
    /// Trials for the binomial member.
    #[arg(long, global = true)]
    n: Option<String>,
    /// Successes for the binomial member, target for the negative binomial one.
    #[arg(long, global = true)]
    r: Option<String>,
    /// text | json | csv
    #[arg(long, global = true, default_value = "text")]
    format: String,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Demo {
    /// Binomial against negative binomial sampling (n = 20, r = 6).
    Example1,
    /// Fixed n = 169 against optional stopping.
    Example2,
    /// Two instruments of very different precision chosen by a coin.
    Example3,
    /// The enlarged experiment over the optional-stopping pair.
    Example4,
    /// Premise-by-premise audit under each reading.
    Audit,
    /// Enumerate sequences and check the sufficiency factorization.
    Factorize,
    /// Monte Carlo stopping fractions under the null.
    SimulateStopping,
}

impl Demo {
    fn name(self) -> &'static str {
        match self {
            Demo::Example1 => "example1",
            Demo::Example2 => "example2",
            Demo::Example3 => "example3",
            Demo::Example4 => "example4",
            Demo::Audit => "audit",
            Demo::Factorize => "factorize",
            Demo::SimulateStopping => "simulate-stopping",
        }
    }
}

fn options(cli: &Cli) -> Options {
    let mut o = Options::new();
    let flags = [
        ("theta0", &cli.theta0),
        ("mu0", &cli.mu0),
        ("direction", &cli.direction),
        ("sigma", &cli.sigma),
        ("n-max", &cli.n_max),
        ("reps", &cli.reps),
        ("seed", &cli.seed),
        ("weight", &cli.weight),
        ("semantics", &cli.semantics),
        ("xbar", &cli.xbar),
        ("component", &cli.component),
        ("n", &cli.n),
        ("r", &cli.r),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            o.insert(key.to_string(), v.clone());
        }
    }
    if !o.contains_key("seed") {
        if let Ok(seed) = std::env::var(SEED_ENV) {
            o.insert("seed".into(), seed);
        }
    }
    o
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let format: Format = cli.format.parse()?;
    let report = run_demo(cli.demo.name(), &options(cli))?;
    let bytes = serialize(&report, format)?;
    match &cli.out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().lock().write_all(&bytes)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("slplab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
