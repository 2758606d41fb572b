//! Command-line front end for the ffgalois experiments.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ffgalois::census::{Level, DEFAULT_CENSUS_BUDGET};
use ffgalois::experiments::{
    cmd_census, cmd_check, cmd_density, cmd_scan, cmd_sieve, cmd_torsion, with_threads, OutputFormat, RunConfig,
};
use ffgalois::gl2::{class_table, HypothesisResult};
use ffgalois::sieve::SieveParams;
use ffgalois::Error;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "ffgalois", version, about = "Galois images of elliptic curves over F_q(T)")]
struct Cli {
    /// Constant field size (a prime power with p > 3).
    #[arg(long, global = true, default_value_t = 11)]
    q: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Work budget: curve pairs enumerated exhaustively before refusing or sampling.
    #[arg(long, global = true)]
    budget: Option<u128>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Seed for sampled boxes.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Frobenius class census over F_{q^n}.
    Census {
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// A prime l different from p, or `p` for the unit-root character.
        #[arg(long, default_value = "2")]
        level: String,
    },
    /// Conjugacy classes of GL_2(F_l).
    Classes {
        #[arg(long, default_value_t = 3)]
        ell: u32,
    },
    /// Density of curves in C(x) without certified maximal image.
    Density {
        #[arg(long, default_value_t = 0)]
        x_min: u32,
        #[arg(long, default_value_t = 1)]
        x_max: u32,
        /// Largest prime degree scanned.
        #[arg(long)]
        depth: Option<u32>,
        /// Comma-separated levels; every prime below c(g) when omitted.
        #[arg(long, value_delimiter = ',')]
        ells: Option<Vec<u32>>,
        #[arg(long, default_value_t = 0)]
        g: u64,
        #[arg(long, default_value_t = 20_000)]
        sample_size: u64,
    },
    /// Large sieve bound for one class, optionally checked against the box.
    SieveBound {
        #[arg(long, default_value = "2")]
        level: String,
        /// Class id (l ≠ p) or residue t (level p).
        #[arg(long, default_value_t = 0)]
        class: usize,
        #[arg(long, default_value_t = 1)]
        r: u32,
        #[arg(long = "big-q", default_value_t = 1)]
        big_q: u32,
        #[arg(long, default_value_t = 0)]
        g: u32,
        /// Compare against the curves missing the class (l = 2 only).
        #[arg(long)]
        verify: bool,
    },
    /// Checks that no prime l ≠ p lies below c(g).
    Check {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 0)]
        g: u64,
    },
    /// Frobenius records and image report for y^2 = x^3 + a x + b.
    Scan {
        /// Coefficients of a, constant term first, as field-element indices.
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long, value_delimiter = ',')]
        ells: Option<Vec<u32>>,
    },
    /// Prime-to-p torsion bounds over C(x).
    Torsion {
        #[arg(long, default_value_t = 0)]
        x_min: u32,
        #[arg(long, default_value_t = 1)]
        x_max: u32,
        #[arg(long, default_value_t = 4)]
        depth: u32,
        #[arg(long, default_value_t = 20_000)]
        sample_size: u64,
    },
}

fn parse_level(s: &str) -> Result<Level, Error> {
    if s.eq_ignore_ascii_case("p") {
        return Ok(Level::P);
    }
    s.parse()
        .map(Level::Ell)
        .map_err(|_| Error::InvalidInput(format!("level must be a prime or `p`, got {s}")))
}

fn json<T: serde::Serialize>(v: &T) -> Result<String, Error> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Error::InvalidInput(e.to_string()))
}

struct Globals {
    q: u64,
    threads: usize,
    budget: Option<u128>,
    format: Format,
    seed: u64,
}

impl Globals {
    fn header(&self, command: &str, args: &str) -> String {
        format!(
            "# ffgalois {command}\n# q={} threads={} budget={} seed={} {args}\n",
            self.q,
            self.threads,
            self.budget.map(|b| b.to_string()).unwrap_or_else(|| "default".into()),
            self.seed
        )
    }

    fn run_config(&self) -> RunConfig {
        let mut c = RunConfig {
            q: self.q,
            threads: self.threads,
            seed: self.seed,
            format: match self.format {
                Format::Csv => OutputFormat::Csv,
                Format::Json => OutputFormat::Json,
            },
            ..Default::default()
        };
        if let Some(b) = self.budget {
            c.budget = b;
        }
        c
    }
}

fn run(g: &Globals, command: Command) -> Result<String, Error> {
    let csv = matches!(g.format, Format::Csv);
    match command {
        Command::Census { n, level } => {
            let level = parse_level(&level)?;
            let run = cmd_census(g.q, n, level, g.budget.unwrap_or(DEFAULT_CENSUS_BUDGET))?;
            if let Some(w) = &run.census.warning {
                eprintln!("warning: {w}");
            }
            if csv {
                Ok(g.header("census", &format!("n={n} level={level:?}")) + &run.to_csv())
            } else {
                json(&run)
            }
        }
        Command::Classes { ell } => {
            let t = class_table(ell)?;
            if csv {
                Ok(g.header("classes", &format!("ell={ell}")) + &t.to_csv())
            } else {
                json(&t.classes)
            }
        }
        Command::Density {
            x_min,
            x_max,
            depth,
            ells,
            g: genus,
            sample_size,
        } => {
            let config = RunConfig {
                x_min,
                x_max,
                depth,
                ells,
                g: genus,
                sample_size,
                ..g.run_config()
            };
            let report = cmd_density(&config)?;
            if let HypothesisResult::Fail { witness } = report.hypothesis {
                eprintln!("warning: hypothesis fails for p = {}: prime {witness} lies below c(g)", config.p());
            }
            if csv {
                Ok(config.header("density") + &report.to_csv())
            } else {
                json(&report)
            }
        }
        Command::SieveBound {
            level,
            class,
            r,
            big_q,
            g: genus,
            verify,
        } => {
            let params = SieveParams { q: g.q, r, big_q, g: genus };
            let rep = cmd_sieve(&params, parse_level(&level)?, class, verify, g.budget.unwrap_or(DEFAULT_CENSUS_BUDGET))?;
            json(&rep)
        }
        Command::Check { p, g: genus } => {
            let rep = cmd_check(p, genus)?;
            if csv {
                let (result, witness) = match rep.result {
                    HypothesisResult::Pass => ("pass", String::new()),
                    HypothesisResult::Fail { witness } => ("fail", witness.to_string()),
                };
                Ok(format!(
                    "{}p,g,c,result,witness\n{},{},{},{result},{witness}\n",
                    g.header("check", ""),
                    rep.p,
                    rep.g,
                    rep.c
                ))
            } else {
                json(&rep)
            }
        }
        Command::Scan { a, b, depth, ells } => {
            let config = RunConfig {
                depth,
                ells,
                ..g.run_config()
            };
            let out = cmd_scan(&config, &a, &b)?;
            if csv {
                let mut s = config.header("scan") + "prime,degree,n,trace,ordinary\n";
                for r in &out.records {
                    s += &format!("\"{}\",{},{},{},{}\n", r.prime, r.degree, r.n, r.trace, r.ordinary);
                }
                Ok(s)
            } else {
                json(&out)
            }
        }
        Command::Torsion {
            x_min,
            x_max,
            depth,
            sample_size,
        } => {
            let config = RunConfig {
                x_min,
                x_max,
                depth: Some(depth),
                ells: Some(Vec::new()),
                sample_size,
                ..g.run_config()
            };
            let report = cmd_torsion(&config)?;
            if csv {
                Ok(config.header("torsion") + &report.to_csv())
            } else {
                json(&report)
            }
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BudgetExceeded { .. } => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let globals = Globals {
        q: cli.q,
        threads,
        budget: cli.budget,
        format: cli.format,
        seed: cli.seed,
    };
    let result = with_threads(threads, || run(&globals, cli.command)).and_then(|r| r);
    match result {
        Ok(text) => {
            let written = match &cli.output {
                Some(path) => fs::write(path, text),
                None => std::io::stdout().write_all(text.as_bytes()),
            };
            match written {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
