use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use weylforge::config::{BranchChoice, Check, Family, Mode, PairForm, RunConfig};
use weylforge::report::{Format, Report};
use weylforge_core::invariants::{cartan_c, k_invariant, monge, wunschmann, OdeRhs, PdeRhs};
use weylforge_core::scalar::render;
use weylforge_core::{Scalar, Q};

#[derive(Parser)]
#[command(
    name = "weylforge",
    version,
    about = "Construct and verify Lorentzian Einstein-Weyl structures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Also write the JSON report here.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks of a family configuration.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Override the configured coefficient mode.
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[command(flatten)]
        out: Output,
    },
    /// Evaluate one invariant of a raw F(x,y,z,p) or H(x,y,p,q).
    Invariant {
        #[arg(long, conflicts_with_all = ["f", "h"])]
        config: Option<PathBuf>,
        /// PDE right-hand side in x, y, z, p.
        #[arg(long, conflicts_with = "h")]
        f: Option<String>,
        /// ODE right-hand side in x, y, p, q.
        #[arg(long)]
        h: Option<String>,
        /// monge, k, para-cr, wunschmann or cartan.
        #[arg(long)]
        check: Option<String>,
        /// Single point, comma separated; prints the value only.
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        #[arg(long, default_value_t = 25)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[command(flatten)]
        out: Output,
    },
    /// Compare W(w'' F_ttt/F_tt) with Monge(F)/F_tt^3 for F depending on p alone.
    BridgeCheck {
        #[arg(long, conflicts_with = "f")]
        config: Option<PathBuf>,
        #[arg(long)]
        f: Option<String>,
        #[arg(long, default_value_t = 25)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[command(flatten)]
        out: Output,
    },
    /// Re-render a saved JSON report.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

fn load(path: &PathBuf, mode: Option<Mode>) -> Result<RunConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut cfg = RunConfig::from_json(&text)?;
    if let Some(m) = mode {
        cfg.mode = m;
    }
    Ok(cfg)
}

fn inline(
    family: Family,
    name: &str,
    text: &str,
    check: Check,
    samples: usize,
    seed: u64,
    mode: Option<Mode>,
) -> RunConfig {
    RunConfig {
        mode: mode.unwrap_or_default(),
        family,
        parameters: BTreeMap::from([(name.to_string(), text.to_string())]),
        sample_count: samples,
        seed,
        tolerance: 1e-9,
        checks: vec![check],
        max_rejections: None,
        pair: PairForm::Displayed,
        branch: BranchChoice::Plus,
        argument: Default::default(),
        section_p: "1/7".into(),
    }
}

fn emit(report: &Report, out: &Output) -> Result<ExitCode> {
    if let Some(path) = &out.output {
        fs::write(path, report.render(Format::Json))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    print!("{}", report.render(out.format));
    Ok(if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn point_value<S: Scalar>(
    f: Option<&str>,
    h: Option<&str>,
    check: Check,
    point: &[S; 4],
) -> Result<S> {
    let v = match (f, h, check) {
        (Some(f), _, Check::Monge) => monge(&PdeRhs::parse(f)?, point)?.value,
        (Some(f), _, Check::K) => k_invariant(&PdeRhs::parse(f)?, point)?.value,
        (Some(f), _, Check::ParaCr) => {
            weylforge_core::invariants::pde_total_d(&PdeRhs::parse(f)?, point)?
        }
        (_, Some(h), Check::Wunschmann) => wunschmann(&OdeRhs::parse(h)?, point)?.value,
        (_, Some(h), Check::Cartan) => cartan_c(&OdeRhs::parse(h)?, point)?.value,
        _ => bail!("check {} does not apply here", check.name()),
    };
    Ok(v)
}

fn parse_point<S: Scalar>(text: &str) -> Result<[S; 4]> {
    let parts: Vec<Q> = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<Q>()
                .map_err(|e| anyhow!("point coordinate `{s}`: {e}"))
        })
        .collect::<Result<_>>()?;
    let arr: [Q; 4] = parts
        .try_into()
        .map_err(|_| anyhow!("a point has four coordinates"))?;
    Ok(arr.map(|q| S::from_q(&q)))
}

fn main_inner() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Verify { config, mode, out } => {
            emit(&weylforge::run(&load(&config, mode)?)?, &out)
        }
        Command::Invariant {
            config,
            f,
            h,
            check,
            point,
            samples,
            seed,
            mode,
            out,
        } => {
            let check = match (&check, &h) {
                (Some(c), _) => Check::parse(c)?,
                (None, Some(_)) => Check::Wunschmann,
                (None, None) => Check::Monge,
            };
            if let Some(p) = point {
                let text = match mode.unwrap_or_default() {
                    Mode::Exact => render(&point_value::<Q>(
                        f.as_deref(),
                        h.as_deref(),
                        check,
                        &parse_point(&p)?,
                    )?),
                    Mode::Float => render(&point_value::<f64>(
                        f.as_deref(),
                        h.as_deref(),
                        check,
                        &parse_point(&p)?,
                    )?),
                };
                println!("{text}");
                return Ok(ExitCode::SUCCESS);
            }
            let cfg = match (config, f, h) {
                (Some(path), _, _) => load(&path, mode)?,
                (None, Some(f), None) => inline(Family::RawF, "F", &f, check, samples, seed, mode),
                (None, None, Some(h)) => inline(Family::RawH, "H", &h, check, samples, seed, mode),
                _ => bail!("give --config, --f or --h"),
            };
            emit(&weylforge::run(&cfg)?, &out)
        }
        Command::BridgeCheck {
            config,
            f,
            samples,
            seed,
            mode,
            out,
        } => {
            let cfg = match (config, f) {
                (Some(path), _) => {
                    let mut cfg = load(&path, mode)?;
                    cfg.checks = vec![Check::Bridge];
                    cfg
                }
                (None, Some(f)) => {
                    inline(Family::RawF, "F", &f, Check::Bridge, samples, seed, mode)
                }
                (None, None) => bail!("give --config or --f"),
            };
            emit(&weylforge::run(&cfg)?, &out)
        }
        Command::Report { input, format } => {
            let text = fs::read_to_string(&input)
                .with_context(|| format!("reading {}", input.display()))?;
            let r = Report::from_json(&text)?;
            print!("{}", r.render(format));
            Ok(if r.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
