//! Command-line driver: decompose the first cohomology of a mod-p principal
//! series into Hecke-module summands, run the p-adic verification suites, or
//! dump a constructed module.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hecke::cohomology::{build_gr0_single, build_m_beta_r, build_n_module, right_adjoint_beta};
use hecke::filtration::{decompose, VerifyLevel};
use hecke::report::{ModuleDump, SuiteReport, VerifyReport};
use hecke::weyl::Root;
use hecke::{generic_character, parse_character, Ctx, FieldParams};
use std::collections::BTreeMap;
use std::io::Write;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "hecke",
    about = "Hecke-module decomposition of mod-p principal-series cohomology for GL_n"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct Params {
    /// Rank: the group is GL_n
    #[arg(long)]
    n: usize,
    /// Residue characteristic (odd prime)
    #[arg(long)]
    p: u64,
    /// Residue degree
    #[arg(long, default_value_t = 1)]
    f: u32,
    /// Ramification index
    #[arg(long, default_value_t = 1)]
    e: u32,
    /// The base field contains a p-th root of unity
    #[arg(long, default_value_t = false)]
    zeta_p: bool,
    /// Coefficient field degree (default 2f)
    #[arg(long)]
    m: Option<u32>,
    /// Character data `exps:[..];uvals:[..]`; a deterministic generic
    /// character is used when absent
    #[arg(long)]
    chi: Option<String>,
    /// Worker threads for the summand loop (output is order-independent)
    #[arg(long)]
    threads: Option<usize>,
    /// Write JSON here instead of stdout
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the full decomposition report
    Decompose {
        #[command(flatten)]
        params: Params,
        /// Allow n > 6
        #[arg(long, default_value_t = false)]
        force_large_n: bool,
        /// Skip the expensive per-summand verification
        #[arg(long, default_value_t = false)]
        structural: bool,
    },
    /// Run the truncated p-adic verification suites (base field Q_p)
    Verify {
        #[command(flatten)]
        params: Params,
        /// Suite: conj | unip | graded | all
        #[arg(long, default_value = "all")]
        suite: String,
        /// Working precision (p-adic digits)
        #[arg(long, default_value_t = 8)]
        precision: u32,
    },
    /// Dump a constructed module as JSON
    Dump {
        #[command(flatten)]
        params: Params,
        /// Which module: gr0 | m_beta_r | n_beta_r | right_adjoint_beta
        #[arg(long)]
        which: String,
        /// Root as `j,k` (1-indexed)
        #[arg(long)]
        beta: Option<String>,
        /// Twist index
        #[arg(long, default_value_t = 0)]
        r: u32,
    },
}

fn build_ctx(params: &Params) -> Result<Ctx> {
    let fp = FieldParams::new(params.p, params.f, params.e, params.zeta_p, params.m)
        .map_err(|e| anyhow!(e))?;
    if params.n < 2 {
        bail!("need n >= 2");
    }
    let fld = fp.field();
    let chi = match &params.chi {
        Some(s) => parse_character(&fld, params.n, s).map_err(|e| anyhow!(e))?,
        None => generic_character(&fld, params.n),
    };
    Ok(Ctx::new(fp, params.n, chi))
}

fn emit(out: &Option<std::path::PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            let mut f = std::fs::File::create(path).context("create output file")?;
            f.write_all(text.as_bytes())?;
            f.write_all(b"\n")?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn parse_beta(n: usize, s: &Option<String>) -> Result<Root> {
    let s = s.as_ref().ok_or_else(|| anyhow!("--beta is required"))?;
    let parts: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .context("beta must be `j,k`")?;
    if parts.len() != 2 || parts[0] == parts[1] || parts[0] < 1 || parts[1] > n {
        bail!("beta must be 1 <= j < k <= n");
    }
    Ok(Root::new(parts[0] - 1, parts[1] - 1))
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Cmd::Decompose {
            params,
            force_large_n,
            structural,
        } => {
            if params.n > 6 && !force_large_n {
                bail!("n > 6 is untested at this scale; pass --force-large-n to override");
            }
            if let Some(t) = params.threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build_global()
                    .ok();
            }
            let ctx = build_ctx(&params)?;
            let level = if structural || params.n > 4 {
                VerifyLevel::Structural
            } else {
                VerifyLevel::Full
            };
            let outcome = decompose(&ctx, level);
            emit(&params.out, &outcome.report.to_json())?;
            Ok(true)
        }
        Cmd::Verify {
            params,
            suite,
            precision,
        } => {
            let fp = FieldParams::new(params.p, params.f, params.e, params.zeta_p, params.m)
                .map_err(|e| anyhow!(e))?;
            if !fp.is_qp() {
                bail!("the oracle suites run over Q_p (f = e = 1)");
            }
            let kprec = precision as i32;
            let mut suites: BTreeMap<String, SuiteReport> = BTreeMap::new();
            let want = |name: &str| suite == "all" || suite == name;
            if want("conj") {
                suites.insert(
                    "conj".into(),
                    hecke::oracle::verify_conj_suite(params.n, params.p, kprec),
                );
                suites.insert(
                    "factorization".into(),
                    hecke::oracle::verify_factorization_roundtrip(params.n, params.p, kprec),
                );
            }
            if want("unip") {
                suites.insert(
                    "unip".into(),
                    hecke::oracle::verify_unip(params.n, params.p, kprec),
                );
            }
            if want("graded") {
                let ctx = build_ctx(&params)?;
                let mut total = SuiteReport {
                    checked: 0,
                    failures: vec![],
                };
                for beta in hecke::weyl::positive_roots(params.n) {
                    let rep = hecke::oracle::oracle_graded_action(&ctx, &beta, kprec);
                    total.checked += rep.checked;
                    total.failures.extend(rep.failures);
                }
                let rep0 = hecke::oracle::oracle_gr0_action(&ctx, kprec);
                total.checked += rep0.checked;
                total.failures.extend(rep0.failures);
                suites.insert("graded".into(), total);
            }
            if suites.is_empty() {
                bail!("unknown suite `{suite}` (use conj | unip | graded | all)");
            }
            let pass = suites.values().all(|s| s.failures.is_empty());
            let report = VerifyReport {
                schema_version: 1,
                n: params.n,
                p: params.p,
                precision,
                suites,
                pass,
            };
            emit(&params.out, &report.to_json())?;
            Ok(pass)
        }
        Cmd::Dump {
            params,
            which,
            beta,
            r,
        } => {
            let ctx = build_ctx(&params)?;
            let dump = match which.as_str() {
                "gr0" => ModuleDump::from_module(&ctx, "gr0", &build_gr0_single(&ctx)),
                "m_beta_r" => {
                    let b = parse_beta(params.n, &beta)?;
                    ModuleDump::from_module(&ctx, "m_beta_r", &build_m_beta_r(&ctx, &b, r))
                }
                "n_beta_r" => {
                    let b = parse_beta(params.n, &beta)?;
                    if b.height() != 1 {
                        bail!("n_beta_r needs a simple root");
                    }
                    let (module, class) = build_n_module(&ctx, &b, r);
                    let mut d = ModuleDump::from_module(&ctx, "n_beta_r", &module);
                    d.which = format!("n_beta_r ({class:?})");
                    d
                }
                "right_adjoint_beta" => {
                    let b = parse_beta(params.n, &beta)?;
                    if b.height() < 2 {
                        bail!("right_adjoint_beta needs height >= 2");
                    }
                    let rep = right_adjoint_beta(&ctx, &b, r).map_err(|e| anyhow!(e))?;
                    ModuleDump::from_module(&ctx, "right_adjoint_beta", &rep.module)
                }
                other => bail!("unknown dump target `{other}`"),
            };
            emit(&params.out, &dump.to_json())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
