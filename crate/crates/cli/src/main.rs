mod checks;
mod context;
mod report;

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use expander_core::cayley::{build_cayley, export};
use expander_core::gamma_words::{normalize, GammaWord};
use expander_core::generators::ConstantTable;
use expander_core::quotient::encode_cache;
use expander_core::series::{central_series_at, exponent2_series_at, expected_index};
use expander_core::spectra::{dense_spectrum, lanczos, LanczosOptions, DEFAULT_SEED};
use serde::Serialize;
use serde_json::{json, Value};

use context::Context;
use report::{sha256_hex, Check, CliError, Report, RunManifest, SCHEMA, TOOL_VERSION};

#[derive(Parser, Debug)]
#[command(name = "expander", version, about = "Block-Toeplitz Cayley graph expanders over GF(2)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Directory for enumerated quotient caches (`K<i>.kq`).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// json, text or csv; for `export`: dot, edges or json.
    #[arg(long, global = true, default_value = "json")]
    format: String,
    /// Allow enumerating K_9.
    #[arg(long = "force-level-9", global = true)]
    force_level_9: bool,
    /// Write the run manifest to this path.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Relators r1, r2, r3 and the band structure of x0, x1.
    VerifyRepresentation {
        #[arg(long, value_delimiter = ',', default_value = "6,20,40")]
        levels: Vec<usize>,
    },
    /// The sixteen commutator identities and the depths of [x1, _k x0].
    Commscheme {
        #[arg(long, default_value_t = 3)]
        kmax: usize,
        #[arg(long, default_value_t = 8)]
        tails: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Lower exponent-2 and lower central series of K_n.
    Series {
        #[arg(long, default_value_t = 8)]
        max_level: usize,
    },
    /// lambda_i(K_n) = ker(K_n -> K_i) at n = max-level.
    Conjecture {
        #[arg(long, default_value_t = 8)]
        max_level: usize,
    },
    /// Enumerates K_i (and caches it with --cache-dir).
    Enumerate {
        #[arg(long)]
        level: usize,
    },
    /// Orders and covering indices of G_0, ..., G_max.
    Tower {
        #[arg(long, default_value_t = 5)]
        max_level: usize,
    },
    /// Two-fold refinement of every covering step.
    RefineTower {
        #[arg(long, default_value_t = 5)]
        max_level: usize,
    },
    /// Adjacency eigenvalues of G_i.
    Spectrum {
        #[arg(long)]
        level: usize,
        /// dense, lanczos or auto.
        #[arg(long, default_value = "auto")]
        method: String,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Ramanujan verdicts for G_0, ..., G_max.
    Ramanujan {
        #[arg(long, default_value_t = 5)]
        max_level: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Spectral Cheeger bounds for G_0, ..., G_max.
    Cheeger {
        #[arg(long, default_value_t = 5)]
        max_level: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Writes G_i as DOT, an edge list or a JSON summary.
    Export {
        #[arg(long)]
        level: usize,
    },
    /// Normal forms in Gamma.
    Gamma {
        #[command(subcommand)]
        action: GammaCommand,
    },
    /// The diagonal constants.
    Constants {
        #[command(subcommand)]
        action: ConstantsCommand,
    },
    /// Every check up to max-level in one report.
    VerifyAll {
        #[arg(long, default_value_t = 5)]
        max_level: usize,
        #[arg(long, default_value_t = 3)]
        kmax_scheme: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug)]
enum GammaCommand {
    /// Reduces a word such as "x0 x1^-1 x2" to w or w x2.
    Normalize { word: String },
    /// Normalizes random words and replays every trace.
    Check {
        #[arg(long, default_value_t = 10_000)]
        count: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        model_level: usize,
    },
}

#[derive(Subcommand, Debug)]
enum ConstantsCommand {
    Dump,
}

enum Output {
    Report(Report),
    Raw(String),
}

fn params(pairs: &[(&str, Value)]) -> BTreeMap<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn csv_of<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Failure(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Failure(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

#[derive(Serialize)]
struct SeriesRow {
    i: usize,
    lambda_order_log2: usize,
    lambda_factor_log2: usize,
    gamma_order_log2: Option<usize>,
    expected_factor_log2: Option<u32>,
}

#[derive(Serialize)]
struct SpectralRow {
    level: usize,
    n: usize,
    lambda2: Option<f64>,
    nontrivial_max: f64,
    margin: f64,
    verdict: String,
    cheeger_lower: Option<f64>,
    cheeger_upper: Option<f64>,
    method: String,
    residual: f64,
    converged: bool,
}

fn spectral_rows(reports: &[expander_core::spectra::SpectralReport]) -> Vec<SpectralRow> {
    reports
        .iter()
        .enumerate()
        .map(|(level, r)| SpectralRow {
            level,
            n: r.n,
            lambda2: r.lambda2,
            nontrivial_max: r.lambda_nontrivial_max,
            margin: r.margin,
            verdict: format!("{:?}", r.verdict),
            cheeger_lower: r.cheeger.map(|c| c.lower),
            cheeger_upper: r.cheeger.map(|c| c.upper),
            method: format!("{:?}", r.method).to_lowercase(),
            residual: r.residual,
            converged: r.converged,
        })
        .collect()
}

fn run(cli: &Cli, ctx: &mut Context) -> Result<(String, BTreeMap<String, Value>, Output), CliError> {
    let csv = cli.format == "csv";
    Ok(match &cli.command {
        Command::VerifyRepresentation { levels } => {
            let p = params(&[("levels", json!(levels))]);
            let checks = vec![checks::presentation(levels)?, checks::band()];
            ("verify-representation".into(), p.clone(), Output::Report(Report::new("verify-representation", p, checks)))
        }
        Command::Commscheme { kmax, tails, seed } => {
            let p = params(&[("kmax", json!(kmax)), ("tails", json!(tails)), ("seed", json!(seed))]);
            let checks = vec![
                checks::commscheme(*kmax, *tails, *seed),
                checks::iterated_comm(30),
                checks::closed_forms(10_000, *seed),
            ];
            ("commscheme".into(), p.clone(), Output::Report(Report::new("commscheme", p, checks)))
        }
        Command::Series { max_level } => {
            let n = *max_level;
            let p = params(&[("max_level", json!(n))]);
            let lambda = exponent2_series_at(n);
            let gamma = central_series_at(n);
            let rows: Vec<SeriesRow> = (0..=n)
                .map(|i| SeriesRow {
                    i,
                    lambda_order_log2: lambda.order_log2(i),
                    lambda_factor_log2: lambda.factor_log2(i),
                    gamma_order_log2: (i >= 1).then(|| gamma.order_log2(i)),
                    expected_factor_log2: (i < n).then(|| expected_index(i).trailing_zeros()),
                })
                .collect();
            let out = if csv {
                Output::Raw(csv_of(&rows)?)
            } else {
                let checks = vec![
                    Check::new("series_table", "orders of lambda_i and gamma_i in K_n", true, &rows),
                    checks::low_cases(),
                    checks::gammabases(n),
                    checks::widths(n),
                    checks::factor_comparison(n),
                ];
                Output::Report(Report::new("series", p.clone(), checks))
            };
            ("series".into(), p, out)
        }
        Command::Conjecture { max_level } => {
            let p = params(&[("max_level", json!(max_level))]);
            let checks = vec![checks::conjecture(*max_level), checks::widths(*max_level)];
            ("conjecture".into(), p.clone(), Output::Report(Report::new("conjecture", p, checks)))
        }
        Command::Enumerate { level } => {
            let p = params(&[("level", json!(level))]);
            let q = ctx.group(*level)?;
            let data = json!({"level": level, "order": q.order(), "order_log2": q.order_log2(), "encoding_sha256": sha256_hex(&encode_cache(q))});
            let checks = vec![Check::new("enumeration", "K_i enumerated in canonical order", true, data)];
            ("enumerate".into(), p.clone(), Output::Report(Report::new("enumerate", p, checks)))
        }
        Command::Tower { max_level } => {
            let p = params(&[("max_level", json!(max_level))]);
            let groups = ctx.groups(*max_level)?.to_vec();
            let g = checks::graphs(&groups);
            let checks = vec![checks::quotient_orders(ctx, *max_level)?, checks::tower(&groups, &g)?];
            ("tower".into(), p.clone(), Output::Report(Report::new("tower", p, checks)))
        }
        Command::RefineTower { max_level } => {
            let p = params(&[("max_level", json!(max_level))]);
            let groups = ctx.groups(*max_level)?.to_vec();
            let checks = vec![checks::refinement(&groups)?];
            ("refine-tower".into(), p.clone(), Output::Report(Report::new("refine-tower", p, checks)))
        }
        Command::Spectrum { level, method, k, seed } => {
            let p = params(&[("level", json!(level)), ("method", json!(method)), ("k", json!(k)), ("seed", json!(seed))]);
            let g = build_cayley(ctx.group(*level)?);
            let dense = match method.as_str() {
                "dense" => true,
                "lanczos" => false,
                "auto" => g.n() <= expander_core::spectra::DENSE_CUTOFF,
                other => return Err(CliError::Usage(format!("unknown method {other:?}"))),
            };
            let data = if dense {
                json!({"method": "dense", "eigenvalues": dense_spectrum(&g)?})
            } else {
                let mut o = LanczosOptions::new(*k);
                o.seed = *seed;
                json!({"method": "lanczos", "result": lanczos(&g, &o)?})
            };
            let checks = vec![Check::new("spectrum", "adjacency eigenvalues of G_i", true, data)];
            ("spectrum".into(), p.clone(), Output::Report(Report::new("spectrum", p, checks)))
        }
        Command::Ramanujan { max_level, seed } | Command::Cheeger { max_level, seed } => {
            let name = if matches!(cli.command, Command::Ramanujan { .. }) { "ramanujan" } else { "cheeger" };
            let p = params(&[("max_level", json!(max_level)), ("seed", json!(seed))]);
            let groups = ctx.groups(*max_level)?.to_vec();
            let g = checks::graphs(&groups);
            let (verdicts, reports) = checks::ramanujan(&g, *seed)?;
            let out = if csv {
                Output::Raw(csv_of(&spectral_rows(&reports))?)
            } else if name == "ramanujan" {
                Output::Report(Report::new(name, p.clone(), vec![verdicts]))
            } else {
                Output::Report(Report::new(name, p.clone(), vec![checks::cheeger(&reports)]))
            };
            (name.into(), p, out)
        }
        Command::Export { level } => {
            let p = params(&[("level", json!(level)), ("format", json!(cli.format))]);
            let g = build_cayley(ctx.group(*level)?);
            ("export".into(), p, Output::Raw(export(&g, *level, &cli.format)?))
        }
        Command::Gamma { action: GammaCommand::Normalize { word } } => {
            let p = params(&[("word", json!(word))]);
            let w = GammaWord::parse(word)?;
            let n = normalize(&w);
            let replays = expander_core::gamma_words::replay(&n.trace).is_ok_and(|r| r == n.form.to_word());
            let data = json!({"input": w.to_string(), "normal_form": n.form.to_string(), "tail": n.form.tail, "trace_steps": n.trace.steps.len(), "rule_steps": n.rule_steps, "trace_replays": replays});
            let checks = vec![Check::new("normalize", "the word equals its normal form in Gamma", replays, data)];
            ("gamma normalize".into(), p.clone(), Output::Report(Report::new("gamma normalize", p, checks)))
        }
        Command::Gamma { action: GammaCommand::Check { count, seed, model_level } } => {
            let p = params(&[("count", json!(count)), ("seed", json!(seed)), ("model_level", json!(model_level))]);
            let checks = vec![checks::gamma(*count, *seed, *model_level)?];
            ("gamma check".into(), p.clone(), Output::Report(Report::new("gamma check", p, checks)))
        }
        Command::Constants { action: ConstantsCommand::Dump } => {
            let t = ConstantTable::get();
            let rows = |v: expander_core::gf2::SBlock| -> Vec<String> {
                v.to_display().iter().map(|r| r.iter().map(|b| b.to_string()).collect()).collect()
            };
            let named: BTreeMap<&str, Vec<String>> = t.named().iter().map(|(n, v)| (*n, rows(*v))).collect();
            ("constants dump".into(), BTreeMap::new(), Output::Raw(serde_json::to_string_pretty(&named).unwrap() + "\n"))
        }
        Command::VerifyAll { max_level, kmax_scheme, seed } => {
            let m = *max_level;
            let p = params(&[("max_level", json!(m)), ("kmax_scheme", json!(kmax_scheme)), ("seed", json!(seed))]);
            let groups = ctx.groups(m)?.to_vec();
            let g = checks::graphs(&groups);
            let (verdicts, reports) = checks::ramanujan(&g, *seed)?;
            let checks = vec![
                checks::presentation(&[6, 20, 40])?,
                checks::band(),
                checks::closed_forms(10_000, *seed),
                checks::commscheme(*kmax_scheme, 8, *seed),
                checks::iterated_comm(30),
                checks::quotient_orders(ctx, m)?,
                checks::tower(&groups, &g)?,
                checks::refinement(&groups)?,
                checks::low_cases(),
                checks::gammabases(m),
                checks::conjecture(m),
                checks::widths(m),
                checks::factor_comparison(m),
                verdicts,
                checks::spectra_sanity(&g, *seed)?,
                checks::cheeger(&reports),
                checks::gamma(10_000, *seed, m.clamp(1, 6))?,
            ];
            ("verify-all".into(), p.clone(), Output::Report(Report::new("verify-all", p, checks)))
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let start = Instant::now();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("{e}");
            return ExitCode::from(3);
        }
    }
    let mut ctx = Context::new(cli.cache_dir.clone(), cli.force_level_9);
    let result = run(&cli, &mut ctx).and_then(|(command, parameters, output)| {
        let (text, passed) = match output {
            Output::Report(r) => {
                let text = match cli.format.as_str() {
                    "json" => r.to_json(),
                    "text" => r.to_text(),
                    other => return Err(CliError::Usage(format!("format {other:?} is not available here"))),
                };
                (text, r.passed)
            }
            Output::Raw(s) => (s, true),
        };
        match &cli.out {
            Some(path) => fs::write(path, &text)?,
            None => print!("{text}"),
        }
        if let Some(path) = &cli.manifest {
            let m = RunManifest {
                schema: SCHEMA,
                tool_version: TOOL_VERSION,
                command,
                parameters,
                threads: rayon::current_num_threads(),
                cache_checksums: ctx.checksums.clone(),
                report_sha256: sha256_hex(text.as_bytes()),
                wall_time_s: start.elapsed().as_secs_f64(),
            };
            fs::write(path, serde_json::to_string_pretty(&m).unwrap() + "\n")?;
        }
        Ok(passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
