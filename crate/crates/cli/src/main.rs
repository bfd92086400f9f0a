//! `dbounds`: batch access to discovery bounds over CSV and text files.
//!
//! Every failure prints one `error: ...` line to stderr and exits with code 2.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use discovery_bounds::experiments::{
    run_power_experiment, run_timing_experiment, simulate_study, write_power_csv, write_timing_csv, PowerScenario,
    TimingScenario,
};
use discovery_bounds::study::{DEFAULT_ALPHA, DEFAULT_CLOSURE_CAP};
use discovery_bounds::{
    calibrate_lambda, condition_on_nulls, derive_stream, full_closure, hc_critical_value, higher_criticism, load_study,
    minimal_transversals, mr_lower_bound, preprocess, write_study, AnalysisConfig, BoundingFunctionConfig,
    CalibrationCache, Error, HypothesisSet, LocalTest, PValueStudy, SetFamily,
};
use discovery_bounds_service::ServiceConfig;

#[derive(Parser)]
#[command(name = "dbounds", version, about = "Simultaneous lower bounds on true discoveries")]
struct Cli {
    /// Output style for printed results.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Lower bound on the number of false nulls in a set (all hypotheses when --set is omitted).
    Bound {
        #[arg(long)]
        study: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = LocalTest::Simes)]
        method: LocalTest,
        /// Comma-separated labels.
        #[arg(long)]
        set: Option<String>,
        #[arg(long, default_value_t = DEFAULT_CLOSURE_CAP)]
        closure_cap: usize,
    },
    /// Full closed testing; writes the defining family.
    Closure {
        #[arg(long)]
        study: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = LocalTest::Simes)]
        method: LocalTest,
        #[arg(long)]
        out_defining: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CLOSURE_CAP)]
        closure_cap: usize,
    },
    /// Minimal transversals of a set family, optionally conditioned on known true nulls.
    Dual {
        #[arg(long)]
        family: PathBuf,
        /// Comma-separated labels of hypotheses known to be true nulls.
        #[arg(long)]
        known_null: Option<String>,
    },
    /// Meinshausen-Rice lower bound on the number of false nulls in the study.
    MrBound {
        #[arg(long)]
        study: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = 10_000)]
        calib_reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Directory for the calibration cache.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Higher Criticism statistic, with a calibrated critical value when --alpha is given.
    Hc {
        #[arg(long)]
        study: PathBuf,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Simulated study: planted signals first, uniform nulls after.
    Simulate {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 10)]
        n_false: usize,
        #[arg(long, default_value_t = 0.1)]
        scale: f64,
    },
    /// Power experiment; writes power.csv.
    Power {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "power.csv")]
        out: PathBuf,
        #[arg(long)]
        cache_dir: Option<PathBuf>,
    },
    /// Timing experiment; writes timing.csv.
    Bench {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "timing.csv")]
        out: PathBuf,
    },
    /// Starts the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        study_dir: Option<PathBuf>,
        /// Directory with the built UI bundle.
        #[arg(long)]
        ui_dir: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_CLOSURE_CAP)]
        closure_cap: usize,
    },
}

fn split_labels(list: &str) -> Vec<String> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

fn braces(labels: &[String]) -> String {
    format!("{{{}}}", labels.join(","))
}

fn read_text(path: &PathBuf) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn create(path: &PathBuf) -> Result<BufWriter<File>, Error> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn open_cache(dir: Option<PathBuf>) -> Result<Option<CalibrationCache>, Error> {
    dir.map(|d| {
        std::fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
        CalibrationCache::open(d)
    })
    .transpose()
}

/// Printer for `key=value` lines in text mode or header/row pairs in CSV mode.
struct Out {
    format: Format,
    lines: Vec<String>,
}

impl Out {
    fn record(&mut self, fields: &[(&str, String)]) {
        match self.format {
            Format::Text => {
                let parts: Vec<String> = fields.iter().map(|(k, v)| format!("{k}={v}")).collect();
                self.lines.push(parts.join(" "));
            }
            Format::Csv => {
                let header: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
                let row: Vec<&str> = fields.iter().map(|(_, v)| v.as_str()).collect();
                self.lines.push(header.join(","));
                self.lines.push(row.join(","));
            }
        }
    }
}

fn bound(study: &PValueStudy, config: &AnalysisConfig, set: &HypothesisSet) -> Result<(usize, &'static str), Error> {
    if study.m() <= config.closure_cap() {
        Ok((full_closure(study, config)?.discovery_bound(set)?.d, "closure"))
    } else if config.local_test() == LocalTest::Simes {
        Ok((preprocess(study, config.alpha())?.shortcut_bound(set)?.d, "shortcut"))
    } else {
        Err(Error::Config(format!(
            "fisher needs the full closure, which is limited to m <= {}; this study has m = {} (use --method simes)",
            config.closure_cap(),
            study.m()
        )))
    }
}

fn print_family(out: &mut Out, kind: &str, family: &SetFamily, labels: &[String]) {
    for set in family.to_labels(labels) {
        match out.format {
            Format::Text => out.lines.push(braces(&set)),
            Format::Csv => out.lines.push(format!("{kind},{}", set.join(";"))),
        }
    }
}

fn run(cli: Cli) -> Result<Vec<String>, Error> {
    let mut out = Out {
        format: cli.format,
        lines: Vec::new(),
    };
    match cli.command {
        Command::Bound {
            study,
            alpha,
            method,
            set,
            closure_cap,
        } => {
            let study = load_study(&study)?;
            let config = AnalysisConfig::with_cap(alpha, method, closure_cap)?;
            let set = match set {
                Some(list) => study.set_from_labels(&split_labels(&list))?,
                None => study.full_set(),
            };
            let (d, engine) = bound(&study, &config, &set)?;
            out.record(&[
                ("size", set.len().to_string()),
                ("d", d.to_string()),
                ("alpha", alpha.to_string()),
                ("engine", engine.to_string()),
            ]);
        }
        Command::Closure {
            study,
            alpha,
            method,
            out_defining,
            closure_cap,
        } => {
            let study = load_study(&study)?;
            let closure = full_closure(&study, &AnalysisConfig::with_cap(alpha, method, closure_cap)?)?;
            let defining = closure.defining_family();
            defining.save(study.labels(), &out_defining)?;
            out.record(&[
                ("m", study.m().to_string()),
                ("rejected", closure.rejected_count().to_string()),
                ("defining_sets", defining.len().to_string()),
            ]);
        }
        Command::Dual { family, known_null } => {
            let (family, labels) = SetFamily::load(&family)?;
            let dual = minimal_transversals(&family)?;
            if out.format == Format::Csv {
                out.lines.push("kind,set".into());
            }
            print_family(&mut out, "transversal", &dual, &labels);
            if let Some(list) = known_null {
                let mut known = Vec::new();
                for label in split_labels(&list) {
                    known.push(
                        labels
                            .iter()
                            .position(|l| *l == label)
                            .ok_or(Error::UnknownLabel(label))?,
                    );
                }
                let (kept, implicated) = condition_on_nulls(&dual, &HypothesisSet::new(known, labels.len())?)?;
                let implicated: Vec<String> = implicated.iter().map(|i| labels[i].clone()).collect();
                if out.format == Format::Text {
                    out.lines.push("pruned:".into());
                }
                print_family(&mut out, "pruned", &kept, &labels);
                match out.format {
                    Format::Text => out.lines.push(format!("implicated: {}", braces(&implicated))),
                    Format::Csv => out.lines.push(format!("implicated,{}", implicated.join(";"))),
                }
            }
        }
        Command::MrBound {
            study,
            alpha,
            calib_reps,
            seed,
            cache_dir,
        } => {
            let study = load_study(&study)?;
            let bounding: BoundingFunctionConfig = match open_cache(cache_dir)? {
                Some(mut cache) => cache.lambda(study.m(), alpha, calib_reps, seed)?,
                None => calibrate_lambda(study.m(), alpha, calib_reps, seed)?,
            };
            out.record(&[
                ("mr_bound", mr_lower_bound(&study, &bounding)?.to_string()),
                ("lambda", bounding.lambda.to_string()),
            ]);
        }
        Command::Hc {
            study,
            alpha,
            reps,
            seed,
            cache_dir,
        } => {
            let study = load_study(&study)?;
            let hc = higher_criticism(&study)?;
            let mut fields = vec![("hc", hc.to_string())];
            if let Some(alpha) = alpha {
                let crit = match open_cache(cache_dir)? {
                    Some(mut cache) => cache.hc_critical_value(study.m(), alpha, reps, seed)?,
                    None => hc_critical_value(study.m(), alpha, reps, seed)?,
                };
                fields.push(("critical_value", crit.to_string()));
                fields.push(("reject", (hc > crit).to_string()));
            }
            out.record(&fields);
        }
        Command::Simulate {
            m,
            seed,
            out: path,
            n_false,
            scale,
        } => {
            let study = simulate_study(m, n_false, scale, &mut derive_stream(seed, 0))?;
            write_study(&study, &path)?;
            out.record(&[
                ("m", m.to_string()),
                ("n_false", n_false.to_string()),
                ("out", path.display().to_string()),
            ]);
        }
        Command::Power {
            config,
            out: path,
            cache_dir,
        } => {
            let scenario = match config {
                Some(c) => PowerScenario::from_config_str(&read_text(&c)?)?,
                None => PowerScenario::default(),
            };
            let mut cache = open_cache(cache_dir)?;
            let rows = run_power_experiment(&scenario, cache.as_mut())?;
            let mut file = create(&path)?;
            write_power_csv(&scenario, &rows, &mut file)
                .and_then(|_| file.flush())
                .map_err(|e| Error::io(&path, e))?;
            out.record(&[("rows", rows.len().to_string()), ("out", path.display().to_string())]);
        }
        Command::Bench { config, out: path } => {
            let scenario = match config {
                Some(c) => TimingScenario::from_config_str(&read_text(&c)?)?,
                None => TimingScenario::default(),
            };
            let rows = run_timing_experiment(&scenario)?;
            let mut file = create(&path)?;
            write_timing_csv(&scenario, &rows, &mut file)
                .and_then(|_| file.flush())
                .map_err(|e| Error::io(&path, e))?;
            out.record(&[("rows", rows.len().to_string()), ("out", path.display().to_string())]);
        }
        Command::Serve {
            port,
            study_dir,
            ui_dir,
            closure_cap,
        } => {
            AnalysisConfig::with_cap(DEFAULT_ALPHA, LocalTest::Simes, closure_cap)?;
            let config = ServiceConfig {
                closure_cap,
                study_dir,
                ui_dir,
                ..ServiceConfig::default()
            };
            let addr = SocketAddr::from(([127, 0, 0, 1], port));
            eprintln!("listening on http://{addr}");
            let runtime = tokio::runtime::Runtime::new().map_err(|e| Error::Config(e.to_string()))?;
            runtime
                .block_on(discovery_bounds_service::serve(addr, config))
                .map_err(|e| Error::Config(format!("server on {addr}: {e}")))?;
        }
    }
    Ok(out.lines)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(lines) => {
            for line in lines {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let message = e.to_string().replace('\n', " ");
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
