use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mimo_dof::bounds::{compare_dist_vs_shared, outer_bound_general, outer_bound_homogeneous};
use mimo_dof::harness::{certified_trial, certify_trials, run_sweep_with_sink, TrialRecord};
use mimo_dof::multiplicity::{multiplicity_formula, multiplicity_numeric};
use mimo_dof::network::{db_to_linear, RunConfig};
use mimo_dof::scheduler::{schedule_simulation, CompensatedSum, ConvergenceConfig, Scheduler};
use mimo_dof::schemes::SchemeId;
use mimo_dof::textmat::dump_design;
use mimo_dof::{Error, Result};

/// Degrees-of-freedom bounds, linear schemes and Monte Carlo checks for multicell MIMO.
#[derive(Parser)]
#[command(name = "mimo-dof", version)]
struct Cli {
    /// Network config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV/JSON artifacts.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the config seed.
    #[arg(long, global = true, env = "MIMO_DOF_SEED")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    TxZf,
    /// Two-cell NSIA, or generalized NSIA when `--gamma` is given.
    Nsia,
    RxZf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchedulerArg {
    MaxSinr,
    MinInterf,
}

#[derive(Subcommand)]
enum Command {
    /// Exact outer bound for the config's network.
    Bounds {
        /// Use the per-node form even for homogeneous antennas.
        #[arg(long)]
        general: bool,
    },
    /// Multiplicity of the common null space of K random n×m matrices.
    Multiplicity {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long = "K")]
        k: usize,
        /// Also check the formula on random matrices.
        #[arg(long)]
        verify: bool,
    },
    /// Build and certify a scheme on the config's trials.
    Scheme {
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        #[arg(long)]
        gamma: Option<usize>,
        /// Writes trial 0's precoders and combiners in the text matrix format.
        #[arg(long)]
        dump_design: Option<PathBuf>,
        /// Largest tolerated fraction of failed certificates.
        #[arg(long, default_value_t = 0.0)]
        max_failure_rate: f64,
    },
    /// Sum-rate sweep over the config's SNR grid and DoF slope fit.
    SweepDof {
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        #[arg(long)]
        gamma: Option<usize>,
        #[arg(long, default_value_t = 0.0)]
        max_failure_rate: f64,
    },
    /// Downlink scheduling with K = ⌈ρ^a / c⌉ users per cell.
    ScheduleSim {
        #[arg(long = "L")]
        cells: usize,
        #[arg(long)]
        a: f64,
        #[arg(long, value_delimiter = ',', default_value = "10,20,30")]
        snr_db_list: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, value_enum, default_value = "max-sinr")]
        scheduler: SchedulerArg,
        /// `c`; defaults to K = 10 at the lowest SNR.
        #[arg(long)]
        k_constant: Option<f64>,
        #[arg(long, default_value_t = mimo_dof::scheduler::DEFAULT_USER_CAP)]
        user_cap: usize,
    },
    /// Distributed versus selected-and-shared transmission for L = K = 2, M = N.
    CompareTx {
        #[arg(long = "M")]
        m: usize,
    },
}

fn scheme_id(arg: SchemeArg, gamma: Option<usize>) -> SchemeId {
    match (arg, gamma) {
        (SchemeArg::TxZf, _) => SchemeId::TxZf,
        (SchemeArg::Nsia, None) => SchemeId::NsiaTwoCell,
        (SchemeArg::Nsia, Some(gamma)) => SchemeId::NsiaGeneral { gamma },
        (SchemeArg::RxZf, _) => SchemeId::RxZf,
    }
}

struct Ctx {
    config: Option<PathBuf>,
    out_dir: Option<PathBuf>,
    seed: Option<u64>,
}

impl Ctx {
    fn run_config(&self) -> Result<RunConfig> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| Error::Config("this command needs --config <file>".into()))?;
        let mut cfg = RunConfig::load(path)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }

    fn out_path(&self, name: &str) -> Result<Option<PathBuf>> {
        match &self.out_dir {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                Ok(Some(dir.join(name)))
            }
            None => Ok(None),
        }
    }

    /// Prints `value` as JSON and mirrors it into the output directory.
    fn emit(&self, name: &str, value: &impl Serialize) -> Result<()> {
        let text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
        // A closed pipe downstream is not an error worth a panic.
        let _ = writeln!(std::io::stdout(), "{text}");
        if let Some(path) = self.out_path(name)? {
            fs::write(path, text + "\n")?;
        }
        Ok(())
    }

    fn csv(&self, name: &str) -> Result<Option<csv::Writer<fs::File>>> {
        self.out_path(name)?
            .map(|p| csv::Writer::from_path(p).map_err(csv_err))
            .transpose()
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Error marking a certificate-failure rate above the threshold.
struct CertificateFailures(String);

fn check_failures(
    failed: u64,
    trials: u64,
    threshold: f64,
) -> std::result::Result<(), CertificateFailures> {
    let rate = failed as f64 / trials as f64;
    if rate > threshold {
        return Err(CertificateFailures(format!(
            "{failed}/{trials} certificates failed (rate {rate} > threshold {threshold})"
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct SchemeSummary {
    scheme: SchemeId,
    trials: u64,
    seed: u64,
    passed: u64,
    borderline: u64,
    worst_residual: f64,
    first_certificate: mimo_dof::schemes::SchemeCertificate,
}

fn scheme_cmd(
    ctx: &Ctx,
    scheme: SchemeId,
    dump: Option<&Path>,
    threshold: f64,
) -> Result<std::result::Result<(), CertificateFailures>> {
    let run = ctx.run_config()?;
    let trials = run.trials.max(1);
    let certs = certify_trials(&run.network, scheme, trials, run.seed)?;
    if let Some(path) = dump {
        let (_, design, _) = certified_trial(&run.network, scheme, run.seed, 0)?;
        fs::write(path, dump_design(&design))?;
    }
    let passed = certs.iter().filter(|c| c.passed).count() as u64;
    ctx.emit(
        "certificate.json",
        &SchemeSummary {
            scheme,
            trials,
            seed: run.seed,
            passed,
            borderline: certs.iter().filter(|c| c.borderline).count() as u64,
            worst_residual: certs.iter().map(|c| c.residual_max).fold(0.0, f64::max),
            first_certificate: certs[0].clone(),
        },
    )?;
    Ok(check_failures(trials - passed, trials, threshold))
}

fn sweep_cmd(
    ctx: &Ctx,
    scheme: SchemeId,
    threshold: f64,
) -> Result<std::result::Result<(), CertificateFailures>> {
    let run = ctx.run_config()?;
    let trials = run.trials.max(1);
    let mut writer = ctx.csv("sweep.csv")?;
    let result = run_sweep_with_sink(&run.network, scheme, trials, run.seed, |r: &TrialRecord| {
        if let Some(w) = writer.as_mut() {
            w.serialize(r).map_err(csv_err)?;
        }
        Ok(())
    })?;
    if let Some(mut w) = writer {
        w.flush()?;
    }
    ctx.emit("sweep.json", &result)?;
    let failed = trials - (result.certificates_passed * trials as f64).round() as u64;
    Ok(check_failures(failed, trials, threshold))
}

#[derive(Serialize)]
struct ScheduleRow {
    snr_db: f64,
    trial: u64,
    users_per_cell: usize,
    sum_rate_bits: f64,
    interference_power: String,
    selected: String,
}

#[derive(Serialize)]
struct SchedulePoint {
    snr_db: f64,
    users_per_cell: usize,
    mean_sum_rate_bits: f64,
    normalized_sum_rate: f64,
    interference_mean: f64,
    interference_second_moment: f64,
    /// Exponential-law values for min-interference selection.
    interference_mean_theory: f64,
    interference_second_moment_theory: f64,
}

#[derive(Serialize)]
struct ScheduleSummary {
    config: ConvergenceConfig,
    scheduler: Scheduler,
    points: Vec<SchedulePoint>,
    ia_baseline: f64,
    target: f64,
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(";")
}

fn schedule_cmd(ctx: &Ctx, cfg: ConvergenceConfig, scheduler: Scheduler) -> Result<()> {
    let mut writer = ctx.csv("schedule.csv")?;
    let cells = cfg.cells;
    let users = cfg.users_at()?;
    let mut acc: Vec<[CompensatedSum; 3]> = vec![Default::default(); cfg.snr_db.len()];
    let mut index = 0;
    let mut last_db = None;
    schedule_simulation(&cfg, scheduler, |r| {
        if last_db.is_some_and(|d| d != r.snr_db) {
            index += 1;
        }
        last_db = Some(r.snr_db);
        acc[index][0].add(r.outcome.sum_rate);
        for &x in &r.outcome.interference_power {
            acc[index][1].add(x);
            acc[index][2].add(x * x);
        }
        if let Some(w) = writer.as_mut() {
            w.serialize(ScheduleRow {
                snr_db: r.snr_db,
                trial: r.trial,
                users_per_cell: r.users_per_cell,
                sum_rate_bits: r.outcome.sum_rate,
                interference_power: join(&r.outcome.interference_power),
                selected: join(&r.outcome.selected),
            })
            .map_err(csv_err)?;
        }
        Ok(())
    })?;
    if let Some(mut w) = writer {
        w.flush()?;
    }
    let trials = cfg.trials as f64;
    let points = cfg
        .snr_db
        .iter()
        .zip(&users)
        .zip(&acc)
        .map(|((&db, &k), a)| {
            let rho = db_to_linear(db);
            let mean_rate = a[0].value() / trials;
            let theory = rho / ((cells - 1) * k) as f64;
            SchedulePoint {
                snr_db: db,
                users_per_cell: k,
                mean_sum_rate_bits: mean_rate,
                normalized_sum_rate: mean_rate / rho.log2(),
                interference_mean: a[1].value() / (trials * cells as f64),
                interference_second_moment: a[2].value() / (trials * cells as f64),
                interference_mean_theory: theory,
                interference_second_moment_theory: 2.0 * theory * theory,
            }
        })
        .collect();
    ctx.emit(
        "schedule.json",
        &ScheduleSummary {
            ia_baseline: (cells - 1) as f64,
            target: cells as f64,
            config: cfg,
            scheduler,
            points,
        },
    )
}

fn run(cli: Cli) -> Result<std::result::Result<(), CertificateFailures>> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let ctx = Ctx {
        config: cli.config,
        out_dir: cli.out_dir,
        seed: cli.seed,
    };
    match cli.command {
        Command::Bounds { general } => {
            let cfg = ctx.run_config()?.network;
            let report = if general || cfg.homogeneous_antennas().is_none() {
                outer_bound_general(&cfg)?
            } else {
                outer_bound_homogeneous(&cfg)?
            };
            ctx.emit("bounds.json", &report)?;
        }
        Command::Multiplicity { n, m, k, verify } => {
            let report = if verify {
                multiplicity_numeric(n, m, k, ctx.seed.unwrap_or(0))?
            } else {
                multiplicity_formula(n, m, k)?
            };
            ctx.emit("multiplicity.json", &report)?;
        }
        Command::Scheme {
            scheme,
            gamma,
            dump_design,
            max_failure_rate,
        } => {
            return scheme_cmd(
                &ctx,
                scheme_id(scheme, gamma),
                dump_design.as_deref(),
                max_failure_rate,
            )
        }
        Command::SweepDof {
            scheme,
            gamma,
            max_failure_rate,
        } => return sweep_cmd(&ctx, scheme_id(scheme, gamma), max_failure_rate),
        Command::ScheduleSim {
            cells,
            a,
            snr_db_list,
            trials,
            scheduler,
            k_constant,
            user_cap,
        } => {
            let mut cfg =
                ConvergenceConfig::new(cells, a, snr_db_list, trials, ctx.seed.unwrap_or(0));
            cfg.k_constant = k_constant;
            cfg.user_cap = user_cap;
            if cells < 2 || trials == 0 || cfg.snr_db.is_empty() {
                return Err(Error::Config(
                    "schedule-sim needs L ≥ 2, trials ≥ 1 and an SNR list".into(),
                ));
            }
            let scheduler = match scheduler {
                SchedulerArg::MaxSinr => Scheduler::MaxSinr,
                SchedulerArg::MinInterf => Scheduler::MinInterf,
            };
            schedule_cmd(&ctx, cfg, scheduler)?;
        }
        Command::CompareTx { m } => {
            ctx.emit("compare_tx.json", &compare_dist_vs_shared(2, 2, m, m)?)?
        }
    }
    Ok(Ok(()))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(CertificateFailures(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::Parse(_) | Error::Domain(_) | Error::Io(_) => {
                    ExitCode::from(2)
                }
                _ => ExitCode::from(1),
            }
        }
    }
}
