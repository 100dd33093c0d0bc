use std::fs;
use std::io::Read as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use digisub::grid::build_ieee14;
use digisub::harness::{
    evaluate_model, generate_dataset, inspect_frame, run_scenario, train_all, GenOptions, HarnessError, ScenarioConfig,
};
use digisub::ml::{stratified_split, Dataset, TrainConfig, TrainedModel};

const CONFIG_HELP: &str = "\
Config file (TOML, all keys optional except seed):
  seed = <u64>                      mandatory unless --seed is given
  nominal_frequency_hz = 60.0       fixed
  sv_rate = 4800                    samples/s, fixed (80 per cycle)
  duration_s = 6.0                  minimum simulated time
  [event]  kind = \"none\" | \"fault\" | \"attack\"   default none
    fault:  start_s, [event.fault] branch, location, impedance_ohm, fault_type
    attack: attack = REPLAY_SV | REPLAY_GOOSE | FDI_SV | FDI_GOOSE, bus, bay,
            start_s, duration_s = 0.1, [event.signature] (fault fields)
  [scada] collection_delay_s = 2.0   within [1, 3]
  [restoration] enabled = true, reclose_after_s = 0.5, test_fault_after_s = 1.0,
                [restoration.test_fault] defaults to the attack signature
  [paths] model, log, verdict
  [dataset] normal_samples = 320, load_scale_min = 0.9, load_scale_max = 1.1,
            test_fraction = 0.1

Exit codes: 0 success, 1 usage, 2 runtime error, 3 verdict FAIL.";

#[derive(Parser)]
#[command(name = "digisub", version, about = "Digital substation cyber-physical simulator", after_help = CONFIG_HELP)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario/config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config)
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: .]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate every fault condition, its matched attack and normal samples
    GenDataset {
        #[command(flatten)]
        common: Common,
        /// Class-0 sample count [default: 320]
        #[arg(long)]
        normal: Option<usize>,
        /// Only these condition indices (0..3200), comma separated [default: all]
        #[arg(long, value_delimiter = ',')]
        conditions: Option<Vec<usize>>,
    },
    /// Train DT, SVM, KNN and NN on a 90/10 stratified split and select one
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Evaluate a model file on the held-out split (or the whole dataset)
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        /// Use every sample instead of the held-out split
        #[arg(long)]
        all: bool,
    },
    /// Run a scenario and check its timing verdict
    RunScenario {
        #[command(flatten)]
        common: Common,
        /// Trained model file (overrides the config)
        #[arg(long)]
        model: Option<PathBuf>,
        /// Use the built-in FDI_SV bus 8 scenario when no config is given
        #[arg(long)]
        reference: bool,
    },
    /// Decode a hex-encoded SV or GOOSE frame
    InspectFrame {
        /// Hex bytes; read from stdin when absent
        hex: Option<String>,
        #[arg(long)]
        file: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Runtime(String),
    Verdict,
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Runtime(HarnessError::io(path, e).to_string())
}

fn load_config(c: &Common, fallback: Option<ScenarioConfig>) -> Result<ScenarioConfig, Failure> {
    let mut cfg = match (&c.config, fallback, c.seed) {
        (Some(p), _, _) => ScenarioConfig::load(p).map_err(|e| match e {
            HarnessError::Io { .. } => Failure::Runtime(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        })?,
        (None, Some(f), _) => f,
        (None, None, Some(seed)) => ScenarioConfig::with_seed(seed),
        (None, None, None) => return Err(Failure::Usage("a seed is required (--seed or --config)".into())),
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn out_dir(c: &Common) -> Result<PathBuf, Failure> {
    let d = c.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&d).map_err(|e| io_err(&d, e))?;
    Ok(d)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

fn read_dataset(path: &Path) -> Result<Dataset, Failure> {
    let f = fs::File::open(path).map_err(|e| io_err(path, e))?;
    Dataset::read_csv(f).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn read_model(path: &Path) -> Result<TrainedModel, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    TrainedModel::from_text(&text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::GenDataset {
            common,
            normal,
            conditions,
        } => {
            let cfg = load_config(&common, None)?;
            let dir = out_dir(&common)?;
            let mut opts = GenOptions::from_config(&cfg);
            if let Some(n) = normal {
                opts.normal_samples = n;
            }
            opts.conditions = conditions;
            let g = generate_dataset(&build_ieee14(), &opts)?;
            let csv = dir.join("dataset.csv");
            let f = fs::File::create(&csv).map_err(|e| io_err(&csv, e))?;
            g.dataset
                .write_csv(std::io::BufWriter::new(f))
                .map_err(|e| Failure::Runtime(e.to_string()))?;
            write(&dir.join("manifest.txt"), &g.manifest.to_text())?;
            print!("{}", g.manifest.to_text());
        }
        Cmd::Train { common, dataset } => {
            let cfg = load_config(&common, Some(ScenarioConfig::with_seed(common.seed.unwrap_or(0))))?;
            let dir = out_dir(&common)?;
            let data = read_dataset(&dataset)?;
            let mut tc = TrainConfig::default();
            tc.mlp.seed = cfg.seed;
            let out = train_all(&data, cfg.dataset.test_fraction, cfg.seed, &tc)?;
            for r in &out.results {
                write(&dir.join(format!("model_{}.txt", r.kind.as_str().to_lowercase())), &r.model.to_text())?;
            }
            write(&dir.join("model.txt"), &out.selected_model().to_text())?;
            write(&dir.join("report.txt"), &out.report_text())?;
            print!("{}", out.report_text());
        }
        Cmd::Eval {
            common,
            model,
            dataset,
            all,
        } => {
            let cfg = load_config(&common, Some(ScenarioConfig::with_seed(common.seed.unwrap_or(0))))?;
            let m = read_model(&model)?;
            let data = read_dataset(&dataset)?;
            let idx: Vec<usize> = if all {
                (0..data.len()).collect()
            } else {
                let labels: Vec<usize> = data.samples.iter().map(|s| s.label).collect();
                stratified_split(&labels, cfg.dataset.test_fraction, cfg.seed).1
            };
            let rep = evaluate_model(&m, &data, &idx)?;
            println!("model\t{}\nsamples\t{}", m.kind(), idx.len());
            print!("{}", rep.to_text());
        }
        Cmd::RunScenario { common, model, reference } => {
            let fallback = reference.then(|| ScenarioConfig::reference_scenario(common.seed.unwrap_or(1)));
            let cfg = load_config(&common, fallback)?;
            let dir = out_dir(&common)?;
            let model_path = model.or_else(|| cfg.paths.model.clone());
            let m = model_path.as_deref().map(read_model).transpose()?;
            let outcome = run_scenario(&build_ieee14(), &cfg, m)?;
            let log_path = cfg.paths.log.clone().unwrap_or_else(|| dir.join("events.log"));
            let verdict_path = cfg.paths.verdict.clone().unwrap_or_else(|| dir.join("verdict.txt"));
            write(&log_path, &outcome.log.to_text())?;
            write(&verdict_path, &outcome.verdict.to_text())?;
            print!("{}", outcome.verdict.to_text());
            if !outcome.verdict.passed() {
                return Err(Failure::Verdict);
            }
        }
        Cmd::InspectFrame { hex, file } => {
            let text = match (hex, file) {
                (Some(h), _) => h,
                (None, Some(p)) => fs::read_to_string(&p).map_err(|e| io_err(&p, e))?,
                (None, None) => {
                    let mut s = String::new();
                    std::io::stdin()
                        .read_to_string(&mut s)
                        .map_err(|e| Failure::Runtime(e.to_string()))?;
                    s
                }
            };
            let listing = inspect_frame(&text).map_err(|e| Failure::Runtime(e.to_string()))?;
            print!("{listing}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Verdict) => ExitCode::from(3),
    }
}
