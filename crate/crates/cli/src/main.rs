use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use scf_core::bench::{
    bench_compare, default_config, execute_app, write_report, BenchScenario, ExecOptions, Mode,
};
use scf_core::gbdt::{
    evaluate, load_model, load_records, save_model, save_records, split_train_test, train_decision_tree, train_gbdt,
    Classifier, EvalReport, FeatureVector, GbdtModel, GbdtParams,
};
use scf_core::graph::load_edge_list;
use scf_core::linkpred::{AppKind, AppParams};
use scf_core::scf::{
    collect_builtin, decide, epn_for_class, generate_training_dataset, update, ClusterSpec, UpperBounds,
};
use scf_core::{Error, Result};

#[derive(Parser)]
#[command(name = "scf", version, about = "Self-configuring graph analytics runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a labelled training set as CSV.
    GenData {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the executor-count classifier on a 70/30 split and report holdout metrics.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out_model: PathBuf,
        #[arg(long, default_value_t = 0.3)]
        lr: f64,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 3)]
        rounds: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Also train and report a single decision tree of the same depth.
        #[arg(long)]
        baseline_dt: bool,
    },
    /// Predict the class and executors per node for one workload.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        features: FeatureArgs,
        /// `app,data,cluster-file`; collects the features instead.
        #[arg(long, value_parser = parse_collect, conflicts_with_all = ["mm", "mc", "wn", "wmn", "wcn", "ds", "ac"])]
        collect: Option<CollectArgs>,
    },
    /// Run an application on an edge list.
    Run {
        #[arg(long)]
        app: AppKind,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Default)]
        mode: ModeArg,
        #[arg(long, required_if_eq("mode", "scf"))]
        model: Option<PathBuf>,
        #[command(flatten)]
        cluster: ClusterArgs,
        #[arg(long)]
        bounds_file: Option<PathBuf>,
        /// Print the execution properties to stdout; the listing then goes only to `--out`.
        #[arg(long)]
        emit_props: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        sample_ms: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Compare default and self-configured runs over synthetic graphs.
    Bench {
        #[arg(long)]
        scenario_file: PathBuf,
        #[arg(long)]
        out_csv: Option<PathBuf>,
        /// Trained on a generated dataset when absent.
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        cluster: ClusterArgs,
        #[arg(long)]
        bounds_file: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        sample_ms: u64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Args)]
struct FeatureArgs {
    #[arg(long, required_unless_present = "collect")]
    mm: Option<f64>,
    #[arg(long, required_unless_present = "collect")]
    mc: Option<f64>,
    #[arg(long, required_unless_present = "collect")]
    wn: Option<f64>,
    #[arg(long, required_unless_present = "collect")]
    wmn: Option<f64>,
    #[arg(long, required_unless_present = "collect")]
    wcn: Option<f64>,
    #[arg(long, required_unless_present = "collect")]
    ds: Option<f64>,
    #[arg(long, required_unless_present = "collect")]
    ac: Option<f64>,
}

#[derive(Clone)]
struct CollectArgs {
    app: AppKind,
    data: PathBuf,
    cluster_file: PathBuf,
}

fn parse_collect(s: &str) -> std::result::Result<CollectArgs, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [app, data, cluster_file] = parts[..] else {
        return Err("expected app,data,cluster-file".into());
    };
    Ok(CollectArgs {
        app: app.parse().map_err(|e: Error| e.to_string())?,
        data: data.into(),
        cluster_file: cluster_file.into(),
    })
}

#[derive(Args)]
struct ClusterArgs {
    #[arg(long, conflicts_with = "cluster_auto")]
    cluster_file: Option<PathBuf>,
    /// One node with the host's cores and memory. The default without `--cluster-file`.
    #[arg(long)]
    cluster_auto: bool,
}

impl ClusterArgs {
    fn resolve(&self) -> Result<ClusterSpec> {
        match &self.cluster_file {
            Some(path) => ClusterSpec::load(path),
            None => ClusterSpec::auto(),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum ModeArg {
    Default,
    Scf,
}

fn bounds(file: Option<&Path>) -> Result<UpperBounds> {
    match file {
        Some(path) => UpperBounds::load(path),
        None => UpperBounds::from_env(),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn print_report(name: &str, r: &EvalReport) {
    println!("{name}.accuracy={}", r.accuracy);
    println!("{name}.precision={}", r.precision);
    println!("{name}.recall={}", r.recall);
    println!("{name}.f1={}", r.f1);
    println!("{name}.training_time_s={}", r.training_time_s);
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::GenData { n, seed, out } => {
            let records = generate_training_dataset(n, seed)?;
            save_records(&records, &out)?;
            let positives = records.iter().filter(|r| r.label == 1).count();
            eprintln!("records={} class1={positives}", records.len());
        }
        Command::Train { data, out_model, lr, depth, rounds, seed, baseline_dt } => {
            let records = load_records(&data)?;
            let (train, test) = split_train_test(&records, 0.7, seed)?;
            let params = GbdtParams {
                learning_rate: lr,
                max_depth: depth,
                n_estimators: rounds,
                n_classes: 2,
            };
            let start = Instant::now();
            let model = train_gbdt(&train, &params, seed)?;
            let elapsed = start.elapsed().as_secs_f64();
            save_model(&model, &out_model)?;
            println!("train_records={}", train.len());
            println!("test_records={}", test.len());
            print_report("gbdt", &EvalReport { training_time_s: elapsed, ..evaluate(&model, &test)? });
            if baseline_dt {
                let start = Instant::now();
                let tree = train_decision_tree(&train, depth, seed)?;
                let elapsed = start.elapsed().as_secs_f64();
                print_report("dt", &EvalReport { training_time_s: elapsed, ..evaluate(&tree, &test)? });
            }
        }
        Command::Predict { model, features, collect } => {
            let model: GbdtModel<f64> = load_model(&model)?;
            let x = match collect {
                Some(c) => {
                    let cluster = ClusterSpec::load(&c.cluster_file)?;
                    collect_builtin(c.app, &c.data, &cluster)?.1
                }
                None => {
                    let f = features;
                    let get = |v: Option<f64>| v.expect("enforced by the parser");
                    FeatureVector::new(get(f.mm), get(f.mc), get(f.wn), get(f.wmn), get(f.wcn), get(f.ds), get(f.ac))?
                }
            };
            let class = model.predict_class(&x);
            println!("class={class}");
            println!("epn={}", epn_for_class(class));
            for (i, p) in model.predict_proba(&x).iter().enumerate() {
                println!("p{i}={p}");
            }
        }
        Command::Run { app, input, mode, model, cluster, bounds_file, emit_props, out, sample_ms, seed } => {
            let cluster = cluster.resolve()?;
            let bounds = bounds(bounds_file.as_deref())?;
            let (graph, load) = load_edge_list(&input)?;
            let cfg = match mode {
                ModeArg::Default => default_config(&cluster),
                ModeArg::Scf => {
                    let model: GbdtModel<f64> = load_model(model.as_deref().expect("enforced by the parser"))?;
                    let (meta, features) = collect_builtin(app, &input, &cluster)?;
                    log::info!(
                        "collected {} MB of data, workload level {}",
                        meta.data_size_mb,
                        meta.workload_level
                    );
                    decide(&features, &model, &bounds, &cluster)?
                }
            };
            let upd = update(&cfg, &cluster);
            let params = AppParams::<f64> { seed, ..AppParams::default() };
            let (output, metrics) = execute_app(app, &graph, &cfg, &params, &ExecOptions { sample_ms })?;

            let listing = output.listing(&graph);
            let stdout = io::stdout();
            let mut stdout = stdout.lock();
            let io_err = |e| Error::io("<stdout>", e);
            if emit_props {
                stdout.write_all(upd.properties.render().as_bytes()).map_err(io_err)?;
            }
            match &out {
                Some(path) => {
                    let mut w = create(path)?;
                    w.write_all(listing.as_bytes()).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))?;
                }
                None if !emit_props => stdout.write_all(listing.as_bytes()).map_err(io_err)?,
                None => {}
            }
            stdout.flush().map_err(io_err)?;

            let mode = match mode {
                ModeArg::Default => Mode::Default,
                ModeArg::Scf => Mode::Scf,
            };
            eprint!("{}", output.report());
            eprintln!("mode={mode}");
            eprintln!("vertices={}", graph.vertex_count());
            eprintln!("edges={}", graph.edge_count());
            eprintln!("dropped_duplicates={}", load.dropped_duplicates);
            eprintln!("dropped_self_loops={}", load.dropped_self_loops);
            eprintln!("epn={}", cfg.epn);
            eprintln!("workers={}", metrics.workers);
            eprintln!("partitions={}", metrics.partitions);
            eprintln!("wall_ms={:.3}", metrics.wall_time_ms);
            eprintln!("cpu_pct={:.2}", metrics.cpu_pct);
            eprintln!("mem_pct={:.2}", metrics.mem_pct);
            eprintln!("pdr={}", metrics.pdr);
            eprintln!("util_rate={:.2}", metrics.utilization_rate);
        }
        Command::Bench { scenario_file, out_csv, model, cluster, bounds_file, sample_ms, seed } => {
            let scenario = BenchScenario::load(&scenario_file)?;
            let cluster = cluster.resolve()?;
            let bounds = bounds(bounds_file.as_deref())?;
            let model: GbdtModel<f64> = match model {
                Some(path) => load_model(&path)?,
                None => {
                    log::info!("no model given, training one with seed {seed}");
                    let data = generate_training_dataset(20_000, seed)?;
                    train_gbdt(&data, &GbdtParams::default(), seed)?
                }
            };
            let rows = bench_compare(&scenario, &cluster, &model, &bounds, &ExecOptions { sample_ms })?;
            match &out_csv {
                Some(path) => {
                    let mut w = create(path)?;
                    write_report(&rows, &mut w)?;
                    w.flush().map_err(|e| Error::io(path, e))?;
                }
                None => write_report(&rows, io::stdout().lock())?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {e}", e.name());
            ExitCode::from(1)
        }
    }
}
