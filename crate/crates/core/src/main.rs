use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use shared_mobility::pipeline::{PipelineError, Run, RunConfig, Seeds, OUTPUT_DIR_ENV};

#[derive(Parser)]
#[command(
    version,
    about = "Clean, encode, classify and summarise shared-mobility trip data"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// JSON run configuration; input paths in it resolve against its directory.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding the config file.
    #[arg(long, global = true, env = OUTPUT_DIR_ENV)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    docked: Option<PathBuf>,
    #[arg(long, global = true)]
    dockless: Option<PathBuf>,
    #[arg(long, global = true)]
    stations: Option<PathBuf>,
    #[arg(long, global = true)]
    boundary: Option<PathBuf>,
    #[arg(long, global = true)]
    zones: Option<PathBuf>,
    /// Use this seed for every seeded step.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Same-location radius in metres.
    #[arg(long, global = true)]
    radius: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and clean the trip files and write the cleaning report.
    Clean,
    /// Write the Voronoi cells of the station network as GeoJSON.
    Partition,
    /// Balance, split and train both classifiers with the forest search.
    Train,
    /// Score the trained models on the held-out split.
    Evaluate {
        /// Score a JSON object of named confusion matrices instead.
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Predict member shares of the dockless cohorts with the trained models.
    Classify,
    /// Day-of-week, hourly, duration and zone series per cohort.
    Analyze,
    /// Write a synthetic station network, profiles, trip files and run.json.
    Synth {
        /// Trips per docked cohort.
        #[arg(long)]
        docked_trips: Option<usize>,
        /// Trips per dockless cohort.
        #[arg(long)]
        dockless_trips: Option<usize>,
    },
    /// clean, partition, train, evaluate, classify and analyze in order.
    Pipeline,
}

fn configure(g: Global, command: &Command) -> Result<Run, PipelineError> {
    let mut config = match &g.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let inputs = &mut config.inputs;
    for (slot, flag) in [
        (&mut inputs.docked, g.docked),
        (&mut inputs.dockless, g.dockless),
        (&mut inputs.stations, g.stations),
        (&mut inputs.boundary, g.boundary),
        (&mut inputs.zones, g.zones),
    ] {
        if flag.is_some() {
            *slot = flag;
        }
    }
    if let Some(seed) = g.seed {
        config.seeds = Seeds::all(seed);
    }
    if let Some(r) = g.radius {
        config.same_location_radius_m = r;
    }
    if let Command::Synth {
        docked_trips,
        dockless_trips,
    } = command
    {
        if let Some(n) = docked_trips {
            config.synth.docked_trips_per_cohort = *n;
        }
        if let Some(n) = dockless_trips {
            config.synth.dockless_trips_per_cohort = *n;
        }
    }
    let out_dir = g
        .out_dir
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    Run::new(config, out_dir)
}

fn execute(run: &Run, command: &Command) -> Result<(), PipelineError> {
    match command {
        Command::Clean => {
            let partition = run.partition()?;
            let cleaned = run.clean(&partition)?;
            run.write_cleaned(&cleaned)?;
            let c = &cleaned.summary.combined;
            println!("kept {} of {} trips", c.kept_count, c.input_count);
        }
        Command::Partition => run.write_partition(&run.partition()?)?,
        Command::Train => {
            let partition = run.partition()?;
            let cleaned = run.clean(&partition)?;
            let trained = run.train(&cleaned, &partition)?;
            run.write_trained(&trained)?;
        }
        Command::Evaluate { matrix: Some(path) } => {
            let evaluations = run.evaluate_matrices(path)?;
            run.write_evaluation(&evaluations)?;
            print_artifact(run, "evaluation.txt");
        }
        Command::Evaluate { matrix: None } => {
            let models = run.load_models()?;
            let partition = run.partition()?;
            let cleaned = run.clean(&partition)?;
            let prepared = run.prepare(&cleaned)?;
            let refs: Vec<_> = models.iter().collect();
            let evaluations = run.evaluate(&prepared.test, &partition, &refs)?;
            run.write_evaluation(&evaluations)?;
            print_artifact(run, "evaluation.txt");
        }
        Command::Classify => {
            let models = run.load_models()?;
            let partition = run.partition()?;
            let cleaned = run.clean(&partition)?;
            let refs: Vec<_> = models.iter().collect();
            let report = run.classify(&cleaned, &partition, &refs)?;
            run.write_classify(&report)?;
            print_artifact(run, "cohorts.txt");
        }
        Command::Analyze => {
            let partition = run.partition()?;
            let cleaned = run.clean(&partition)?;
            let report = run.analyze(&cleaned, &partition)?;
            run.write_analytics(&report)?;
        }
        Command::Synth { .. } => run.synth()?,
        Command::Pipeline => run.pipeline()?,
    }
    Ok(())
}

fn print_artifact(run: &Run, name: &str) {
    if let Ok(text) = std::fs::read_to_string(run.out_dir.join(name)) {
        print!(
            "{}",
            text.lines()
                .skip(1)
                .map(|l| format!("{l}\n"))
                .collect::<String>()
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure(cli.global, &cli.command).and_then(|run| execute(&run, &cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
