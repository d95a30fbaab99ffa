use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgMatches, Command as App};
use diachron::config::KEYS;
use diachron::pipeline::SynthOptions;
use diachron::{run_command, CliError, Command, PipelineConfig, EXIT_VALIDATION};

/// Environment variable holding the default output directory.
const OUTPUT_ENV: &str = "DIACHRON_OUTPUT";

fn subcommand_about(name: &str) -> &'static str {
    match name {
        "ingest" => "load the corpus, subsample and select the vocabulary",
        "ppmi" => "per-period PPMI matrices",
        "embed" => "joint truncated SVD of the stacked PPMI matrices",
        "simmat" => "per-word cross-period similarity matrices",
        "cluster" => "cluster words by their serialized similarity matrices",
        "explain" => "rank context words by PPMI change between two periods",
        "pseudo-gen" => "build the pseudoword benchmark and inject it into the corpus",
        "eval-schemas" => "score every feature/clustering configuration on the benchmark",
        "heatmap" => "SVG heatmaps of the similarity matrices of `words`",
        "synth" => "write a synthetic Zipfian corpus",
        _ => "",
    }
}

fn cli() -> App {
    let mut app = App::new("diachron")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Diachronic word similarity matrices: PPMI, joint SVD, clustering and pseudoword evaluation")
        .subcommand_required(true)
        .arg(
            Arg::new("config")
                .long("config")
                .global(true)
                .value_name("FILE")
                .value_parser(clap::value_parser!(PathBuf))
                .help("key = value config file"),
        )
        .arg(
            Arg::new("threads")
                .long("threads")
                .global(true)
                .value_name("N")
                .value_parser(clap::value_parser!(usize))
                .help("worker threads (default: available cores)"),
        );
    for (key, help) in KEYS {
        app = app.arg(
            Arg::new(*key)
                .long(key.replace('_', "-"))
                .global(true)
                .value_name("VALUE")
                .help(*help),
        );
    }
    for name in Command::NAMES {
        let mut sub = App::new(name).about(subcommand_about(name));
        if name == "synth" {
            let d = SynthOptions::default();
            for (id, default) in [
                ("periods", d.periods),
                ("docs-per-period", d.docs_per_period),
                ("vocab-size", d.vocab_size),
            ] {
                sub = sub.arg(
                    Arg::new(id)
                        .long(id)
                        .value_parser(clap::value_parser!(usize))
                        .default_value(default.to_string()),
                );
            }
        }
        app = app.subcommand(sub);
    }
    app
}

/// Defaults, then the output environment variable, then the config file,
/// then flags.
fn build_config(m: &ArgMatches) -> Result<PipelineConfig, CliError> {
    let mut config = PipelineConfig::default();
    if let Some(dir) = std::env::var_os(OUTPUT_ENV).filter(|d| !d.is_empty()) {
        config.output = PathBuf::from(dir);
    }
    if let Some(path) = m.get_one::<PathBuf>("config") {
        let text = diachron::io::read_to_string(path)?;
        config.apply_text(&text).map_err(|error| CliError::Config {
            file: Some(path.clone()),
            error,
        })?;
    }
    for (key, _) in KEYS {
        if let Some(v) = m.get_one::<String>(key) {
            config.set(key, v)?;
        }
    }
    Ok(config)
}

fn run(name: &str, m: &ArgMatches) -> Result<(), CliError> {
    if let Some(&n) = m.get_one::<usize>("threads") {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    let config = build_config(m)?;
    let mut cmd: Command = name.parse()?;
    if let Command::Synth(opts) = &mut cmd {
        opts.periods = *m.get_one("periods").expect("defaulted");
        opts.docs_per_period = *m.get_one("docs-per-period").expect("defaulted");
        opts.vocab_size = *m.get_one("vocab-size").expect("defaulted");
    }
    let manifest = run_command(cmd, &config)?;
    let record = &manifest.stages[cmd.name()];
    println!(
        "{}: wrote {} artifacts to {} in {:.2}s",
        cmd.name(),
        record.outputs.len(),
        config.output.display(),
        record.seconds
    );
    Ok(())
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_VALIDATION as u8 } else { 0 });
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand required");
    match run(name, sub) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
