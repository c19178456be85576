use clap::error::ErrorKind;
use clap::Parser;
use fqt_cli::{config, pipeline, RunArgs};

/// Steady-state heat transport in a periodically modulated three-qubit
/// thermal transistor.
#[derive(Parser)]
#[command(name = "fqt", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Subcommand)]
enum Command {
    /// Solve a configuration file or a named preset and write the results.
    Run(RunArgs),
}

fn main() {
    // FQT_LOG=off|warn|debug selects verbosity; diagnostics go to stderr.
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FQT_LOG", "warn"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                // Bad flags are configuration errors.
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };

    let Command::Run(args) = cli.command;
    let outcome = config::resolve(&args).and_then(|run| pipeline::execute(&run));
    match outcome {
        Ok(summary) => {
            println!("{}", summary.line);
            for d in &summary.diagnostics {
                eprintln!("fqt: check: {d}");
            }
            std::process::exit(summary.exit);
        }
        Err(e) => {
            eprintln!("fqt: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
