use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;
use mailsift::artifact;
use mailsift_cli::commands::{self, Cli, Command, ServeArgs};
use mailsift_cli::service::{self, AppState, Cors};
use mailsift_cli::CliError;

fn serve(args: &ServeArgs) -> Result<String, CliError> {
    let art = artifact::load_artifact(&args.artifact)?;
    eprintln!(
        "mailsift: loaded {} ({}) from {}",
        art.pipeline.describe(),
        art.metadata.dataset,
        args.artifact.display()
    );
    let cors = if args.cors_origins.iter().any(|o| o == "*") {
        Cors::Any
    } else if args.cors_origins.is_empty() {
        Cors::SameOrigin
    } else {
        Cors::Origins(args.cors_origins.clone())
    };
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Internal(e.to_string()))?;
    rt.block_on(service::serve(Arc::new(AppState::new(art)), args.addr, cors))
        .map_err(|e| CliError::Internal(format!("server error: {e}")))?;
    Ok(String::new())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train(a) => commands::train(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Predict(a) => commands::predict(a),
        Command::Explain(a) => commands::explain(a),
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("mailsift: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
