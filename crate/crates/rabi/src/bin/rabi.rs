use std::process::ExitCode;

use clap::Parser;
use rabi::cli::{Action, Cli};
use rabi::UsageError;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.action {
        Action::Run(command) => rabi::execute(&command),
        Action::Rerun { manifest, out } => rabi::rerun(&manifest, out),
    };
    match result {
        Ok(m) if m.failed_rows == 0 => {
            for path in &m.outputs {
                println!("{}", path.display());
            }
            ExitCode::SUCCESS
        }
        Ok(m) => {
            for row in m.rows.iter().filter(|r| r.failed()) {
                eprintln!("row {}: {}", row.index, row.error.as_deref().unwrap_or_default());
            }
            eprintln!("{} of {} rows failed", m.failed_rows, m.rows.len());
            ExitCode::from(1)
        }
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
