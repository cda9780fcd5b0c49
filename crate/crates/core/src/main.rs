use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use clap::Parser;
use galekit::cli::{exit_code, run, Command, RunConfig};

fn main() -> ExitCode {
    let config = RunConfig::parse();
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = pool.install(|| {
        // `convert` writes its gale to --out and its report to stdout.
        let to_file = config.out.is_some() && !matches!(config.command, Command::Convert(_));
        if to_file {
            let path = config.out.as_ref().expect("checked");
            let file = File::create(path).map_err(galekit::Error::from)?;
            let mut w = BufWriter::new(file);
            let code = run(&config, &mut w)?;
            w.flush()?;
            Ok(code)
        } else {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            let code = run(&config, &mut w)?;
            w.flush()?;
            Ok(code)
        }
    });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
