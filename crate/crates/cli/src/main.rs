use std::io::{self, Write};

use tracing_subscriber::EnvFilter;

fn main() {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(io::stderr)
        .init();
    let stdin = io::stdin();
    let mut stdout = io::stdout().lock();
    let code = aztext_cli::main_with(std::env::args_os(), &mut stdin.lock(), &mut stdout, &mut io::stderr());
    let _ = stdout.flush();
    std::process::exit(code);
}
