use std::process;

use clap::Parser;

use onepass_cli::{run, Cli};

fn main() {
    // Parse errors print usage and exit 2 via clap.
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        err.print_to_stderr();
        process::exit(err.exit_code());
    }
}
