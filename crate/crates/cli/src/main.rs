//! `riuent`: command-line access to minimal RIU entropies, tensor
//! decompositions, entanglement invariants and Haar-ensemble studies.
//!
//! Exit status is 0 on success, 2 for usage errors (including unknown states
//! and malformed state files) and 1 when a computation fails. Logs go to
//! standard error; the default seed comes from `RIUENT_SEED` when set.

mod args;
mod commands;

use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .format_timestamp(None)
        .init();
    let cli = args::Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::error!("cannot set thread count: {e}");
            std::process::exit(2);
        }
    }
    if let Err(e) = commands::run(cli.command) {
        log::error!("{e}");
        std::process::exit(e.exit_code());
    }
}
