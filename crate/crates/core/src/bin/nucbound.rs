use std::io::Write;

fn main() {
    if let Some(warning) = nucbound::cli::configure_threads() {
        eprint!("{warning}");
    }
    let outcome = nucbound::cli::run(std::env::args_os());
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    std::process::exit(outcome.code);
}
