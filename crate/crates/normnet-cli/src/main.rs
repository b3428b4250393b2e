use clap::Parser;
use normnet_cli::{run, Cli, Outcome};

fn main() {
    // clap exits with code 2 on usage errors by itself.
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => {}
        Ok(Outcome::VerificationFailure) => std::process::exit(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(2);
        }
    }
}
