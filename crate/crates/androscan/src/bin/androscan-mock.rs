use std::process::ExitCode;

use clap::Parser;

use androscan::mock::{MockServer, Profile};

#[derive(Parser)]
#[command(
    name = "androscan-mock",
    version = androscan::VERSION,
    about = "Serves a deliberately flawed HTTP backend for exercising androscan"
)]
struct Cli {
    /// Bundled profile name (bank, hirect) or a path to a profile JSON file.
    #[arg(long)]
    profile: String,
    /// TCP port to bind; 0 picks an ephemeral port.
    #[arg(long, default_value_t = 0)]
    port: u16,
}

fn load_profile(spec: &str) -> Result<Profile, String> {
    if let Some(profile) = Profile::bundled(spec) {
        return Ok(profile);
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| format!("profile {spec:?} is not bundled and could not be read: {e}"))?;
    Profile::parse(&text).map_err(|e| format!("{spec}: {e}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let profile = match load_profile(&cli.profile) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("androscan-mock: {e}");
            return ExitCode::from(2);
        }
    };
    let name = profile.name.clone();
    match MockServer::start(profile, cli.port) {
        Ok(server) => {
            println!("androscan-mock: profile {name} listening on http://{}", server.addr());
            loop {
                std::thread::park();
            }
        }
        Err(e) => {
            eprintln!("androscan-mock: {e}");
            ExitCode::from(2)
        }
    }
}
