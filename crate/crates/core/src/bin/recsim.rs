use clap::Parser;
use recsim::cli::{run, RunConfig};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let config = RunConfig::parse();
    match run(&config) {
        Ok(summary) => {
            for path in &summary.artifacts {
                println!("{}", path.display());
            }
        }
        Err(e) => {
            eprintln!("recsim: {} failed: {}", e.stage, e.source);
            std::process::exit(1);
        }
    }
}
