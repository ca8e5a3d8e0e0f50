mod cli;

use clap::Parser;
use split_ensemble::{Error, Result};

use cli::rundir::RunDir;
use cli::{commands, Cli, Command};

fn advice(e: &Error) -> Option<&'static str> {
    match e {
        Error::SingleCluster { .. } => Some("lower --threshold, or train with --clusters unified for a single-variance model"),
        Error::Diverged { .. } | Error::Numerical(_) => Some("try a smaller --lr or a different --seed"),
        _ => None,
    }
}

fn run(cli: &Cli) -> Result<std::path::PathBuf> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(Error::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let name = match &cli.command {
        Command::Cluster(_) => "cluster",
        Command::Train(_) => "train",
        Command::Eval(_) => "eval",
        Command::Ood(_) => "ood",
        Command::Calibrate(_) => "calibrate",
        Command::Toy(_) => "toy",
    };
    let mut dir = RunDir::create(&cli.out, name)?;
    dir.set("seed", cli.seed);
    dir.set("threads", cli.threads);
    dir.set("config_file", &cli.config);
    let outcome = match &cli.command {
        Command::Cluster(a) => commands::cluster(cli, a, &mut dir),
        Command::Train(a) => commands::train(cli, a, &mut dir),
        Command::Eval(a) => commands::eval(cli, a, &mut dir),
        Command::Ood(a) => commands::ood(cli, a, &mut dir),
        Command::Calibrate(a) => commands::calibrate(cli, a, &mut dir),
        Command::Toy(a) => commands::toy(cli, a, &mut dir),
    };
    let path = dir.finish(&outcome)?;
    outcome.map(|()| path)
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(path) => println!("run directory: {}", path.display()),
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(a) = advice(&e) {
                eprintln!("hint: {a}");
            }
            std::process::exit(e.class().exit_code());
        }
    }
}
