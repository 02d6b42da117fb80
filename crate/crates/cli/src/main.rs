use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand};

use leakycav::output::{describe_params, read_manifest, write_run, RunOutput};
use leakycav::report::{render_text, summary_table};
use leakycav::runners;
use leakycav::{parse_scenario, Scenario};

const EXIT_IO: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "leakycav", version, about = "Run leaky-cavity decay scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more scenario files.
    Run {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Output directory. With several files each run goes to
        /// DIR/<file stem>.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Scenarios to run in parallel.
        #[arg(long, short, default_value_t = 1)]
        jobs: usize,
    },
    /// Parse and validate a scenario file, printing the resolved parameters.
    Validate { file: PathBuf },
    /// Render a run manifest as text and write summary.csv beside it.
    Report { manifest: PathBuf },
}

fn load(path: &Path) -> Result<Scenario, u8> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        EXIT_IO
    })?;
    parse_scenario(&text).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        EXIT_INVALID
    })
}

fn output_dirs(files: &[PathBuf], scenarios: &[Scenario], output: Option<&Path>) -> Result<Vec<PathBuf>, String> {
    let dirs: Vec<PathBuf> = match (output, files.len()) {
        (Some(dir), 1) => vec![dir.to_path_buf()],
        (Some(dir), _) => files
            .iter()
            .map(|f| dir.join(f.file_stem().unwrap_or(f.as_os_str())))
            .collect(),
        (None, _) => scenarios.iter().map(|s| s.output_dir.clone()).collect(),
    };
    let mut seen = BTreeSet::new();
    for (d, f) in dirs.iter().zip(files) {
        if !seen.insert(d.clone()) {
            return Err(format!("{}: output directory {} is used by another scenario", f.display(), d.display()));
        }
    }
    Ok(dirs)
}

fn run_one(file: &Path, s: &Scenario, dir: &Path) -> u8 {
    let mut log = format!("== {} ({}) -> {}\n{}", file.display(), s.kind.name(), dir.display(), describe_params(s));
    let result: Result<RunOutput, _> = runners::run(s);
    let code = match result {
        Err(e) => {
            log.push_str(&format!("numerical failure in {e}\n"));
            EXIT_NUMERICAL
        }
        Ok(out) => match write_run(dir, s, &out) {
            Err(e) => {
                log.push_str(&format!("writing {}: {e}\n", dir.display()));
                EXIT_IO
            }
            Ok(m) => {
                log.push_str(&render_text(&m));
                if out.all_passed() { 0 } else { EXIT_NUMERICAL }
            }
        },
    };
    print!("{log}");
    code
}

fn run(files: &[PathBuf], output: Option<&Path>, jobs: usize) -> u8 {
    let mut scenarios = Vec::new();
    let mut worst = 0;
    for f in files {
        match load(f) {
            Ok(s) => scenarios.push(s),
            Err(code) => worst = worst.max(code),
        }
    }
    if worst != 0 {
        return worst;
    }
    let dirs = match output_dirs(files, &scenarios, output) {
        Ok(d) => d,
        Err(msg) => {
            eprintln!("{msg}");
            return EXIT_INVALID;
        }
    };
    let next = AtomicUsize::new(0);
    let codes = Mutex::new(vec![0u8; files.len()]);
    std::thread::scope(|scope| {
        for _ in 0..jobs.clamp(1, files.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= files.len() {
                    break;
                }
                let code = run_one(&files[i], &scenarios[i], &dirs[i]);
                codes.lock().unwrap()[i] = code;
            });
        }
    });
    let codes = codes.into_inner().unwrap();
    // an IO failure outranks a failed check: the outputs may be missing
    if codes.contains(&EXIT_IO) {
        EXIT_IO
    } else {
        codes.into_iter().max().unwrap_or(0)
    }
}

fn validate(file: &Path) -> u8 {
    match load(file) {
        Ok(s) => {
            println!("{}: valid {} scenario", file.display(), s.kind.name());
            print!("{}", describe_params(&s));
            0
        }
        Err(code) => code,
    }
}

fn report(path: &Path) -> u8 {
    let m = match read_manifest(path) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            return EXIT_IO;
        }
    };
    print!("{}", render_text(&m));
    let table = summary_table(&m);
    let target = path.parent().unwrap_or(Path::new(".")).join(&table.file);
    if let Err(e) = fs::write(&target, table.to_csv()) {
        eprintln!("{}: {e}", target.display());
        return EXIT_IO;
    }
    println!("\nwrote {}", target.display());
    0
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { files, output, jobs } => run(&files, output.as_deref(), jobs),
        Command::Validate { file } => validate(&file),
        Command::Report { manifest } => report(&manifest),
    };
    ExitCode::from(code)
}
