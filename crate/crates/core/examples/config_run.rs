//! Drive the experiment harness from an in-memory config and print the
//! summary and the files it wrote.

use monotone_play::cli::{run_command, ExperimentConfig};

fn main() -> monotone_play::Result<()> {
    let cfg = ExperimentConfig::from_json(
        r#"{
            "command": "simulate",
            "operator": { "kind": "bilinear", "M": [[1, 0], [0, 1]], "D": 1 },
            "algorithm": "og",
            "eta": 0.006666666666666667,
            "T": 2000,
            "seed": 3
        }"#,
    )?;
    let dir = tempfile::tempdir()?;
    let outcome = run_command(&cfg, dir.path(), dir.path())?;
    print!("{}", outcome.summary());
    for f in &outcome.files {
        println!(
            "wrote {}",
            f.file_name().unwrap_or_default().to_string_lossy()
        );
    }
    println!("exit code {}", outcome.exit_code());
    Ok(())
}
