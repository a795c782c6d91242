//! Drives the command-line front end in-process: fit, inspect the written
//! files, then replay the run from its manifest and compare bytes.

use std::fs;

use hbayes::cli::run_from_args;

fn main() -> std::io::Result<()> {
    let sites = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/sites.csv");
    let dir = std::env::temp_dir().join("hbayes-cli-workflow");
    let first = dir.join("first");
    let second = dir.join("second");

    let code = run_from_args([
        "hbayes",
        "fit-model1",
        sites,
        "--out",
        first.to_str().unwrap(),
    ]);
    println!("fit-model1 exited with {code}");
    let mut names: Vec<_> = fs::read_dir(&first)?
        .map(|e| e.map(|e| e.file_name().to_string_lossy().into_owned()))
        .collect::<Result<_, _>>()?;
    names.sort();
    println!("wrote {} files: {}", names.len(), names.join(" "));
    print!("{}", fs::read_to_string(first.join("pooling.csv"))?);

    let manifest = first.join("manifest.json");
    let code = run_from_args([
        "hbayes",
        "replay",
        manifest.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    println!("replay exited with {code}");
    let same = fs::read(first.join("summary.csv"))? == fs::read(second.join("summary.csv"))?;
    println!("summary.csv identical across runs: {same}");

    let code = run_from_args([
        "hbayes",
        "fit-model1",
        sites,
        "--out",
        "unused",
        "--warmup",
        "10",
    ]);
    println!("invalid warmup exited with {code}");
    Ok(())
}
