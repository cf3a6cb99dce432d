//! Runs every scenario file under `configs/` and prints a one-line result for each.

use std::path::Path;

use sound_ranging::harness::{read_config, run};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut files: Vec<_> = std::fs::read_dir(&dir)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
    files.sort();
    for path in files.iter().filter(|p| p.extension().is_some_and(|e| e == "ini")) {
        let sc = read_config(path)?;
        let rec = run(&sc)?;
        println!(
            "{:<14} {:<7?} halt {:<17} iterations {:3} error {:.3e} digest {}",
            path.file_name().unwrap().to_string_lossy(),
            rec.algorithm,
            rec.halt,
            rec.counts.len(),
            rec.error,
            &rec.digest[..12]
        );
    }
    Ok(())
}
