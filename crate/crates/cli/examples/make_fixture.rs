//! Writes the synthetic 4-clip dataset: `make_fixture <dir>`.

fn main() -> anyhow::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "fixture-data".into());
    let manifest = neurox_cli::synth::write_fixture_dataset(std::path::Path::new(&dir))?;
    println!("{}", manifest.display());
    Ok(())
}
