//! Loads a JSON density spec and prints the full run report, the library
//! route behind `lsi-lab analyze`.
//!
//! ```text
//! cargo run --release --example analyze_spec -- crates/core/corpus/bimodal.json
//! ```

use lsi_lab::bounds::BoundsConfig;
use lsi_lab::density::DensitySpec;
use lsi_lab::report;

fn main() -> lsi_lab::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "crates/core/corpus/bimodal.json".into());
    let spec = DensitySpec::from_path(&path)?;
    let d = spec.build()?;
    let r = report::analyze(&d, &spec.hash(), &BoundsConfig::default())?;
    println!("{}", report::to_json(&r)?);
    Ok(())
}
