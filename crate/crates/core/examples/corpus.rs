//! Lists the standard corpus with its basic functionals. With a directory
//! argument, also writes one JSON spec per density there.
//!
//! ```text
//! cargo run --release --example corpus -- crates/core/corpus
//! ```

use lsi_lab::corpus::{self, standard_corpus};
use lsi_lab::functionals;
use lsi_lab::numerics::QuadratureConfig;

fn main() -> lsi_lab::Result<()> {
    let out = std::env::args().nth(1);
    let cfg = QuadratureConfig::default();
    println!("{:<16} {:>3} {:>12} {:>12} {:>12}", "name", "n", "H", "I", "delta");
    for entry in standard_corpus() {
        let r = functionals::deficit(&entry.density, &cfg)?;
        println!(
            "{:<16} {:>3} {:>12.6} {:>12.6} {:>12.6}",
            entry.name,
            entry.density.dim(),
            r.entropy,
            r.fisher,
            r.deficit
        );
        if let Some(dir) = &out {
            let path = std::path::Path::new(dir).join(format!("{}.json", entry.name));
            std::fs::write(path, corpus::spec(&entry).to_json_pretty() + "\n")?;
        }
    }
    Ok(())
}
