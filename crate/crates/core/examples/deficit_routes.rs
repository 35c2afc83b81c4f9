//! Two routes to the deficit, `H - I/2` against the time integral of the
//! MMSE integrand, plus de Bruijn's identity `H = ∫ I(P_tf) dt`.

use lsi_lab::corpus::standard_corpus;
use lsi_lab::functionals;
use lsi_lab::numerics::{QuadratureConfig, TimeQuadrature};

fn main() -> lsi_lab::Result<()> {
    let cfg = QuadratureConfig::default();
    let tq = TimeQuadrature::default();
    println!("{:<16} {:>14} {:>14} {:>10} {:>10}", "name", "delta", "via MMSE", "diff", "de Bruijn");
    for entry in standard_corpus() {
        let Some(_) = entry.density.as_mixture() else { continue };
        let direct = functionals::deficit(&entry.density, &cfg)?;
        let mmse = functionals::deficit_via_mmse(&entry.density, &tq, &cfg)?;
        let db = functionals::debruijn_check(&entry.density, &tq, &cfg)?;
        println!(
            "{:<16} {:>14.10} {:>14.10} {:>10.1e} {:>10.1e}",
            entry.name,
            direct.deficit,
            mmse.value,
            (direct.deficit - mmse.value).abs(),
            db.discrepancy
        );
    }
    Ok(())
}
