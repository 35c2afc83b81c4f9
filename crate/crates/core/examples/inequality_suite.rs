//! Runs the inequality catalog on every density in the standard corpus and
//! prints the slack of each check.

use lsi_lab::bounds::{self, BoundsConfig, Verdict};
use lsi_lab::corpus::standard_corpus;

fn main() -> lsi_lab::Result<()> {
    let cfg = BoundsConfig::default();
    for entry in standard_corpus() {
        println!("{}", entry.name);
        for r in bounds::verify_all(&entry.density, &cfg)? {
            let slack = r.slack.map_or("-".to_string(), |s| format!("{s:.6e}"));
            let mark = match r.verdict {
                Verdict::Pass => "pass",
                Verdict::Fail => "FAIL",
                Verdict::PreconditionNotMet => "skip",
            };
            println!("  {:<22} {mark:<5} slack {slack}", r.check);
        }
    }
    Ok(())
}
