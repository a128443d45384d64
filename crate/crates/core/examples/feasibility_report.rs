//! Static PASS/FAIL report with remedies for a builtin scenario.
//!
//! cargo run --example feasibility_report -- [scenario] [separation_km]

use ntn_lab::feasibility::{full_report, ReportOptions};
use ntn_lab::scenario::builtin_scenario;

fn main() -> ntn_lab::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "nbiot_leo600".into());
    let sep: f64 = args.next().map(|a| a.parse().expect("km")).unwrap_or(200.0);
    let scenario = builtin_scenario(&name).expect("builtin scenario name");

    let r = full_report(&scenario, &ReportOptions::default().with_separation(sep))?;
    println!("{} ({})", r.scenario, r.architecture);
    for c in &r.checks {
        println!(
            "  {:<28} {:?}  {:.4} {} vs {:.4} {}",
            c.name, c.verdict, c.value.value, c.value.unit, c.constraint.value, c.constraint.unit
        );
        if let Some(rem) = &c.remedy {
            let tag = if c.passed() { "note" } else { "remedy" };
            println!("      {tag}: {}", rem.text);
        }
    }
    println!(
        "{} checks, {} pass, {} fail",
        r.summary.total, r.summary.pass, r.summary.fail
    );
    Ok(())
}
