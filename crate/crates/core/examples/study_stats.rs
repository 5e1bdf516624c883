//! The hypothesis battery on simulated perception-study responses.
//!
//! ```text
//! cargo run --release -p ebim --example study_stats -- [participants] [seed]
//! ```

use ebim::stats::{run_hypothesis_battery, simulate_study, summarize, SyntheticStudy, DEFAULT_ALPHA};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let participants: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(35);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);

    let records = simulate_study(&SyntheticStudy::published_ordering(participants, seed))?;
    let summaries = summarize(&records)?;
    let battery = run_hypothesis_battery(&summaries, DEFAULT_ALPHA)?;
    println!("{} responses from {participants} simulated participants\n", records.len());
    print!("{}", battery.render_table());
    Ok(())
}
