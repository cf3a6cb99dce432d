//! The 64-sensor run in the ℓ_5.6789 plane, printed like the classic console session.
//!
//! `cargo run --release --example rc_appendix -- [sensor_seed] [source_seed]`

use sound_ranging::harness::{run, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u64>());
    let sensor_seed = args.next().transpose()?.unwrap_or(1);
    let source_seed = args.next().transpose()?.unwrap_or(2);
    let rec = run(&Scenario::appendix(sensor_seed, source_seed))?;
    print!("{}", rec.summary());
    Ok(())
}
