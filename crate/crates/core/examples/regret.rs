//! Extragradient run as an online learner suffers linear regret against an
//! alternating adversary; optimistic online gradient does not.

use monotone_play::dynamics::{alternating_adversary, eg_regret_demo, og_regret_run, StepSchedule};

fn main() -> monotone_play::Result<()> {
    let t = 1_000;
    let eg = eg_regret_demo(t, 0.5)?;
    let og = og_regret_run(
        &alternating_adversary(t),
        1.0,
        StepSchedule::inverse_sqrt(1.0, 1.0),
    )?;
    println!("{:>6} {:>12} {:>12}", "T", "eg regret", "og regret");
    for s in [1usize, 10, 100, 1_000] {
        println!("{s:>6} {:>12} {:>12.4}", eg.regret[s - 1], og.regret[s - 1]);
    }
    println!("extragradient learner loss: {}", eg.cumulative_loss[t - 1]);
    Ok(())
}
