// Runs the rule-based agent against the user simulator on an easy goal and prints
// the dialog.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scddq::curriculum::{build_buffers, sample_goal, DifficultyLevel};
use scddq::dialog::{run_rule_episode, RewardConfig, Speaker};
use scddq::goal::{default_goal_counts, generate_goal_set};
use scddq::kb::generate_kb;
use scddq::ontology::{render, ActionRoster};

pub fn run_example() -> scddq::Result<(bool, f64)> {
    let kb = generate_kb(7, 991)?;
    let goals = build_buffers(&generate_goal_set(&kb, &default_goal_counts(), 7)?)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let goal = sample_goal(&goals, DifficultyLevel::Easy, &mut rng)?;
    let ep = run_rule_episode(&kb, &ActionRoster::default(), RewardConfig::default(), &goal, &mut rng)?;
    for entry in &ep.transcript {
        let who = match entry.speaker {
            Speaker::User => "usr",
            Speaker::Agent => "sys",
        };
        println!("Turn {:>2} {who}: {}", entry.turn, render(&entry.act));
    }
    println!("success={} reward={}", ep.success, ep.total_reward);
    Ok((ep.success, ep.total_reward))
}

#[allow(dead_code)]
fn main() -> scddq::Result<()> {
    run_example().map(|_| ())
}
