// Generates a knowledge base and the default goal set, then shows how the goals
// split into difficulty levels.

use scddq::curriculum::build_buffers;
use scddq::goal::{default_goal_counts, generate_goal_set};
use scddq::kb::generate_kb;

pub fn run_example() -> scddq::Result<(usize, usize, usize)> {
    let kb = generate_kb(7, 991)?;
    let goals = generate_goal_set(&kb, &default_goal_counts(), 7)?;
    let counts = build_buffers(&goals)?.counts();
    println!("{} records, {} goals", kb.len(), goals.len());
    println!("easy={} middle={} difficult={}", counts.0, counts.1, counts.2);
    println!("first goal: {}", serde_json::to_string(&goals[0]).expect("serializable"));
    Ok(counts)
}

#[allow(dead_code)]
fn main() -> scddq::Result<()> {
    run_example().map(|_| ())
}
