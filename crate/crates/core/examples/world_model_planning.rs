// Trains a world model on rule-agent dialogs and lets a DQN agent plan against it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scddq::agent::{BufferKind, DqnAgent, ReplayBuffer};
use scddq::curriculum::{build_buffers, sample_goal, DifficultyLevel};
use scddq::dialog::{run_rule_episode, RewardConfig};
use scddq::goal::{default_goal_counts, generate_goal_set};
use scddq::kb::generate_kb;
use scddq::ontology::ActionRoster;
use scddq::world_model::{plan, PlanningPolicy, PlanningSetup, UserActDecoding, WorldModel};

pub fn run_example() -> scddq::Result<(f64, f64, usize)> {
    let kb = generate_kb(7, 300)?;
    let goals = build_buffers(&generate_goal_set(&kb, &default_goal_counts(), 7)?)?;
    let roster = ActionRoster::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut real = ReplayBuffer::new(BufferKind::Real, 5000);
    for _ in 0..60 {
        let goal = sample_goal(&goals, DifficultyLevel::All, &mut rng)?;
        for e in run_rule_episode(&kb, &roster, RewardConfig::default(), &goal, &mut rng)?.experiences {
            real.store(e);
        }
    }
    let mut wm = WorldModel::new(1)?;
    let first = wm.train(&real, 1, &mut rng)?.unwrap_or(f64::NAN);
    let mut last = first;
    for _ in 0..40 {
        last = wm.train(&real, 10, &mut rng)?.unwrap_or(f64::NAN);
    }
    println!("world model loss {first:.3} -> {last:.3} on {} real turns", real.len());

    let agent = DqnAgent::new(2)?;
    let mut sim = ReplayBuffer::new(BufferKind::Simulated, 5000);
    let setup = PlanningSetup {
        kb: &kb,
        roster: &roster,
        max_turns: 40,
        rounds: 2,
        dialogs_per_round: 10,
        decoding: UserActDecoding::Argmax,
    };
    let stored = plan(
        &setup,
        &agent,
        PlanningPolicy::EpsGreedy,
        &wm,
        |r| sample_goal(&goals, DifficultyLevel::All, r),
        &mut sim,
        &mut rng,
    )?;
    println!("planning produced {stored} simulated experiences");
    Ok((first, last, stored))
}

#[allow(dead_code)]
fn main() -> scddq::Result<()> {
    run_example().map(|_| ())
}
