// Shows curiosity values shrinking as the model learns a transition it keeps seeing.

use scddq::agent::Experience;
use scddq::curiosity::CuriosityModel;
use scddq::dialog::{StateVector, STATE_DIM};

pub fn run_example() -> scddq::Result<(f64, f64)> {
    let mut state = vec![0.0; STATE_DIM];
    let mut next = vec![0.0; STATE_DIM];
    for i in [0, 20, 45, 90] {
        state[i] = 1.0;
    }
    for i in [1, 20, 50, 91, 126] {
        next[i] = 1.0;
    }
    let exp = Experience {
        state: StateVector(state),
        action: 4,
        reward: -1.0,
        user_action: 0,
        next_state: StateVector(next),
        done: false,
    };
    let mut cm = CuriosityModel::new(9)?;
    let before = cm.curiosity_values(&exp.state)?[exp.action];
    let batch = vec![&exp; 16];
    for step in 1..=1000 {
        cm.train_on(&batch)?;
        if step % 250 == 0 {
            println!("step {step:>4}  c(s,a) = {:.4}", cm.curiosity_values(&exp.state)?[exp.action]);
        }
    }
    let after = cm.curiosity_values(&exp.state)?[exp.action];
    println!("curiosity {before:.4} -> {after:.4}");
    Ok((before, after))
}

#[allow(dead_code)]
fn main() -> scddq::Result<()> {
    run_example().map(|_| ())
}
