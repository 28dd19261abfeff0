// A short SC-DDQ run on the easy-to-hard schedule, written to a run directory.

use scddq::curriculum::ScheduleName;
use scddq::trainer::{run_experiment, Method, RunConfig};

pub fn run_example(out_dir: &std::path::Path) -> scddq::Result<Vec<f64>> {
    let config = RunConfig {
        method: Method::ScDdq,
        schedule: ScheduleName::Emd,
        seed: 1,
        epochs: 8,
        real_dialogs_per_epoch: 10,
        planning_rounds: 2,
        warm_start_dialogs: 30,
        eval_episodes: 20,
        kb_size: 200,
        out_dir: out_dir.to_path_buf(),
        ..RunConfig::default()
    };
    let out = run_experiment(config)?;
    for e in &out.evals {
        println!(
            "after epoch {:>2} (stage {}, {} goals): success {:.2}, turns {:.1}",
            e.checkpoint_epoch, e.stage, e.level, e.success_rate, e.avg_turns
        );
    }
    if let Some(dir) = &out.run_dir {
        println!("wrote {}", dir.display());
    }
    Ok(out.evals.iter().map(|e| e.success_rate).collect())
}

#[allow(dead_code)]
fn main() -> scddq::Result<()> {
    run_example(std::path::Path::new("runs")).map(|_| ())
}
