// Prints the goal level used in each stage by every named schedule.

use scddq::curriculum::{Schedule, ScheduleName};

pub fn run_example() -> scddq::Result<Vec<String>> {
    let mut lines = Vec::new();
    for name in ScheduleName::NAMED {
        let s = Schedule::named(name)?;
        let levels: Vec<String> = [0, 70, 140, 210]
            .iter()
            .map(|&e| s.stage_for_epoch(e).map(|l| l.to_string()))
            .collect::<scddq::Result<_>>()?;
        let line = format!("{:<7}{}", name, levels.join(" -> "));
        println!("{line}");
        lines.push(line);
    }
    Ok(lines)
}

#[allow(dead_code)]
fn main() -> scddq::Result<()> {
    run_example().map(|_| ())
}
