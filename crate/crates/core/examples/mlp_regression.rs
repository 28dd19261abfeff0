// Fits a small tanh network to y = sin(x) with RMSProp.

use scddq::nn::{Activation, LossKind, Matrix, MlpModel, ModelSpec, TrainBatch};

pub fn run_example() -> scddq::Result<(f64, f64)> {
    let spec = ModelSpec::build(1, &[16], &[("y", &[], 1, Activation::Linear, LossKind::Mse)]);
    let mut net = MlpModel::new(spec, 11)?;
    let xs: Vec<f64> = (0..32).map(|i| -3.0 + 6.0 * i as f64 / 31.0).collect();
    let inputs = Matrix::from_rows(&xs.iter().map(|x| vec![*x]).collect::<Vec<_>>())?;
    let targets = Matrix::from_rows(&xs.iter().map(|x| vec![x.sin()]).collect::<Vec<_>>())?;
    let batch = TrainBatch::new(inputs, 1).with_target(0, targets);
    let first = net.train_minibatch(&batch, 0.01)?;
    let mut last = first;
    for step in 1..=2000 {
        last = net.train_minibatch(&batch, 0.01)?;
        if step % 500 == 0 {
            println!("step {step:>4}  loss {last:.5}");
        }
    }
    println!("loss {first:.4} -> {last:.5}");
    Ok((first, last))
}

#[allow(dead_code)]
fn main() -> scddq::Result<()> {
    run_example().map(|_| ())
}
