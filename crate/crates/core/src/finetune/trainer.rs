//! Stand-in trainer producing synthetic loss curves. It exists to drive the
//! result-logging and reporting path end to end without a real model.

use super::config::ExperimentSpec;
use super::results::ExperimentResult;
use super::sampling::SampleRng;
use super::EarlyStopping;

/// Emits a non-increasing eval-loss curve per epoch: an exponential decay
/// toward a floor that drops with `qa_size`, flattening after a
/// seed-dependent number of epochs. Training stops early under the spec's
/// patience exactly as a real run would.
#[derive(Debug, Clone, Copy)]
pub struct SyntheticTrainer {
    pub start_loss: f64,
}

impl Default for SyntheticTrainer {
    fn default() -> Self {
        SyntheticTrainer { start_loss: 15.0 }
    }
}

impl SyntheticTrainer {
    pub fn run(&self, spec: &ExperimentSpec) -> ExperimentResult {
        let mut rng = SampleRng::new(spec.seed ^ (spec.qa_size as u64).rotate_left(32));
        let floor = self.start_loss * (1.0 - 0.1 * (spec.qa_size as f64).ln().max(0.0)).max(0.2);
        let improving_epochs = 1 + rng.below(spec.hyper.epochs as u64) as usize;
        let mut stopper = EarlyStopping::new(spec.hyper.early_stop_patience);
        let mut losses = Vec::new();
        let mut loss = self.start_loss;
        for epoch in 1..=spec.hyper.epochs {
            if epoch <= improving_epochs {
                loss = floor + (loss - floor) * 0.5;
            }
            losses.push(loss);
            if stopper.update(loss) {
                break;
            }
        }
        ExperimentResult::from_losses(spec.clone(), losses)
    }
}
