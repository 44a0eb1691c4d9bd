use std::cmp::Ordering;

/// Patience-based early stopping on a loss that should decrease.
///
/// Only a strict improvement on the best loss so far resets the counter.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    best: Option<f64>,
    wait: usize,
    epoch: usize,
}

impl EarlyStopping {
    /// `patience` below 1 is treated as 1.
    pub fn new(patience: usize) -> Self {
        EarlyStopping { patience: patience.max(1), best: None, wait: 0, epoch: 0 }
    }

    /// Feeds one epoch's loss; returns `true` once training should stop.
    pub fn update(&mut self, loss: f64) -> bool {
        self.epoch += 1;
        match self.best {
            Some(best) if loss.partial_cmp(&best) != Some(Ordering::Less) => self.wait += 1,
            _ => {
                self.best = Some(loss);
                self.wait = 0;
            }
        }
        self.wait >= self.patience
    }

    pub fn best(&self) -> Option<f64> {
        self.best
    }

    pub fn epoch(&self) -> usize {
        self.epoch
    }
}

/// The 1-based epoch at which patience runs out, or `None` if it never does.
pub fn early_stop_epoch(losses: &[f64], patience: usize) -> Option<usize> {
    let mut stopper = EarlyStopping::new(patience);
    losses.iter().position(|&l| stopper.update(l)).map(|i| i + 1)
}
