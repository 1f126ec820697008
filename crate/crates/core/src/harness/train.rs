//! Shared mini-batch training loop with early stopping.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::neural::{Adam, EncodedExample, Graph, ParamStore, TrainingConfig, Var};
use crate::transforms::derive_seed;

/// Per-epoch context handed to the loss builder (for epoch-dependent
/// choices like random answer-occurrence selection).
#[derive(Debug, Clone, Copy)]
pub struct EpochContext {
    pub epoch: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Default)]
pub struct TrainLog {
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub best_dev_metric: f64,
    pub train_loss_per_epoch: Vec<f64>,
    pub dev_metric_per_epoch: Vec<f64>,
}

/// Trains until `max_epochs` or until the dev metric has not improved for
/// `patience` epochs; the best parameters are restored before returning.
/// Single-threaded and fully determined by the config seed.
pub fn train_loop(
    store: &mut ParamStore,
    config: &TrainingConfig,
    train: &[EncodedExample],
    mut example_loss: impl FnMut(&mut Graph, &ParamStore, &EncodedExample, &EpochContext) -> Result<Option<Var>>,
    mut dev_metric: impl FnMut(&ParamStore) -> Result<f64>,
) -> Result<TrainLog> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::Data("training set is empty after filtering".into()));
    }
    let mut adam = Adam::new(config);
    let mut log = TrainLog::default();
    let mut best: Option<(f64, usize, ParamStore)> = None;

    for epoch in 0..config.max_epochs {
        let ctx = EpochContext {
            epoch,
            seed: config.seed,
        };
        let mut order: Vec<usize> = (0..train.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, &format!("shuffle-{epoch}")));
        order.shuffle(&mut rng);

        let mut epoch_loss = 0.0;
        let mut examples_used = 0usize;
        for batch in order.chunks(config.batch_size) {
            store.zero_grads();
            let mut in_batch = 0usize;
            for &i in batch {
                let mut g = Graph::new();
                if let Some(loss) = example_loss(&mut g, store, &train[i], &ctx)? {
                    let value = g.scalar_value(loss);
                    g.backward(loss);
                    g.accumulate_grads(store, 1.0);
                    epoch_loss += value;
                    in_batch += 1;
                }
            }
            if in_batch == 0 {
                continue;
            }
            store.scale_grads(1.0 / in_batch as f64);
            adam.step(store)?;
            examples_used += in_batch;
        }

        let dev = dev_metric(store)?;
        log.epochs_run = epoch + 1;
        log.train_loss_per_epoch
            .push(epoch_loss / examples_used.max(1) as f64);
        log.dev_metric_per_epoch.push(dev);

        let improved = best.as_ref().map_or(true, |(b, _, _)| dev > *b);
        if improved {
            best = Some((dev, epoch, store.clone()));
        } else if let Some((_, best_epoch, _)) = &best {
            if epoch - best_epoch >= config.patience {
                break;
            }
        }
    }

    if let Some((metric, epoch, params)) = best {
        log.best_dev_metric = metric;
        log.best_epoch = epoch;
        *store = params;
    }
    Ok(log)
}
