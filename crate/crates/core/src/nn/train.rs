use log::debug;

use super::model::{argmax, backward, forward, init_parameters, trace_loss, zero_grads};
use super::optim::sgd_step;
use super::{Checkpoint, EpochStats, ModelConfig, Tensor};
use crate::error::{Error, Result};
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 32,
            learning_rate: 0.01,
            momentum: 0.9,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidTrainConfig(m.to_string()));
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must be in [0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub input: Tensor,
    pub label: usize,
}

/// Mean cross-entropy and accuracy of `checkpoint` over `samples`.
pub fn evaluate(checkpoint: &Checkpoint, samples: &[Sample]) -> Result<EpochStats> {
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut loss = 0.0;
    let mut correct = 0usize;
    for s in samples {
        let trace = forward(checkpoint, &s.input)?;
        loss += trace_loss(&trace, s.label)?;
        correct += usize::from(argmax(trace.probabilities()) == s.label);
    }
    Ok(EpochStats {
        loss: loss / samples.len() as f64,
        accuracy: correct as f64 / samples.len() as f64,
    })
}

/// Mini-batch SGD with momentum on softmax cross-entropy.
///
/// Parameters are initialized from `train_cfg.seed`; each epoch visits the
/// samples in a fresh seeded permutation. Gradients are summed in batch order
/// and averaged, so a given seed always produces the same checkpoint. The
/// recorded loss and accuracy per epoch are taken from the forward passes made
/// during that epoch.
pub fn train(
    config: &ModelConfig,
    samples: &[Sample],
    train_cfg: &TrainConfig,
) -> Result<Checkpoint> {
    train_cfg.validate()?;
    config.shapes()?;
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let (h, w, c) = config.input_shape;
    for (i, s) in samples.iter().enumerate() {
        if s.input.shape() != [h, w, c] {
            return Err(Error::InvalidShape(format!(
                "sample {i} has shape {:?}, model expects {:?}",
                s.input.shape(),
                [h, w, c]
            )));
        }
        if s.label >= config.num_classes {
            return Err(Error::IndexOutOfRange {
                index: s.label,
                len: config.num_classes,
            });
        }
    }

    let mut model = init_parameters(config, train_cfg.seed)?;
    let mut velocity = zero_grads(&model);
    let mut grads = zero_grads(&model);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut rng = SeededRng::derived(train_cfg.seed, 1);

    for epoch in 1..=train_cfg.epochs {
        rng.shuffle(&mut order);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for batch in order.chunks(train_cfg.batch_size) {
            grads
                .iter_mut()
                .for_each(|g| g.iter_mut().for_each(|v| *v = 0.0));
            for &i in batch {
                let s = &samples[i];
                let trace = forward(&model, &s.input)?;
                let loss = trace_loss(&trace, s.label)?;
                if !loss.is_finite() {
                    return Err(Error::Diverged { epoch });
                }
                loss_sum += loss;
                correct += usize::from(argmax(trace.probabilities()) == s.label);
                backward(&model, &trace, s.label, &mut grads)?;
            }
            let scale = 1.0 / batch.len() as f64;
            for ((p, g), v) in model
                .parameters
                .iter_mut()
                .zip(&mut grads)
                .zip(&mut velocity)
            {
                g.iter_mut().for_each(|x| *x *= scale);
                sgd_step(p, g, v, train_cfg.learning_rate, train_cfg.momentum)?;
            }
            if model.parameters.iter().flatten().any(|p| !p.is_finite()) {
                return Err(Error::Diverged { epoch });
            }
        }
        let stats = EpochStats {
            loss: loss_sum / samples.len() as f64,
            accuracy: correct as f64 / samples.len() as f64,
        };
        if !stats.loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        debug!(
            "epoch {epoch}: loss {:.5} accuracy {:.4}",
            stats.loss, stats.accuracy
        );
        model.history.push(stats);
        model.epoch = epoch;
    }
    model.train_config = Some(*train_cfg);
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::LayerSpec;

    fn tiny_config() -> ModelConfig {
        ModelConfig {
            name: "tiny".into(),
            input_shape: (6, 6, 3),
            layers: vec![
                LayerSpec::conv(4, 3, 1, 1),
                LayerSpec::Relu,
                LayerSpec::pool(2, 2),
                LayerSpec::Flatten,
                LayerSpec::dense(3),
                LayerSpec::Softmax,
            ],
            num_classes: 3,
        }
    }

    fn batch(n: usize, seed: u64) -> Vec<Sample> {
        let mut rng = SeededRng::new(seed);
        (0..n)
            .map(|i| Sample {
                input: Tensor::from_vec(vec![6, 6, 3], (0..108).map(|_| rng.unit()).collect())
                    .unwrap(),
                label: i % 3,
            })
            .collect()
    }

    #[test]
    fn overfits_one_batch() {
        let data = batch(8, 1);
        let cfg = TrainConfig {
            epochs: 150,
            batch_size: 8,
            learning_rate: 0.05,
            momentum: 0.9,
            seed: 3,
        };
        let ck = train(&tiny_config(), &data, &cfg).unwrap();
        assert_eq!(evaluate(&ck, &data).unwrap().accuracy, 1.0);
        assert_eq!(ck.history.len(), 150);
        assert_eq!(ck.epoch, 150);
    }

    #[test]
    fn seeded_runs_are_identical() {
        let data = batch(10, 2);
        let cfg = TrainConfig {
            epochs: 3,
            batch_size: 4,
            ..Default::default()
        };
        let a = train(&tiny_config(), &data, &cfg).unwrap();
        let b = train(&tiny_config(), &data, &cfg).unwrap();
        assert_eq!(a.to_bytes().unwrap(), b.to_bytes().unwrap());
        let c = train(&tiny_config(), &data, &TrainConfig { seed: 7, ..cfg }).unwrap();
        assert_ne!(a.parameters, c.parameters);
    }

    #[test]
    fn rejects_bad_inputs() {
        let cfg = TrainConfig::default();
        assert!(matches!(
            train(&tiny_config(), &[], &cfg),
            Err(Error::EmptyDataset)
        ));
        let wrong = vec![Sample {
            input: Tensor::zeros(vec![5, 5, 3]),
            label: 0,
        }];
        assert!(matches!(
            train(&tiny_config(), &wrong, &cfg),
            Err(Error::InvalidShape(_))
        ));
        let mut data = batch(2, 1);
        data[0].label = 9;
        assert!(train(&tiny_config(), &data, &cfg).is_err());
        for bad in [
            TrainConfig { epochs: 0, ..cfg },
            TrainConfig {
                batch_size: 0,
                ..cfg
            },
            TrainConfig {
                learning_rate: 0.0,
                ..cfg
            },
            TrainConfig {
                momentum: 1.0,
                ..cfg
            },
        ] {
            assert!(matches!(
                train(&tiny_config(), &batch(2, 1), &bad),
                Err(Error::InvalidTrainConfig(_))
            ));
        }
    }

    #[test]
    fn overflowing_parameters_report_divergence() {
        let cfg = ModelConfig {
            name: "linear".into(),
            input_shape: (2, 2, 3),
            layers: vec![LayerSpec::Flatten, LayerSpec::dense(3), LayerSpec::Softmax],
            num_classes: 3,
        };
        let mut data = batch(6, 4);
        for s in &mut data {
            s.input = Tensor::from_vec(vec![2, 2, 3], vec![1e150; 12]).unwrap();
        }
        let train_cfg = TrainConfig {
            epochs: 3,
            batch_size: 2,
            learning_rate: 1e200,
            momentum: 0.0,
            seed: 1,
        };
        match train(&cfg, &data, &train_cfg) {
            Err(Error::Diverged { epoch }) => assert_eq!(epoch, 1),
            other => panic!("expected divergence, got {:?}", other.map(|c| c.history)),
        }
    }
}
