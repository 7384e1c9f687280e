//! Deterministic trainers.
//!
//! Initialization randomness and mini-batch shuffling randomness come from
//! two independent streams keyed by `init_seed` and `shuffle_seed`, so the
//! two sources can be varied separately. Given identical seeds a run is
//! bit-reproducible: the final weights of two such runs compare equal as raw
//! `f32` buffers.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{CoreError, Result};
use crate::metrics;
use crate::net::{self, NetworkSpec, WeightVector};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    Sgd,
    Adam {
        beta1: f64,
        beta2: f64,
        epsilon: f64,
    },
}

impl Optimizer {
    /// Adam with the usual (0.9, 0.999, 1e-8) constants.
    pub fn adam() -> Self {
        Optimizer::Adam {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LrSchedule {
    Constant,
    /// Halve the learning rate every `k` epochs.
    HalveEvery(usize),
}

impl LrSchedule {
    /// Learning rate during `epoch` (0-based).
    pub fn rate(&self, lr0: f64, epoch: usize) -> f64 {
        match self {
            LrSchedule::Constant => lr0,
            LrSchedule::HalveEvery(k) => lr0 * 0.5f64.powi((epoch / k) as i32),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub optimizer: Optimizer,
    pub lr0: f64,
    pub lr_schedule: LrSchedule,
    pub epochs: usize,
    pub batch_size: usize,
    pub l2: f64,
    pub init_seed: u64,
    pub shuffle_seed: u64,
    /// Checkpoint cadence in optimizer steps; 0 means one tenth of an
    /// epoch's steps.
    pub checkpoint_every: usize,
}

impl TrainConfig {
    /// Adam at 1.6e-3 halved every 10 epochs, the similarity-study setup.
    pub fn default_adam(epochs: usize, batch_size: usize) -> Self {
        TrainConfig {
            optimizer: Optimizer::adam(),
            lr0: 1.6e-3,
            lr_schedule: LrSchedule::HalveEvery(10),
            epochs,
            batch_size,
            l2: 0.0,
            init_seed: 0,
            shuffle_seed: 0,
            checkpoint_every: 0,
        }
    }

    fn validate(&self, train_size: usize) -> Result<()> {
        if self.epochs == 0 {
            return Err(CoreError::invalid("epochs must be >= 1"));
        }
        if self.batch_size == 0 || self.batch_size > train_size {
            return Err(CoreError::invalid(alloc::format!(
                "batch_size {} must be in [1, {train_size}]",
                self.batch_size
            )));
        }
        if !(self.lr0 > 0.0) {
            return Err(CoreError::invalid("lr0 must be positive"));
        }
        if self.l2 < 0.0 {
            return Err(CoreError::invalid("l2 must be non-negative"));
        }
        if let LrSchedule::HalveEvery(0) = self.lr_schedule {
            return Err(CoreError::invalid("halve_every period must be >= 1"));
        }
        Ok(())
    }

    /// Steps per epoch (partial final mini-batch included).
    pub fn steps_per_epoch(&self, train_size: usize) -> usize {
        train_size.div_ceil(self.batch_size)
    }

    /// Resolves `checkpoint_every == 0` to the default cadence.
    pub fn checkpoint_stride(&self, train_size: usize) -> usize {
        if self.checkpoint_every > 0 {
            self.checkpoint_every
        } else {
            (self.steps_per_epoch(train_size) / 10).max(1)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub step: usize,
    pub epoch: usize,
    pub weights: WeightVector,
    /// Full training-split loss (data term plus L2) at this step.
    pub train_loss: f64,
    pub val_accuracy: f64,
}

/// Ordered checkpoints of one training run; the last entry is the final
/// state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub config: TrainConfig,
    pub checkpoints: Vec<Checkpoint>,
}

impl Trajectory {
    pub fn final_checkpoint(&self) -> &Checkpoint {
        self.checkpoints.last().expect("trajectory is non-empty")
    }

    pub fn final_weights(&self) -> &WeightVector {
        &self.final_checkpoint().weights
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedMode {
    VaryBoth,
    VaryInitOnly,
    VaryShuffleOnly,
}

/// Member config with seeds offset by the member index per the seed mode.
pub fn member_config(base: &TrainConfig, mode: SeedMode, member: u64) -> TrainConfig {
    let mut cfg = *base;
    match mode {
        SeedMode::VaryBoth => {
            cfg.init_seed = base.init_seed.wrapping_add(member);
            cfg.shuffle_seed = base.shuffle_seed.wrapping_add(member);
        }
        SeedMode::VaryInitOnly => {
            cfg.init_seed = base.init_seed.wrapping_add(member);
        }
        SeedMode::VaryShuffleOnly => {
            cfg.shuffle_seed = base.shuffle_seed.wrapping_add(member);
        }
    }
    cfg
}

struct AdamState {
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

/// Trains one network, recording checkpoints every `checkpoint_stride`
/// steps plus the final state.
pub fn train(spec: &NetworkSpec, config: &TrainConfig, dataset: &Dataset) -> Result<Trajectory> {
    let train_size = dataset.splits().train.len();
    config.validate(train_size)?;

    let mut init_rng = rng::stream(config.init_seed, rng::domain::INIT);
    let mut shuffle_rng = rng::stream(config.shuffle_seed, rng::domain::SHUFFLE);
    let mut weights = net::init_weights(spec, &mut init_rng);

    let mut adam = match config.optimizer {
        Optimizer::Adam { .. } => Some(AdamState {
            m: alloc::vec![0.0; weights.len()],
            v: alloc::vec![0.0; weights.len()],
            t: 0,
        }),
        Optimizer::Sgd => None,
    };

    let stride = config.checkpoint_stride(train_size);
    let mut order: Vec<usize> = dataset.splits().train.clone();
    let mut checkpoints = Vec::new();
    let mut step = 0usize;

    for epoch in 0..config.epochs {
        let lr = config.lr_schedule.rate(config.lr0, epoch);
        rng::shuffle(&mut shuffle_rng, &mut order);
        for chunk in order.chunks(config.batch_size) {
            let (batch, labels) = dataset.gather(chunk);
            let batch_view = batch.view();
            let (loss, grad) = net::loss_and_grad(spec, &weights, &batch_view, &labels, config.l2)
                .map_err(|e| match e {
                    CoreError::NonFinite { .. } => CoreError::Diverged { step: step + 1 },
                    other => other,
                })?;
            if !loss.is_finite() {
                return Err(CoreError::Diverged { step: step + 1 });
            }
            step += 1;
            apply_update(&mut weights, &grad, lr, &config.optimizer, adam.as_mut());
            if step % stride == 0 {
                checkpoints.push(evaluate_checkpoint(spec, config, dataset, &weights, step, epoch)?);
            }
        }
    }
    // The final state is always recorded (no duplicate if the last step hit
    // the stride).
    if checkpoints.last().map(|c| c.step) != Some(step) {
        checkpoints.push(evaluate_checkpoint(
            spec,
            config,
            dataset,
            &weights,
            step,
            config.epochs - 1,
        )?);
    }
    Ok(Trajectory {
        config: *config,
        checkpoints,
    })
}

fn evaluate_checkpoint(
    spec: &NetworkSpec,
    config: &TrainConfig,
    dataset: &Dataset,
    weights: &WeightVector,
    step: usize,
    epoch: usize,
) -> Result<Checkpoint> {
    let (train_batch, train_labels) = dataset.split_data(crate::data::Split::Train);
    let (loss, _) = net::loss_and_grad(spec, weights, &train_batch.view(), &train_labels, config.l2)?;
    let (val_batch, val_labels) = dataset.split_data(crate::data::Split::Val);
    let preds = net::forward(spec, weights, &val_batch.view())?;
    let val_accuracy = metrics::accuracy(&preds, &val_labels)?;
    Ok(Checkpoint {
        step,
        epoch,
        weights: weights.clone(),
        train_loss: loss,
        val_accuracy,
    })
}

fn apply_update(
    weights: &mut WeightVector,
    grad: &WeightVector,
    lr: f64,
    optimizer: &Optimizer,
    adam: Option<&mut AdamState>,
) {
    match optimizer {
        Optimizer::Sgd => {
            for (w, &g) in weights.values_mut().iter_mut().zip(grad.values().iter()) {
                *w = (f64::from(*w) - lr * f64::from(g)) as f32;
            }
        }
        Optimizer::Adam {
            beta1,
            beta2,
            epsilon,
        } => {
            let state = adam.expect("adam state allocated for adam runs");
            state.t += 1;
            let bc1 = 1.0 - beta1.powi(state.t as i32);
            let bc2 = 1.0 - beta2.powi(state.t as i32);
            for ((w, &g), (m, v)) in weights
                .values_mut()
                .iter_mut()
                .zip(grad.values().iter())
                .zip(state.m.iter_mut().zip(state.v.iter_mut()))
            {
                let g = f64::from(g);
                *m = beta1 * *m + (1.0 - beta1) * g;
                *v = beta2 * *v + (1.0 - beta2) * g * g;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *w = (f64::from(*w) - lr * m_hat / (v_hat.sqrt() + epsilon)) as f32;
            }
        }
    }
}

/// Trains `members` networks with seeds derived per `mode`; member 0 equals
/// the base configuration. Members run sequentially here; callers that want
/// parallelism schedule members as independent jobs.
pub fn train_ensemble(
    spec: &NetworkSpec,
    base_config: &TrainConfig,
    dataset: &Dataset,
    members: usize,
    mode: SeedMode,
) -> Result<Vec<Trajectory>> {
    if members == 0 {
        return Err(CoreError::invalid("ensemble needs at least one member"));
    }
    let mut out = Vec::with_capacity(members);
    for m in 0..members {
        let cfg = member_config(base_config, mode, m as u64);
        let traj = train(spec, &cfg, dataset).map_err(|e| CoreError::Member {
            index: m,
            source: alloc::boxed::Box::new(e),
        })?;
        out.push(traj);
    }
    Ok(out)
}

/// Coordinate-wise mean of the last `last_k` checkpoint weight vectors.
pub fn weight_average(traj: &Trajectory, last_k: usize) -> Result<WeightVector> {
    let n = traj.checkpoints.len();
    if last_k == 0 {
        return Err(CoreError::invalid("weight averaging needs last_k >= 1"));
    }
    if last_k > n {
        return Err(CoreError::invalid(alloc::format!(
            "last_k {last_k} exceeds {n} stored checkpoints"
        )));
    }
    let dim = traj.final_weights().len();
    let mut acc = alloc::vec![0.0f64; dim];
    for cp in &traj.checkpoints[n - last_k..] {
        for (a, &w) in acc.iter_mut().zip(cp.weights.values().iter()) {
            *a += f64::from(w);
        }
    }
    let inv = 1.0 / last_k as f64;
    let mut avg = traj.final_weights().clone();
    for (w, &a) in avg.values_mut().iter_mut().zip(acc.iter()) {
        *w = (a * inv) as f32;
    }
    Ok(avg)
}
