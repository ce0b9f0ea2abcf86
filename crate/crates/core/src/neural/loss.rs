use super::{softmax, Network, Real};
use crate::{Error, Result};

/// Transitions laid out for one Q update. Inputs are concatenated rows.
#[derive(Clone, Debug, Default)]
pub struct QBatch<R: Real> {
    pub states: Vec<R>,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
    pub next_states: Vec<R>,
    pub terminal: Vec<bool>,
    /// Bit `i` set when action `i` is legal at the next state.
    pub next_legal: Vec<u32>,
}

impl<R: Real> QBatch<R> {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

#[derive(Clone, Debug, Default)]
pub struct PolicyBatch<R: Real> {
    pub states: Vec<R>,
    pub actions: Vec<usize>,
}

impl<R: Real> PolicyBatch<R> {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct LossOutput<R: Real> {
    pub loss: f64,
    pub grads: Vec<R>,
}

fn check_actions(actions: &[usize], outputs: usize) -> Result<()> {
    match actions.iter().find(|&&a| a >= outputs) {
        Some(a) => Err(Error::InvalidInput(format!("action {a} outside 0..{outputs}"))),
        None => Ok(()),
    }
}

fn check_rows<R: Real>(rows: &[R], n: usize, width: usize) -> Result<()> {
    if rows.len() != n * width {
        return Err(Error::ShapeMismatch {
            expected: n * width,
            actual: rows.len(),
        });
    }
    Ok(())
}

/// Bootstrap targets `r + γ·Q'(s', argmax_a Q(s', a))`, or `r` at terminals.
/// The argmax runs over the actions legal at `s'`.
fn q_targets<R: Real>(q: &Network<R>, q_target: &Network<R>, batch: &QBatch<R>, gamma: f64) -> Result<Vec<f64>> {
    let n = batch.len();
    let width = q.input_len();
    let m = q.output_len();
    let open: Vec<usize> = (0..n).filter(|&i| !batch.terminal[i]).collect();
    let mut targets = batch.rewards.clone();
    if open.is_empty() {
        return Ok(targets);
    }
    let mut next = Vec::with_capacity(open.len() * width);
    for &i in &open {
        next.extend_from_slice(&batch.next_states[i * width..(i + 1) * width]);
    }
    let online = q.forward_batch(&next, open.len())?;
    let frozen = q_target.forward_batch(&next, open.len())?;
    for (row, &i) in open.iter().enumerate() {
        let legal = batch.next_legal[i];
        let best = (0..m)
            .filter(|&a| legal >> a & 1 == 1)
            .max_by(|&a, &b| {
                online[row * m + a]
                    .partial_cmp(&online[row * m + b])
                    .unwrap_or(std::cmp::Ordering::Equal)
                    // Prefer the lower index on ties.
                    .then(b.cmp(&a))
            })
            .ok_or_else(|| Error::InvalidInput(format!("transition {i} has no legal next action")))?;
        targets[i] += gamma * frozen[row * m + best].to_f64();
    }
    Ok(targets)
}

/// Mean squared Bellman error of `q` on the batch, with double-Q targets
/// from `q_target`; gradients are with respect to `q` only.
pub fn q_loss_batch<R: Real>(q: &Network<R>, q_target: &Network<R>, batch: &QBatch<R>, gamma: f64) -> Result<LossOutput<R>> {
    let n = batch.len();
    if n == 0 {
        return Err(Error::EmptyBatch);
    }
    if q.spec() != q_target.spec() {
        return Err(Error::InvalidConfig("online and target networks differ in shape".into()));
    }
    let width = q.input_len();
    let m = q.output_len();
    check_actions(&batch.actions, m)?;
    check_rows(&batch.states, n, width)?;
    check_rows(&batch.next_states, n, width)?;
    for len in [batch.rewards.len(), batch.terminal.len(), batch.next_legal.len()] {
        if len != n {
            return Err(Error::ShapeMismatch { expected: n, actual: len });
        }
    }
    let targets = q_targets(q, q_target, batch, gamma)?;
    let trace = q.forward_trace(&batch.states, n)?;
    let out = trace.output();
    let mut d_out = vec![R::ZERO; n * m];
    let mut loss = 0.0;
    for (i, (&a, &t)) in batch.actions.iter().zip(&targets).enumerate() {
        let k = i * m + a;
        let err = out[k].to_f64() - t;
        loss += err * err;
        d_out[k] = R::from_f64(2.0 * err / n as f64);
    }
    let mut grads = vec![R::ZERO; q.num_params()];
    q.backward(&trace, &d_out, &mut grads)?;
    Ok(LossOutput {
        loss: loss / n as f64,
        grads,
    })
}

/// Mean cross-entropy between the one-hot recorded action and the softmax
/// of the logits, which equals their KL divergence.
pub fn policy_loss_batch<R: Real>(pi: &Network<R>, batch: &PolicyBatch<R>) -> Result<LossOutput<R>> {
    let n = batch.len();
    if n == 0 {
        return Err(Error::EmptyBatch);
    }
    let m = pi.output_len();
    check_actions(&batch.actions, m)?;
    check_rows(&batch.states, n, pi.input_len())?;
    let trace = pi.forward_trace(&batch.states, n)?;
    let logits: Vec<f64> = trace.output().iter().map(|v| v.to_f64()).collect();
    let mut d_out = vec![R::ZERO; n * m];
    let mut loss = 0.0;
    for i in 0..n {
        let p = softmax(&logits[i * m..(i + 1) * m]);
        let a = batch.actions[i];
        loss -= p[a].max(f64::MIN_POSITIVE).ln();
        for k in 0..m {
            let onehot = if k == a { 1.0 } else { 0.0 };
            d_out[i * m + k] = R::from_f64((p[k] - onehot) / n as f64);
        }
    }
    let mut grads = vec![R::ZERO; pi.num_params()];
    pi.backward(&trace, &d_out, &mut grads)?;
    Ok(LossOutput {
        loss: loss / n as f64,
        grads,
    })
}
