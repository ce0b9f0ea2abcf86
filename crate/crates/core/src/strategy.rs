//! Policy-mode selection and the three response rules.
//!
//! An agent plays each episode in one of three modes drawn from
//! `σ = (1−η)·π̂ + η·(ρ·β̂ + (1−ρ)·ŝ)`:
//!
//! * **average** (π̂): sample the average-policy network's masked softmax;
//! * **best response** (β̂): ε-greedy over the action-value network;
//! * **gradient play** (ŝ): sample `P_Δ[π + Q_ext·π']`, the Euclidean
//!   projection onto the simplex of the own average policy moved along the
//!   payoff gradient against the opponent's average policy `π'`.
//!
//! `Q_ext` is the m×m matrix whose every column is the (normalized) Q-vector,
//! so `Q_ext·π' = q` for any distribution `π'`. [`QExtMode::Diagonal`] uses
//! `diag(q)` instead, weighting each action value by the opponent's mass on
//! the action with the same index.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest admissible slack `ε` in `ρ ≈ 1 − η + ε`.
pub const MAX_RHO_SLACK: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QExtMode {
    #[default]
    ColumnTiled,
    Diagonal,
}

impl QExtMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "column_tiled" => Ok(QExtMode::ColumnTiled),
            "diagonal" => Ok(QExtMode::Diagonal),
            _ => Err(Error::InvalidConfig(format!("q_ext mode {s:?}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            QExtMode::ColumnTiled => "column_tiled",
            QExtMode::Diagonal => "diagonal",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureConfig {
    /// Probability of leaving the average policy for an episode.
    pub eta: f64,
    /// Probability of β̂ (rather than ŝ) once the average policy is left.
    pub rho: f64,
    pub eps_start: f64,
    pub eps_end: f64,
    pub eps_decay_steps: u64,
    pub q_ext: QExtMode,
}

impl Default for MixtureConfig {
    fn default() -> Self {
        MixtureConfig {
            eta: 0.1,
            rho: 0.92,
            eps_start: 0.9,
            eps_end: 0.02,
            eps_decay_steps: 100_000,
            q_ext: QExtMode::ColumnTiled,
        }
    }
}

impl MixtureConfig {
    /// The slack `ε = ρ − (1 − η)`.
    pub fn rho_slack(&self) -> f64 {
        self.rho - (1.0 - self.eta)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} = {v} outside [0, 1]")))
            }
        };
        unit("eta", self.eta)?;
        unit("rho", self.rho)?;
        unit("eps_start", self.eps_start)?;
        unit("eps_end", self.eps_end)?;
        let slack = self.rho_slack();
        if !(-1e-12..=MAX_RHO_SLACK + 1e-12).contains(&slack) {
            return Err(Error::InvalidConfig(format!(
                "rho = {} must lie in [1 - eta, 1 - eta + {MAX_RHO_SLACK}] for eta = {}",
                self.rho, self.eta
            )));
        }
        Ok(())
    }

    /// Exploration rate after `step` environment steps: linear decay.
    pub fn epsilon_at(&self, step: u64) -> f64 {
        if self.eps_decay_steps == 0 || step >= self.eps_decay_steps {
            return self.eps_end;
        }
        let frac = step as f64 / self.eps_decay_steps as f64;
        self.eps_start + (self.eps_end - self.eps_start) * frac
    }

    /// `(P(average), P(best response), P(gradient play))`
    pub fn mode_probabilities(&self) -> [f64; 3] {
        [1.0 - self.eta, self.eta * self.rho, self.eta * (1.0 - self.rho)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PolicyMode {
    Average,
    BestResponse,
    GradientPlay,
}

impl fmt::Display for PolicyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyMode::Average => "average",
            PolicyMode::BestResponse => "best_response",
            PolicyMode::GradientPlay => "gradient_play",
        })
    }
}

/// Draws the episode's mode from a single uniform variate.
pub fn choose_policy_mode(config: &MixtureConfig, rng: &mut impl Rng) -> PolicyMode {
    let u: f64 = rng.random();
    let [avg, br, _] = config.mode_probabilities();
    if u < avg {
        PolicyMode::Average
    } else if u < avg + br {
        PolicyMode::BestResponse
    } else {
        PolicyMode::GradientPlay
    }
}

/// A point of the probability simplex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionDistribution(Vec<f64>);

impl ActionDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let sum: f64 = probs.iter().sum();
        if probs.is_empty() || probs.iter().any(|p| !p.is_finite() || *p < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("{probs:?} is not a distribution")));
        }
        Ok(ActionDistribution(probs))
    }

    pub fn uniform(n: usize) -> Self {
        ActionDistribution(vec![1.0 / n as f64; n])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sample(&self, rng: &mut impl Rng) -> usize {
        sample_index(&self.0, rng)
    }
}

/// Inverse-CDF sample; the last positive entry absorbs rounding.
pub fn sample_index(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Euclidean projection onto the probability simplex (sort and threshold).
pub fn project_simplex(x: &[f64]) -> Result<ActionDistribution> {
    if x.is_empty() {
        return Err(Error::InvalidInput("cannot project an empty vector".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("simplex projection input"));
    }
    // Points already on the simplex up to rounding are returned unchanged,
    // which makes the projection exactly idempotent.
    let sum: f64 = x.iter().sum();
    if x.iter().all(|&v| v >= 0.0) && (sum - 1.0).abs() <= 4.0 * x.len() as f64 * f64::EPSILON {
        return Ok(ActionDistribution(x.to_vec()));
    }
    let mut u = x.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    Ok(ActionDistribution(x.iter().map(|&v| (v - theta).max(0.0)).collect()))
}

fn check_mask(mask: &[bool]) -> Result<()> {
    if !mask.iter().any(|&m| m) {
        return Err(Error::IllegalAction("no legal action".into()));
    }
    Ok(())
}

/// ε-greedy action: the lowest-index legal argmax with probability `1 − ε`,
/// otherwise a uniform legal action.
pub fn greedy_beta(qvals: &[f64], mask: &[bool], epsilon: f64, rng: &mut impl Rng) -> Result<usize> {
    check_mask(mask)?;
    if qvals.len() != mask.len() {
        return Err(Error::ShapeMismatch {
            expected: mask.len(),
            actual: qvals.len(),
        });
    }
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        let legal: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
        return Ok(legal[rng.random_range(0..legal.len())]);
    }
    Ok(legal_argmax(qvals, mask))
}

pub fn legal_argmax(values: &[f64], mask: &[bool]) -> usize {
    let mut best = None;
    for (i, &v) in values.iter().enumerate() {
        if mask[i] && best.is_none_or(|(_, bv)| v > bv) {
            best = Some((i, v));
        }
    }
    best.expect("at least one legal action").0
}

/// Softmax over legal entries; illegal entries get exactly zero.
pub fn masked_softmax(logits: &[f64], mask: &[bool]) -> Result<ActionDistribution> {
    check_mask(mask)?;
    if logits.len() != mask.len() {
        return Err(Error::ShapeMismatch {
            expected: mask.len(),
            actual: logits.len(),
        });
    }
    let max = logits
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(&l, _)| l)
        .fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits
        .iter()
        .zip(mask)
        .map(|(&l, &m)| if m { (l - max).exp() } else { 0.0 })
        .collect();
    let z: f64 = exps.iter().sum();
    Ok(ActionDistribution(exps.into_iter().map(|e| e / z).collect()))
}

/// Samples from the average policy's masked softmax.
pub fn average_pi(logits: &[f64], mask: &[bool], rng: &mut impl Rng) -> Result<usize> {
    Ok(masked_softmax(logits, mask)?.sample(rng))
}

/// `Q_ext · π'` for the configured construction of `Q_ext`.
pub fn q_ext_times(qvals: &[f64], opp_probs: &[f64], mode: QExtMode) -> Vec<f64> {
    let m = qvals.len();
    match mode {
        QExtMode::ColumnTiled => (0..m)
            .map(|row| (0..m).map(|col| qvals[row] * opp_probs[col]).sum())
            .collect(),
        QExtMode::Diagonal => (0..m).map(|i| qvals[i] * opp_probs[i]).collect(),
    }
}

/// The gradient-play distribution `S`, restricted to legal actions.
///
/// Q-values are zeroed on illegal actions and scaled by `1 / max(1, max|q|)`
/// before entering the projection.
pub fn gradient_play_distribution(
    pi_probs: &ActionDistribution,
    qvals: &[f64],
    opp_pi_probs: &ActionDistribution,
    mask: &[bool],
    mode: QExtMode,
) -> Result<ActionDistribution> {
    check_mask(mask)?;
    let m = mask.len();
    for len in [pi_probs.len(), qvals.len(), opp_pi_probs.len()] {
        if len != m {
            return Err(Error::ShapeMismatch { expected: m, actual: len });
        }
    }
    if qvals.iter().any(|q| !q.is_finite()) {
        return Err(Error::NonFinite("q-values"));
    }
    let scale = qvals
        .iter()
        .zip(mask)
        .filter(|(_, &l)| l)
        .fold(1.0f64, |acc, (q, _)| acc.max(q.abs()));
    let q: Vec<f64> = qvals
        .iter()
        .zip(mask)
        .map(|(&v, &l)| if l { v / scale } else { 0.0 })
        .collect();
    let drift = q_ext_times(&q, opp_pi_probs.probs(), mode);
    let x: Vec<f64> = pi_probs.probs().iter().zip(&drift).map(|(p, d)| p + d).collect();
    let s = project_simplex(&x)?;
    let masked: Vec<f64> = s.probs().iter().zip(mask).map(|(&p, &l)| if l { p } else { 0.0 }).collect();
    let total: f64 = masked.iter().sum();
    if total > 0.0 {
        return Ok(ActionDistribution(masked.into_iter().map(|p| p / total).collect()));
    }
    // All projected mass landed on illegal actions: project the legal part alone.
    let legal: Vec<usize> = (0..m).filter(|&i| mask[i]).collect();
    let sub = project_simplex(&legal.iter().map(|&i| x[i]).collect::<Vec<_>>())?;
    let mut out = vec![0.0; m];
    for (k, &i) in legal.iter().enumerate() {
        out[i] = sub.probs()[k];
    }
    Ok(ActionDistribution(out))
}

/// Samples an action from the gradient-play distribution.
pub fn gradient_play_s(
    pi_probs: &ActionDistribution,
    qvals: &[f64],
    opp_pi_probs: &ActionDistribution,
    mask: &[bool],
    mode: QExtMode,
    rng: &mut impl Rng,
) -> Result<usize> {
    Ok(gradient_play_distribution(pi_probs, qvals, opp_pi_probs, mask, mode)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn projection_examples() {
        assert!(close(project_simplex(&[0.5, 0.5]).unwrap().probs(), &[0.5, 0.5]));
        assert!(close(project_simplex(&[1.2, -0.2]).unwrap().probs(), &[1.0, 0.0]));
        let third = 1.0 / 3.0;
        assert!(close(project_simplex(&[0.4, 0.4, 0.4]).unwrap().probs(), &[third; 3]));
        assert!(project_simplex(&[f64::NAN, 1.0]).is_err());
    }

    #[test]
    fn greedy_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let q = [1.0, 5.0, 3.0, 2.0, 0.0];
        assert_eq!(greedy_beta(&q, &[true; 5], 0.0, &mut rng).unwrap(), 1);
        let mask = [true, false, true, true, true];
        assert_eq!(greedy_beta(&q, &mask, 0.0, &mut rng).unwrap(), 2);
        assert_eq!(greedy_beta(&[1.0, 1.0], &[true, true], 0.0, &mut rng).unwrap(), 0);
        assert!(greedy_beta(&q, &[false; 5], 0.0, &mut rng).is_err());
    }

    #[test]
    fn average_single_legal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mask = [false, false, true, false, false];
        for _ in 0..100 {
            assert_eq!(average_pi(&[9.0, 3.0, -4.0, 0.0, 1.0], &mask, &mut rng).unwrap(), 2);
        }
        assert!(average_pi(&[0.0; 5], &[false; 5], &mut rng).is_err());
    }

    #[test]
    fn gradient_play_examples() {
        let pi = ActionDistribution::new(vec![0.2, 0.3, 0.5]).unwrap();
        let opp = ActionDistribution::new(vec![0.6, 0.4, 0.0]).unwrap();
        let s = gradient_play_distribution(&pi, &[0.0; 3], &opp, &[true; 3], QExtMode::ColumnTiled).unwrap();
        assert!(close(s.probs(), pi.probs()));

        let pi = ActionDistribution::uniform(2);
        let opp = ActionDistribution::uniform(2);
        let s = gradient_play_distribution(&pi, &[1.0, -1.0], &opp, &[true; 2], QExtMode::ColumnTiled).unwrap();
        assert!(close(s.probs(), &[1.0, 0.0]));
    }

    #[test]
    fn gradient_play_masks() {
        let pi = ActionDistribution::new(vec![0.0, 0.5, 0.5]).unwrap();
        let opp = ActionDistribution::uniform(3);
        let mask = [false, true, true];
        let s = gradient_play_distribution(&pi, &[50.0, -3.0, -4.0], &opp, &mask, QExtMode::ColumnTiled).unwrap();
        assert_eq!(s.probs()[0], 0.0);
        assert!((s.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn column_tiling_identity() {
        let q = [0.3, -1.2, 2.0];
        for opp in [[1.0, 0.0, 0.0], [0.2, 0.3, 0.5], [0.0, 0.0, 1.0]] {
            let v = q_ext_times(&q, &opp, QExtMode::ColumnTiled);
            assert!(close(&v, &q));
        }
        assert!(close(&q_ext_times(&q, &[0.5, 0.5, 0.0], QExtMode::Diagonal), &[0.15, -0.6, 0.0]));
    }

    #[test]
    fn mixture_config() {
        let c = MixtureConfig::default();
        c.validate().unwrap();
        let [a, b, g] = c.mode_probabilities();
        assert!((a - 0.9).abs() < 1e-12 && (b - 0.092).abs() < 1e-12 && (g - 0.008).abs() < 1e-12);
        let bad = MixtureConfig { rho: 0.95, ..c.clone() };
        assert!(bad.validate().is_err());
        let bad = MixtureConfig { rho: 0.89, ..c.clone() };
        assert!(bad.validate().is_err());
        assert_eq!(c.epsilon_at(0), 0.9);
        assert_eq!(c.epsilon_at(200_000), 0.02);
        assert!((c.epsilon_at(50_000) - 0.46).abs() < 1e-12);
    }

    #[test]
    fn eta_zero_is_always_average() {
        let c = MixtureConfig { eta: 0.0, rho: 1.0, ..Default::default() };
        c.validate().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            assert_eq!(choose_policy_mode(&c, &mut rng), PolicyMode::Average);
        }
    }
}
