use super::{Network, Real};
use crate::{Error, Result};

/// Adaptive-moment optimizer state for one network.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(lr: f64, num_params: usize) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// Applies one update. A gradient of the wrong length or with non-finite
    /// entries is rejected before anything changes; a step that produces a
    /// non-finite parameter is reported as an error.
    pub fn step<R: Real>(&mut self, net: &mut Network<R>, grads: &[R]) -> Result<()> {
        if grads.len() != net.num_params() || self.m.len() != grads.len() {
            return Err(Error::ShapeMismatch {
                expected: net.num_params(),
                actual: grads.len(),
            });
        }
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFinite("gradient"));
        }
        self.t += 1;
        let t = self.t as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        let step = self.lr * c2.sqrt() / c1;
        for (i, (p, g)) in net.params_mut().iter_mut().zip(grads).enumerate() {
            let g = g.to_f64();
            if g == 0.0 && self.m[i] == 0.0 && self.v[i] == 0.0 {
                continue;
            }
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            *p += R::from_f64(-step * self.m[i] / (self.v[i].sqrt() + self.eps));
        }
        if !net.all_finite() {
            return Err(Error::NonFinite("parameters after update"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::NetworkSpec;

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let mut net = Network::<f32>::new(NetworkSpec::mlp(2, &[3], 2), 1).unwrap();
        let before = net.clone();
        let mut opt = Adam::new(1e-3, net.num_params());
        let zeros = vec![0.0; net.num_params()];
        opt.step(&mut net, &zeros).unwrap();
        assert_eq!(net, before);
        assert!(opt.step(&mut net, &[0.0]).is_err());
    }
}
