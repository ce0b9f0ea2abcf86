use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{matmul, LayerSpec, NetworkSpec, Real};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
struct Plan {
    layer: LayerSpec,
    input: [usize; 3],
    output: [usize; 3],
    /// Offset of the weights; the bias follows them directly.
    offset: usize,
    weights: usize,
    biases: usize,
    /// Followed by a rectifier (changes only the initialization scale).
    rectified: bool,
}

impl Plan {
    fn in_len(&self) -> usize {
        self.input.iter().product()
    }

    fn out_len(&self) -> usize {
        self.output.iter().product()
    }
}

/// A feed-forward network with a linear head.
#[derive(Clone, Debug, PartialEq)]
pub struct Network<R: Real = f32> {
    spec: NetworkSpec,
    plans: Vec<Plan>,
    params: Vec<R>,
}

/// Activations of a batched forward pass, kept for backpropagation.
#[derive(Clone, Debug)]
pub struct Trace<R: Real> {
    batch: usize,
    /// `acts[0]` is the input and `acts[i + 1]` the output of layer `i`.
    acts: Vec<Vec<R>>,
    /// Argmax input offsets of each pooling output (empty for other layers).
    pool_index: Vec<Vec<u32>>,
}

impl<R: Real> Trace<R> {
    pub fn batch(&self) -> usize {
        self.batch
    }

    /// Head outputs, `batch × outputs` row-major.
    pub fn output(&self) -> &[R] {
        self.acts.last().expect("trace has an input")
    }
}

fn build_plans(spec: &NetworkSpec) -> Result<(Vec<Plan>, usize)> {
    let shapes = spec.shapes()?;
    let mut layers = spec.layers.clone();
    layers.push(LayerSpec::Dense { width: spec.outputs });
    let mut plans = Vec::with_capacity(layers.len());
    let mut input = spec.input;
    let mut offset = 0;
    for (i, (&layer, &output)) in layers.iter().zip(&shapes).enumerate() {
        let (weights, biases) = match layer {
            LayerSpec::Conv { filters, kernel, .. } => (kernel * kernel * input[2] * filters, filters),
            LayerSpec::Dense { width } => (input.iter().product::<usize>() * width, width),
            LayerSpec::MaxPool { .. } | LayerSpec::Relu => (0, 0),
        };
        let rectified = layers.get(i + 1) == Some(&LayerSpec::Relu);
        plans.push(Plan {
            layer,
            input,
            output,
            offset,
            weights,
            biases,
            rectified,
        });
        offset += weights + biases;
        input = output;
    }
    Ok((plans, offset))
}

/// Copies receptive fields into rows: `cols[(b, oy, ox)][(ky, kx, c)]`.
fn im2col<R: Real>(input: &[R], batch: usize, plan: &Plan, kernel: usize, stride: usize, cols: &mut [R]) {
    let [h, w, c] = plan.input;
    let [ho, wo, _] = plan.output;
    let k_len = kernel * kernel * c;
    let mut row = 0;
    for b in 0..batch {
        let base = b * h * w * c;
        for oy in 0..ho {
            for ox in 0..wo {
                let dst = &mut cols[row * k_len..(row + 1) * k_len];
                for ky in 0..kernel {
                    let src = base + ((oy * stride + ky) * w + ox * stride) * c;
                    let d = ky * kernel * c;
                    dst[d..d + kernel * c].copy_from_slice(&input[src..src + kernel * c]);
                }
                row += 1;
            }
        }
    }
}

/// Adjoint of [`im2col`]: scatter-adds rows back onto the input grid.
fn col2im<R: Real>(cols: &[R], batch: usize, plan: &Plan, kernel: usize, stride: usize, grad: &mut [R]) {
    let [h, w, c] = plan.input;
    let [ho, wo, _] = plan.output;
    let k_len = kernel * kernel * c;
    let mut row = 0;
    for b in 0..batch {
        let base = b * h * w * c;
        for oy in 0..ho {
            for ox in 0..wo {
                let src = &cols[row * k_len..(row + 1) * k_len];
                for ky in 0..kernel {
                    let dst = base + ((oy * stride + ky) * w + ox * stride) * c;
                    let s = ky * kernel * c;
                    for (g, &v) in grad[dst..dst + kernel * c].iter_mut().zip(&src[s..s + kernel * c]) {
                        *g += v;
                    }
                }
                row += 1;
            }
        }
    }
}

impl<R: Real> Network<R> {
    /// Fan-in-scaled uniform weights and zero biases.
    pub fn new(spec: NetworkSpec, seed: u64) -> Result<Self> {
        let (plans, total) = build_plans(&spec)?;
        let mut params = vec![R::ZERO; total];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for plan in &plans {
            if plan.weights == 0 {
                continue;
            }
            let fan_in = plan.weights / plan.biases;
            let gain = if plan.rectified { 6.0 } else { 1.0 };
            let limit = (gain / fan_in as f64).sqrt();
            for p in &mut params[plan.offset..plan.offset + plan.weights] {
                *p = R::from_f64(rng.random_range(-limit..limit));
            }
        }
        Ok(Network { spec, plans, params })
    }

    /// Rebuilds a network from stored parameters.
    pub fn from_params(spec: NetworkSpec, params: Vec<R>) -> Result<Self> {
        let (plans, total) = build_plans(&spec)?;
        if params.len() != total {
            return Err(Error::ShapeMismatch {
                expected: total,
                actual: params.len(),
            });
        }
        Ok(Network { spec, plans, params })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn params(&self) -> &[R] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [R] {
        &mut self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn input_len(&self) -> usize {
        self.spec.input_len()
    }

    pub fn output_len(&self) -> usize {
        self.spec.outputs
    }

    /// Zeroes the head's weights and biases, making every output 0.
    pub fn zero_head(&mut self) {
        let head = self.plans.last().expect("head layer");
        let end = head.offset + head.weights + head.biases;
        self.params[head.offset..end].fill(R::ZERO);
    }

    /// The same network in another precision.
    pub fn cast<S: Real>(&self) -> Network<S> {
        Network {
            spec: self.spec.clone(),
            plans: self.plans.clone(),
            params: self.params.iter().map(|p| S::from_f64(p.to_f64())).collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    /// Copies `other`'s parameters into `self`.
    pub fn copy_from(&mut self, other: &Network<R>) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::InvalidConfig(format!(
                "cannot copy {} into {}",
                other.spec, self.spec
            )));
        }
        self.params.copy_from_slice(&other.params);
        Ok(())
    }

    pub fn forward(&self, input: &[R]) -> Result<Vec<R>> {
        self.forward_batch(input, 1)
    }

    /// Outputs for `batch` inputs laid out back to back.
    pub fn forward_batch(&self, input: &[R], batch: usize) -> Result<Vec<R>> {
        let mut trace = self.forward_trace(input, batch)?;
        Ok(trace.acts.pop().expect("output"))
    }

    pub fn forward_trace(&self, input: &[R], batch: usize) -> Result<Trace<R>> {
        if batch == 0 {
            return Err(Error::EmptyBatch);
        }
        let expected = batch * self.input_len();
        if input.len() != expected {
            return Err(Error::ShapeMismatch {
                expected,
                actual: input.len(),
            });
        }
        let mut acts = Vec::with_capacity(self.plans.len() + 1);
        let mut pool_index = Vec::with_capacity(self.plans.len());
        acts.push(input.to_vec());
        for plan in &self.plans {
            let x = acts.last().expect("input");
            let mut index = Vec::new();
            let y = self.layer_forward(plan, x, batch, &mut index);
            pool_index.push(index);
            acts.push(y);
        }
        Ok(Trace { batch, acts, pool_index })
    }

    fn layer_forward(&self, plan: &Plan, x: &[R], batch: usize, index: &mut Vec<u32>) -> Vec<R> {
        let out_len = plan.out_len();
        match plan.layer {
            LayerSpec::Conv { filters, kernel, stride } => {
                let rows = batch * plan.output[0] * plan.output[1];
                let k_len = kernel * kernel * plan.input[2];
                let mut cols = vec![R::ZERO; rows * k_len];
                im2col(x, batch, plan, kernel, stride, &mut cols);
                let mut y = self.broadcast_bias(plan, rows, filters);
                let w = &self.params[plan.offset..plan.offset + plan.weights];
                matmul(rows, k_len, filters, &cols, false, w, false, R::ONE, &mut y);
                y
            }
            LayerSpec::Dense { width } => {
                let in_len = plan.in_len();
                let mut y = self.broadcast_bias(plan, batch, width);
                let w = &self.params[plan.offset..plan.offset + plan.weights];
                matmul(batch, in_len, width, x, false, w, false, R::ONE, &mut y);
                y
            }
            LayerSpec::Relu => x.iter().map(|&v| if v > R::ZERO { v } else { R::ZERO }).collect(),
            LayerSpec::MaxPool { window } => {
                let [h, w, c] = plan.input;
                let [ho, wo, _] = plan.output;
                let mut y = vec![R::ZERO; batch * out_len];
                index.resize(batch * out_len, 0);
                let mut o = 0;
                for b in 0..batch {
                    let base = b * h * w * c;
                    for oy in 0..ho {
                        for ox in 0..wo {
                            for ch in 0..c {
                                let mut best = base + (oy * window * w + ox * window) * c + ch;
                                for dy in 0..window {
                                    for dx in 0..window {
                                        let i = base + ((oy * window + dy) * w + ox * window + dx) * c + ch;
                                        if x[i] > x[best] {
                                            best = i;
                                        }
                                    }
                                }
                                y[o] = x[best];
                                index[o] = best as u32;
                                o += 1;
                            }
                        }
                    }
                }
                y
            }
        }
    }

    fn broadcast_bias(&self, plan: &Plan, rows: usize, width: usize) -> Vec<R> {
        let bias = &self.params[plan.offset + plan.weights..plan.offset + plan.weights + plan.biases];
        let mut y = Vec::with_capacity(rows * width);
        for _ in 0..rows {
            y.extend_from_slice(bias);
        }
        y
    }

    /// Accumulates into `grads` the parameter gradient of `Σ d_out · output`.
    pub fn backward(&self, trace: &Trace<R>, d_out: &[R], grads: &mut [R]) -> Result<()> {
        if grads.len() != self.params.len() {
            return Err(Error::ShapeMismatch {
                expected: self.params.len(),
                actual: grads.len(),
            });
        }
        if d_out.len() != trace.output().len() {
            return Err(Error::ShapeMismatch {
                expected: trace.output().len(),
                actual: d_out.len(),
            });
        }
        let batch = trace.batch;
        let mut dy = d_out.to_vec();
        for (i, plan) in self.plans.iter().enumerate().rev() {
            let x = &trace.acts[i];
            let need_dx = i > 0;
            dy = self.layer_backward(plan, x, &trace.acts[i + 1], &trace.pool_index[i], batch, &dy, grads, need_dx);
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn layer_backward(
        &self,
        plan: &Plan,
        x: &[R],
        y: &[R],
        index: &[u32],
        batch: usize,
        dy: &[R],
        grads: &mut [R],
        need_dx: bool,
    ) -> Vec<R> {
        match plan.layer {
            LayerSpec::Conv { filters, kernel, stride } => {
                let rows = batch * plan.output[0] * plan.output[1];
                let k_len = kernel * kernel * plan.input[2];
                let mut cols = vec![R::ZERO; rows * k_len];
                im2col(x, batch, plan, kernel, stride, &mut cols);
                let (gw, gb) = grads[plan.offset..plan.offset + plan.weights + plan.biases].split_at_mut(plan.weights);
                matmul(k_len, rows, filters, &cols, true, dy, false, R::ONE, gw);
                for row in dy.chunks_exact(filters) {
                    for (g, &d) in gb.iter_mut().zip(row) {
                        *g += d;
                    }
                }
                if !need_dx {
                    return Vec::new();
                }
                let w = &self.params[plan.offset..plan.offset + plan.weights];
                matmul(rows, filters, k_len, dy, false, w, true, R::ZERO, &mut cols);
                let mut dx = vec![R::ZERO; x.len()];
                col2im(&cols, batch, plan, kernel, stride, &mut dx);
                dx
            }
            LayerSpec::Dense { width } => {
                let in_len = plan.in_len();
                let (gw, gb) = grads[plan.offset..plan.offset + plan.weights + plan.biases].split_at_mut(plan.weights);
                matmul(in_len, batch, width, x, true, dy, false, R::ONE, gw);
                for row in dy.chunks_exact(width) {
                    for (g, &d) in gb.iter_mut().zip(row) {
                        *g += d;
                    }
                }
                if !need_dx {
                    return Vec::new();
                }
                let w = &self.params[plan.offset..plan.offset + plan.weights];
                let mut dx = vec![R::ZERO; x.len()];
                matmul(batch, width, in_len, dy, false, w, true, R::ZERO, &mut dx);
                dx
            }
            LayerSpec::Relu => dy
                .iter()
                .zip(y)
                .map(|(&d, &v)| if v > R::ZERO { d } else { R::ZERO })
                .collect(),
            LayerSpec::MaxPool { .. } => {
                let mut dx = vec![R::ZERO; x.len()];
                for (&i, &d) in index.iter().zip(dy) {
                    dx[i as usize] += d;
                }
                dx
            }
        }
    }
}

/// Sets `q_target` to an exact copy of `q`.
pub fn sync_target<R: Real>(q: &Network<R>, q_target: &mut Network<R>) -> Result<()> {
    q_target.copy_from(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_conv() -> NetworkSpec {
        "in5x5x2 conv3k2s1 relu pool2 dense4 relu out3".parse().unwrap()
    }

    #[test]
    fn parameter_count() {
        let net = Network::<f64>::new(tiny_conv(), 1).unwrap();
        // conv 2*2*2*3 + 3, dense 2*2*3*4 + 4, head 4*3 + 3
        assert_eq!(net.num_params(), 27 + 52 + 15);
        let big = Network::<f32>::new(NetworkSpec::holdem_default(5), 1).unwrap();
        assert_eq!(big.input_len(), 17 * 17 * 9);
    }

    #[test]
    fn zero_head_outputs_zero() {
        let mut net = Network::<f32>::new(tiny_conv(), 3).unwrap();
        net.zero_head();
        let x: Vec<f32> = (0..50).map(|i| i as f32 * 0.1 - 2.0).collect();
        assert_eq!(net.forward(&x).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn batch_matches_single() {
        let net = Network::<f64>::new(tiny_conv(), 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let xs: Vec<f64> = (0..150).map(|_| rng.random_range(-1.0..1.0)).collect();
        let batched = net.forward_batch(&xs, 3).unwrap();
        for b in 0..3 {
            let single = net.forward(&xs[b * 50..(b + 1) * 50]).unwrap();
            for k in 0..3 {
                assert!((single[k] - batched[b * 3 + k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn shape_errors() {
        let net = Network::<f32>::new(tiny_conv(), 5).unwrap();
        assert!(matches!(net.forward(&[0.0; 49]), Err(Error::ShapeMismatch { .. })));
        assert!(matches!(net.forward_batch(&[], 0), Err(Error::EmptyBatch)));
        assert!(Network::<f32>::from_params(tiny_conv(), vec![0.0; 3]).is_err());
    }

    #[test]
    fn sync_copies_and_detaches() {
        let q = Network::<f32>::new(tiny_conv(), 1).unwrap();
        let mut t = Network::<f32>::new(tiny_conv(), 2).unwrap();
        sync_target(&q, &mut t).unwrap();
        assert_eq!(q.params(), t.params());
        sync_target(&q, &mut t).unwrap();
        assert_eq!(q.params(), t.params());
        let mut q2 = q.clone();
        q2.params_mut()[0] += 1.0;
        assert_ne!(q2.params(), t.params());
        let other = Network::<f32>::new(NetworkSpec::mlp(3, &[2], 2), 1).unwrap();
        assert!(sync_target(&other, &mut t).is_err());
    }
}
