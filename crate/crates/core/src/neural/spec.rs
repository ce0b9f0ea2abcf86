use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LayerSpec {
    /// Valid-padding convolution.
    Conv { filters: usize, kernel: usize, stride: usize },
    /// Non-overlapping max pooling; trailing rows and columns are dropped.
    MaxPool { window: usize },
    /// Fully connected layer over the flattened input.
    Dense { width: usize },
    Relu,
}

impl fmt::Display for LayerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            LayerSpec::Conv { filters, kernel, stride } => write!(f, "conv{filters}k{kernel}s{stride}"),
            LayerSpec::MaxPool { window } => write!(f, "pool{window}"),
            LayerSpec::Dense { width } => write!(f, "dense{width}"),
            LayerSpec::Relu => f.write_str("relu"),
        }
    }
}

impl FromStr for LayerSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Format(format!("layer {s:?}"));
        let num = |t: &str| t.parse::<usize>().map_err(|_| bad());
        if s == "relu" {
            Ok(LayerSpec::Relu)
        } else if let Some(rest) = s.strip_prefix("conv") {
            let (filters, rest) = rest.split_once('k').ok_or_else(bad)?;
            let (kernel, stride) = rest.split_once('s').ok_or_else(bad)?;
            Ok(LayerSpec::Conv {
                filters: num(filters)?,
                kernel: num(kernel)?,
                stride: num(stride)?,
            })
        } else if let Some(w) = s.strip_prefix("pool") {
            Ok(LayerSpec::MaxPool { window: num(w)? })
        } else if let Some(w) = s.strip_prefix("dense") {
            Ok(LayerSpec::Dense { width: num(w)? })
        } else {
            Err(bad())
        }
    }
}

/// Layer list from an input of shape `height × width × channels` to a
/// linear head of `outputs` units.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input: [usize; 3],
    pub layers: Vec<LayerSpec>,
    pub outputs: usize,
}

impl NetworkSpec {
    /// Four convolutions, two poolings and one hidden dense layer over the
    /// 17×17×9 observation.
    pub fn holdem_default(outputs: usize) -> Self {
        Self::holdem_scaled(outputs, 1)
    }

    /// [`NetworkSpec::holdem_default`] with every width divided by `divisor`.
    pub fn holdem_scaled(outputs: usize, divisor: usize) -> Self {
        let d = divisor.max(1);
        let conv = |filters: usize| LayerSpec::Conv {
            filters: (filters / d).max(1),
            kernel: 3,
            stride: 1,
        };
        NetworkSpec {
            input: [17, 17, 9],
            layers: vec![
                conv(32),
                LayerSpec::Relu,
                conv(64),
                LayerSpec::Relu,
                LayerSpec::MaxPool { window: 2 },
                conv(64),
                LayerSpec::Relu,
                conv(128),
                LayerSpec::Relu,
                LayerSpec::MaxPool { window: 2 },
                LayerSpec::Dense { width: (256 / d).max(1) },
                LayerSpec::Relu,
            ],
            outputs,
        }
    }

    /// Dense ReLU layers over a flat input.
    pub fn mlp(inputs: usize, hidden: &[usize], outputs: usize) -> Self {
        let mut layers = Vec::new();
        for &width in hidden {
            layers.push(LayerSpec::Dense { width });
            layers.push(LayerSpec::Relu);
        }
        NetworkSpec {
            input: [1, 1, inputs],
            layers,
            outputs,
        }
    }

    pub fn input_len(&self) -> usize {
        self.input.iter().product()
    }

    /// Output shape of every layer, head included. Fails when shapes do not chain.
    pub fn shapes(&self) -> Result<Vec<[usize; 3]>> {
        if self.input.contains(&0) || self.outputs == 0 {
            return Err(Error::InvalidConfig(format!("degenerate network {self}")));
        }
        let mut shape = self.input;
        let mut out = Vec::with_capacity(self.layers.len() + 1);
        for layer in &self.layers {
            let [h, w, c] = shape;
            shape = match *layer {
                LayerSpec::Conv { filters, kernel, stride } => {
                    if filters == 0 || kernel == 0 || stride == 0 || kernel > h || kernel > w {
                        return Err(Error::InvalidConfig(format!("{layer} does not fit input {h}x{w}x{c}")));
                    }
                    [(h - kernel) / stride + 1, (w - kernel) / stride + 1, filters]
                }
                LayerSpec::MaxPool { window } => {
                    if window == 0 || window > h || window > w {
                        return Err(Error::InvalidConfig(format!("{layer} does not fit input {h}x{w}x{c}")));
                    }
                    [h / window, w / window, c]
                }
                LayerSpec::Dense { width } => {
                    if width == 0 {
                        return Err(Error::InvalidConfig("dense layer of width 0".into()));
                    }
                    [1, 1, width]
                }
                LayerSpec::Relu => shape,
            };
            out.push(shape);
        }
        out.push([1, 1, self.outputs]);
        Ok(out)
    }
}

impl fmt::Display for NetworkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [h, w, c] = self.input;
        write!(f, "in{h}x{w}x{c}")?;
        for layer in &self.layers {
            write!(f, " {layer}")?;
        }
        write!(f, " out{}", self.outputs)
    }
}

impl FromStr for NetworkSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut tokens: Vec<&str> = s.split_whitespace().collect();
        let bad = || Error::Format(format!("network spec {s:?}"));
        let first = tokens.first().and_then(|t| t.strip_prefix("in")).ok_or_else(bad)?;
        let dims: Vec<usize> = first
            .split('x')
            .map(|d| d.parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let input: [usize; 3] = dims.try_into().map_err(|_| bad())?;
        let last = tokens.pop().and_then(|t| t.strip_prefix("out")).ok_or_else(bad)?;
        let outputs = last.parse().map_err(|_| bad())?;
        let layers = tokens[1..].iter().map(|t| t.parse()).collect::<Result<_>>()?;
        let spec = NetworkSpec { input, layers, outputs };
        spec.shapes()?;
        Ok(spec)
    }
}
