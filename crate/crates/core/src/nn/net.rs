use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
        }
    }

    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Identity => "identity",
        }
    }
}

/// What the single output unit means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Head {
    /// Unbounded log relative hazard, the network analog of beta'x.
    HazardLinear,
    /// Pre-sigmoid logit of "survives past the median".
    ClassLogit,
}

impl Head {
    pub fn as_str(self) -> &'static str {
        match self {
            Head::HazardLinear => "hazard_linear",
            Head::ClassLogit => "class_logit",
        }
    }
}

/// Fully connected layer; `weights` is row-major `outputs x inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize, activation: Activation) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
            activation,
        }
    }

    fn pre_activation(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.inputs)
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardPass {
    pub output: f64,
    /// Post-activation vector of every hidden layer, input side first.
    pub activations: Vec<Vec<f64>>,
}

/// Per-layer gradients, same shapes as the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<Vec<f64>>,
}

impl Gradients {
    pub(crate) fn zeros_like(net: &DenseNet) -> Self {
        Self {
            weights: net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            bias: net.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
        }
    }

    /// Same ordering as [`DenseNet::parameters`].
    pub fn flatten(&self) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .flat_map(|(w, b)| w.iter().chain(b).copied())
            .collect()
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        for v in self.weights.iter_mut().chain(self.bias.iter_mut()) {
            v.iter_mut().for_each(|g| *g *= factor);
        }
    }
}

/// Feed-forward network: hidden layers followed by a one-unit linear head.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseNet {
    layers: Vec<Dense>,
    head: Head,
    rng_seed: u64,
}

impl DenseNet {
    /// Rectifier hidden layers of the given widths and a linear output unit.
    ///
    /// Weights are drawn uniformly from +-sqrt(6 / fan_in) for hidden layers
    /// and +-sqrt(1 / fan_in) for the head; biases start at zero.
    pub fn new(input_dim: usize, hidden: &[usize], head: Head, rng_seed: u64) -> Result<Self> {
        if input_dim == 0 || hidden.contains(&0) {
            return Err(Error::invalid("layer widths must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let mut layers = Vec::with_capacity(hidden.len() + 1);
        let mut fan_in = input_dim;
        let widths = hidden.iter().map(|&w| (w, Activation::Relu)).chain([(1, Activation::Identity)]);
        for (width, activation) in widths {
            let limit = match activation {
                Activation::Relu => (6.0 / fan_in as f64).sqrt(),
                Activation::Identity => (1.0 / fan_in as f64).sqrt(),
            };
            let mut layer = Dense::zeros(fan_in, width, activation);
            layer.weights.iter_mut().for_each(|w| *w = rng.random_range(-limit..limit));
            layers.push(layer);
            fan_in = width;
        }
        Ok(Self { layers, head, rng_seed })
    }

    /// Assembles a network from explicit layers. The last layer must have one
    /// identity output.
    pub fn from_layers(layers: Vec<Dense>, head: Head, rng_seed: u64) -> Result<Self> {
        let last = layers.last().ok_or_else(|| Error::invalid("network needs at least one layer"))?;
        if last.outputs != 1 || last.activation != Activation::Identity {
            return Err(Error::invalid("output layer must have one identity unit"));
        }
        for l in &layers {
            if l.inputs == 0 || l.weights.len() != l.inputs * l.outputs || l.bias.len() != l.outputs {
                return Err(Error::invalid("layer parameter shapes are inconsistent"));
            }
        }
        for pair in layers.windows(2) {
            if pair[0].outputs != pair[1].inputs {
                return Err(Error::DimensionMismatch {
                    expected: pair[0].outputs,
                    found: pair[1].inputs,
                });
            }
        }
        Ok(Self { layers, head, rng_seed })
    }

    pub fn head(&self) -> Head {
        self.head
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn n_hidden(&self) -> usize {
        self.layers.len() - 1
    }

    pub fn hidden_widths(&self) -> Vec<usize> {
        self.layers[..self.n_hidden()].iter().map(|l| l.outputs).collect()
    }

    /// All parameters flattened: per layer, weights (row-major) then biases.
    pub fn parameters(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<()> {
        let total: usize = self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum();
        if params.len() != total {
            return Err(Error::DimensionMismatch {
                expected: total,
                found: params.len(),
            });
        }
        let mut it = params.iter().copied();
        for l in &mut self.layers {
            l.weights.iter_mut().chain(l.bias.iter_mut()).for_each(|v| *v = it.next().unwrap());
        }
        Ok(())
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<ForwardPass> {
        self.check_input(x)?;
        let trace = self.trace(x);
        let output = trace.post.last().unwrap()[0];
        let mut activations = trace.post;
        activations.pop();
        Ok(ForwardPass { output, activations })
    }

    pub fn output(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        Ok(self.output_unchecked(x))
    }

    pub(crate) fn output_unchecked(&self, x: &[f64]) -> f64 {
        let mut current = x.to_vec();
        for l in &self.layers {
            current = l.pre_activation(&current).into_iter().map(|z| l.activation.apply(z)).collect();
        }
        current[0]
    }

    pub(crate) fn trace(&self, x: &[f64]) -> Trace {
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post: Vec<Vec<f64>> = Vec::with_capacity(self.layers.len());
        for l in &self.layers {
            let input = post.last().map_or(x, |v| v.as_slice());
            let z = l.pre_activation(input);
            post.push(z.iter().map(|&v| l.activation.apply(v)).collect());
            pre.push(z);
        }
        Trace { pre, post }
    }

    /// Accumulates the gradient contribution of one sample whose loss has
    /// derivative `d_output` with respect to the network output.
    pub(crate) fn backprop_into(&self, x: &[f64], trace: &Trace, d_output: f64, grads: &mut Gradients) {
        if d_output == 0.0 {
            return;
        }
        let mut delta = vec![d_output * self.layers.last().unwrap().activation.derivative(trace.pre.last().unwrap()[0])];
        for li in (0..self.layers.len()).rev() {
            let layer = &self.layers[li];
            let input = if li == 0 { x } else { trace.post[li - 1].as_slice() };
            let gw = &mut grads.weights[li];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                grads.bias[li][o] += d;
                let row = &mut gw[o * layer.inputs..(o + 1) * layer.inputs];
                for (g, v) in row.iter_mut().zip(input) {
                    *g += d * v;
                }
            }
            if li == 0 {
                break;
            }
            let below = &self.layers[li - 1];
            let mut next = vec![0.0; layer.inputs];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let row = &layer.weights[o * layer.inputs..(o + 1) * layer.inputs];
                for (n, w) in next.iter_mut().zip(row) {
                    *n += w * d;
                }
            }
            for (n, &z) in next.iter_mut().zip(&trace.pre[li - 1]) {
                *n *= below.activation.derivative(z);
            }
            delta = next;
        }
    }

    /// Plain gradient step; weight decay applies to weights, not biases.
    pub(crate) fn apply_step(&mut self, grads: &Gradients, learning_rate: f64, weight_decay: f64) {
        for (li, l) in self.layers.iter_mut().enumerate() {
            for (w, g) in l.weights.iter_mut().zip(&grads.weights[li]) {
                *w -= learning_rate * (g + weight_decay * *w);
            }
            for (b, g) in l.bias.iter_mut().zip(&grads.bias[li]) {
                *b -= learning_rate * g;
            }
        }
    }
}

/// Pre- and post-activation values of every layer for one input.
pub(crate) struct Trace {
    pub(crate) pre: Vec<Vec<f64>>,
    pub(crate) post: Vec<Vec<f64>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_network_outputs_zero() {
        let layers = vec![
            Dense::zeros(3, 4, Activation::Relu),
            Dense::zeros(4, 1, Activation::Identity),
        ];
        let net = DenseNet::from_layers(layers, Head::HazardLinear, 0).unwrap();
        let f = net.forward(&[1.0, -2.0, 5.0]).unwrap();
        assert_eq!(f.output, 0.0);
        assert_eq!(f.activations, vec![vec![0.0; 4]]);
    }

    #[test]
    fn single_linear_layer() {
        let layer = Dense {
            inputs: 2,
            outputs: 1,
            weights: vec![0.5, -1.5],
            bias: vec![0.25],
            activation: Activation::Identity,
        };
        let net = DenseNet::from_layers(vec![layer], Head::HazardLinear, 0).unwrap();
        let f = net.forward(&[2.0, 1.0]).unwrap();
        assert_eq!(f.output, 0.5 * 2.0 - 1.5 + 0.25);
        assert!(f.activations.is_empty());
    }

    #[test]
    fn shape_checks() {
        let bad = vec![Dense::zeros(3, 4, Activation::Relu), Dense::zeros(5, 1, Activation::Identity)];
        assert!(DenseNet::from_layers(bad, Head::HazardLinear, 0).is_err());
        let no_head = vec![Dense::zeros(3, 2, Activation::Identity)];
        assert!(DenseNet::from_layers(no_head, Head::HazardLinear, 0).is_err());
        let net = DenseNet::new(3, &[4], Head::ClassLogit, 1).unwrap();
        assert!(net.forward(&[1.0]).is_err());
    }

    #[test]
    fn parameters_round_trip() {
        let mut net = DenseNet::new(3, &[4, 2], Head::HazardLinear, 9).unwrap();
        let p = net.parameters();
        assert_eq!(p.len(), 3 * 4 + 4 + 4 * 2 + 2 + 2 + 1);
        let doubled: Vec<f64> = p.iter().map(|v| v * 2.0).collect();
        net.set_parameters(&doubled).unwrap();
        assert_eq!(net.parameters(), doubled);
    }

    #[test]
    fn seeded_init_is_reproducible() {
        let a = DenseNet::new(5, &[8, 8], Head::HazardLinear, 17).unwrap();
        let b = DenseNet::new(5, &[8, 8], Head::HazardLinear, 17).unwrap();
        let c = DenseNet::new(5, &[8, 8], Head::HazardLinear, 18).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.parameters(), c.parameters());
    }
}
