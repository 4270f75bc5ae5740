//! Feed-forward sigmoid network trained by online backpropagation on mean
//! squared error.

use crate::error::{Error, Result};
use crate::rng::Rng;

/// One fully connected layer; `weights` is `fan_out x fan_in`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub fan_in: usize,
    pub fan_out: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Layer {
            fan_in,
            fan_out,
            weights: vec![0.0; fan_in * fan_out],
            biases: vec![0.0; fan_out],
        }
    }

    #[inline]
    pub fn weight(&self, out: usize, inp: usize) -> f64 {
        self.weights[out * self.fan_in + inp]
    }

    fn apply(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for (row, &b) in self.weights.chunks_exact(self.fan_in).zip(&self.biases) {
            let z = row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + b;
            out.push(sigmoid(z));
        }
    }
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Multilayer perceptron with sigmoid units on every layer.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpNetwork {
    layer_sizes: Vec<usize>,
    layers: Vec<Layer>,
}

fn check_sizes(layer_sizes: &[usize]) -> Result<()> {
    if layer_sizes.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "a network needs at least 2 layers, got {layer_sizes:?}"
        )));
    }
    if layer_sizes.contains(&0) {
        return Err(Error::InvalidParameter(format!(
            "layer sizes must be positive, got {layer_sizes:?}"
        )));
    }
    Ok(())
}

/// Weights uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, drawn layer by
/// layer in row-major order from [`Rng`]; biases zero.
pub fn init_network(layer_sizes: &[usize], seed: u64) -> Result<MlpNetwork> {
    check_sizes(layer_sizes)?;
    let mut rng = Rng::new(seed);
    let layers = layer_sizes
        .windows(2)
        .map(|pair| {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            let weights = (0..fan_in * fan_out)
                .map(|_| rng.uniform(-bound, bound))
                .collect();
            Layer {
                fan_in,
                fan_out,
                weights,
                biases: vec![0.0; fan_out],
            }
        })
        .collect();
    Ok(MlpNetwork {
        layer_sizes: layer_sizes.to_vec(),
        layers,
    })
}

impl MlpNetwork {
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidParameter("network has no layers".into()));
        }
        let mut sizes = vec![layers[0].fan_in];
        for (k, l) in layers.iter().enumerate() {
            if l.fan_in != *sizes.last().unwrap()
                || l.weights.len() != l.fan_in * l.fan_out
                || l.biases.len() != l.fan_out
            {
                return Err(Error::InvalidParameter(format!(
                    "layer {k} has inconsistent shape"
                )));
            }
            if l.weights.iter().chain(&l.biases).any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "layer {k} has non-finite parameters"
                )));
            }
            sizes.push(l.fan_out);
        }
        check_sizes(&sizes)?;
        Ok(MlpNetwork {
            layer_sizes: sizes,
            layers,
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn input_len(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_len(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    fn check_input(&self, input: &[f64]) -> Result<()> {
        if input.len() != self.input_len() {
            return Err(Error::DimensionMismatch {
                expected: self.input_len(),
                got: input.len(),
            });
        }
        Ok(())
    }

    /// Activations of every layer, input first.
    fn activations(&self, input: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(input.to_vec());
        for layer in &self.layers {
            let mut next = Vec::with_capacity(layer.fan_out);
            layer.apply(acts.last().unwrap(), &mut next);
            acts.push(next);
        }
        acts
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.check_input(input)?;
        let mut cur = input.to_vec();
        let mut next = Vec::new();
        for layer in &self.layers {
            layer.apply(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }
}

pub fn forward(net: &MlpNetwork, input: &[f64]) -> Result<Vec<f64>> {
    net.forward(input)
}

/// Per-sample loss: mean over outputs of the squared error.
pub fn mse(output: &[f64], target: &[f64]) -> f64 {
    output
        .iter()
        .zip(target)
        .map(|(o, t)| (o - t) * (o - t))
        .sum::<f64>()
        / output.len() as f64
}

/// Loss and its gradient with respect to every weight and bias, laid out
/// like the network's own layers.
pub fn loss_and_gradient(net: &MlpNetwork, input: &[f64], target: &[f64]) -> Result<(f64, Vec<Layer>)> {
    net.check_input(input)?;
    if target.len() != net.output_len() {
        return Err(Error::DimensionMismatch {
            expected: net.output_len(),
            got: target.len(),
        });
    }
    let acts = net.activations(input);
    let out = acts.last().unwrap();
    let loss = mse(out, target);
    let scale = 2.0 / out.len() as f64;
    let mut delta: Vec<f64> = out
        .iter()
        .zip(target)
        .map(|(&o, &t)| scale * (o - t) * o * (1.0 - o))
        .collect();

    let mut grads: Vec<Layer> = net
        .layers
        .iter()
        .map(|l| Layer::zeros(l.fan_in, l.fan_out))
        .collect();
    for k in (0..net.layers.len()).rev() {
        let layer = &net.layers[k];
        let prev = &acts[k];
        let g = &mut grads[k];
        for (o, &d) in delta.iter().enumerate() {
            g.biases[o] = d;
            let row = &mut g.weights[o * layer.fan_in..(o + 1) * layer.fan_in];
            for (gw, &a) in row.iter_mut().zip(prev) {
                *gw = d * a;
            }
        }
        if k > 0 {
            delta = (0..layer.fan_in)
                .map(|i| {
                    let back: f64 = delta
                        .iter()
                        .enumerate()
                        .map(|(o, &d)| layer.weight(o, i) * d)
                        .sum();
                    back * prev[i] * (1.0 - prev[i])
                })
                .collect();
        }
    }
    Ok((loss, grads))
}

/// Feature vectors paired with target vectors, one column per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    inputs: Vec<Vec<f64>>,
    targets: Vec<Vec<f64>>,
}

impl TrainingSet {
    /// Targets may be any vectors in `[0, 1]`; use [`TrainingSet::one_hot`]
    /// for class labels.
    pub fn new(inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::DimensionMismatch {
                expected: inputs.len(),
                got: targets.len(),
            });
        }
        if inputs.is_empty() {
            return Err(Error::Empty("training set has no samples".into()));
        }
        let (din, dout) = (inputs[0].len(), targets[0].len());
        for (x, t) in inputs.iter().zip(&targets) {
            if x.len() != din {
                return Err(Error::DimensionMismatch {
                    expected: din,
                    got: x.len(),
                });
            }
            if t.len() != dout {
                return Err(Error::DimensionMismatch {
                    expected: dout,
                    got: t.len(),
                });
            }
            if t.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::InvalidParameter(
                    "targets must lie in [0, 1]".into(),
                ));
            }
        }
        Ok(TrainingSet { inputs, targets })
    }

    pub fn one_hot(inputs: Vec<Vec<f64>>, labels: &[usize], classes: usize) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes) {
            return Err(Error::InvalidParameter(format!(
                "label {bad} out of range for {classes} classes"
            )));
        }
        let targets = labels
            .iter()
            .map(|&l| (0..classes).map(|c| if c == l { 1.0 } else { 0.0 }).collect())
            .collect();
        TrainingSet::new(inputs, targets)
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn targets(&self) -> &[Vec<f64>] {
        &self.targets
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub target_mse: f64,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            max_epochs: 1000,
            target_mse: 0.0,
            seed: 0,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::InvalidParameter("max_epochs must be at least 1".into()));
        }
        if !(self.target_mse >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "target_mse must be non-negative, got {}",
                self.target_mse
            )));
        }
        Ok(())
    }
}

/// Online SGD. Each epoch visits every sample once (in a seeded shuffled
/// order when `shuffle` is set) and records the mean of the per-sample losses
/// measured just before each update. Training stops after `max_epochs` or as
/// soon as an epoch's loss is at or below `target_mse`.
pub fn train_backprop(
    mut net: MlpNetwork,
    data: &TrainingSet,
    cfg: &TrainConfig,
) -> Result<(MlpNetwork, Vec<f64>)> {
    cfg.validate()?;
    if data.inputs[0].len() != net.input_len() {
        return Err(Error::DimensionMismatch {
            expected: net.input_len(),
            got: data.inputs[0].len(),
        });
    }
    if data.targets[0].len() != net.output_len() {
        return Err(Error::DimensionMismatch {
            expected: net.output_len(),
            got: data.targets[0].len(),
        });
    }
    let mut rng = Rng::new(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::new();
    for epoch in 0..cfg.max_epochs {
        if cfg.shuffle {
            rng.shuffle(&mut order);
        }
        let mut total = 0.0;
        for &s in &order {
            let (loss, grads) = loss_and_gradient(&net, &data.inputs[s], &data.targets[s])?;
            total += loss;
            for (layer, g) in net.layers.iter_mut().zip(&grads) {
                for (w, gw) in layer.weights.iter_mut().zip(&g.weights) {
                    *w -= cfg.learning_rate * gw;
                }
                for (b, gb) in layer.biases.iter_mut().zip(&g.biases) {
                    *b -= cfg.learning_rate * gb;
                }
            }
        }
        let epoch_mse = total / data.len() as f64;
        if !epoch_mse.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        history.push(epoch_mse);
        if epoch_mse <= cfg.target_mse {
            break;
        }
    }
    Ok((net, history))
}

/// Largest relative disagreement between the analytic gradient and central
/// differences `(f(w + eps) - f(w - eps)) / (2 eps)` over every weight and
/// bias. The denominator is `max(|analytic|, |numeric|, 1e-12)`.
pub fn gradient_check(net: &MlpNetwork, input: &[f64], target: &[f64], eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "finite-difference step must be positive, got {eps}"
        )));
    }
    let (_, grads) = loss_and_gradient(net, input, target)?;
    let loss_at = |probe: &MlpNetwork| -> f64 { mse(&probe.forward(input).unwrap(), target) };

    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    let mut compare = |analytic: f64, numeric: f64| {
        let denom = analytic.abs().max(numeric.abs()).max(1e-12);
        worst = worst.max((analytic - numeric).abs() / denom);
    };
    for k in 0..net.layers.len() {
        for i in 0..net.layers[k].weights.len() {
            let w0 = net.layers[k].weights[i];
            probe.layers[k].weights[i] = w0 + eps;
            let up = loss_at(&probe);
            probe.layers[k].weights[i] = w0 - eps;
            let down = loss_at(&probe);
            probe.layers[k].weights[i] = w0;
            compare(grads[k].weights[i], (up - down) / (2.0 * eps));
        }
        for i in 0..net.layers[k].biases.len() {
            let b0 = net.layers[k].biases[i];
            probe.layers[k].biases[i] = b0 + eps;
            let up = loss_at(&probe);
            probe.layers[k].biases[i] = b0 - eps;
            let down = loss_at(&probe);
            probe.layers[k].biases[i] = b0;
            compare(grads[k].biases[i], (up - down) / (2.0 * eps));
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub class_index: usize,
    pub confidence: f64,
    /// Squared distance between the output and the one-hot vector of `class_index`.
    pub error_value: f64,
}

/// Argmax with ties to the lowest index.
pub fn classify_output(output: &[f64]) -> Classification {
    let mut best = 0;
    for (k, &v) in output.iter().enumerate().skip(1) {
        if v > output[best] {
            best = k;
        }
    }
    let error_value = output
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let t = if k == best { 1.0 } else { 0.0 };
            (v - t) * (v - t)
        })
        .sum();
    Classification {
        class_index: best,
        confidence: output[best],
        error_value,
    }
}

pub fn classify(net: &MlpNetwork, input: &[f64]) -> Result<Classification> {
    Ok(classify_output(&net.forward(input)?))
}
