//! Feed-forward policy networks over flat parameter vectors.
//!
//! A network is fully described by a [`NetworkSpec`]; its weights live in a
//! [`ParameterVector`] laid out layer by layer as
//!
//! ```text
//! [ W_0 (fan_out x fan_in, row-major by output unit) | b_0 | W_1 | b_1 | ... ]
//! ```
//!
//! which is the same flat genome the optimizers evolve.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Linear,
    Tanh,
    Sigmoid,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Linear => x,
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Linear => "linear",
            Activation::Tanh => "tanh",
            Activation::Sigmoid => "sigmoid",
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Activation::Linear),
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Ok(Activation::Sigmoid),
            other => Err(Error::Input(format!(
                "unknown activation `{other}` (expected linear, tanh or sigmoid)"
            ))),
        }
    }
}

/// Layer sizes and activations of a dense feed-forward network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkSpec {
    input_dim: usize,
    hidden_dims: Vec<usize>,
    output_dim: usize,
    hidden_activation: Activation,
    output_activation: Activation,
}

impl NetworkSpec {
    pub fn new(
        input_dim: usize,
        hidden_dims: Vec<usize>,
        output_dim: usize,
        hidden_activation: Activation,
        output_activation: Activation,
    ) -> Result<Self> {
        if input_dim == 0 || output_dim == 0 {
            return Err(Error::Input(format!(
                "network dimensions must be positive (input {input_dim}, output {output_dim})"
            )));
        }
        if let Some(i) = hidden_dims.iter().position(|&h| h == 0) {
            return Err(Error::Input(format!("hidden layer {i} has zero units")));
        }
        Ok(Self {
            input_dim,
            hidden_dims,
            output_dim,
            hidden_activation,
            output_activation,
        })
    }

    /// Single-layer network: inputs wired straight to outputs.
    pub fn direct(input_dim: usize, output_dim: usize, output_activation: Activation) -> Result<Self> {
        Self::new(input_dim, Vec::new(), output_dim, Activation::Tanh, output_activation)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dims(&self) -> &[usize] {
        &self.hidden_dims
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden_activation
    }

    pub fn output_activation(&self) -> Activation {
        self.output_activation
    }

    /// `(fan_in, fan_out)` for each weight layer, input side first.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let mut sizes = Vec::with_capacity(self.hidden_dims.len() + 2);
        sizes.push(self.input_dim);
        sizes.extend_from_slice(&self.hidden_dims);
        sizes.push(self.output_dim);
        sizes.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// Number of trainable parameters, one bias per non-input unit.
    pub fn param_count(&self) -> usize {
        self.layer_shapes()
            .iter()
            .map(|&(fan_in, fan_out)| (fan_in + 1) * fan_out)
            .sum()
    }

    fn activation_for(&self, layer: usize, n_layers: usize) -> Activation {
        if layer + 1 == n_layers {
            self.output_activation
        } else {
            self.hidden_activation
        }
    }
}

/// Free-function form of [`NetworkSpec::param_count`].
pub fn param_count(spec: &NetworkSpec) -> usize {
    spec.param_count()
}

/// One individual: every weight and bias of a network, flattened.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterVector(Vec<f64>);

impl ParameterVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl From<Vec<f64>> for ParameterVector {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

/// Weights and biases of one dense layer.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub fan_in: usize,
    pub fan_out: usize,
    /// `fan_out x fan_in`, row-major by output unit.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn weight(&self, out: usize, inp: usize) -> f64 {
        self.weights[out * self.fan_in + inp]
    }

    fn forward_into(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            self.weights
                .chunks_exact(self.fan_in)
                .zip(&self.biases)
                .map(|(row, b)| {
                    let z = row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + b;
                    self.activation.apply(z)
                }),
        );
    }
}

/// Splits a flat parameter vector into per-layer weights and biases.
pub fn unflatten(params: &ParameterVector, spec: &NetworkSpec) -> Result<Vec<DenseLayer>> {
    let expected = spec.param_count();
    if params.len() != expected {
        return Err(Error::Structural(format!(
            "parameter vector has length {}, network needs {expected}",
            params.len()
        )));
    }
    let shapes = spec.layer_shapes();
    let n_layers = shapes.len();
    let mut rest = params.as_slice();
    let mut layers = Vec::with_capacity(n_layers);
    for (i, &(fan_in, fan_out)) in shapes.iter().enumerate() {
        let (w, tail) = rest.split_at(fan_in * fan_out);
        let (b, tail) = tail.split_at(fan_out);
        rest = tail;
        layers.push(DenseLayer {
            fan_in,
            fan_out,
            weights: w.to_vec(),
            biases: b.to_vec(),
            activation: spec.activation_for(i, n_layers),
        });
    }
    debug_assert!(rest.is_empty());
    Ok(layers)
}

/// Inverse of [`unflatten`].
pub fn flatten(layers: &[DenseLayer]) -> ParameterVector {
    let mut out = Vec::with_capacity(layers.iter().map(|l| l.weights.len() + l.biases.len()).sum());
    for l in layers {
        out.extend_from_slice(&l.weights);
        out.extend_from_slice(&l.biases);
    }
    ParameterVector(out)
}

/// A network ready for repeated forward passes (parameters unpacked once).
#[derive(Debug, Clone)]
pub struct Network {
    input_dim: usize,
    layers: Vec<DenseLayer>,
    scratch: (Vec<f64>, Vec<f64>),
}

impl Network {
    pub fn new(spec: &NetworkSpec, params: &ParameterVector) -> Result<Self> {
        Ok(Self {
            input_dim: spec.input_dim(),
            layers: unflatten(params, spec)?,
            scratch: (Vec::new(), Vec::new()),
        })
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    /// Forward pass; the returned slice is valid until the next call.
    pub fn forward(&mut self, state: &[f64]) -> Result<&[f64]> {
        if state.len() != self.input_dim {
            return Err(Error::Structural(format!(
                "state has length {}, network expects {}",
                state.len(),
                self.input_dim
            )));
        }
        if let Some(i) = state.iter().position(|x| !x.is_finite()) {
            return Err(Error::Input(format!("state component {i} is not finite")));
        }
        let (a, b) = &mut self.scratch;
        a.clear();
        a.extend_from_slice(state);
        for layer in &self.layers {
            layer.forward_into(a, b);
            std::mem::swap(a, b);
        }
        Ok(a)
    }
}

/// One-shot forward pass.
pub fn forward(spec: &NetworkSpec, params: &ParameterVector, state: &[f64]) -> Result<Vec<f64>> {
    let mut net = Network::new(spec, params)?;
    net.forward(state).map(<[f64]>::to_vec)
}

/// Argmax over network outputs; exact ties go to the lowest index.
pub fn select_discrete_action(output: &[f64]) -> Result<usize> {
    if output.is_empty() {
        return Err(Error::Input("cannot select an action from an empty output".into()));
    }
    let mut best = 0;
    for (i, &v) in output.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::Input(format!("output component {i} is not finite")));
        }
        if v > output[best] {
            best = i;
        }
    }
    Ok(best)
}

/// Passes tanh-bounded outputs through as a continuous action.
pub fn select_continuous_action(output: &[f64]) -> Result<Vec<f64>> {
    if let Some((i, v)) = output
        .iter()
        .enumerate()
        .find(|(_, v)| !(-1.0..=1.0).contains(*v))
    {
        return Err(Error::Contract(format!(
            "continuous action component {i} = {v} lies outside [-1, 1]; \
             the output activation must be tanh"
        )));
    }
    Ok(output.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn spec(i: usize, o: usize, act: Activation) -> NetworkSpec {
        NetworkSpec::direct(i, o, act).unwrap()
    }

    #[test]
    fn param_counts_of_the_benchmark_architectures() {
        assert_eq!(spec(4, 2, Activation::Linear).param_count(), 10);
        assert_eq!(spec(8, 4, Activation::Linear).param_count(), 36);
        assert_eq!(spec(24, 4, Activation::Tanh).param_count(), 100);
        // substitute lander observations are 6 wide
        assert_eq!(spec(6, 4, Activation::Linear).param_count(), 28);
        assert_eq!(spec(6, 2, Activation::Tanh).param_count(), 14);
        let deep = NetworkSpec::new(3, vec![5, 2], 1, Activation::Tanh, Activation::Linear).unwrap();
        assert_eq!(deep.param_count(), 4 * 5 + 6 * 2 + 3);
    }

    #[test]
    fn rejects_zero_sized_layers() {
        assert!(NetworkSpec::direct(0, 2, Activation::Linear).is_err());
        assert!(NetworkSpec::direct(2, 0, Activation::Linear).is_err());
        assert!(NetworkSpec::new(2, vec![3, 0], 1, Activation::Tanh, Activation::Linear).is_err());
    }

    #[test]
    fn unflatten_layout() {
        let s = spec(4, 2, Activation::Linear);
        let p = ParameterVector::new((0..10).map(f64::from).collect());
        let layers = unflatten(&p, &s).unwrap();
        assert_eq!(layers.len(), 1);
        let l = &layers[0];
        assert_eq!((l.fan_in, l.fan_out), (4, 2));
        assert_eq!(l.weight(0, 0), 0.0);
        assert_eq!(l.weight(0, 3), 3.0);
        assert_eq!(l.weight(1, 0), 4.0);
        assert_eq!(l.biases, vec![8.0, 9.0]);
    }

    #[test]
    fn unflatten_rejects_wrong_length() {
        let s = spec(4, 2, Activation::Linear);
        let err = unflatten(&ParameterVector::zeros(9), &s).unwrap_err();
        assert!(matches!(err, Error::Structural(_)));
    }

    #[test]
    fn zero_params_tanh_gives_zero() {
        let s = spec(3, 2, Activation::Tanh);
        let out = forward(&s, &ParameterVector::zeros(8), &[1.0, -7.0, 3.5]).unwrap();
        assert_eq!(out, vec![0.0, 0.0]);
    }

    #[test]
    fn zero_params_sigmoid_gives_half() {
        let s = spec(3, 4, Activation::Sigmoid);
        let out = forward(&s, &ParameterVector::zeros(16), &[1.0, -7.0, 3.5]).unwrap();
        assert_eq!(out, vec![0.5; 4]);
    }

    #[test]
    fn hand_computed_linear_unit() {
        let s = spec(2, 1, Activation::Linear);
        let p = ParameterVector::new(vec![1.0, -1.0, 0.5]);
        let out = forward(&s, &p, &[2.0, 3.0]).unwrap();
        assert_eq!(out, vec![-0.5]);
    }

    #[test]
    fn hidden_layer_uses_hidden_activation() {
        // 1 -> 1 (tanh) -> 1 (linear), weights 1, biases 0: out = tanh(x)
        let s = NetworkSpec::new(1, vec![1], 1, Activation::Tanh, Activation::Linear).unwrap();
        let p = ParameterVector::new(vec![1.0, 0.0, 1.0, 0.0]);
        let out = forward(&s, &p, &[0.7]).unwrap();
        assert!((out[0] - 0.7f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn forward_rejects_bad_states() {
        let s = spec(2, 1, Activation::Linear);
        let p = ParameterVector::zeros(3);
        assert!(matches!(forward(&s, &p, &[1.0]), Err(Error::Structural(_))));
        assert!(matches!(forward(&s, &p, &[1.0, f64::NAN]), Err(Error::Input(_))));
    }

    #[test]
    fn argmax_examples() {
        assert_eq!(select_discrete_action(&[0.1, 0.9, 0.3]).unwrap(), 1);
        assert_eq!(select_discrete_action(&[0.5, 0.5]).unwrap(), 0);
        assert!(select_discrete_action(&[]).is_err());
        assert!(select_discrete_action(&[0.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn continuous_passthrough() {
        assert_eq!(select_continuous_action(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(
            select_continuous_action(&[0.2, 1.5]),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn tanh_outputs_are_valid_continuous_actions() {
        let s = spec(6, 2, Activation::Tanh);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let p = ParameterVector::new((0..14).map(|_| StandardNormal.sample(&mut rng)).collect());
        let mut net = Network::new(&s, &p).unwrap();
        for _ in 0..1000 {
            let state: Vec<f64> = (0..6).map(|_| { let x: f64 = StandardNormal.sample(&mut rng); 3.0 * x }).collect();
            let a = select_continuous_action(net.forward(&state).unwrap()).unwrap();
            assert!(a.iter().all(|c| (-1.0..=1.0).contains(c)));
        }
    }

    fn finite() -> impl Strategy<Value = f64> {
        -10.0f64..10.0
    }

    proptest! {
        #[test]
        fn flatten_unflatten_round_trip(
            input in 1usize..6,
            hidden in proptest::collection::vec(1usize..5, 0..3),
            output in 1usize..5,
            seed in any::<u64>(),
        ) {
            let s = NetworkSpec::new(input, hidden, output, Activation::Tanh, Activation::Linear).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let v = ParameterVector::new((0..s.param_count()).map(|_| StandardNormal.sample(&mut rng)).collect());
            let back = flatten(&unflatten(&v, &s).unwrap());
            prop_assert_eq!(back, v);
        }

        #[test]
        fn bias_free_linear_net_is_linear(
            w in proptest::collection::vec(finite(), 6),
            s1 in proptest::collection::vec(finite(), 3),
            s2 in proptest::collection::vec(finite(), 3),
            a in finite(),
            b in finite(),
        ) {
            let s = spec(3, 2, Activation::Linear);
            let mut values = w.clone();
            values.extend([0.0, 0.0]);
            let p = ParameterVector::new(values);
            let mixed: Vec<f64> = s1.iter().zip(&s2).map(|(x, y)| a * x + b * y).collect();
            let lhs = forward(&s, &p, &mixed).unwrap();
            let f1 = forward(&s, &p, &s1).unwrap();
            let f2 = forward(&s, &p, &s2).unwrap();
            for k in 0..2 {
                let rhs = a * f1[k] + b * f2[k];
                prop_assert!((lhs[k] - rhs).abs() <= 1e-9 * (1.0 + rhs.abs()));
            }
        }

        #[test]
        fn argmax_invariant_under_shift_and_positive_scale(
            v in proptest::collection::vec(finite(), 1..8),
            shift in finite(),
            scale in 0.01f64..100.0,
        ) {
            let base = select_discrete_action(&v).unwrap();
            let shifted: Vec<f64> = v.iter().map(|x| x + shift).collect();
            let scaled: Vec<f64> = v.iter().map(|x| x * scale).collect();
            // shifting can merge near-ties through rounding; compare values instead of indices
            let si = select_discrete_action(&shifted).unwrap();
            prop_assert!(v[si] + shift >= v[base] + shift - 1e-12 * (1.0 + shift.abs()));
            prop_assert_eq!(select_discrete_action(&scaled).unwrap(), base);
        }

        #[test]
        fn forward_is_deterministic(seed in any::<u64>()) {
            let s = NetworkSpec::new(4, vec![3], 2, Activation::Tanh, Activation::Tanh).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let p = ParameterVector::new((0..s.param_count()).map(|_| StandardNormal.sample(&mut rng)).collect());
            let st: Vec<f64> = (0..4).map(|_| StandardNormal.sample(&mut rng)).collect();
            let a = forward(&s, &p, &st).unwrap();
            let b = forward(&s, &p, &st).unwrap();
            prop_assert_eq!(a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), b.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        }
    }
}
