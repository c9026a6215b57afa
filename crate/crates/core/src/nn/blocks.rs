use rand::Rng;

use super::layers::{Conv2d, ConvSpec, Layer, MaxPool2d, ParamVisitor, Relu, Sequential};
use super::tensor::{Scalar, Tensor};
use super::NnError;

/// He-style gain for convolutions followed by ReLU.
pub(crate) const RELU_GAIN: f64 = 6.0;
/// Gain for convolutions and dense layers with a linear output.
pub(crate) const LINEAR_GAIN: f64 = 3.0;

fn conv_relu<T: Scalar, R: Rng + ?Sized>(seq: Sequential<T>, name: &str, spec: ConvSpec, rng: &mut R) -> Sequential<T> {
    seq.push(name, Conv2d::new(spec, RELU_GAIN, rng))
        .push(format!("{name}_relu"), Relu::new())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualKind {
    /// `1×1`, `1×1→3×3`, `1×1→3×3`.
    A,
    /// `1×1`, `1×1→1×7→7×1`.
    B,
    /// `1×1`, `1×1→1×3→3×1`.
    C,
}

/// Multi-branch residual block: branch outputs are concatenated, projected
/// back to the input width by a linear `1×1` convolution, added to the
/// input and passed through ReLU.
pub struct Residual<T> {
    branches: Vec<Sequential<T>>,
    widths: Vec<usize>,
    pub project: Conv2d<T>,
    relu: Relu,
}

impl<T: Scalar> Residual<T> {
    pub fn new<R: Rng + ?Sized>(kind: ResidualKind, channels: usize, filters: usize, rng: &mut R) -> Self {
        let (c, f) = (channels, filters);
        let mut branches = vec![conv_relu(Sequential::new(), "conv1x1", ConvSpec::same(c, f, 1, 1), rng)];
        match kind {
            ResidualKind::A => {
                for _ in 0..2 {
                    let s = conv_relu(Sequential::new(), "conv1x1", ConvSpec::same(c, f, 1, 1), rng);
                    branches.push(conv_relu(s, "conv3x3", ConvSpec::same(f, f, 3, 3), rng));
                }
            }
            ResidualKind::B | ResidualKind::C => {
                let k = if kind == ResidualKind::B { 7 } else { 3 };
                let s = conv_relu(Sequential::new(), "conv1x1", ConvSpec::same(c, f, 1, 1), rng);
                let s = conv_relu(s, &format!("conv1x{k}"), ConvSpec::same(f, f, 1, k), rng);
                branches.push(conv_relu(s, &format!("conv{k}x1"), ConvSpec::same(f, f, k, 1), rng));
            }
        }
        let widths = vec![f; branches.len()];
        let project = Conv2d::new(ConvSpec::same(f * branches.len(), c, 1, 1), LINEAR_GAIN, rng);
        Residual {
            branches,
            widths,
            project,
            relu: Relu::new(),
        }
    }
}

impl<T: Scalar> Layer<T> for Residual<T> {
    fn forward(&mut self, x: &Tensor<T>) -> Result<Tensor<T>, NnError> {
        let outs = self
            .branches
            .iter_mut()
            .map(|b| b.forward(x))
            .collect::<Result<Vec<_>, _>>()?;
        let cat = Tensor::concat_axis1(&outs.iter().collect::<Vec<_>>())?;
        let mut sum = self.project.forward(&cat)?;
        sum.add_assign(x);
        Layer::<T>::forward(&mut self.relu, &sum)
    }

    fn backward(&mut self, dy: &Tensor<T>) -> Tensor<T> {
        let ds = Layer::<T>::backward(&mut self.relu, dy);
        let dcat = self.project.backward(&ds);
        let mut dx = ds;
        for (branch, part) in self.branches.iter_mut().zip(dcat.split_axis1(&self.widths)) {
            dx.add_assign(&branch.backward(&part));
        }
        dx
    }

    fn visit_params(&mut self, prefix: &str, f: &mut ParamVisitor<'_, T>) {
        for (i, b) in self.branches.iter_mut().enumerate() {
            b.visit_params(&format!("{prefix}.branch{i}"), f);
        }
        self.project.visit_params(&format!("{prefix}.project"), f);
    }

    fn switch_pattern(&self, out: &mut Vec<u32>) {
        for b in &self.branches {
            b.switch_pattern(out);
        }
        Layer::<T>::switch_pattern(&self.relu, out);
    }
}

/// Grid-halving block: max-pool, a strided `3×3`, and `1×1→3×3→3×3`
/// strided, concatenated to `channels + 2·filters` outputs.
pub struct Reduction<T> {
    pool: MaxPool2d,
    branches: Vec<Sequential<T>>,
    widths: Vec<usize>,
}

impl<T: Scalar> Reduction<T> {
    pub fn new<R: Rng + ?Sized>(channels: usize, filters: usize, rng: &mut R) -> Self {
        let (c, f) = (channels, filters);
        let direct = conv_relu(Sequential::new(), "conv3x3s2", ConvSpec::down(c, f), rng);
        let deep = conv_relu(Sequential::new(), "conv1x1", ConvSpec::same(c, f, 1, 1), rng);
        let deep = conv_relu(deep, "conv3x3", ConvSpec::same(f, f, 3, 3), rng);
        let deep = conv_relu(deep, "conv3x3s2", ConvSpec::down(f, f), rng);
        Reduction {
            pool: MaxPool2d::new(),
            branches: vec![direct, deep],
            widths: vec![c, f, f],
        }
    }

    pub fn output_channels(&self) -> usize {
        self.widths.iter().sum()
    }
}

impl<T: Scalar> Layer<T> for Reduction<T> {
    fn forward(&mut self, x: &Tensor<T>) -> Result<Tensor<T>, NnError> {
        let mut outs = vec![Layer::<T>::forward(&mut self.pool, x)?];
        for b in &mut self.branches {
            outs.push(b.forward(x)?);
        }
        Tensor::concat_axis1(&outs.iter().collect::<Vec<_>>())
    }

    fn backward(&mut self, dy: &Tensor<T>) -> Tensor<T> {
        let parts = dy.split_axis1(&self.widths);
        let mut dx = Layer::<T>::backward(&mut self.pool, &parts[0]);
        for (b, p) in self.branches.iter_mut().zip(&parts[1..]) {
            dx.add_assign(&b.backward(p));
        }
        dx
    }

    fn visit_params(&mut self, prefix: &str, f: &mut ParamVisitor<'_, T>) {
        for (i, b) in self.branches.iter_mut().enumerate() {
            b.visit_params(&format!("{prefix}.branch{}", i + 1), f);
        }
    }

    fn switch_pattern(&self, out: &mut Vec<u32>) {
        Layer::<T>::switch_pattern(&self.pool, out);
        for b in &self.branches {
            b.switch_pattern(out);
        }
    }
}
