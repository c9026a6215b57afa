use rand::Rng;

use super::tensor::{matmul, Scalar, Tensor};
use super::NnError;

/// A trainable tensor and its accumulated gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Param<T> {
    pub value: Tensor<T>,
    pub grad: Tensor<T>,
}

impl<T: Scalar> Param<T> {
    pub fn new(value: Tensor<T>) -> Self {
        let grad = Tensor::zeros(value.shape());
        Param { value, grad }
    }

    /// Uniform in `[-limit, limit]`.
    pub fn uniform<R: Rng + ?Sized>(shape: &[usize], limit: f64, rng: &mut R) -> Self {
        let n = shape.iter().product();
        let data = (0..n).map(|_| T::of(rng.gen_range(-limit..=limit))).collect();
        Param::new(Tensor::from_vec(shape, data).expect("sized"))
    }
}

pub type ParamVisitor<'a, T> = dyn FnMut(&str, &mut Param<T>) + 'a;

/// A differentiable stage. `forward` caches what `backward` needs;
/// `backward` accumulates parameter gradients and returns the input
/// gradient.
pub trait Layer<T: Scalar>: Send {
    fn forward(&mut self, x: &Tensor<T>) -> Result<Tensor<T>, NnError>;
    fn backward(&mut self, dy: &Tensor<T>) -> Tensor<T>;
    fn visit_params(&mut self, prefix: &str, f: &mut ParamVisitor<'_, T>);

    /// Appends which side of each non-differentiable switch (ReLU sign,
    /// max-pool winner) the last forward pass took. Two inputs with equal
    /// patterns lie on the same smooth piece.
    fn switch_pattern(&self, _out: &mut Vec<u32>) {}
}

fn join(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}.{name}")
    }
}

/// Kernel geometry of a 2D convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvSpec {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: (usize, usize),
    pub stride: usize,
    pub padding: (usize, usize),
}

impl ConvSpec {
    /// Stride-1 convolution with "same" padding.
    pub fn same(in_channels: usize, out_channels: usize, kh: usize, kw: usize) -> Self {
        ConvSpec {
            in_channels,
            out_channels,
            kernel: (kh, kw),
            stride: 1,
            padding: (kh / 2, kw / 2),
        }
    }

    /// 3×3, stride 2, padding 1.
    pub fn down(in_channels: usize, out_channels: usize) -> Self {
        ConvSpec {
            in_channels,
            out_channels,
            kernel: (3, 3),
            stride: 2,
            padding: (1, 1),
        }
    }

    pub fn output_size(&self, h: usize, w: usize) -> (usize, usize) {
        let (kh, kw) = self.kernel;
        let (ph, pw) = self.padding;
        ((h + 2 * ph - kh) / self.stride + 1, (w + 2 * pw - kw) / self.stride + 1)
    }
}

pub struct Conv2d<T> {
    pub spec: ConvSpec,
    pub weight: Param<T>,
    pub bias: Param<T>,
    input: Option<Tensor<T>>,
}

impl<T: Scalar> Conv2d<T> {
    /// Weights uniform in `±sqrt(gain / fan_in)`, zero bias.
    pub fn new<R: Rng + ?Sized>(spec: ConvSpec, gain: f64, rng: &mut R) -> Self {
        let fan_in = spec.in_channels * spec.kernel.0 * spec.kernel.1;
        Conv2d {
            spec,
            weight: Param::uniform(&[spec.out_channels, fan_in], (gain / fan_in as f64).sqrt(), rng),
            bias: Param::new(Tensor::zeros(&[spec.out_channels])),
            input: None,
        }
    }

    fn is_pointwise(&self) -> bool {
        self.spec.kernel == (1, 1) && self.spec.stride == 1 && self.spec.padding == (0, 0)
    }

    fn im2col(&self, x: &[T], h: usize, w: usize, ho: usize, wo: usize, col: &mut [T]) {
        let (kh, kw) = self.spec.kernel;
        let (ph, pw) = self.spec.padding;
        let s = self.spec.stride;
        let hw = ho * wo;
        for c in 0..self.spec.in_channels {
            for ki in 0..kh {
                for kj in 0..kw {
                    let row = ((c * kh + ki) * kw + kj) * hw;
                    for oy in 0..ho {
                        let iy = (oy * s + ki) as isize - ph as isize;
                        let dst = &mut col[row + oy * wo..row + (oy + 1) * wo];
                        if iy < 0 || iy >= h as isize {
                            dst.iter_mut().for_each(|v| *v = T::zero());
                            continue;
                        }
                        let src = &x[(c * h + iy as usize) * w..(c * h + iy as usize + 1) * w];
                        for (ox, d) in dst.iter_mut().enumerate() {
                            let ix = (ox * s + kj) as isize - pw as isize;
                            *d = if ix < 0 || ix >= w as isize {
                                T::zero()
                            } else {
                                src[ix as usize]
                            };
                        }
                    }
                }
            }
        }
    }

    fn col2im(&self, col: &[T], h: usize, w: usize, ho: usize, wo: usize, dx: &mut [T]) {
        let (kh, kw) = self.spec.kernel;
        let (ph, pw) = self.spec.padding;
        let s = self.spec.stride;
        let hw = ho * wo;
        for c in 0..self.spec.in_channels {
            for ki in 0..kh {
                for kj in 0..kw {
                    let row = ((c * kh + ki) * kw + kj) * hw;
                    for oy in 0..ho {
                        let iy = (oy * s + ki) as isize - ph as isize;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        let base = (c * h + iy as usize) * w;
                        for ox in 0..wo {
                            let ix = (ox * s + kj) as isize - pw as isize;
                            if ix >= 0 && ix < w as isize {
                                let d = &mut dx[base + ix as usize];
                                *d = *d + col[row + oy * wo + ox];
                            }
                        }
                    }
                }
            }
        }
    }

    fn dims(&self, x: &Tensor<T>) -> Result<(usize, usize, usize, usize, usize), NnError> {
        let s = x.shape();
        if s.len() != 4 || s[1] != self.spec.in_channels {
            return Err(NnError::ShapeMismatch {
                expected: vec![0, self.spec.in_channels, 0, 0],
                found: s.to_vec(),
            });
        }
        let (ho, wo) = self.spec.output_size(s[2], s[3]);
        Ok((s[0], s[2], s[3], ho, wo))
    }
}

impl<T: Scalar> Layer<T> for Conv2d<T> {
    fn forward(&mut self, x: &Tensor<T>) -> Result<Tensor<T>, NnError> {
        let (batch, h, w, ho, wo) = self.dims(x)?;
        let c = self.spec.in_channels;
        let o = self.spec.out_channels;
        let ck = self.weight.value.shape()[1];
        let hw = ho * wo;
        let mut out = Tensor::zeros(&[batch, o, ho, wo]);
        let mut col = if self.is_pointwise() {
            Vec::new()
        } else {
            vec![T::zero(); ck * hw]
        };
        for b in 0..batch {
            let xb = &x.data()[b * c * h * w..(b + 1) * c * h * w];
            let yb = &mut out.data_mut()[b * o * hw..(b + 1) * o * hw];
            let src: &[T] = if self.is_pointwise() {
                xb
            } else {
                self.im2col(xb, h, w, ho, wo, &mut col);
                &col
            };
            matmul(o, ck, hw, self.weight.value.data(), false, src, false, yb, false);
            for (oc, &bias) in self.bias.value.data().iter().enumerate() {
                yb[oc * hw..(oc + 1) * hw].iter_mut().for_each(|v| *v = *v + bias);
            }
        }
        self.input = Some(x.clone());
        Ok(out)
    }

    fn backward(&mut self, dy: &Tensor<T>) -> Tensor<T> {
        let x = self.input.take().expect("forward before backward");
        let (batch, h, w, ho, wo) = self.dims(&x).expect("cached input");
        let c = self.spec.in_channels;
        let o = self.spec.out_channels;
        let ck = self.weight.value.shape()[1];
        let hw = ho * wo;
        let mut dx = Tensor::zeros(x.shape());
        let pointwise = self.is_pointwise();
        let mut col = if pointwise {
            Vec::new()
        } else {
            vec![T::zero(); ck * hw]
        };
        let mut dcol = vec![T::zero(); ck * hw];
        for b in 0..batch {
            let xb = &x.data()[b * c * h * w..(b + 1) * c * h * w];
            let dyb = &dy.data()[b * o * hw..(b + 1) * o * hw];
            let src: &[T] = if pointwise {
                xb
            } else {
                self.im2col(xb, h, w, ho, wo, &mut col);
                &col
            };
            matmul(o, hw, ck, dyb, false, src, true, self.weight.grad.data_mut(), true);
            for (oc, g) in self.bias.grad.data_mut().iter_mut().enumerate() {
                *g = *g + dyb[oc * hw..(oc + 1) * hw].iter().copied().sum();
            }
            let dxb = &mut dx.data_mut()[b * c * h * w..(b + 1) * c * h * w];
            if pointwise {
                matmul(ck, o, hw, self.weight.value.data(), true, dyb, false, dxb, false);
            } else {
                matmul(ck, o, hw, self.weight.value.data(), true, dyb, false, &mut dcol, false);
                self.col2im(&dcol, h, w, ho, wo, dxb);
            }
        }
        dx
    }

    fn visit_params(&mut self, prefix: &str, f: &mut ParamVisitor<'_, T>) {
        f(&join(prefix, "weight"), &mut self.weight);
        f(&join(prefix, "bias"), &mut self.bias);
    }
}

/// Fully connected layer on `[batch, in]` inputs.
pub struct Dense<T> {
    pub weight: Param<T>,
    pub bias: Param<T>,
    input: Option<Tensor<T>>,
}

impl<T: Scalar> Dense<T> {
    pub fn new<R: Rng + ?Sized>(inputs: usize, outputs: usize, gain: f64, rng: &mut R) -> Self {
        Dense {
            weight: Param::uniform(&[outputs, inputs], (gain / inputs.max(1) as f64).sqrt(), rng),
            bias: Param::new(Tensor::zeros(&[outputs])),
            input: None,
        }
    }

    pub fn inputs(&self) -> usize {
        self.weight.value.shape()[1]
    }

    pub fn outputs(&self) -> usize {
        self.weight.value.shape()[0]
    }
}

impl<T: Scalar> Layer<T> for Dense<T> {
    fn forward(&mut self, x: &Tensor<T>) -> Result<Tensor<T>, NnError> {
        let (i, o) = (self.inputs(), self.outputs());
        if x.shape().len() != 2 || x.shape()[1] != i {
            return Err(NnError::ShapeMismatch {
                expected: vec![0, i],
                found: x.shape().to_vec(),
            });
        }
        let batch = x.shape()[0];
        let mut y = Tensor::zeros(&[batch, o]);
        matmul(
            batch,
            i,
            o,
            x.data(),
            false,
            self.weight.value.data(),
            true,
            y.data_mut(),
            false,
        );
        for row in y.data_mut().chunks_mut(o) {
            for (v, &b) in row.iter_mut().zip(self.bias.value.data()) {
                *v = *v + b;
            }
        }
        self.input = Some(x.clone());
        Ok(y)
    }

    fn backward(&mut self, dy: &Tensor<T>) -> Tensor<T> {
        let x = self.input.take().expect("forward before backward");
        let (i, o) = (self.inputs(), self.outputs());
        let batch = x.shape()[0];
        matmul(
            o,
            batch,
            i,
            dy.data(),
            true,
            x.data(),
            false,
            self.weight.grad.data_mut(),
            true,
        );
        for row in dy.data().chunks(o) {
            for (g, &d) in self.bias.grad.data_mut().iter_mut().zip(row) {
                *g = *g + d;
            }
        }
        let mut dx = Tensor::zeros(&[batch, i]);
        matmul(
            batch,
            o,
            i,
            dy.data(),
            false,
            self.weight.value.data(),
            false,
            dx.data_mut(),
            false,
        );
        dx
    }

    fn visit_params(&mut self, prefix: &str, f: &mut ParamVisitor<'_, T>) {
        f(&join(prefix, "weight"), &mut self.weight);
        f(&join(prefix, "bias"), &mut self.bias);
    }
}

#[derive(Default)]
pub struct Relu {
    mask: Vec<bool>,
}

impl Relu {
    pub fn new() -> Self {
        Relu::default()
    }
}

impl<T: Scalar> Layer<T> for Relu {
    fn forward(&mut self, x: &Tensor<T>) -> Result<Tensor<T>, NnError> {
        let mut y = x.clone();
        self.mask = x.data().iter().map(|&v| v > T::zero()).collect();
        for (v, &m) in y.data_mut().iter_mut().zip(&self.mask) {
            if !m {
                *v = T::zero();
            }
        }
        Ok(y)
    }

    fn backward(&mut self, dy: &Tensor<T>) -> Tensor<T> {
        let mut dx = dy.clone();
        for (v, &m) in dx.data_mut().iter_mut().zip(&self.mask) {
            if !m {
                *v = T::zero();
            }
        }
        dx
    }

    fn visit_params(&mut self, _: &str, _: &mut ParamVisitor<'_, T>) {}

    fn switch_pattern(&self, out: &mut Vec<u32>) {
        out.extend(self.mask.iter().map(|&m| m as u32));
    }
}

/// 3×3 max pooling, stride 2, padding 1 (padding never wins).
#[derive(Default)]
pub struct MaxPool2d {
    argmax: Vec<usize>,
    input_shape: Vec<usize>,
}

impl MaxPool2d {
    pub fn new() -> Self {
        MaxPool2d::default()
    }
}

impl<T: Scalar> Layer<T> for MaxPool2d {
    fn forward(&mut self, x: &Tensor<T>) -> Result<Tensor<T>, NnError> {
        let s = x.shape();
        if s.len() != 4 {
            return Err(NnError::ShapeMismatch {
                expected: vec![0, 0, 0, 0],
                found: s.to_vec(),
            });
        }
        let (planes, h, w) = (s[0] * s[1], s[2], s[3]);
        let (ho, wo) = (h.div_ceil(2), w.div_ceil(2));
        let mut out = Tensor::zeros(&[s[0], s[1], ho, wo]);
        self.argmax = Vec::with_capacity(planes * ho * wo);
        for p in 0..planes {
            for oy in 0..ho {
                for ox in 0..wo {
                    let mut best = T::neg_infinity();
                    let mut arg = 0;
                    for ky in 0..3 {
                        let iy = (2 * oy + ky) as isize - 1;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        for kx in 0..3 {
                            let ix = (2 * ox + kx) as isize - 1;
                            if ix < 0 || ix >= w as isize {
                                continue;
                            }
                            let idx = (p * h + iy as usize) * w + ix as usize;
                            if x.data()[idx] > best {
                                best = x.data()[idx];
                                arg = idx;
                            }
                        }
                    }
                    out.data_mut()[(p * ho + oy) * wo + ox] = best;
                    self.argmax.push(arg);
                }
            }
        }
        self.input_shape = s.to_vec();
        Ok(out)
    }

    fn backward(&mut self, dy: &Tensor<T>) -> Tensor<T> {
        let mut dx = Tensor::zeros(&self.input_shape);
        for (&arg, &g) in self.argmax.iter().zip(dy.data()) {
            let d = &mut dx.data_mut()[arg];
            *d = *d + g;
        }
        dx
    }

    fn visit_params(&mut self, _: &str, _: &mut ParamVisitor<'_, T>) {}

    fn switch_pattern(&self, out: &mut Vec<u32>) {
        out.extend(self.argmax.iter().map(|&a| a as u32));
    }
}

/// `[B, C, H, W] -> [B, C]` spatial mean.
#[derive(Default)]
pub struct GlobalAvgPool {
    input_shape: Vec<usize>,
}

impl GlobalAvgPool {
    pub fn new() -> Self {
        GlobalAvgPool::default()
    }
}

impl<T: Scalar> Layer<T> for GlobalAvgPool {
    fn forward(&mut self, x: &Tensor<T>) -> Result<Tensor<T>, NnError> {
        let s = x.shape();
        if s.len() != 4 {
            return Err(NnError::ShapeMismatch {
                expected: vec![0, 0, 0, 0],
                found: s.to_vec(),
            });
        }
        let hw = s[2] * s[3];
        let scale = T::one() / T::of(hw as f64);
        let data = x
            .data()
            .chunks(hw)
            .map(|p| p.iter().copied().sum::<T>() * scale)
            .collect();
        self.input_shape = s.to_vec();
        Tensor::from_vec(&[s[0], s[1]], data)
    }

    fn backward(&mut self, dy: &Tensor<T>) -> Tensor<T> {
        let hw = self.input_shape[2] * self.input_shape[3];
        let scale = T::one() / T::of(hw as f64);
        let data = dy
            .data()
            .iter()
            .flat_map(|&g| std::iter::repeat_n(g * scale, hw))
            .collect();
        Tensor::from_vec(&self.input_shape, data).expect("sized")
    }

    fn visit_params(&mut self, _: &str, _: &mut ParamVisitor<'_, T>) {}
}

/// Layers applied in order.
pub struct Sequential<T> {
    layers: Vec<(String, Box<dyn Layer<T>>)>,
}

impl<T: Scalar> Sequential<T> {
    pub fn new() -> Self {
        Sequential { layers: Vec::new() }
    }

    pub fn push(mut self, name: impl Into<String>, layer: impl Layer<T> + 'static) -> Self {
        self.layers.push((name.into(), Box::new(layer)));
        self
    }

    pub fn push_boxed(&mut self, name: impl Into<String>, layer: Box<dyn Layer<T>>) {
        self.layers.push((name.into(), layer));
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }
}

impl<T: Scalar> Default for Sequential<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> Layer<T> for Sequential<T> {
    fn forward(&mut self, x: &Tensor<T>) -> Result<Tensor<T>, NnError> {
        let mut h = x.clone();
        for (_, l) in &mut self.layers {
            h = l.forward(&h)?;
        }
        Ok(h)
    }

    fn backward(&mut self, dy: &Tensor<T>) -> Tensor<T> {
        let mut g = dy.clone();
        for (_, l) in self.layers.iter_mut().rev() {
            g = l.backward(&g);
        }
        g
    }

    fn visit_params(&mut self, prefix: &str, f: &mut ParamVisitor<'_, T>) {
        for (name, l) in &mut self.layers {
            l.visit_params(&join(prefix, name), f);
        }
    }

    fn switch_pattern(&self, out: &mut Vec<u32>) {
        for (_, l) in &self.layers {
            l.switch_pattern(out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn conv_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spec = ConvSpec {
            in_channels: 2,
            out_channels: 3,
            kernel: (3, 2),
            stride: 2,
            padding: (1, 0),
        };
        let mut conv = Conv2d::<f64>::new(spec, 2.0, &mut rng);
        conv.bias.value.data_mut().copy_from_slice(&[0.1, -0.2, 0.3]);
        let x = Param::<f64>::uniform(&[2, 2, 5, 4], 1.0, &mut rng).value;
        let y = conv.forward(&x).unwrap();
        let (ho, wo) = spec.output_size(5, 4);
        assert_eq!(y.shape(), &[2, 3, ho, wo]);
        for b in 0..2 {
            for o in 0..3 {
                for oy in 0..ho {
                    for ox in 0..wo {
                        let mut s = conv.bias.value.data()[o];
                        for c in 0..2 {
                            for ki in 0..3 {
                                for kj in 0..2 {
                                    let iy = (oy * 2 + ki) as isize - 1;
                                    let ix = (ox * 2 + kj) as isize;
                                    if (0..5).contains(&iy) && ix < 4 {
                                        let wv = conv.weight.value.data()[o * 12 + (c * 3 + ki) * 2 + kj];
                                        s += wv * x.data()[((b * 2 + c) * 5 + iy as usize) * 4 + ix as usize];
                                    }
                                }
                            }
                        }
                        let got = y.data()[((b * 3 + o) * ho + oy) * wo + ox];
                        assert!((got - s).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn maxpool_shapes_and_routing() {
        let x = Tensor::<f64>::from_vec(&[1, 1, 3, 3], (0..9).map(f64::from).collect()).unwrap();
        let mut pool = MaxPool2d::new();
        let y = Layer::<f64>::forward(&mut pool, &x).unwrap();
        assert_eq!(y.shape(), &[1, 1, 2, 2]);
        assert_eq!(y.data(), &[4.0, 5.0, 7.0, 8.0]);
        let dx = Layer::<f64>::backward(&mut pool, &Tensor::from_vec(&[1, 1, 2, 2], vec![1.0; 4]).unwrap());
        assert_eq!(dx.data(), &[0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn shape_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut d = Dense::<f64>::new(3, 2, 1.0, &mut rng);
        assert!(d.forward(&Tensor::zeros(&[1, 4])).is_err());
        let mut c = Conv2d::<f64>::new(ConvSpec::same(2, 2, 3, 3), 1.0, &mut rng);
        assert!(c.forward(&Tensor::zeros(&[1, 3, 4, 4])).is_err());
    }
}
