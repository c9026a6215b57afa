use super::layers::{Param, ParamVisitor};
use super::tensor::{Scalar, Tensor};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

/// Adam with bias correction. Moments are matched to parameters by visit
/// order and created on the first step.
#[derive(Debug, Clone)]
pub struct Adam<T> {
    pub lr: f64,
    step: u64,
    first: Vec<Tensor<T>>,
    second: Vec<Tensor<T>>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(lr: f64) -> Self {
        Adam {
            lr,
            step: 0,
            first: Vec::new(),
            second: Vec::new(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// Applies one update to every parameter reached by `visit`.
    pub fn step<F>(&mut self, visit: F)
    where
        F: FnOnce(&mut ParamVisitor<'_, T>),
    {
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - ADAM_BETA1.powi(t);
        let c2 = 1.0 - ADAM_BETA2.powi(t);
        let (b1, b2) = (T::of(ADAM_BETA1), T::of(ADAM_BETA2));
        let (one_b1, one_b2) = (T::of(1.0 - ADAM_BETA1), T::of(1.0 - ADAM_BETA2));
        let (c1, c2, lr, eps) = (T::of(c1), T::of(c2), T::of(self.lr), T::of(ADAM_EPSILON));
        let mut idx = 0;
        let (first, second) = (&mut self.first, &mut self.second);
        visit(&mut |_, p: &mut Param<T>| {
            if idx == first.len() {
                first.push(Tensor::zeros(p.value.shape()));
                second.push(Tensor::zeros(p.value.shape()));
            }
            let (m, v) = (first[idx].data_mut(), second[idx].data_mut());
            for (((w, &g), m), v) in p.value.data_mut().iter_mut().zip(p.grad.data()).zip(m).zip(v) {
                *m = b1 * *m + one_b1 * g;
                *v = b2 * *v + one_b2 * g * g;
                *w = *w - lr * (*m / c1) / ((*v / c2).sqrt() + eps);
            }
            idx += 1;
        });
    }
}

/// Multiplies the learning rate by `factor` after `patience` consecutive
/// observations without a strict improvement.
#[derive(Debug, Clone, PartialEq)]
pub struct Plateau {
    pub lr: f64,
    pub factor: f64,
    pub patience: usize,
    pub best: Option<f64>,
    pub since_improvement: usize,
}

impl Plateau {
    pub fn new(lr: f64, factor: f64, patience: usize) -> Self {
        Plateau {
            lr,
            factor,
            patience,
            best: None,
            since_improvement: 0,
        }
    }

    /// Records one epoch's validation metric and returns the learning rate
    /// for the next epoch.
    pub fn observe(&mut self, metric: f64) -> f64 {
        match self.best {
            Some(b) if metric <= b || metric.is_nan() => {
                self.since_improvement += 1;
                if self.since_improvement >= self.patience {
                    self.lr *= self.factor;
                    self.since_improvement = 0;
                }
            }
            _ => {
                self.best = Some(metric);
                self.since_improvement = 0;
            }
        }
        self.lr
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_param(v: f64) -> Param<f64> {
        Param::new(Tensor::from_vec(&[1], vec![v]).unwrap())
    }

    #[test]
    fn first_step_moves_by_lr() {
        let mut p = scalar_param(1.0);
        p.grad.data_mut()[0] = 0.37;
        let mut adam = Adam::new(0.001);
        adam.step(|f| f("w", &mut p));
        assert!((p.value.data()[0] - (1.0 - 0.001)).abs() < 1e-10);
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut p = scalar_param(2.5);
        let mut adam = Adam::new(0.1);
        for _ in 0..10 {
            adam.step(|f| f("w", &mut p));
        }
        assert_eq!(p.value.data()[0], 2.5);
    }

    #[test]
    fn quadratic_converges_like_the_scalar_recurrence() {
        // loss = (w - 1)^2
        let mut p = scalar_param(0.0);
        let mut adam = Adam::new(0.01);
        let (mut w, mut m, mut v) = (0.0f64, 0.0f64, 0.0f64);
        for t in 1..=500 {
            p.grad.data_mut()[0] = 2.0 * (p.value.data()[0] - 1.0);
            adam.step(|f| f("w", &mut p));
            let g = 2.0 * (w - 1.0);
            m = 0.9 * m + 0.1 * g;
            v = 0.999 * v + 0.001 * g * g;
            let mh = m / (1.0 - 0.9f64.powi(t));
            let vh = v / (1.0 - 0.999f64.powi(t));
            w -= 0.01 * mh / (vh.sqrt() + 1e-8);
        }
        assert!((p.value.data()[0] - w).abs() < 1e-12);
        assert!((w - 1.0).abs() < 1e-2);
    }

    #[test]
    fn plateau_halves_after_patience() {
        let mut s = Plateau::new(0.001, 0.5, 5);
        s.observe(0.8);
        for _ in 0..4 {
            assert_eq!(s.observe(0.7), 0.001);
        }
        assert_eq!(s.observe(0.8), 0.0005);
        for _ in 0..5 {
            s.observe(0.1);
        }
        assert_eq!(s.lr, 0.00025);
    }

    #[test]
    fn improvement_resets_counter() {
        let mut s = Plateau::new(0.001, 0.5, 5);
        s.observe(0.5);
        for _ in 0..3 {
            s.observe(0.4);
        }
        assert_eq!(s.observe(0.6), 0.001);
        assert_eq!(s.since_improvement, 0);
        assert_eq!(s.best, Some(0.6));
    }
}
