use std::fmt::Debug;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

use super::NnError;

/// Element type of tensors: `f64` for exact, reproducible runs and gradient
/// checks, `f32` for speed.
pub trait Scalar: Float + FromPrimitive + ToPrimitive + Default + Debug + Send + Sync + Sum + 'static {
    const NAME: &'static str;

    /// # Safety
    /// Same contract as `matrixmultiply::dgemm`.
    #[allow(clippy::too_many_arguments)]
    unsafe fn gemm(
        m: usize,
        k: usize,
        n: usize,
        a: *const Self,
        rsa: isize,
        csa: isize,
        b: *const Self,
        rsb: isize,
        csb: isize,
        beta: Self,
        c: *mut Self,
        rsc: isize,
        csc: isize,
    );

    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("representable")
    }
}

impl Scalar for f32 {
    const NAME: &'static str = "f32";

    unsafe fn gemm(
        m: usize,
        k: usize,
        n: usize,
        a: *const f32,
        rsa: isize,
        csa: isize,
        b: *const f32,
        rsb: isize,
        csb: isize,
        beta: f32,
        c: *mut f32,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::sgemm(m, k, n, 1.0, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }
}

impl Scalar for f64 {
    const NAME: &'static str = "f64";

    unsafe fn gemm(
        m: usize,
        k: usize,
        n: usize,
        a: *const f64,
        rsa: isize,
        csa: isize,
        b: *const f64,
        rsb: isize,
        csb: isize,
        beta: f64,
        c: *mut f64,
        rsc: isize,
        csc: isize,
    ) {
        matrixmultiply::dgemm(m, k, n, 1.0, a, rsa, csa, b, rsb, csb, beta, c, rsc, csc)
    }
}

/// `c (m×n) = op(a) · op(b)`, plus the old `c` when `accumulate`. Operands
/// are row-major; `op` transposes when the flag is set, so `a` is stored as
/// `m×k` (or `k×m` transposed) and `b` as `k×n` (or `n×k`).
#[allow(clippy::too_many_arguments)]
pub fn matmul<T: Scalar>(
    m: usize,
    k: usize,
    n: usize,
    a: &[T],
    trans_a: bool,
    b: &[T],
    trans_b: bool,
    c: &mut [T],
    accumulate: bool,
) {
    assert!(
        a.len() >= m * k && b.len() >= k * n && c.len() >= m * n,
        "matmul operand sizes"
    );
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        if !accumulate {
            c[..m * n].iter_mut().for_each(|v| *v = T::zero());
        }
        return;
    }
    let (rsa, csa) = if trans_a { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if trans_b { (1, k as isize) } else { (n as isize, 1) };
    let beta = if accumulate { T::one() } else { T::zero() };
    // SAFETY: bounds asserted above; strides describe dense row-major
    // storage of the stated shapes.
    unsafe {
        T::gemm(
            m,
            k,
            n,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        )
    }
}

/// Dense row-major n-dimensional array.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    pub fn zeros(shape: &[usize]) -> Self {
        Tensor {
            shape: shape.to_vec(),
            data: vec![T::zero(); shape.iter().product()],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<T>) -> Result<Self, NnError> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(NnError::ShapeMismatch {
                expected: shape.to_vec(),
                found: vec![data.len()],
            });
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn fill(&mut self, v: T) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    pub fn add_assign(&mut self, other: &Tensor<T>) {
        assert_eq!(self.shape, other.shape, "add_assign shapes");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = *a + b;
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn cast<U: Scalar>(&self) -> Tensor<U> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| U::of(v.as_f64())).collect(),
        }
    }

    /// Elements per index of axis 1 (product of the trailing dimensions).
    fn inner(&self) -> usize {
        self.shape[2..].iter().product()
    }

    /// Concatenates along axis 1. All parts must agree on every other axis.
    pub fn concat_axis1(parts: &[&Tensor<T>]) -> Result<Tensor<T>, NnError> {
        let first = parts.first().ok_or(NnError::ShapeMismatch {
            expected: vec![],
            found: vec![],
        })?;
        let batch = first.shape[0];
        let inner = first.inner();
        for p in parts {
            if p.shape.len() != first.shape.len() || p.shape[0] != batch || p.shape[2..] != first.shape[2..] {
                return Err(NnError::ShapeMismatch {
                    expected: first.shape.clone(),
                    found: p.shape.clone(),
                });
            }
        }
        let channels: usize = parts.iter().map(|p| p.shape[1]).sum();
        let mut shape = first.shape.clone();
        shape[1] = channels;
        let mut data = Vec::with_capacity(batch * channels * inner);
        for b in 0..batch {
            for p in parts {
                let chunk = p.shape[1] * inner;
                data.extend_from_slice(&p.data[b * chunk..(b + 1) * chunk]);
            }
        }
        Ok(Tensor { shape, data })
    }

    /// Inverse of [`Tensor::concat_axis1`].
    pub fn split_axis1(&self, sizes: &[usize]) -> Vec<Tensor<T>> {
        assert_eq!(sizes.iter().sum::<usize>(), self.shape[1], "split sizes");
        let batch = self.shape[0];
        let inner = self.inner();
        let total = self.shape[1] * inner;
        let mut out: Vec<Tensor<T>> = sizes
            .iter()
            .map(|&s| {
                let mut shape = self.shape.clone();
                shape[1] = s;
                Tensor {
                    shape,
                    data: Vec::with_capacity(batch * s * inner),
                }
            })
            .collect();
        for b in 0..batch {
            let mut offset = b * total;
            for (t, &s) in out.iter_mut().zip(sizes) {
                t.data.extend_from_slice(&self.data[offset..offset + s * inner]);
                offset += s * inner;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_variants() {
        // a = [[1,2,3],[4,5,6]], b = [[1,0],[0,1],[1,1]]
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let b = [1.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let mut c = [0.0f64; 4];
        matmul(2, 3, 2, &a, false, &b, false, &mut c, false);
        assert_eq!(c, [4.0, 5.0, 10.0, 11.0]);
        let at = [1.0, 4.0, 2.0, 5.0, 3.0, 6.0];
        let bt = [1.0, 0.0, 1.0, 0.0, 1.0, 1.0];
        let mut d = [1.0f64; 4];
        matmul(2, 3, 2, &at, true, &bt, true, &mut d, true);
        assert_eq!(d, [5.0, 6.0, 11.0, 12.0]);
        let mut e = [0.0f32; 4];
        let a32: Vec<f32> = a.iter().map(|&v| v as f32).collect();
        let b32: Vec<f32> = b.iter().map(|&v| v as f32).collect();
        matmul(2, 3, 2, &a32, false, &b32, false, &mut e, false);
        assert_eq!(e, [4.0, 5.0, 10.0, 11.0]);
    }

    #[test]
    fn concat_split_round_trip() {
        let a = Tensor::from_vec(&[2, 1, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = Tensor::from_vec(&[2, 2, 2], vec![5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0]).unwrap();
        let c = Tensor::<f64>::concat_axis1(&[&a, &b]).unwrap();
        assert_eq!(c.shape(), &[2, 3, 2]);
        assert_eq!(
            c.data(),
            &[1.0, 2.0, 5.0, 6.0, 7.0, 8.0, 3.0, 4.0, 9.0, 10.0, 11.0, 12.0]
        );
        let parts = c.split_axis1(&[1, 2]);
        assert_eq!(parts[0], a);
        assert_eq!(parts[1], b);
    }

    #[test]
    fn from_vec_checks_length() {
        assert!(Tensor::<f64>::from_vec(&[2, 2], vec![0.0; 3]).is_err());
    }
}
