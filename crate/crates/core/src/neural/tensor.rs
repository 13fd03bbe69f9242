//! Dense tensors: the value (and gradient) storage for the network.

use rand::distributions::{Distribution, Uniform};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Scalar;

/// A dense row-major tensor. In practice rank is 1 (vectors, scalars as
/// one-element vectors) or 2 (matrices).
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<F: Scalar> {
    pub shape: Vec<usize>,
    pub values: Vec<F>,
    pub grad: Option<Vec<F>>,
}

impl<F: Scalar> Tensor<F> {
    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Tensor {
            shape,
            values: vec![F::zero(); len],
            grad: None,
        }
    }

    pub fn from_values(shape: Vec<usize>, values: Vec<F>) -> Self {
        assert_eq!(
            shape.iter().product::<usize>(),
            values.len(),
            "value count must match shape"
        );
        Tensor {
            shape,
            values,
            grad: None,
        }
    }

    pub fn vector(values: Vec<F>) -> Self {
        Tensor {
            shape: vec![values.len()],
            values,
            grad: None,
        }
    }

    pub fn scalar(v: F) -> Self {
        Tensor {
            shape: vec![1],
            values: vec![v],
            grad: None,
        }
    }

    /// Uniform init in `(-range, range)`, the classic small-LSTM scheme.
    pub fn uniform(shape: Vec<usize>, range: f64, rng: &mut ChaCha8Rng) -> Self {
        let len: usize = shape.iter().product();
        let dist = Uniform::new(-range, range);
        let values = (0..len)
            .map(|_| F::from_f64(dist.sample(rng)))
            .collect();
        Tensor {
            shape,
            values,
            grad: None,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Rows of a rank-2 tensor.
    pub fn rows(&self) -> usize {
        assert_eq!(self.shape.len(), 2, "rows() needs a matrix");
        self.shape[0]
    }

    /// Columns of a rank-2 tensor.
    pub fn cols(&self) -> usize {
        assert_eq!(self.shape.len(), 2, "cols() needs a matrix");
        self.shape[1]
    }
}
