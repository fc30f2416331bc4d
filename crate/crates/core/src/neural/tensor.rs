use crate::error::{Error, Result};

/// Dense row-major real tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        Self {
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        let want: usize = shape.iter().product();
        if data.len() != want {
            return Err(Error::ShapeMismatch(format!(
                "{} values for shape {shape:?}",
                data.len()
            )));
        }
        Ok(Self {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn offset(&self, index: &[usize]) -> usize {
        assert_eq!(index.len(), self.shape.len(), "index rank");
        index
            .iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &d)| {
                assert!(i < d, "index {index:?} out of bounds for {:?}", self.shape);
                acc * d + i
            })
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.offset(index)]
    }

    pub fn set(&mut self, index: &[usize], value: f64) {
        let o = self.offset(index);
        self.data[o] = value;
    }

    pub fn sum_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }
}

/// Batch of feature maps, `[batch][channel][height][width]`. 1D signals use
/// `height = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Activations {
    pub batch: usize,
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub data: Vec<f64>,
}

impl Activations {
    pub fn zeros(batch: usize, channels: usize, height: usize, width: usize) -> Self {
        Self {
            batch,
            channels,
            height,
            width,
            data: vec![0.0; batch * channels * height * width],
        }
    }

    pub fn spatial(&self) -> usize {
        self.height * self.width
    }

    pub fn sample_len(&self) -> usize {
        self.channels * self.spatial()
    }

    pub fn same_shape(&self) -> Self {
        Self::zeros(self.batch, self.channels, self.height, self.width)
    }

    pub fn sample(&self, b: usize) -> &[f64] {
        let n = self.sample_len();
        &self.data[b * n..(b + 1) * n]
    }

    /// Stacks per-sample `(C, H, W)` tensors into a batch.
    pub fn from_samples(samples: &[Tensor]) -> Result<Self> {
        let first = samples.first().ok_or(Error::EmptyInput("batch"))?;
        let shape = first.shape().to_vec();
        if shape.len() != 3 {
            return Err(Error::ShapeMismatch(format!("expected (C, H, W) samples, got {shape:?}")));
        }
        let mut data = Vec::with_capacity(samples.len() * first.len());
        for s in samples {
            if s.shape() != shape.as_slice() {
                return Err(Error::ShapeMismatch(format!(
                    "mixed sample shapes {:?} and {shape:?}",
                    s.shape()
                )));
            }
            data.extend_from_slice(s.data());
        }
        Ok(Self {
            batch: samples.len(),
            channels: shape[0],
            height: shape[1],
            width: shape[2],
            data,
        })
    }

    /// Concatenates batches along the batch axis.
    pub fn concat(parts: &[Activations]) -> Result<Self> {
        let first = parts.first().ok_or(Error::EmptyInput("batch"))?;
        let mut out = Self {
            batch: 0,
            data: Vec::new(),
            ..first.clone()
        };
        for p in parts {
            if (p.channels, p.height, p.width) != (first.channels, first.height, first.width) {
                return Err(Error::ShapeMismatch("cannot concatenate differently shaped batches".into()));
            }
            out.batch += p.batch;
            out.data.extend_from_slice(&p.data);
        }
        Ok(out)
    }
}
