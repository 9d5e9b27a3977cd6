//! Minimal feedforward inference so externally trained classifier weights
//! can drive the 15-puzzle experiments.
//!
//! The weight container ("MLP1", little-endian) is self-describing:
//!
//! ```text
//! magic "MLP1"
//! u32 layer count
//! per layer: u32 rows, u32 cols, u8 activation tag (0 identity, 1 relu),
//!            rows*cols f64 row-major weights, rows f64 biases
//! ```
//!
//! The final layer's output is always pushed through a max-shifted softmax,
//! whatever its stored activation tag. For the canonical 15-puzzle policy
//! the shape is 256 -> 160 -> 80 -> 16 -> 4 and the one-hot input encoding
//! is cell-major: tile `t` on cell `c` sets component `16*c + t`. Exporters
//! must match both conventions.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::domain::StateKey;
use crate::domains::TileDomain;
use crate::policy::StochasticPolicy;

const MAGIC: &[u8; 4] = b"MLP1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
}

impl Activation {
    fn tag(self) -> u8 {
        match self {
            Activation::Identity => 0,
            Activation::Relu => 1,
        }
    }

    fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Activation::Identity),
            1 => Some(Activation::Relu),
            _ => None,
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Relu => x.max(0.0),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Layer {
    /// Row-major `rows x cols`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
    pub activation: Activation,
}

#[derive(Debug, Clone)]
pub struct MlpModel {
    layers: Vec<Layer>,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad magic: expected \"MLP1\"")]
    BadMagic,
    #[error("file truncated at byte offset {offset}")]
    Truncated { offset: u64 },
    #[error("unknown activation tag {tag} in layer {layer}")]
    UnknownActivation { layer: usize, tag: u8 },
    #[error("layer {layer} expects {expected} inputs but the previous layer emits {got}")]
    DimensionChain {
        layer: usize,
        expected: usize,
        got: usize,
    },
    #[error("layer {layer} contains a non-finite weight or bias")]
    NonFinite { layer: usize },
    #[error("model has no layers")]
    Empty,
    #[error("input length {got} does not match the model input dimension {expected}")]
    InputDimension { expected: usize, got: usize },
    #[error("non-finite activation while evaluating layer {layer}; weights are corrupt")]
    NonFiniteActivation { layer: usize },
}

impl MlpModel {
    pub fn new(layers: Vec<Layer>) -> Result<Self, ModelError> {
        if layers.is_empty() {
            return Err(ModelError::Empty);
        }
        for (i, layer) in layers.iter().enumerate() {
            if layer.weights.len() != layer.rows * layer.cols || layer.bias.len() != layer.rows {
                return Err(ModelError::DimensionChain {
                    layer: i,
                    expected: layer.rows * layer.cols,
                    got: layer.weights.len(),
                });
            }
            if i > 0 && layers[i - 1].rows != layer.cols {
                return Err(ModelError::DimensionChain {
                    layer: i,
                    expected: layer.cols,
                    got: layers[i - 1].rows,
                });
            }
            if layer.weights.iter().chain(&layer.bias).any(|v| !v.is_finite()) {
                return Err(ModelError::NonFinite { layer: i });
            }
        }
        Ok(MlpModel { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].cols
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("non-empty").rows
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.rows * l.cols + l.rows)
            .sum()
    }

    /// Forward pass plus a max-shifted softmax over the final layer.
    pub fn infer(&self, input: &[f64]) -> Result<Vec<f64>, ModelError> {
        if input.len() != self.input_dim() {
            return Err(ModelError::InputDimension {
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        let mut current = input.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut next = vec![0.0f64; layer.rows];
            for (r, out) in next.iter_mut().enumerate() {
                let row = &layer.weights[r * layer.cols..(r + 1) * layer.cols];
                let mut acc = layer.bias[r];
                for (wv, xv) in row.iter().zip(current.iter()) {
                    acc += wv * xv;
                }
                *out = layer.activation.apply(acc);
            }
            if next.iter().any(|v| !v.is_finite()) {
                return Err(ModelError::NonFiniteActivation { layer: i });
            }
            current = next;
        }
        let max = current.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in current.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in current.iter_mut() {
            *v /= sum;
        }
        Ok(current)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_all(&(self.layers.len() as u32).to_le_bytes())?;
        for layer in &self.layers {
            w.write_all(&(layer.rows as u32).to_le_bytes())?;
            w.write_all(&(layer.cols as u32).to_le_bytes())?;
            w.write_all(&[layer.activation.tag()])?;
            for v in &layer.weights {
                w.write_all(&v.to_bits().to_le_bytes())?;
            }
            for v in &layer.bias {
                w.write_all(&v.to_bits().to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let mut r = Counting {
            inner: BufReader::new(File::open(path)?),
            offset: 0,
        };
        let mut magic = [0u8; 4];
        r.exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(ModelError::BadMagic);
        }
        let layer_count = r.u32()? as usize;
        if layer_count == 0 {
            return Err(ModelError::Empty);
        }
        let mut layers = Vec::with_capacity(layer_count);
        for i in 0..layer_count {
            let rows = r.u32()? as usize;
            let cols = r.u32()? as usize;
            let tag = r.u8()?;
            let activation =
                Activation::from_tag(tag).ok_or(ModelError::UnknownActivation { layer: i, tag })?;
            let mut weights = Vec::with_capacity(rows * cols);
            for _ in 0..rows * cols {
                weights.push(r.f64()?);
            }
            let mut bias = Vec::with_capacity(rows);
            for _ in 0..rows {
                bias.push(r.f64()?);
            }
            layers.push(Layer {
                weights,
                bias,
                rows,
                cols,
                activation,
            });
        }
        MlpModel::new(layers)
    }
}

struct Counting<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> Counting<R> {
    fn exact(&mut self, buf: &mut [u8]) -> Result<(), ModelError> {
        match self.inner.read_exact(buf) {
            Ok(()) => {
                self.offset += buf.len() as u64;
                Ok(())
            }
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => {
                Err(ModelError::Truncated { offset: self.offset })
            }
            Err(e) => Err(e.into()),
        }
    }

    fn u8(&mut self) -> Result<u8, ModelError> {
        let mut b = [0u8; 1];
        self.exact(&mut b)?;
        Ok(b[0])
    }

    fn u32(&mut self) -> Result<u32, ModelError> {
        let mut b = [0u8; 4];
        self.exact(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }

    fn f64(&mut self) -> Result<f64, ModelError> {
        let mut b = [0u8; 8];
        self.exact(&mut b)?;
        Ok(f64::from_bits(u64::from_le_bytes(b)))
    }
}

/// One-hot encoding of a 15-puzzle state: 16 cells x 16 tile values,
/// cell-major.
pub fn encode_tile_state(domain: &TileDomain, state: StateKey) -> Vec<f64> {
    assert_eq!(domain.side(), 4, "the one-hot encoding is defined for the 4x4 board");
    let cells = domain.decode(state);
    let mut input = vec![0.0f64; 256];
    for (c, &t) in cells.iter().enumerate() {
        input[16 * c + t as usize] = 1.0;
    }
    input
}

/// A loaded network viewed as a stochastic policy over the four blank moves.
pub struct MlpTilePolicy {
    domain: TileDomain,
    model: MlpModel,
}

impl MlpTilePolicy {
    pub fn new(model: MlpModel) -> Result<Self, ModelError> {
        if model.input_dim() != 256 || model.output_dim() != 4 {
            return Err(ModelError::DimensionChain {
                layer: 0,
                expected: 256,
                got: model.input_dim(),
            });
        }
        Ok(MlpTilePolicy {
            domain: TileDomain::new(4),
            model,
        })
    }

    pub fn model(&self) -> &MlpModel {
        &self.model
    }
}

impl StochasticPolicy for MlpTilePolicy {
    fn action_count(&self) -> usize {
        4
    }

    fn scores_into(&self, state: StateKey, out: &mut Vec<f64>) {
        let input = encode_tile_state(&self.domain, state);
        let scores = self
            .model
            .infer(&input)
            .expect("model validated at load time");
        out.clear();
        out.extend_from_slice(&scores);
    }
}
