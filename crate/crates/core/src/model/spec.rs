//! Network architecture description and the flat-parameter layout manifest.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Element-wise activation applied to every hidden layer.
///
/// The output layer never gets an activation; it produces raw logits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn forward<R: crate::Real>(self, x: R) -> R {
        match self {
            Activation::Relu => {
                if x > R::zero() {
                    x
                } else {
                    R::zero()
                }
            }
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative expressed in terms of the activation *output*.
    #[inline]
    pub fn grad_from_output<R: crate::Real>(self, y: R) -> R {
        match self {
            Activation::Relu => {
                if y > R::zero() {
                    R::one()
                } else {
                    R::zero()
                }
            }
            Activation::Tanh => R::one() - y * y,
        }
    }
}

/// Dense feed-forward network split into an encoder (layers `[0, split_index)`)
/// and a head (layers `[split_index, end)`).
///
/// `layer_widths` runs input dim, hidden widths..., output dim (= class count),
/// so a `[2, 3, 2]` spec has two linear layers. `split_index = 0` makes the
/// encoder the identity: the intermediate feature is the raw input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub layer_widths: Vec<usize>,
    pub activation: Activation,
    pub split_index: usize,
}

impl ModelSpec {
    pub fn new(layer_widths: Vec<usize>, activation: Activation, split_index: usize) -> Result<Self> {
        let spec = ModelSpec { layer_widths, activation, split_index };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_widths.len() < 2 {
            return Err(Error::config(format!(
                "model needs at least an input and an output width, got {:?}",
                self.layer_widths
            )));
        }
        if let Some(pos) = self.layer_widths.iter().position(|&w| w == 0) {
            return Err(Error::config(format!("layer width at position {pos} is 0")));
        }
        if self.split_index >= self.num_layers() {
            return Err(Error::config(format!(
                "split_index {} out of range for {} layers",
                self.split_index,
                self.num_layers()
            )));
        }
        Ok(())
    }

    /// Number of linear layers.
    #[inline]
    pub fn num_layers(&self) -> usize {
        self.layer_widths.len() - 1
    }

    #[inline]
    pub fn input_dim(&self) -> usize {
        self.layer_widths[0]
    }

    #[inline]
    pub fn class_count(&self) -> usize {
        *self.layer_widths.last().expect("validated: at least two widths")
    }

    /// Width of the intermediate feature `z` reported by the forward pass.
    pub fn intermediate_dim(&self) -> usize {
        self.layer_widths[self.split_index]
    }

    pub fn manifest(&self) -> Manifest {
        let layers = (0..self.num_layers())
            .map(|l| LayerDims { rows: self.layer_widths[l + 1], cols: self.layer_widths[l] })
            .collect();
        Manifest { layers }
    }

    pub fn param_count(&self) -> usize {
        self.manifest().total_len()
    }

    /// Flat-vector range holding the head's parameters (layers ≥ split_index).
    pub fn head_param_range(&self) -> std::ops::Range<usize> {
        let manifest = self.manifest();
        manifest.layer_offset(self.split_index)..manifest.total_len()
    }
}

/// Shape of one linear layer: `rows × cols` weights followed by `rows` biases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerDims {
    pub rows: usize,
    pub cols: usize,
}

impl LayerDims {
    #[inline]
    pub fn extent(&self) -> usize {
        self.rows * self.cols + self.rows
    }
}

/// Per-layer extents describing how a flat parameter vector is laid out:
/// layer 0 weights (row-major), layer 0 biases, layer 1 weights, ...
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    layers: Vec<LayerDims>,
}

impl Manifest {
    pub fn layers(&self) -> &[LayerDims] {
        &self.layers
    }

    pub fn total_len(&self) -> usize {
        self.layers.iter().map(LayerDims::extent).sum()
    }

    /// Offset of the first parameter of layer `l` (equals `total_len` when
    /// `l` is the layer count).
    pub fn layer_offset(&self, l: usize) -> usize {
        self.layers[..l].iter().map(LayerDims::extent).sum()
    }

    /// Ranges of layer `l`'s weights and biases inside the flat vector.
    pub fn layer_ranges(&self, l: usize) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let start = self.layer_offset(l);
        let dims = self.layers[l];
        let weights = start..start + dims.rows * dims.cols;
        let biases = weights.end..weights.end + dims.rows;
        (weights, biases)
    }
}
