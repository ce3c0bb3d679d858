//! Trainable weights, stored as one flat vector with a named layout.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{ConvKind, SatGnnConfig};
use crate::GnnError;

/// Affine map `x W + b` with `W` of shape `fin x fout`, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Lin {
    pub w: usize,
    pub b: usize,
    pub fin: usize,
    pub fout: usize,
}

/// One convolution direction. `self_w` is the SAGE root weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Conv {
    pub self_w: Option<usize>,
    pub neigh: Lin,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Layout {
    pub enc_var: Lin,
    pub enc_con: Lin,
    /// `(variable -> constraint, constraint -> variable)` per parameter block.
    pub blocks: Vec<(Conv, Conv)>,
    pub head: [Lin; 3],
    pub specs: Vec<TensorSpec>,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorSpec {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
}

impl TensorSpec {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

struct Builder {
    specs: Vec<TensorSpec>,
    total: usize,
}

impl Builder {
    fn tensor(&mut self, name: String, shape: Vec<usize>) -> usize {
        let offset = self.total;
        self.total += shape.iter().product::<usize>();
        self.specs.push(TensorSpec {
            name,
            shape,
            offset,
        });
        offset
    }

    fn lin(&mut self, name: &str, fin: usize, fout: usize) -> Lin {
        let w = self.tensor(format!("{name}.weight"), vec![fin, fout]);
        let b = self.tensor(format!("{name}.bias"), vec![fout]);
        Lin { w, b, fin, fout }
    }

    fn conv(&mut self, name: &str, kind: ConvKind, d: usize) -> Conv {
        let self_w = match kind {
            ConvKind::Sage => Some(self.tensor(format!("{name}.self_weight"), vec![d, d])),
            ConvKind::Gcn => None,
        };
        Conv {
            self_w,
            neigh: self.lin(name, d, d),
        }
    }
}

impl Layout {
    pub fn new(config: &SatGnnConfig) -> Self {
        let d = config.d;
        let mut b = Builder {
            specs: Vec::new(),
            total: 0,
        };
        let enc_var = b.lin("enc_var", config.var_inputs(), d);
        let enc_con = b.lin("enc_con", onts_core::graph::CON_FEATURES, d);
        let n_blocks = if config.share_conv_params {
            1
        } else {
            config.layers
        };
        let blocks = (0..n_blocks)
            .map(|l| {
                (
                    b.conv(&format!("conv{l}.v2c"), config.conv_kind, d),
                    b.conv(&format!("conv{l}.c2v"), config.conv_kind, d),
                )
            })
            .collect();
        let head = [
            b.lin("head.0", d, d),
            b.lin("head.1", d, d),
            b.lin("head.2", d, 1),
        ];
        Layout {
            enc_var,
            enc_con,
            blocks,
            head,
            specs: b.specs,
            total: b.total,
        }
    }

    pub fn block(&self, layer: usize) -> &(Conv, Conv) {
        &self.blocks[layer.min(self.blocks.len() - 1)]
    }
}

/// All weights of one model, flat, in layout order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub(crate) layout: Layout,
    pub values: Vec<f64>,
}

impl ModelParams {
    /// Glorot-uniform weights `U(+-sqrt(6 / (fan_in + fan_out)))`, zero biases.
    pub fn init(config: &SatGnnConfig) -> Self {
        let layout = Layout::new(config);
        let mut values = vec![0.0; layout.total];
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        for spec in &layout.specs {
            if spec.shape.len() == 2 {
                let limit = (6.0 / (spec.shape[0] + spec.shape[1]) as f64).sqrt();
                for v in &mut values[spec.offset..spec.offset + spec.len()] {
                    *v = rng.gen_range(-limit..=limit);
                }
            }
        }
        Self { layout, values }
    }

    pub fn zeros(config: &SatGnnConfig) -> Self {
        let layout = Layout::new(config);
        let values = vec![0.0; layout.total];
        Self { layout, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn specs(&self) -> &[TensorSpec] {
        &self.layout.specs
    }

    pub fn tensor(&self, name: &str) -> Option<&[f64]> {
        self.layout
            .specs
            .iter()
            .find(|s| s.name == name)
            .map(|s| &self.values[s.offset..s.offset + s.len()])
    }

    pub fn tensor_mut(&mut self, name: &str) -> Option<&mut [f64]> {
        let spec = self.layout.specs.iter().find(|s| s.name == name)?.clone();
        Some(&mut self.values[spec.offset..spec.offset + spec.len()])
    }

    /// Replaces the values, which must match the layout size.
    pub fn set_flat(&mut self, values: Vec<f64>) -> Result<(), GnnError> {
        if values.len() != self.values.len() {
            return Err(GnnError::Shape(format!(
                "expected {} parameters, got {}",
                self.values.len(),
                values.len()
            )));
        }
        self.values = values;
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TensorJson {
    name: String,
    shape: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    config: SatGnnConfig,
    tensors: Vec<TensorJson>,
}

/// A configuration together with its weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SatGnn {
    pub config: SatGnnConfig,
    pub params: ModelParams,
}

impl SatGnn {
    pub fn new(config: SatGnnConfig) -> Result<Self, GnnError> {
        config.validate().map_err(GnnError::Config)?;
        let params = ModelParams::init(&config);
        Ok(Self { config, params })
    }

    pub fn to_json(&self) -> String {
        let tensors = self
            .params
            .layout
            .specs
            .iter()
            .map(|s| TensorJson {
                name: s.name.clone(),
                shape: s.shape.clone(),
                data: self.params.values[s.offset..s.offset + s.len()].to_vec(),
            })
            .collect();
        serde_json::to_string_pretty(&ModelJson {
            config: self.config.clone(),
            tensors,
        })
        .expect("model serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, GnnError> {
        let raw: ModelJson = serde_json::from_str(text)?;
        raw.config.validate().map_err(GnnError::Config)?;
        let mut params = ModelParams::zeros(&raw.config);
        if raw.tensors.len() != params.layout.specs.len() {
            return Err(GnnError::Shape(format!(
                "model file has {} tensors, configuration needs {}",
                raw.tensors.len(),
                params.layout.specs.len()
            )));
        }
        for (t, spec) in raw.tensors.iter().zip(params.layout.specs.clone()) {
            if t.name != spec.name || t.shape != spec.shape || t.data.len() != spec.len() {
                return Err(GnnError::Shape(format!(
                    "tensor `{}` {:?} does not match expected `{}` {:?}",
                    t.name, t.shape, spec.name, spec.shape
                )));
            }
            if t.data.iter().any(|v| !v.is_finite()) {
                return Err(GnnError::Shape(format!(
                    "tensor `{}` has non-finite entries",
                    t.name
                )));
            }
            params.values[spec.offset..spec.offset + spec.len()].copy_from_slice(&t.data);
        }
        Ok(Self {
            config: raw.config,
            params,
        })
    }
}
