use std::fmt;
use std::str::FromStr;

use super::layers::window_output;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerSpec {
    Conv2d {
        out_channels: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
    },
    MaxPool2d {
        window: usize,
        stride: usize,
    },
    Relu,
    Flatten,
    Dense {
        out_features: usize,
    },
    Softmax,
}

impl LayerSpec {
    pub fn conv(out_channels: usize, kernel: usize, stride: usize, padding: usize) -> Self {
        LayerSpec::Conv2d {
            out_channels,
            kernel,
            stride,
            padding,
        }
    }

    pub fn pool(window: usize, stride: usize) -> Self {
        LayerSpec::MaxPool2d { window, stride }
    }

    pub fn dense(out_features: usize) -> Self {
        LayerSpec::Dense { out_features }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            LayerSpec::Conv2d { .. } => "conv2d",
            LayerSpec::MaxPool2d { .. } => "maxpool2d",
            LayerSpec::Relu => "relu",
            LayerSpec::Flatten => "flatten",
            LayerSpec::Dense { .. } => "dense",
            LayerSpec::Softmax => "softmax",
        }
    }
}

impl fmt::Display for LayerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            LayerSpec::Conv2d {
                out_channels,
                kernel,
                stride,
                padding,
            } => write!(
                f,
                "conv2d out_channels={out_channels} kernel={kernel} stride={stride} padding={padding}"
            ),
            LayerSpec::MaxPool2d { window, stride } => {
                write!(f, "maxpool2d window={window} stride={stride}")
            }
            LayerSpec::Dense { out_features } => write!(f, "dense out_features={out_features}"),
            other => f.write_str(other.kind()),
        }
    }
}

impl FromStr for LayerSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: String| Error::InvalidArchitecture(format!("layer `{s}`: {m}"));
        let mut parts = s.split_whitespace();
        let kind = parts.next().ok_or_else(|| bad("empty".into()))?;
        let mut args = Vec::new();
        for part in parts {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got `{part}`")))?;
            let v: usize = v
                .parse()
                .map_err(|_| bad(format!("`{v}` is not an integer")))?;
            args.push((k, v));
        }
        let mut take = |key: &str| -> Result<usize> {
            let pos = args
                .iter()
                .position(|(k, _)| *k == key)
                .ok_or_else(|| bad(format!("missing `{key}`")))?;
            Ok(args.remove(pos).1)
        };
        let spec = match kind {
            "conv2d" => LayerSpec::Conv2d {
                out_channels: take("out_channels")?,
                kernel: take("kernel")?,
                stride: take("stride")?,
                padding: take("padding")?,
            },
            "maxpool2d" => LayerSpec::MaxPool2d {
                window: take("window")?,
                stride: take("stride")?,
            },
            "dense" => LayerSpec::Dense {
                out_features: take("out_features")?,
            },
            "relu" => LayerSpec::Relu,
            "flatten" => LayerSpec::Flatten,
            "softmax" => LayerSpec::Softmax,
            other => return Err(bad(format!("unknown kind `{other}`"))),
        };
        if let Some((k, _)) = args.first() {
            return Err(bad(format!("unexpected `{k}`")));
        }
        Ok(spec)
    }
}

/// Architecture description: input shape `(height, width, channels)` and an
/// ordered layer stack ending in a softmax over `num_classes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelConfig {
    pub name: String,
    pub input_shape: (usize, usize, usize),
    pub layers: Vec<LayerSpec>,
    pub num_classes: usize,
}

/// Weight and bias counts of one layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ParamShape {
    pub weights: usize,
    pub bias: usize,
    /// Fan-in used by the initializer.
    pub fan_in: usize,
}

impl ParamShape {
    pub fn total(&self) -> usize {
        self.weights + self.bias
    }
}

impl ModelConfig {
    /// Activation shape after every layer, input first. Fails on the first
    /// layer that does not compose with its input.
    pub fn shapes(&self) -> Result<Vec<Vec<usize>>> {
        let arch = |i: usize, m: String| {
            Error::InvalidArchitecture(format!("layer {i} ({}): {m}", self.layers[i].kind()))
        };
        let (h, w, c) = self.input_shape;
        if h == 0 || w == 0 || c == 0 {
            return Err(Error::InvalidArchitecture(
                "input shape has a zero dimension".into(),
            ));
        }
        if self.num_classes == 0 {
            return Err(Error::InvalidArchitecture(
                "num_classes must be positive".into(),
            ));
        }
        if self.layers.last() != Some(&LayerSpec::Softmax) {
            return Err(Error::InvalidArchitecture(
                "the last layer must be softmax".into(),
            ));
        }
        let mut shapes = vec![vec![h, w, c]];
        for (i, layer) in self.layers.iter().enumerate() {
            let cur = shapes.last().unwrap();
            let next = match *layer {
                LayerSpec::Conv2d {
                    out_channels,
                    kernel,
                    stride,
                    padding,
                } => {
                    let [h, w, _] = cur[..] else {
                        return Err(arch(i, "needs an HxWxC input".into()));
                    };
                    if out_channels == 0 || kernel == 0 || stride == 0 {
                        return Err(arch(i, "parameters must be positive".into()));
                    }
                    let (oh, ow) = window_output(h, w, kernel, stride, padding)
                        .map_err(|e| arch(i, e.to_string()))?;
                    vec![oh, ow, out_channels]
                }
                LayerSpec::MaxPool2d { window, stride } => {
                    let [h, w, c] = cur[..] else {
                        return Err(arch(i, "needs an HxWxC input".into()));
                    };
                    if window == 0 || stride == 0 || window > h || window > w {
                        return Err(arch(i, format!("window {window} does not fit {h}x{w}")));
                    }
                    let (oh, ow) = window_output(h, w, window, stride, 0)
                        .map_err(|e| arch(i, e.to_string()))?;
                    vec![oh, ow, c]
                }
                LayerSpec::Relu => cur.clone(),
                LayerSpec::Flatten => vec![cur.iter().product()],
                LayerSpec::Dense { out_features } => {
                    if cur.len() != 1 {
                        return Err(arch(i, "needs a flat input; add a flatten layer".into()));
                    }
                    if out_features == 0 {
                        return Err(arch(i, "out_features must be positive".into()));
                    }
                    vec![out_features]
                }
                LayerSpec::Softmax => {
                    if i + 1 != self.layers.len() {
                        return Err(arch(i, "softmax is only allowed as the last layer".into()));
                    }
                    if cur[..] != [self.num_classes] {
                        return Err(arch(
                            i,
                            format!(
                                "input {cur:?} is not a vector of {} classes",
                                self.num_classes
                            ),
                        ));
                    }
                    cur.clone()
                }
            };
            shapes.push(next);
        }
        Ok(shapes)
    }

    pub fn param_shapes(&self) -> Result<Vec<ParamShape>> {
        let shapes = self.shapes()?;
        Ok(self
            .layers
            .iter()
            .zip(&shapes)
            .map(|(layer, input)| match *layer {
                LayerSpec::Conv2d {
                    out_channels,
                    kernel,
                    ..
                } => {
                    let fan_in = kernel * kernel * input[2];
                    ParamShape {
                        weights: fan_in * out_channels,
                        bias: out_channels,
                        fan_in,
                    }
                }
                LayerSpec::Dense { out_features } => ParamShape {
                    weights: input[0] * out_features,
                    bias: out_features,
                    fan_in: input[0],
                },
                _ => ParamShape::default(),
            })
            .collect())
    }

    pub fn parameter_count(&self) -> Result<usize> {
        Ok(self.param_shapes()?.iter().map(ParamShape::total).sum())
    }

    /// Two `[conv-relu-conv-relu-pool]` blocks (8 then 16 channels, 3×3,
    /// same padding), a 128-unit hidden dense layer and the class head.
    pub fn mini_vgg(height: usize, width: usize, num_classes: usize) -> Self {
        let mut layers = Vec::new();
        for channels in [8, 16] {
            layers.extend([
                LayerSpec::conv(channels, 3, 1, 1),
                LayerSpec::Relu,
                LayerSpec::conv(channels, 3, 1, 1),
                LayerSpec::Relu,
                LayerSpec::pool(2, 2),
            ]);
        }
        layers.extend([
            LayerSpec::Flatten,
            LayerSpec::dense(128),
            LayerSpec::Relu,
            LayerSpec::dense(num_classes),
            LayerSpec::Softmax,
        ]);
        ModelConfig {
            name: "mini_vgg".into(),
            input_shape: (height, width, 3),
            layers,
            num_classes,
        }
    }

    /// The 13-conv / 3-dense VGG16 layout at 224×224×3. Meant for shape
    /// checking and parameter counting; far too large to train here.
    pub fn vgg16_shape(num_classes: usize) -> Self {
        let mut layers = Vec::new();
        for (channels, convs) in [(64, 2), (128, 2), (256, 3), (512, 3), (512, 3)] {
            for _ in 0..convs {
                layers.extend([LayerSpec::conv(channels, 3, 1, 1), LayerSpec::Relu]);
            }
            layers.push(LayerSpec::pool(2, 2));
        }
        layers.extend([
            LayerSpec::Flatten,
            LayerSpec::dense(4096),
            LayerSpec::Relu,
            LayerSpec::dense(4096),
            LayerSpec::Relu,
            LayerSpec::dense(num_classes),
            LayerSpec::Softmax,
        ]);
        ModelConfig {
            name: "vgg16_shape".into(),
            input_shape: (224, 224, 3),
            layers,
            num_classes,
        }
    }

    /// Looks up a preset by name.
    pub fn preset(name: &str, height: usize, width: usize, num_classes: usize) -> Result<Self> {
        match name {
            "mini_vgg" => Ok(Self::mini_vgg(height, width, num_classes)),
            "vgg16_shape" => Ok(Self::vgg16_shape(num_classes)),
            other => Err(Error::InvalidArchitecture(format!(
                "unknown preset `{other}`"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layer_text_round_trip() {
        for layer in [
            LayerSpec::conv(8, 3, 1, 1),
            LayerSpec::pool(2, 2),
            LayerSpec::Relu,
            LayerSpec::Flatten,
            LayerSpec::dense(10),
            LayerSpec::Softmax,
        ] {
            assert_eq!(layer.to_string().parse::<LayerSpec>().unwrap(), layer);
        }
        assert!("conv2d kernel=3".parse::<LayerSpec>().is_err());
        assert!("dense out_features=3 extra=1".parse::<LayerSpec>().is_err());
        assert!("lstm".parse::<LayerSpec>().is_err());
    }

    #[test]
    fn mini_vgg_shapes() {
        let cfg = ModelConfig::mini_vgg(32, 32, 5);
        let shapes = cfg.shapes().unwrap();
        assert_eq!(shapes[5], vec![16, 16, 8]);
        assert_eq!(shapes[10], vec![8, 8, 16]);
        assert_eq!(shapes.last().unwrap(), &vec![5]);
    }

    #[test]
    fn vgg16_parameter_counts() {
        // the classic ImageNet figure
        assert_eq!(
            ModelConfig::vgg16_shape(1000).parameter_count().unwrap(),
            138_357_544
        );
        let five = ModelConfig::vgg16_shape(5);
        assert_eq!(five.shapes().unwrap().last().unwrap(), &vec![5]);
        assert_eq!(five.parameter_count().unwrap(), 134_281_029);
    }

    #[test]
    fn dense_counts() {
        let cfg = ModelConfig {
            name: "lin".into(),
            input_shape: (1, 1, 4),
            layers: vec![LayerSpec::Flatten, LayerSpec::dense(2), LayerSpec::Softmax],
            num_classes: 2,
        };
        let p = cfg.param_shapes().unwrap();
        assert_eq!((p[1].weights, p[1].bias), (8, 2));
    }

    #[test]
    fn shape_errors_are_caught_up_front() {
        let mut cfg = ModelConfig::mini_vgg(32, 32, 5);
        cfg.layers.pop();
        assert!(cfg.shapes().is_err());
        let mut cfg = ModelConfig::mini_vgg(32, 32, 5);
        cfg.num_classes = 4;
        assert!(cfg.shapes().is_err());
        let cfg = ModelConfig::mini_vgg(3, 3, 5);
        assert!(cfg.shapes().is_err());
        let cfg = ModelConfig {
            name: "no-flatten".into(),
            input_shape: (4, 4, 1),
            layers: vec![LayerSpec::dense(2), LayerSpec::Softmax],
            num_classes: 2,
        };
        assert!(matches!(cfg.shapes(), Err(Error::InvalidArchitecture(_))));
        assert!(ModelConfig::preset("resnet", 32, 32, 5).is_err());
    }
}
