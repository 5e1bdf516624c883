//! The `NNW1` weight file.
//!
//! ```text
//! "NNW1"                      4 bytes
//! architecture length         u32, little-endian
//! architecture                UTF-8, one layer per line (see below)
//! parameters                  f32 little-endian, layer order, weights then bias
//! ```
//!
//! The architecture text is canonical, e.g.
//!
//! ```text
//! input 28 28 1
//! conv 3 1 16
//! relu
//! maxpool 2
//! flatten
//! dense 3136 10
//! ```

use std::fs;
use std::path::Path;

use super::{Layer, Model};
use crate::image::Shape;
use crate::{Error, Result};

pub const WEIGHTS_MAGIC: &[u8; 4] = b"NNW1";

pub(crate) fn architecture_string(m: &Model) -> String {
    let s = m.input_shape();
    let mut out = format!("input {} {} {}\n", s.width, s.height, s.channels);
    for layer in m.layers() {
        let line = match layer {
            Layer::Conv {
                kernel,
                in_channels,
                out_channels,
                ..
            } => format!("conv {kernel} {in_channels} {out_channels}"),
            Layer::Relu => "relu".into(),
            Layer::MaxPool => "maxpool 2".into(),
            Layer::Flatten => "flatten".into(),
            Layer::Dense {
                inputs, outputs, ..
            } => format!("dense {inputs} {outputs}"),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Layers with zeroed parameters plus the parameter count they need.
fn parse_architecture(text: &str) -> Result<(Shape, Vec<Layer>, usize)> {
    let bad = |line: &str| Error::Weights(format!("bad architecture line {line:?}"));
    let mut lines = text.lines();
    let first = lines.next().ok_or_else(|| Error::Weights("empty architecture".into()))?;
    let input = match first.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["input", w, h, c] => Shape::new(
            w.parse().map_err(|_| bad(first))?,
            h.parse().map_err(|_| bad(first))?,
            c.parse().map_err(|_| bad(first))?,
        ),
        _ => return Err(bad(first)),
    };
    let mut layers = Vec::new();
    let mut count = 0;
    for line in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<usize>().map_err(|_| bad(line));
        let layer = match parts.as_slice() {
            ["conv", k, i, o] => {
                let (k, i, o) = (num(k)?, num(i)?, num(o)?);
                count += o * i * k * k + o;
                Layer::Conv {
                    kernel: k,
                    in_channels: i,
                    out_channels: o,
                    weights: vec![0.0; o * i * k * k],
                    bias: vec![0.0; o],
                }
            }
            ["relu"] => Layer::Relu,
            ["maxpool", "2"] => Layer::MaxPool,
            ["flatten"] => Layer::Flatten,
            ["dense", i, o] => {
                let (i, o) = (num(i)?, num(o)?);
                count += i * o + o;
                Layer::Dense {
                    inputs: i,
                    outputs: o,
                    weights: vec![0.0; i * o],
                    bias: vec![0.0; o],
                }
            }
            _ => return Err(bad(line)),
        };
        layers.push(layer);
    }
    Ok((input, layers, count))
}

pub fn encode_weights(m: &Model) -> Vec<u8> {
    let arch = architecture_string(m);
    let mut out = Vec::with_capacity(8 + arch.len() + 4 * m.parameter_count());
    out.extend_from_slice(WEIGHTS_MAGIC);
    out.extend_from_slice(&(arch.len() as u32).to_le_bytes());
    out.extend_from_slice(arch.as_bytes());
    for (w, b) in m.layers().iter().filter_map(Layer::params) {
        for &v in w.iter().chain(b) {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

pub fn decode_weights(bytes: &[u8]) -> Result<Model> {
    if bytes.get(..4) != Some(WEIGHTS_MAGIC.as_slice()) {
        return Err(Error::Weights("bad magic, expected NNW1".into()));
    }
    let len_bytes: [u8; 4] = bytes
        .get(4..8)
        .and_then(|b| b.try_into().ok())
        .ok_or_else(|| Error::Weights("missing architecture length".into()))?;
    let arch_len = u32::from_le_bytes(len_bytes) as usize;
    let arch = bytes
        .get(8..8 + arch_len)
        .ok_or_else(|| Error::Weights("architecture text truncated".into()))?;
    let arch = std::str::from_utf8(arch)
        .map_err(|_| Error::Weights("architecture text is not UTF-8".into()))?;
    let (input, mut layers, count) = parse_architecture(arch)?;

    let blob = &bytes[8 + arch_len..];
    if blob.len() != 4 * count {
        return Err(Error::Weights(format!(
            "parameter blob length mismatch: expected {} bytes, got {}",
            4 * count,
            blob.len()
        )));
    }
    let mut values = blob
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())));
    for layer in &mut layers {
        if let Some((w, b)) = layer.params_mut() {
            for slot in w.iter_mut().chain(b.iter_mut()) {
                *slot = values.next().expect("length checked");
            }
        }
    }
    Model::new(input, layers)
}

pub fn save_weights(m: &Model, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_weights(m))?;
    Ok(())
}

pub fn load_weights(path: impl AsRef<Path>) -> Result<Model> {
    decode_weights(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::Image;

    fn model() -> Model {
        Model::reference(Shape::new(12, 12, 3), 4, 5).unwrap()
    }

    #[test]
    fn round_trip_keeps_architecture() {
        let m = model();
        let back = decode_weights(&encode_weights(&m)).unwrap();
        assert_eq!(architecture_string(&back), architecture_string(&m));
        assert_eq!(
            architecture_string(&m),
            "input 12 12 3\nconv 3 3 16\nrelu\nmaxpool 2\nconv 3 16 32\nrelu\nmaxpool 2\nflatten\ndense 288 4\n"
        );
    }

    #[test]
    fn round_trip_logits_within_float32_precision() {
        let m = model();
        let back = decode_weights(&encode_weights(&m)).unwrap();
        let x = Image::new(12, 12, 3, (0..432).map(|i| (i % 17) as f64 / 16.0).collect()).unwrap();
        let (a, b) = (m.forward(&x).unwrap(), back.forward(&x).unwrap());
        for (p, q) in a.logits.iter().zip(&b.logits) {
            assert!((p - q).abs() <= 1e-6, "{p} vs {q}");
        }
        // a second trip is exact: values are already on the f32 grid
        assert_eq!(decode_weights(&encode_weights(&back)).unwrap(), back);
    }

    #[test]
    fn truncated_blob_names_byte_counts() {
        let mut bytes = encode_weights(&model());
        bytes.truncate(bytes.len() - 3);
        let err = decode_weights(&bytes).unwrap_err().to_string();
        let expected = 4 * model().parameter_count();
        assert!(
            err.contains(&format!("expected {expected} bytes, got {}", expected - 3)),
            "{err}"
        );
    }

    #[test]
    fn bad_magic_is_rejected() {
        let mut bytes = encode_weights(&model());
        bytes[3] = b'2';
        assert!(decode_weights(&bytes).unwrap_err().to_string().contains("magic"));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.nnw");
        save_weights(&model(), &path).unwrap();
        assert_eq!(architecture_string(&load_weights(&path).unwrap()), architecture_string(&model()));
    }
}
