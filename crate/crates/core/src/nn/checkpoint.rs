//! Versioned plain-text checkpoint layout.
//!
//! ```text
//! survclass-checkpoint 1
//! head hazard_linear
//! seed 42
//! config_hash 1f0c3a9e5d7b2c48      (or "none")
//! layers 3
//! layer 0 relu 20 32                 index, activation, inputs, outputs
//! <outputs lines of `inputs` weights each, row-major>
//! bias <outputs values>
//! ...
//! ```
//!
//! Values are whitespace separated and written in Rust's shortest
//! round-trip float form, so save then load is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::net::{Activation, Dense, DenseNet, Head};
use super::train::TrainConfig;
use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &str = "survclass-checkpoint";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub net: DenseNet,
    pub config_hash: Option<String>,
}

/// First 16 hex digits of the SHA-256 of the config's JSON form.
pub fn config_hash(config: &TrainConfig) -> String {
    let json = serde_json::to_string(config).expect("train config serializes");
    Sha256::digest(json.as_bytes())
        .iter()
        .take(8)
        .fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

pub fn write_checkpoint(net: &DenseNet, config: Option<&TrainConfig>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {CHECKPOINT_VERSION}");
    let _ = writeln!(out, "head {}", net.head().as_str());
    let _ = writeln!(out, "seed {}", net.rng_seed());
    let _ = writeln!(out, "config_hash {}", config.map_or("none".to_string(), config_hash));
    let _ = writeln!(out, "layers {}", net.layers().len());
    for (i, l) in net.layers().iter().enumerate() {
        let _ = writeln!(out, "layer {i} {} {} {}", l.activation.as_str(), l.inputs, l.outputs);
        for row in l.weights.chunks_exact(l.inputs) {
            let _ = writeln!(out, "{}", join(row));
        }
        let _ = writeln!(out, "bias {}", join(&l.bias));
    }
    out
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(" ")
}

pub fn save_checkpoint(path: &Path, net: &DenseNet, config: Option<&TrainConfig>) -> Result<()> {
    std::fs::write(path, write_checkpoint(net, config)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_checkpoint(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<(usize, Vec<&'a str>)> {
        let (i, line) = self
            .inner
            .next()
            .ok_or_else(|| Error::Checkpoint(format!("unexpected end of file, expected {what}")))?;
        Ok((i + 1, line.split_whitespace().collect()))
    }

    fn keyed(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        let (n, mut fields) = self.next(key)?;
        if fields.first() != Some(&key) {
            return Err(Error::Checkpoint(format!("line {n}: expected '{key}'")));
        }
        fields.remove(0);
        Ok((n, fields))
    }
}

fn parse<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Checkpoint(format!("line {line}: cannot parse '{s}'")))
}

fn floats(fields: &[&str], expected: usize, line: usize) -> Result<Vec<f64>> {
    if fields.len() != expected {
        return Err(Error::Checkpoint(format!(
            "line {line}: expected {expected} values, found {}",
            fields.len()
        )));
    }
    fields.iter().map(|f| parse(f, line)).collect()
}

pub fn read_checkpoint(text: &str) -> Result<Checkpoint> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (n, magic) = lines.keyed(MAGIC)?;
    let version: u32 = parse(magic.first().copied().unwrap_or(""), n)?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let (n, head) = lines.keyed("head")?;
    let head = match head.first().copied() {
        Some("hazard_linear") => Head::HazardLinear,
        Some("class_logit") => Head::ClassLogit,
        _ => return Err(Error::Checkpoint(format!("line {n}: unknown head"))),
    };
    let (n, seed) = lines.keyed("seed")?;
    let seed: u64 = parse(seed.first().copied().unwrap_or(""), n)?;
    let (_, hash) = lines.keyed("config_hash")?;
    let config_hash = match hash.first().copied() {
        Some("none") | None => None,
        Some(h) => Some(h.to_string()),
    };
    let (n, count) = lines.keyed("layers")?;
    let count: usize = parse(count.first().copied().unwrap_or(""), n)?;

    let mut layers = Vec::with_capacity(count);
    for i in 0..count {
        let (n, f) = lines.keyed("layer")?;
        if f.len() != 4 || parse::<usize>(f[0], n)? != i {
            return Err(Error::Checkpoint(format!("line {n}: malformed layer header")));
        }
        let activation = match f[1] {
            "relu" => Activation::Relu,
            "identity" => Activation::Identity,
            other => return Err(Error::Checkpoint(format!("line {n}: unknown activation '{other}'"))),
        };
        let inputs: usize = parse(f[2], n)?;
        let outputs: usize = parse(f[3], n)?;
        let mut weights = Vec::with_capacity(inputs * outputs);
        for _ in 0..outputs {
            let (n, row) = lines.next("weight row")?;
            weights.extend(floats(&row, inputs, n)?);
        }
        let (n, bias) = lines.keyed("bias")?;
        let bias = floats(&bias, outputs, n)?;
        layers.push(Dense {
            inputs,
            outputs,
            weights,
            bias,
            activation,
        });
    }
    let net = DenseNet::from_layers(layers, head, seed)?;
    Ok(Checkpoint { net, config_hash })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let net = DenseNet::new(5, &[6, 3], Head::ClassLogit, 77).unwrap();
        let cfg = TrainConfig::default();
        let text = write_checkpoint(&net, Some(&cfg));
        let back = read_checkpoint(&text).unwrap();
        assert_eq!(back.net, net);
        assert_eq!(back.config_hash, Some(config_hash(&cfg)));
        assert!(text.starts_with("survclass-checkpoint 1\nhead class_logit\nseed 77\n"));
    }

    #[test]
    fn rejects_truncated_and_wrong_version() {
        let net = DenseNet::new(2, &[2], Head::HazardLinear, 1).unwrap();
        let text = write_checkpoint(&net, None);
        let cut: String = text.lines().take(7).collect::<Vec<_>>().join("\n");
        assert!(read_checkpoint(&cut).is_err());
        assert!(read_checkpoint(&text.replacen("checkpoint 1", "checkpoint 9", 1)).is_err());
    }
}
