//! Checkpoint file I/O.
//!
//! Byte layout:
//! - bytes 0..8: little-endian u64, length `H` of the JSON header
//! - bytes 8..8+H: UTF-8 JSON header `{spec, step, seed, param_count}`
//! - remaining bytes: `param_count` little-endian f32 values; for each layer
//!   in order, the weights row-major (`out x in x kernel`) then the bias.
//!
//! Parameters are stored as f32; optimizer moments are not persisted and
//! reset to zero on load.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{NetworkSpec, NetworkState};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct CheckpointHeader {
    spec: NetworkSpec,
    step: u64,
    seed: u64,
    param_count: usize,
}

/// Writes a checkpoint for `state` at `path`.
pub fn save_checkpoint(state: &NetworkState, path: impl AsRef<Path>) -> Result<()> {
    let header = CheckpointHeader {
        spec: state.spec().clone(),
        step: state.step(),
        seed: state.seed(),
        param_count: state.param_count(),
    };
    let header_bytes = serde_json::to_vec(&header)?;
    let params = state.flat_parameters();
    let mut bytes = Vec::with_capacity(8 + header_bytes.len() + params.len() * 4);
    bytes.extend_from_slice(&(header_bytes.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&header_bytes);
    for p in params {
        bytes.extend_from_slice(&(p as f32).to_le_bytes());
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Reads a checkpoint written by [`save_checkpoint`].
pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<NetworkState> {
    let bytes = std::fs::read(path)?;
    if bytes.len() < 8 {
        return Err(Error::InvalidCheckpoint("file shorter than its length prefix".into()));
    }
    let header_len = u64::from_le_bytes(bytes[0..8].try_into().unwrap()) as usize;
    let blob_start = 8 + header_len;
    if bytes.len() < blob_start {
        return Err(Error::InvalidCheckpoint(format!(
            "header length {header_len} exceeds file size {}",
            bytes.len()
        )));
    }
    let header: CheckpointHeader = serde_json::from_slice(&bytes[8..blob_start])?;
    header.spec.validate()?;
    if header.param_count != header.spec.param_count() {
        return Err(Error::InvalidCheckpoint(format!(
            "header claims {} parameters but the spec has {}",
            header.param_count,
            header.spec.param_count()
        )));
    }
    let blob = &bytes[blob_start..];
    if blob.len() != header.param_count * 4 {
        return Err(Error::InvalidCheckpoint(format!(
            "parameter blob has {} bytes, expected {}",
            blob.len(),
            header.param_count * 4
        )));
    }
    let mut values = blob
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64);

    let mut weights = Vec::with_capacity(header.spec.layers.len());
    let mut biases = Vec::with_capacity(header.spec.layers.len());
    for layer in &header.spec.layers {
        let w_len = layer.out_channels * layer.in_channels * layer.kernel_size;
        weights.push(values.by_ref().take(w_len).collect::<Vec<f64>>());
        biases.push(values.by_ref().take(layer.out_channels).collect::<Vec<f64>>());
    }
    Ok(NetworkState::from_parameters(
        header.spec,
        weights,
        biases,
        header.step,
        header.seed,
    ))
}
