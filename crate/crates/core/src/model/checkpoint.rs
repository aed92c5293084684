//! Versioned binary model checkpoints.
//!
//! Layout: an 8-byte magic, a little-endian `u32` format version, a
//! length-prefixed JSON header (architecture, portfolio, optional feature
//! scaler), then the flat parameter array as raw little-endian `f64` bits.
//! Writing bits rather than decimal text makes save -> load -> predict
//! bit-exact.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Scaler;
use crate::model::{ArchitectureSpec, DecoderParams};

pub const CHECKPOINT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"DSELCKPT";

/// A trained decoder plus everything needed to run it on raw inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: DecoderParams,
    /// Algorithm names addressed by the decoder's output columns.
    pub portfolio: Vec<String>,
    /// Standardization fit on the training features, if any was used.
    pub scaler: Option<Scaler>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    arch: ArchitectureSpec,
    portfolio: Vec<String>,
    scaler: Option<Scaler>,
}

impl Checkpoint {
    pub fn new(
        params: DecoderParams,
        portfolio: Vec<String>,
        scaler: Option<Scaler>,
    ) -> Result<Self> {
        if portfolio.len() != params.arch().output_dim {
            return Err(Error::Schema(format!(
                "portfolio has {} algorithms, decoder outputs {}",
                portfolio.len(),
                params.arch().output_dim
            )));
        }
        if let Some(s) = &scaler {
            if s.dim() != params.arch().input_dim {
                return Err(Error::Schema(format!(
                    "scaler covers {} dims, decoder expects {}",
                    s.dim(),
                    params.arch().input_dim
                )));
            }
        }
        Ok(Self {
            params,
            portfolio,
            scaler,
        })
    }

    /// Applies the stored scaler (when present) and returns raw scores.
    pub fn predict(&self, features: &[f64]) -> Result<Vec<f64>> {
        match &self.scaler {
            Some(s) => crate::model::predict(&self.params, &s.transform_row(features)?),
            None => crate::model::predict(&self.params, features),
        }
    }

    /// Index of the selected algorithm for `features`.
    pub fn select(&self, features: &[f64]) -> Result<usize> {
        Ok(crate::model::argmax(&self.predict(features)?))
    }
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    let header = Header {
        arch: ckpt.params.arch().clone(),
        portfolio: ckpt.portfolio.clone(),
        scaler: ckpt.scaler.clone(),
    };
    let header_json = serde_json::to_vec(&header)
        .map_err(|e| Error::Internal(format!("checkpoint header serialization: {e}")))?;
    let flat = ckpt.params.as_flat();

    let mut buf = Vec::with_capacity(8 + 4 + 4 + header_json.len() + 8 + flat.len() * 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(header_json.len() as u32).to_le_bytes());
    buf.extend_from_slice(&header_json);
    buf.extend_from_slice(&(flat.len() as u64).to_le_bytes());
    for p in flat {
        buf.extend_from_slice(&p.to_bits().to_le_bytes());
    }
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let display = path.display().to_string();
    let data = fs::read(path)?;
    let mut cursor = 0usize;
    let mut take = |len: usize| -> Result<&[u8]> {
        if cursor + len > data.len() {
            return Err(Error::parse(
                &display,
                0,
                format!("truncated checkpoint: wanted {len} bytes at offset {cursor}"),
            ));
        }
        let slice = &data[cursor..cursor + len];
        cursor += len;
        Ok(slice)
    };

    if take(8)? != MAGIC {
        return Err(Error::parse(&display, 0, "not a checkpoint file"));
    }
    let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
    if version != CHECKPOINT_VERSION {
        return Err(Error::Version {
            expected: CHECKPOINT_VERSION,
            found: version,
        });
    }
    let header_len = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let header: Header = serde_json::from_slice(take(header_len)?)
        .map_err(|e| Error::parse(&display, 0, format!("bad checkpoint header: {e}")))?;
    let count = u64::from_le_bytes(take(8)?.try_into().unwrap()) as usize;
    let mut flat = Vec::with_capacity(count);
    for _ in 0..count {
        let bits = u64::from_le_bytes(take(8)?.try_into().unwrap());
        flat.push(f64::from_bits(bits));
    }
    if cursor != data.len() {
        return Err(Error::parse(
            &display,
            0,
            format!("{} trailing bytes after checkpoint", data.len() - cursor),
        ));
    }
    let params = DecoderParams::from_flat(header.arch, flat)?;
    Checkpoint::new(params, header.portfolio, header.scaler)
}
