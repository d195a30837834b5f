//! Versioned binary checkpoints of the parametric population.

use std::io::{Read, Write};

use super::estimator::PayoffEstimator;
use super::parametric::{BrHead, ParametricModel};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"JPSROCKP";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct Checkpoint {
    pub model: ParametricModel,
    pub head: BrHead,
    pub estimator: Option<PayoffEstimator>,
}

pub fn write_checkpoint<W: Write>(checkpoint: &Checkpoint, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    bincode::serialize_into(&mut out, checkpoint).map_err(|e| Error::Parse(format!("checkpoint: {e}")))
}

pub fn read_checkpoint<R: Read>(mut input: R) -> Result<Checkpoint> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Parse("not a checkpoint file".into()));
    }
    let mut version = [0u8; 4];
    input.read_exact(&mut version)?;
    let version = u32::from_le_bytes(version);
    if version != CHECKPOINT_VERSION {
        return Err(Error::Parse(format!("unsupported checkpoint version {version}")));
    }
    bincode::deserialize_from(input).map_err(|e| Error::Parse(format!("checkpoint: {e}")))
}
