//! Entropy sources feeding prime searches and table construction.

use rand::RngCore;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EntropyError {
    #[error("entropy source exhausted after {consumed} bytes")]
    Exhausted { consumed: usize },
    #[error("entropy source failed: {0}")]
    Source(String),
}

/// Anything that can fill a buffer with random bytes, and may run dry.
pub trait EntropySource {
    fn draw_bytes(&mut self, dest: &mut [u8]) -> Result<(), EntropyError>;

    fn draw_u64(&mut self) -> Result<u64, EntropyError> {
        let mut buf = [0u8; 8];
        self.draw_bytes(&mut buf)?;
        Ok(u64::from_le_bytes(buf))
    }
}

impl<R: RngCore> EntropySource for R {
    fn draw_bytes(&mut self, dest: &mut [u8]) -> Result<(), EntropyError> {
        self.try_fill_bytes(dest)
            .map_err(|e| EntropyError::Source(e.to_string()))
    }
}

/// A finite, pre-recorded byte supply. Useful for exhaustion tests and for
/// replaying a captured seed.
#[derive(Debug, Clone)]
pub struct BufferEntropy {
    bytes: Vec<u8>,
    pos: usize,
}

impl BufferEntropy {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Self {
        Self {
            bytes: bytes.into(),
            pos: 0,
        }
    }

    pub fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }
}

impl EntropySource for BufferEntropy {
    fn draw_bytes(&mut self, dest: &mut [u8]) -> Result<(), EntropyError> {
        if dest.len() > self.remaining() {
            return Err(EntropyError::Exhausted { consumed: self.pos });
        }
        dest.copy_from_slice(&self.bytes[self.pos..self.pos + dest.len()]);
        self.pos += dest.len();
        Ok(())
    }
}
