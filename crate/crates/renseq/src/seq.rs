//! Packed binary sequences and their on-disk format.
//!
//! Sequences are bit-packed (one symbol per bit, LSB-first within each
//! byte) so a 10^8-symbol experiment occupies ~12 MB. The file layout is
//!
//! ```text
//! magic "RBSQ1" | u64 LE symbol count | packed bits | JSON trailer
//! ```
//!
//! with the trailer recording the seed and the model id for provenance.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAGIC: &[u8; 5] = b"RBSQ1";

#[derive(Serialize, Deserialize)]
struct Trailer {
    seed: u64,
    model_id: u64,
    ones: u64,
}

/// Immutable 0/1 sequence with generation provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinarySequence {
    bits: Vec<u8>,
    len: usize,
    seed: u64,
    model_id: u64,
    ones: usize,
}

impl BinarySequence {
    /// Build from explicit symbols; entries must be 0 or 1.
    pub fn from_symbols(symbols: &[u8], seed: u64, model_id: u64) -> Result<Self> {
        let mut seq = Self::with_len(symbols.len(), seed, model_id);
        for (i, &s) in symbols.iter().enumerate() {
            match s {
                0 => {}
                1 => seq.set_one(i),
                value => return Err(Error::InvalidSymbol { position: i, value }),
            }
        }
        Ok(seq)
    }

    pub(crate) fn with_len(len: usize, seed: u64, model_id: u64) -> Self {
        Self {
            bits: vec![0u8; len.div_ceil(8)],
            len,
            seed,
            model_id,
            ones: 0,
        }
    }

    /// Mark position `index` (0-based; symbol `X_{index+1}`) as a renewal.
    pub(crate) fn set_one(&mut self, index: usize) {
        debug_assert!(index < self.len);
        let byte = index >> 3;
        let mask = 1u8 << (index & 7);
        debug_assert_eq!(self.bits[byte] & mask, 0, "bit set twice");
        self.bits[byte] |= mask;
        self.ones += 1;
    }

    /// Symbol at 0-based `index` (true = 1).
    #[inline]
    pub fn get(&self, index: usize) -> bool {
        assert!(index < self.len);
        self.bits[index >> 3] & (1 << (index & 7)) != 0
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of renewal events (set bits).
    pub fn ones(&self) -> usize {
        self.ones
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn model_id(&self) -> u64 {
        self.model_id
    }

    pub fn fraction_ones(&self) -> f64 {
        if self.len == 0 {
            0.0
        } else {
            self.ones as f64 / self.len as f64
        }
    }

    /// 0-based positions of the ones, in order, without materializing
    /// them; prefer this for single-pass consumers of long sequences.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        let len = self.len;
        self.bits.iter().enumerate().flat_map(move |(byte_idx, &byte)| {
            let mut b = byte;
            std::iter::from_fn(move || {
                while b != 0 {
                    let bit = b.trailing_zeros() as usize;
                    b &= b - 1;
                    let pos = byte_idx * 8 + bit;
                    if pos < len {
                        return Some(pos);
                    }
                }
                None
            })
        })
    }

    /// 0-based positions of the ones, in order.
    pub fn one_positions(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.ones);
        out.extend(self.iter_ones());
        out
    }

    /// Copy a window of `width` symbols starting at 0-based `start` into
    /// `buf` as 0/1 bytes.
    pub fn window(&self, start: usize, buf: &mut [u8]) {
        for (k, slot) in buf.iter_mut().enumerate() {
            *slot = self.get(start + k) as u8;
        }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.len as u64).to_le_bytes())?;
        w.write_all(&self.bits)?;
        let trailer = Trailer {
            seed: self.seed,
            model_id: self.model_id,
            ones: self.ones as u64,
        };
        let json = serde_json::to_string(&trailer)
            .map_err(|e| Error::MalformedSequenceFile(e.to_string()))?;
        w.write_all(json.as_bytes())?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::MalformedSequenceFile("bad magic bytes".into()));
        }
        let mut len_bytes = [0u8; 8];
        r.read_exact(&mut len_bytes)?;
        let len = u64::from_le_bytes(len_bytes) as usize;
        let mut bits = vec![0u8; len.div_ceil(8)];
        r.read_exact(&mut bits)?;
        let mut trailer_bytes = Vec::new();
        r.read_to_end(&mut trailer_bytes)?;
        let trailer: Trailer = serde_json::from_slice(&trailer_bytes)
            .map_err(|e| Error::MalformedSequenceFile(format!("trailer: {e}")))?;

        // Count and validate: bits beyond `len` must be zero.
        if !len.is_multiple_of(8) {
            let last = bits[len / 8];
            if last >> (len % 8) != 0 {
                return Err(Error::MalformedSequenceFile(
                    "set bits beyond declared length".into(),
                ));
            }
        }
        let ones: usize = bits.iter().map(|b| b.count_ones() as usize).sum();
        if ones as u64 != trailer.ones {
            return Err(Error::MalformedSequenceFile(format!(
                "trailer says {} ones, payload has {ones}",
                trailer.ones
            )));
        }
        Ok(Self {
            bits,
            len,
            seed: trailer.seed,
            model_id: trailer.model_id,
            ones,
        })
    }

    pub fn save<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }

    /// Plain `0`/`1` text rendering (no separators).
    pub fn to_text(&self) -> String {
        (0..self.len)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }
}
