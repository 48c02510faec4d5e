//! Packed bit sequences, most significant bit of each `u64` first.

use std::ops::Range;

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BitSeq {
    words: Vec<u64>,
    len: usize,
}

impl BitSeq {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        Self {
            words: Vec::with_capacity(bits.div_ceil(64)),
            len: 0,
        }
    }

    pub fn from_bools(bits: impl IntoIterator<Item = bool>) -> Self {
        let mut seq = Self::new();
        for b in bits {
            seq.push_bit(b);
        }
        seq
    }

    /// Bytes read most significant bit first.
    pub fn from_bytes(bytes: &[u8]) -> Self {
        let mut seq = Self::with_capacity(bytes.len() * 8);
        for chunk in bytes.chunks(8) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            seq.push_word(u64::from_be_bytes(buf) >> (64 - 8 * chunk.len()), 8 * chunk.len() as u32);
        }
        seq
    }

    /// Parses a string of `'0'`/`'1'`, ignoring whitespace.
    pub fn parse(text: &str) -> Option<Self> {
        let mut seq = Self::new();
        for c in text.chars().filter(|c| !c.is_whitespace()) {
            match c {
                '0' => seq.push_bit(false),
                '1' => seq.push_bit(true),
                _ => return None,
            }
        }
        Some(seq)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push_bit(&mut self, bit: bool) {
        self.push_word(bit as u64, 1);
    }

    /// Appends the low `bits` bits of `value`, most significant first.
    pub fn push_word(&mut self, value: u64, bits: u32) {
        if bits == 0 {
            return;
        }
        debug_assert!(bits <= 64);
        let value = if bits == 64 { value } else { value & ((1u64 << bits) - 1) };
        let used = (self.len % 64) as u32;
        if used == 0 {
            self.words.push(value << (64 - bits));
        } else {
            let free = 64 - used;
            let last = self.words.last_mut().expect("partial word exists");
            if bits <= free {
                *last |= value << (free - bits);
            } else {
                *last |= value >> (bits - free);
                self.words.push(value << (64 - (bits - free)));
            }
        }
        self.len += bits as usize;
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range");
        (self.words[i / 64] >> (63 - i % 64)) & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(|i| self.get(i))
    }

    /// 64 bits starting at `pos`, zero-padded past the end.
    #[inline]
    fn window(&self, pos: usize) -> u64 {
        let (i, off) = (pos / 64, pos % 64);
        let hi = self.words.get(i).copied().unwrap_or(0);
        if off == 0 {
            return hi;
        }
        let lo = self.words.get(i + 1).copied().unwrap_or(0);
        (hi << off) | (lo >> (64 - off))
    }

    pub fn count_ones(&self) -> usize {
        self.count_ones_in(0..self.len)
    }

    pub fn count_ones_in(&self, range: Range<usize>) -> usize {
        assert!(range.end <= self.len, "range past end");
        let mut count = 0;
        let mut pos = range.start;
        while pos < range.end {
            let take = (range.end - pos).min(64);
            let w = self.window(pos);
            let w = if take == 64 { w } else { w >> (64 - take) };
            count += w.count_ones() as usize;
            pos += take;
        }
        count
    }

    /// `Σ b_i ⊕ b_{i+d}` for `0 ≤ i < len − d`.
    pub fn lag_xor_count(&self, d: usize) -> usize {
        if d >= self.len {
            return 0;
        }
        let end = self.len - d;
        let mut count = 0;
        let mut pos = 0;
        while pos < end {
            let take = (end - pos).min(64);
            let w = self.window(pos) ^ self.window(pos + d);
            let w = if take == 64 { w } else { w >> (64 - take) };
            count += w.count_ones() as usize;
            pos += take;
        }
        count
    }

    /// Copy of `range` as a new sequence.
    pub fn slice(&self, range: Range<usize>) -> BitSeq {
        assert!(range.start <= range.end && range.end <= self.len, "range past end");
        let mut out = BitSeq::with_capacity(range.len());
        let mut pos = range.start;
        while pos < range.end {
            let take = (range.end - pos).min(64);
            out.push_word(self.window(pos) >> (64 - take), take as u32);
            pos += take;
        }
        out
    }

    /// Weights of consecutive non-overlapping `block`-bit blocks; a partial
    /// trailing block is dropped.
    pub fn block_weights(&self, block: usize) -> Vec<u32> {
        assert!(block > 0);
        (0..self.len / block)
            .map(|b| self.count_ones_in(b * block..(b + 1) * block) as u32)
            .collect()
    }
}

impl FromIterator<bool> for BitSeq {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self::from_bools(iter)
    }
}
