//! Packed bit vectors.
//!
//! Bits beyond `len` in the last word are always zero, so word-level equality,
//! popcount and serialization never see stale data.

use rand::Rng;

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Bits {
    words: Vec<u64>,
    len: usize,
}

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Self { words: vec![0; words_for(len)], len }
    }

    pub fn ones(len: usize) -> Self {
        let mut b = Self { words: vec![u64::MAX; words_for(len)], len };
        b.clear_tail();
        b
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Self {
        let mut b = Self { words: (0..words_for(len)).map(|_| rng.gen()).collect(), len };
        b.clear_tail();
        b
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut b = Self::zeros(bits.len());
        for (i, &v) in bits.iter().enumerate() {
            if v {
                b.words[i / 64] |= 1 << (i % 64);
            }
        }
        b
    }

    /// Takes the low bit of every value.
    pub fn from_low_bits(values: &[u64]) -> Self {
        let mut b = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            b.words[i / 64] |= (v & 1) << (i % 64);
        }
        b
    }

    pub fn with_capacity(len: usize) -> Self {
        Self { words: Vec::with_capacity(words_for(len)), len: 0 }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if v {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn push(&mut self, v: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        if v {
            self.words[self.len / 64] |= 1 << (self.len % 64);
        }
        self.len += 1;
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_bools(&self) -> Vec<bool> {
        self.iter().collect()
    }

    pub fn xor(&self, other: &Bits) -> Bits {
        assert_eq!(self.len, other.len);
        Bits {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect(),
            len: self.len,
        }
    }

    pub fn and(&self, other: &Bits) -> Bits {
        assert_eq!(self.len, other.len);
        Bits {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
            len: self.len,
        }
    }

    pub fn xor_assign(&mut self, other: &Bits) {
        assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn not(&self) -> Bits {
        let mut b = Bits { words: self.words.iter().map(|w| !w).collect(), len: self.len };
        b.clear_tail();
        b
    }

    /// Appends `other` after the current last bit.
    pub fn extend_from(&mut self, other: &Bits) {
        let shift = self.len % 64;
        if shift == 0 {
            self.words.extend_from_slice(&other.words);
        } else {
            for &w in &other.words {
                *self.words.last_mut().expect("non-empty when shift > 0") |= w << shift;
                self.words.push(w >> (64 - shift));
            }
        }
        self.len += other.len;
        self.words.truncate(words_for(self.len));
        self.clear_tail();
    }

    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Bits>) -> Bits {
        let mut out = Bits::default();
        for p in parts {
            out.extend_from(p);
        }
        out
    }

    /// Copies bits `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> Bits {
        assert!(start + len <= self.len, "slice {start}+{len} out of range {}", self.len);
        let mut out = Bits::zeros(len);
        let word_off = start / 64;
        let shift = start % 64;
        for (i, w) in out.words.iter_mut().enumerate() {
            let lo = self.words[word_off + i] >> shift;
            let hi = if shift != 0 {
                self.words.get(word_off + i + 1).map_or(0, |&h| h << (64 - shift))
            } else {
                0
            };
            *w = lo | hi;
        }
        out.clear_tail();
        out
    }

    /// Splits into consecutive chunks of `chunk` bits.
    pub fn chunks(&self, chunk: usize) -> Vec<Bits> {
        assert!(chunk > 0 && self.len.is_multiple_of(chunk));
        (0..self.len / chunk).map(|i| self.slice(i * chunk, chunk)).collect()
    }

    /// Little-endian bit order within each byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.len.div_ceil(8);
        let mut out = Vec::with_capacity(n);
        for w in &self.words {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out.truncate(n);
        out
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Option<Bits> {
        if bytes.len() != len.div_ceil(8) {
            return None;
        }
        let mut words = Vec::with_capacity(words_for(len));
        for chunk in bytes.chunks(8) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            words.push(u64::from_le_bytes(buf));
        }
        let mut b = Bits { words, len };
        let before = b.words.clone();
        b.clear_tail();
        (b.words == before).then_some(b)
    }
}

impl std::fmt::Debug for Bits {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Bits[{}](", self.len)?;
        for b in self.iter().take(128) {
            f.write_str(if b { "1" } else { "0" })?;
        }
        if self.len > 128 {
            f.write_str("…")?;
        }
        f.write_str(")")
    }
}

impl FromIterator<bool> for Bits {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut b = Bits::default();
        for v in iter {
            b.push(v);
        }
        b
    }
}

/// Packs fixed-width values into a contiguous little-endian bit stream.
#[derive(Default)]
pub struct BitWriter {
    words: Vec<u64>,
    len: usize,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity_bits(bits: usize) -> Self {
        Self { words: Vec::with_capacity(words_for(bits)), len: 0 }
    }

    fn write_u64(&mut self, value: u64, width: u32) {
        if width == 0 {
            return;
        }
        let v = if width == 64 { value } else { value & ((1u64 << width) - 1) };
        let shift = (self.len % 64) as u32;
        if shift == 0 {
            self.words.push(v);
        } else {
            *self.words.last_mut().expect("partial word exists") |= v << shift;
            if shift + width > 64 {
                self.words.push(v >> (64 - shift));
            }
        }
        self.len += width as usize;
    }

    pub fn write(&mut self, value: u128, width: u32) {
        debug_assert!(width <= 128);
        if width > 64 {
            self.write_u64(value as u64, 64);
            self.write_u64((value >> 64) as u64, width - 64);
        } else {
            self.write_u64(value as u64, width);
        }
    }

    pub fn write_bit(&mut self, bit: bool) {
        self.write_u64(bit as u64, 1);
    }

    pub fn finish(self) -> Vec<u8> {
        let n = self.len.div_ceil(8);
        let mut out = Vec::with_capacity(n);
        for w in &self.words {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out.truncate(n);
        out
    }
}

pub struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn read_u64(&mut self, width: u32) -> Option<u64> {
        let w = width as usize;
        if self.pos + w > self.bytes.len() * 8 {
            return None;
        }
        let mut out = 0u64;
        let mut got = 0usize;
        while got < w {
            let byte = self.bytes[(self.pos + got) / 8];
            let off = (self.pos + got) % 8;
            let take = (8 - off).min(w - got);
            let chunk = ((byte >> off) as u64) & ((1u64 << take) - 1);
            out |= chunk << got;
            got += take;
        }
        self.pos += w;
        Some(out)
    }

    pub fn read(&mut self, width: u32) -> Option<u128> {
        if width > 64 {
            let lo = self.read_u64(64)? as u128;
            let hi = self.read_u64(width - 64)? as u128;
            Some(lo | (hi << 64))
        } else {
            self.read_u64(width).map(u128::from)
        }
    }

    pub fn read_bit(&mut self) -> Option<bool> {
        self.read_u64(1).map(|b| b == 1)
    }
}

/// Number of bytes `count` values of `width` bits occupy once packed.
pub fn packed_len(count: usize, width: u32) -> usize {
    (count * width as usize).div_ceil(8)
}
