//! Pauli strings over `{0,1,2,3}^n` and binary strings, packed for word-level algebra.
//!
//! A symbol `a` is identified with `(a1, a2) ∈ F₂²` through its base-2 digits, so
//! `1 = (0,1)`, `2 = (1,0)` and `3 = (1,1)`. In the packed form coordinate `j`
//! occupies bits `2j` (the low digit `a2`) and `2j + 1` (the high digit `a1`),
//! little-endian, 32 coordinates per `u64`. With that layout
//!
//! - `⊕` is a word XOR,
//! - `⋆` is a shift/AND/XOR leaving one bit per coordinate at the even positions,
//! - the bar involution swaps each bit pair.
//!
//! [`BitString`] uses the plain one-bit-per-coordinate layout (64 per word).
//! Hot loops elsewhere keep binary data in the "spread" layout (bit `2j`) so it
//! lines up with packed Pauli words; [`spread_even`] and [`compact_even`]
//! convert between the two.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{check_len, Error, Result};

pub const SYMBOLS_PER_WORD: usize = 32;

pub(crate) const EVEN_BITS: u64 = 0x5555_5555_5555_5555;

#[inline]
pub(crate) fn pauli_words(n: usize) -> usize {
    n.div_ceil(SYMBOLS_PER_WORD)
}

#[inline]
fn bit_words(n: usize) -> usize {
    n.div_ceil(64)
}

/// Mask selecting the even (one-per-coordinate) bits of the first `len`
/// coordinates held in word `w`.
#[inline]
pub(crate) fn spread_prefix_mask(len: usize, w: usize) -> u64 {
    let start = w * SYMBOLS_PER_WORD;
    if len >= start + SYMBOLS_PER_WORD {
        EVEN_BITS
    } else if len <= start {
        0
    } else {
        EVEN_BITS & ((1u64 << (2 * (len - start))) - 1)
    }
}

/// Per-coordinate `⋆` of two packed words; the result bit for coordinate `j`
/// sits at position `2j`.
#[inline(always)]
pub(crate) fn star_word(a: u64, b: u64) -> u64 {
    (((a >> 1) & b) ^ (a & (b >> 1))) & EVEN_BITS
}

#[inline(always)]
pub(crate) fn bar_word(a: u64) -> u64 {
    ((a & EVEN_BITS) << 1) | ((a >> 1) & EVEN_BITS)
}

/// Gathers the even bits of `x` into a 32-bit value.
#[inline]
pub fn compact_even(x: u64) -> u32 {
    let mut x = x & EVEN_BITS;
    x = (x | (x >> 1)) & 0x3333_3333_3333_3333;
    x = (x | (x >> 2)) & 0x0f0f_0f0f_0f0f_0f0f;
    x = (x | (x >> 4)) & 0x00ff_00ff_00ff_00ff;
    x = (x | (x >> 8)) & 0x0000_ffff_0000_ffff;
    x = (x | (x >> 16)) & 0x0000_0000_ffff_ffff;
    x as u32
}

/// Inverse of [`compact_even`].
#[inline]
pub fn spread_even(x: u32) -> u64 {
    let mut x = x as u64;
    x = (x | (x << 16)) & 0x0000_ffff_0000_ffff;
    x = (x | (x << 8)) & 0x00ff_00ff_00ff_00ff;
    x = (x | (x << 4)) & 0x0f0f_0f0f_0f0f_0f0f;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333;
    x = (x | (x << 1)) & EVEN_BITS;
    x
}

/// A length-`n` word over `{0,1,2,3}` naming the Pauli operator
/// `σ_{A_1} ⊗ … ⊗ σ_{A_n}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    len: usize,
    words: Vec<u64>,
}

impl PauliString {
    /// The all-zero string `0ⁿ`.
    pub fn identity(n: usize) -> Self {
        PauliString {
            len: n,
            words: vec![0; pauli_words(n)],
        }
    }

    pub fn from_symbols(symbols: &[u8]) -> Result<Self> {
        let mut out = PauliString::identity(symbols.len());
        for (j, &s) in symbols.iter().enumerate() {
            if s > 3 {
                return Err(Error::Parse(format!(
                    "symbol {s} at position {j} is not in 0..=3"
                )));
            }
            out.set(j, s);
        }
        Ok(out)
    }

    /// Builds a string from packed words; bits beyond `n` coordinates are cleared.
    pub fn from_words(n: usize, words: &[u64]) -> Result<Self> {
        check_len(words.len(), pauli_words(n))?;
        let mut out = PauliString {
            len: n,
            words: words.to_vec(),
        };
        out.clear_tail();
        Ok(out)
    }

    /// Uniformly random string over `{1,2,3}ⁿ` (a nontrivial probe).
    pub fn random_nontrivial<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut out = PauliString::identity(n);
        out.fill_random_nontrivial(rng);
        out
    }

    /// Uniformly random string over `{0,1,2,3}ⁿ`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut out = PauliString::identity(n);
        out.fill_random(rng);
        out
    }

    /// Overwrites every coordinate with an independent uniform draw from
    /// `{1,2,3}`, by rejection of the value 0 on 2-bit chunks of 64-bit draws.
    pub fn fill_random_nontrivial<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let mut pool = 0u64;
        let mut avail = 0u32;
        for w in 0..self.words.len() {
            let count = (self.len - w * SYMBOLS_PER_WORD).min(SYMBOLS_PER_WORD);
            let mut word = 0u64;
            let mut k = 0;
            while k < count {
                if avail == 0 {
                    pool = rng.next_u64();
                    avail = 32;
                }
                let s = pool & 3;
                pool >>= 2;
                avail -= 1;
                if s != 0 {
                    word |= s << (2 * k);
                    k += 1;
                }
            }
            self.words[w] = word;
        }
    }

    pub fn fill_random<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for w in self.words.iter_mut() {
            *w = rng.next_u64();
        }
        self.clear_tail();
    }

    fn clear_tail(&mut self) {
        let rem = self.len % SYMBOLS_PER_WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << (2 * rem)) - 1;
            }
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn symbol(&self, j: usize) -> u8 {
        assert!(
            j < self.len,
            "coordinate {j} out of range for length {}",
            self.len
        );
        ((self.words[j / SYMBOLS_PER_WORD] >> (2 * (j % SYMBOLS_PER_WORD))) & 3) as u8
    }

    pub fn set(&mut self, j: usize, s: u8) {
        assert!(
            j < self.len,
            "coordinate {j} out of range for length {}",
            self.len
        );
        assert!(s < 4, "symbol {s} out of range");
        let shift = 2 * (j % SYMBOLS_PER_WORD);
        let w = &mut self.words[j / SYMBOLS_PER_WORD];
        *w = (*w & !(3u64 << shift)) | ((s as u64) << shift);
    }

    pub fn symbols(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.len).map(move |j| self.symbol(j))
    }

    pub fn is_identity(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// True when no coordinate is 0, i.e. the string is a nontrivial probe.
    pub fn is_nontrivial(&self) -> bool {
        self.words.iter().enumerate().all(|(w, &word)| {
            let occupied = (word | (word >> 1)) & EVEN_BITS;
            occupied == spread_prefix_mask(self.len, w)
        })
    }

    /// Number of non-identity coordinates.
    pub fn weight(&self) -> usize {
        self.words
            .iter()
            .map(|&w| ((w | (w >> 1)) & EVEN_BITS).count_ones() as usize)
            .sum()
    }

    /// The first `len` coordinates.
    pub fn prefix(&self, len: usize) -> Result<Self> {
        if len > self.len {
            return Err(Error::LengthMismatch {
                left: len,
                right: self.len,
            });
        }
        let mut out = PauliString {
            len,
            words: self.words[..pauli_words(len)].to_vec(),
        };
        out.clear_tail();
        Ok(out)
    }

    /// Appends one symbol.
    pub fn extended(&self, s: u8) -> Self {
        let mut out = self.clone();
        if out.len.is_multiple_of(SYMBOLS_PER_WORD) {
            out.words.push(0);
        }
        out.len += 1;
        out.set(out.len - 1, s);
        out
    }

    /// Coordinate-wise `⊕` (multiplication of Pauli operators up to phase).
    pub fn xor(&self, other: &PauliString) -> Result<PauliString> {
        check_len(self.len, other.len)?;
        Ok(PauliString {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect(),
        })
    }

    /// Coordinate-wise symplectic product `A ⋆ B`: bit `j` is 1 iff
    /// `σ_{A_j}` and `σ_{B_j}` anticommute.
    pub fn star(&self, other: &PauliString) -> Result<BitString> {
        check_len(self.len, other.len)?;
        let spread: Vec<u64> = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| star_word(a, b))
            .collect();
        Ok(BitString::from_spread(self.len, &spread))
    }

    /// `⟨A, C⟩ = Σ_t (A ⋆ C)_t mod 2`.
    pub fn symplectic_dot(&self, other: &PauliString) -> Result<u8> {
        check_len(self.len, other.len)?;
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| star_word(a, b).count_ones())
            .sum();
        Ok((ones & 1) as u8)
    }

    /// Ordinary dot product on `F₂²ⁿ`.
    pub fn dot(&self, other: &PauliString) -> Result<u8> {
        check_len(self.len, other.len)?;
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| (a & b).count_ones())
            .sum();
        Ok((ones & 1) as u8)
    }

    /// Swaps the two bits of every coordinate: `0↦0, 1↦2, 2↦1, 3↦3`.
    pub fn bar(&self) -> PauliString {
        PauliString {
            len: self.len,
            words: self.words.iter().map(|&w| bar_word(w)).collect(),
        }
    }

    /// `(C^{≠B})_j = 1` iff `C_j ≠ B_j`.
    pub fn neq_mask(&self, other: &PauliString) -> Result<BitString> {
        check_len(self.len, other.len)?;
        let spread: Vec<u64> = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| {
                let d = a ^ b;
                (d | (d >> 1)) & EVEN_BITS
            })
            .collect();
        Ok(BitString::from_spread(self.len, &spread))
    }

    /// Index in `0..4ⁿ` whose bits are the packed representation.
    /// Only defined for `n ≤ 32`.
    pub fn to_index(&self) -> u64 {
        assert!(self.len <= 32, "index form needs n <= 32");
        self.words.first().copied().unwrap_or(0)
    }

    pub fn from_index(n: usize, index: u64) -> Self {
        assert!(n <= 32, "index form needs n <= 32");
        let mut out = PauliString::identity(n);
        if n > 0 {
            out.words[0] = index;
            out.clear_tail();
        }
        out
    }

    /// Little-endian binary form: coordinate `j` at bits `2j, 2j+1`.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let nbytes = (2 * self.len).div_ceil(8);
        self.words
            .iter()
            .flat_map(|w| w.to_le_bytes())
            .take(nbytes)
            .collect()
    }

    pub fn from_le_bytes(n: usize, bytes: &[u8]) -> Result<Self> {
        check_len(bytes.len(), (2 * n).div_ceil(8))?;
        let mut words = vec![0u64; pauli_words(n)];
        for (i, &b) in bytes.iter().enumerate() {
            words[i / 8] |= (b as u64) << (8 * (i % 8));
        }
        PauliString::from_words(n, &words)
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty Pauli string".into()));
        }
        let symbols = s
            .bytes()
            .map(|c| match c {
                b'0'..=b'3' => Ok(c - b'0'),
                _ => Err(Error::Parse(format!(
                    "invalid base-4 digit {:?} in {s:?}",
                    c as char
                ))),
            })
            .collect::<Result<Vec<u8>>>()?;
        PauliString::from_symbols(&symbols)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.symbols().map(|c| (b'0' + c) as char).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

/// Lexicographic order on the symbol sequence, shorter strings first on ties.
impl Ord for PauliString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.symbols().cmp(other.symbols()).then(self.len.cmp(&other.len))
    }
}

impl PartialOrd for PauliString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A length-`n` binary string, 64 bits per word.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn zeros(n: usize) -> Self {
        BitString {
            len: n,
            words: vec![0; bit_words(n)],
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut out = BitString::zeros(bits.len());
        for (j, &b) in bits.iter().enumerate() {
            out.set(j, b);
        }
        out
    }

    /// Builds from words in the spread layout (bit `2j` per coordinate).
    pub fn from_spread(n: usize, spread: &[u64]) -> Self {
        let mut out = BitString::zeros(n);
        out.load_spread(spread);
        out
    }

    pub(crate) fn load_spread(&mut self, spread: &[u64]) {
        for (k, w) in self.words.iter_mut().enumerate() {
            let lo = spread.get(2 * k).copied().unwrap_or(0);
            let hi = spread.get(2 * k + 1).copied().unwrap_or(0);
            *w = compact_even(lo) as u64 | ((compact_even(hi) as u64) << 32);
        }
        self.clear_tail();
    }

    /// Word `w` of the spread layout (coordinates `32w .. 32w+31`).
    #[inline]
    pub fn spread_word(&self, w: usize) -> u64 {
        let half = (self.words[w / 2] >> (32 * (w % 2))) as u32;
        spread_even(half)
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, j: usize) -> bool {
        assert!(j < self.len, "bit {j} out of range for length {}", self.len);
        (self.words[j / 64] >> (j % 64)) & 1 == 1
    }

    pub fn set(&mut self, j: usize, value: bool) {
        assert!(j < self.len, "bit {j} out of range for length {}", self.len);
        let mask = 1u64 << (j % 64);
        if value {
            self.words[j / 64] |= mask;
        } else {
            self.words[j / 64] &= !mask;
        }
    }

    pub fn bits(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |j| self.get(j))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn parity(&self) -> u8 {
        (self.count_ones() & 1) as u8
    }

    /// Addition mod 2.
    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        check_len(self.len, other.len)?;
        Ok(BitString {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect(),
        })
    }

    /// Bits set in `self` and clear in `other`.
    pub fn and_not(&self, other: &BitString) -> Result<BitString> {
        check_len(self.len, other.len)?;
        Ok(BitString {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & !b).collect(),
        })
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bits = s
            .bytes()
            .map(|c| match c {
                b'0' => Ok(false),
                b'1' => Ok(true),
                _ => Err(Error::Parse(format!(
                    "invalid binary digit {:?} in {s:?}",
                    c as char
                ))),
            })
            .collect::<Result<Vec<bool>>>()?;
        Ok(BitString::from_bits(&bits))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.bits().map(|b| if b { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    fn b(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn xor_examples() {
        assert_eq!(p("1").xor(&p("3")).unwrap(), p("2"));
        assert_eq!(p("000").xor(&p("213")).unwrap(), p("213"));
        let a = p("0123012301230123012301230123012301230123");
        assert!(a.xor(&a).unwrap().is_identity());
    }

    #[test]
    fn star_example() {
        assert_eq!(p("00321").star(&p("31122")).unwrap(), b("00101"));
        assert_eq!(p("31122").star(&p("00321")).unwrap(), b("00101"));
        assert!(p("3213").star(&p("0000")).unwrap().is_zero());
    }

    #[test]
    fn star_table_has_six_ones() {
        let mut ones = 0;
        for a in 0..4u8 {
            for c in 0..4u8 {
                let s = PauliString::from_symbols(&[a])
                    .unwrap()
                    .star(&PauliString::from_symbols(&[c]).unwrap())
                    .unwrap();
                let expected = a != 0 && c != 0 && a != c;
                assert_eq!(s.get(0), expected, "{a} * {c}");
                ones += s.get(0) as usize;
            }
        }
        assert_eq!(ones, 6);
    }

    #[test]
    fn star_distributes_over_xor() {
        for a in 0..4u8 {
            for x in 0..4u8 {
                for y in 0..4u8 {
                    let pa = PauliString::from_symbols(&[a]).unwrap();
                    let px = PauliString::from_symbols(&[x]).unwrap();
                    let py = PauliString::from_symbols(&[y]).unwrap();
                    let lhs = pa.star(&px.xor(&py).unwrap()).unwrap();
                    let rhs = pa.star(&px).unwrap().xor(&pa.star(&py).unwrap()).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn symplectic_dot_examples() {
        assert_eq!(p("00321").symplectic_dot(&p("31122")).unwrap(), 0);
        assert_eq!(p("1").symplectic_dot(&p("2")).unwrap(), 1);
        assert_eq!(p("2313").symplectic_dot(&p("2313")).unwrap(), 0);
        assert_eq!(p("2313").symplectic_dot(&p("0000")).unwrap(), 0);
    }

    #[test]
    fn symplectic_dot_is_bar_dot() {
        let a = p("0123321");
        let c = p("3311200");
        assert_eq!(a.symplectic_dot(&c).unwrap(), a.bar().dot(&c).unwrap());
    }

    #[test]
    fn bar_examples() {
        assert_eq!(p("1").bar(), p("2"));
        assert_eq!(p("2").bar(), p("1"));
        assert_eq!(p("03").bar(), p("03"));
        let a = p("0123");
        assert_eq!(a.bar().bar(), a);
    }

    #[test]
    fn neq_mask_examples() {
        assert_eq!(p("00321").neq_mask(&p("00000")).unwrap(), b("00111"));
        assert!(p("123").neq_mask(&p("123")).unwrap().is_zero());
        assert_eq!(p("12").neq_mask(&p("13")).unwrap(), b("01"));
    }

    #[test]
    fn length_mismatch_is_reported() {
        let err = p("12").xor(&p("123")).unwrap_err();
        assert_eq!(err, Error::LengthMismatch { left: 2, right: 3 });
        assert!(p("12").star(&p("1")).is_err());
        assert!(p("12").neq_mask(&p("1")).is_err());
        assert!(p("12").symplectic_dot(&p("1")).is_err());
    }

    #[test]
    fn text_round_trip_and_rejects_bad_digits() {
        assert_eq!(p("00321").to_string(), "00321");
        assert!("0042".parse::<PauliString>().is_err());
        assert!("".parse::<PauliString>().is_err());
        assert!("01x".parse::<BitString>().is_err());
    }

    #[test]
    fn binary_form_layout() {
        // coordinate 0 -> bits 0,1; coordinate 1 -> bits 2,3
        let a = p("12");
        assert_eq!(a.to_le_bytes(), vec![0b1001]);
        assert_eq!(PauliString::from_le_bytes(2, &[0b1001]).unwrap(), a);
    }

    #[test]
    fn compact_and_spread_are_inverse() {
        for x in [0u32, 1, 0xdead_beef, u32::MAX, 0x8000_0001] {
            assert_eq!(compact_even(spread_even(x)), x);
        }
    }

    #[test]
    fn nontrivial_detection_across_word_boundary() {
        let mut a = PauliString::identity(40);
        for j in 0..40 {
            a.set(j, 1 + (j % 3) as u8);
        }
        assert!(a.is_nontrivial());
        a.set(35, 0);
        assert!(!a.is_nontrivial());
    }

    #[test]
    fn extended_and_prefix() {
        let mut a = PauliString::identity(0);
        for j in 0..70 {
            a = a.extended((j % 4) as u8);
        }
        assert_eq!(a.len(), 70);
        assert_eq!(a.symbol(69), 1);
        assert_eq!(a.prefix(33).unwrap().len(), 33);
        assert_eq!(a.prefix(33).unwrap().symbol(32), 0);
        assert!(a.prefix(71).is_err());
    }

    #[test]
    fn lexicographic_order() {
        assert!(p("0133") < p("1000"));
        assert!(p("3") > p("2"));
    }
}
