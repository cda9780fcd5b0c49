use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

/// A finite binary string. The empty string λ is written `-`.
///
/// Ordered canonically: by length, then lexicographically.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct BinaryString {
    bits: Vec<u8>,
}

impl BinaryString {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_bits<I: IntoIterator<Item = u8>>(bits: I) -> Self {
        let bits: Vec<u8> = bits.into_iter().collect();
        assert!(bits.iter().all(|&b| b <= 1), "bits must be 0 or 1");
        BinaryString { bits }
    }

    /// `b` repeated `n` times.
    pub fn repeat(b: u8, n: usize) -> Self {
        Self::from_bits(std::iter::repeat_n(b, n))
    }

    /// The string of length `len` whose bits spell `index` most significant bit first.
    pub fn from_index(len: usize, index: u64) -> Self {
        BinaryString {
            bits: (0..len)
                .map(|j| ((index >> (len - 1 - j)) & 1) as u8)
                .collect(),
        }
    }

    /// Inverse of [`BinaryString::from_index`]; lengths above 63 saturate.
    pub fn index(&self) -> u64 {
        self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn last(&self) -> Option<u8> {
        self.bits.last().copied()
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn zeros(&self) -> usize {
        self.len() - self.ones()
    }

    pub fn child(&self, b: u8) -> Self {
        let mut bits = Vec::with_capacity(self.bits.len() + 1);
        bits.extend_from_slice(&self.bits);
        bits.push(b);
        Self::from_bits(bits)
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut bits = self.bits.clone();
        bits.extend_from_slice(&other.bits);
        BinaryString { bits }
    }

    /// The length-`n` prefix `w[0..(n-1)]`.
    pub fn prefix(&self, n: usize) -> Self {
        BinaryString {
            bits: self.bits[..n].to_vec(),
        }
    }

    pub fn parent(&self) -> Option<Self> {
        (!self.is_empty()).then(|| self.prefix(self.len() - 1))
    }

    /// `self ⊑ other`.
    pub fn is_prefix_of(&self, other: &Self) -> bool {
        other.bits.starts_with(&self.bits)
    }

    /// `self ⊏ other`.
    pub fn is_proper_prefix_of(&self, other: &Self) -> bool {
        self.len() < other.len() && self.is_prefix_of(other)
    }

    /// The suffix `u` with `self = prefix · u`, if `prefix ⊑ self`.
    pub fn strip_prefix(&self, prefix: &Self) -> Option<Self> {
        prefix.is_prefix_of(self).then(|| BinaryString {
            bits: self.bits[prefix.len()..].to_vec(),
        })
    }

    /// Prefixes of `self` from λ up to and including `self`.
    pub fn prefixes(&self) -> impl Iterator<Item = BinaryString> + '_ {
        (0..=self.len()).map(move |n| self.prefix(n))
    }

    /// All strings of length `len` in lexicographic order.
    pub fn level(len: usize) -> impl Iterator<Item = BinaryString> {
        assert!(len < 64, "level too deep to enumerate");
        (0..(1u64 << len)).map(move |i| BinaryString::from_index(len, i))
    }

    /// All strings of length at most `depth` in canonical order.
    pub fn up_to(depth: usize) -> impl Iterator<Item = BinaryString> {
        (0..=depth).flat_map(BinaryString::level)
    }
}

impl Ord for BinaryString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.bits.cmp(&other.bits))
    }
}

impl PartialOrd for BinaryString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BinaryString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bits.is_empty() {
            return f.write_str("-");
        }
        for &b in &self.bits {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseStringError(pub String);

impl fmt::Display for ParseStringError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid binary string {:?}", self.0)
    }
}

impl std::error::Error for ParseStringError {}

impl FromStr for BinaryString {
    type Err = ParseStringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "-" || s == "λ" {
            return Ok(Self::empty());
        }
        if s.is_empty() {
            return Err(ParseStringError(s.to_string()));
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(ParseStringError(s.to_string())),
            })
            .collect::<Result<Vec<u8>, _>>()
            .map(|bits| BinaryString { bits })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> BinaryString {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_order() {
        let mut v = vec![w("1"), w("00"), w("-"), w("0"), w("01")];
        v.sort();
        assert_eq!(v, vec![w("-"), w("0"), w("1"), w("00"), w("01")]);
    }

    #[test]
    fn prefixes_and_indices() {
        let x = w("0110");
        assert!(w("01").is_proper_prefix_of(&x));
        assert!(x.is_prefix_of(&x));
        assert!(!x.is_proper_prefix_of(&x));
        assert!(BinaryString::empty().is_proper_prefix_of(&x));
        assert_eq!(x.prefix(2), w("01"));
        assert_eq!(x.strip_prefix(&w("01")), Some(w("10")));
        assert_eq!(BinaryString::from_index(4, x.index()), x);
        assert_eq!(x.prefixes().count(), 5);
        assert_eq!(BinaryString::up_to(3).count(), 15);
    }

    #[test]
    fn empty_string_spelling() {
        assert_eq!(BinaryString::empty().to_string(), "-");
        assert_eq!(w("-"), BinaryString::empty());
        assert!("012".parse::<BinaryString>().is_err());
    }
}
