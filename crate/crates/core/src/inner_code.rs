//! The inner code placed on every check vertex.
//!
//! Local views are handled as `u32` masks where bit `j` is coordinate `j` of
//! the view. Codewords are kept in lexicographic order (coordinate 0 most
//! significant), which is also the tie-break order of the nearest-codeword
//! decoder.

use std::fmt::Write as _;

use crate::error::{usage, Error, Result};
use crate::gf2::{BitMatrix, BitVec};

/// Largest supported inner code length; the decoder table has `2^d` entries.
pub const MAX_LENGTH: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct DecodeEntry {
    nearest: u32,
    distance: u32,
}

/// A binary linear code of length `d <= 16` with all codewords enumerated.
#[derive(Clone, Debug)]
pub struct InnerCode {
    length: usize,
    parity_check: BitMatrix,
    codewords: Vec<u32>,
    min_dist: Option<usize>,
    table: Vec<DecodeEntry>,
}

/// Sort key realizing lexicographic order on masks of width `len`.
#[inline]
pub(crate) fn lex_key(mask: u32, len: usize) -> u32 {
    if len == 0 {
        0
    } else {
        mask.reverse_bits() >> (32 - len)
    }
}

impl InnerCode {
    /// Enumerates the kernel of `h` and builds the nearest-codeword table.
    pub fn from_parity_check(h: BitMatrix) -> Result<Self> {
        let d = h.n_cols();
        if d == 0 {
            return usage("inner code must have positive length");
        }
        if d > MAX_LENGTH {
            return Err(Error::Capacity(format!(
                "inner code length {d} exceeds the enumeration bound {MAX_LENGTH}"
            )));
        }
        let basis: Vec<u32> = h
            .nullspace_basis()
            .iter()
            .map(|b| b.to_mask() as u32)
            .collect();
        let mut codewords = Vec::with_capacity(1 << basis.len());
        codewords.push(0u32);
        for b in &basis {
            let extended: Vec<u32> = codewords.iter().map(|c| c ^ b).collect();
            codewords.extend(extended);
        }
        codewords.sort_by_key(|&m| lex_key(m, d));
        let min_dist = codewords
            .iter()
            .filter(|&&m| m != 0)
            .map(|m| m.count_ones() as usize)
            .min();
        let table = build_table(d, &codewords);
        Ok(Self {
            length: d,
            parity_check: h,
            codewords,
            min_dist,
            table,
        })
    }

    /// `[1 1 ... 1]`: the even-weight code, minimum distance 2.
    pub fn parity(d: usize) -> Result<Self> {
        Self::from_parity_check(BitMatrix::from_rows(vec![BitVec::ones(d)], d)?)
    }

    /// `{0^d, 1^d}`, minimum distance `d`.
    pub fn repetition(d: usize) -> Result<Self> {
        if d < 2 {
            return usage("repetition code needs d >= 2");
        }
        let rows = (1..d)
            .map(|j| BitVec::from_support(d, [0, j]))
            .collect::<Result<Vec<_>>>()?;
        Self::from_parity_check(BitMatrix::from_rows(rows, d)?)
    }

    /// Hamming code of length `2^r - 1` (`r = 3`: the `[7,4,3]` code).
    pub fn hamming(r: usize) -> Result<Self> {
        Self::from_parity_check(hamming_parity_check(r)?)
    }

    /// Hamming code extended by an overall parity bit, length `2^r`.
    pub fn extended_hamming(r: usize) -> Result<Self> {
        let h = hamming_parity_check(r)?;
        let d = h.n_cols() + 1;
        let mut rows: Vec<BitVec> = h
            .rows()
            .iter()
            .map(|row| BitVec::from_support(d, row.ones_iter()))
            .collect::<Result<_>>()?;
        rows.push(BitVec::ones(d));
        Self::from_parity_check(BitMatrix::from_rows(rows, d)?)
    }

    /// Resolves names like `parity4`, `rep3`, `hamming7`, `ext-hamming8`.
    pub fn builtin(name: &str) -> Result<Self> {
        let name = name.trim().to_ascii_lowercase();
        let num = |prefix: &str| -> Option<usize> { name.strip_prefix(prefix)?.parse().ok() };
        if let Some(d) = num("ext-hamming") {
            return match d {
                4 => Self::extended_hamming(2),
                8 => Self::extended_hamming(3),
                16 => Self::extended_hamming(4),
                _ => usage(format!("no extended Hamming code of length {d}")),
            };
        }
        if let Some(d) = num("hamming") {
            return match d {
                3 => Self::hamming(2),
                7 => Self::hamming(3),
                15 => Self::hamming(4),
                _ => usage(format!("no Hamming code of length {d}")),
            };
        }
        if let Some(d) = num("parity") {
            return Self::parity(d);
        }
        if let Some(d) = num("rep") {
            return Self::repetition(d);
        }
        usage(format!(
            "unknown builtin inner code {name:?} (try repN, parityN, hamming7, hamming15, ext-hamming8, ext-hamming16)"
        ))
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// Minimum distance `d0`; `None` for the trivial code `{0}`.
    pub fn min_distance(&self) -> Option<usize> {
        self.min_dist
    }

    pub fn dimension(&self) -> usize {
        self.codewords.len().trailing_zeros() as usize
    }

    pub fn parity_check(&self) -> &BitMatrix {
        &self.parity_check
    }

    /// Codewords as masks, in lexicographic order.
    pub fn codeword_masks(&self) -> &[u32] {
        &self.codewords
    }

    pub fn codewords(&self) -> Vec<BitVec> {
        self.codewords
            .iter()
            .map(|&m| BitVec::from_mask(m as u64, self.length))
            .collect()
    }

    #[inline]
    pub fn contains_mask(&self, mask: u32) -> bool {
        self.table[mask as usize].distance == 0
    }

    pub fn contains(&self, x: &BitVec) -> Result<bool> {
        self.check_len(x)?;
        Ok(self.contains_mask(x.to_mask() as u32))
    }

    /// Table lookup: nearest codeword mask and its distance to `mask`.
    #[inline]
    pub fn decode_mask(&self, mask: u32) -> (u32, u32) {
        let e = self.table[mask as usize];
        (e.nearest, e.distance)
    }

    /// Nearest codeword by linear scan, lexicographically smallest on ties.
    pub fn nearest_codeword(&self, x: &BitVec) -> Result<BitVec> {
        self.check_len(x)?;
        let m = x.to_mask() as u32;
        Ok(BitVec::from_mask(self.scan_nearest(m) as u64, self.length))
    }

    /// Reference decoder behind [`InnerCode::nearest_codeword`]. The codeword
    /// list is sorted, so the first strict minimum is the lexicographic winner.
    pub fn scan_nearest(&self, mask: u32) -> u32 {
        let mut best = self.codewords[0];
        let mut best_dist = (best ^ mask).count_ones();
        for &c in &self.codewords[1..] {
            let dist = (c ^ mask).count_ones();
            if dist < best_dist {
                best = c;
                best_dist = dist;
            }
        }
        best
    }

    /// Support of the lexicographically first minimum-weight nonzero codeword.
    pub fn min_weight_support(&self) -> Result<Vec<usize>> {
        let d0 = self
            .min_dist
            .ok_or_else(|| Error::Usage("the trivial code has no nonzero codeword".into()))?;
        let first = self
            .codewords
            .iter()
            .find(|m| m.count_ones() as usize == d0)
            .copied()
            .ok_or_else(|| Error::Internal("minimum weight codeword vanished".into()))?;
        Ok((0..self.length).filter(|&j| first >> j & 1 == 1).collect())
    }

    fn check_len(&self, x: &BitVec) -> Result<()> {
        if x.len() != self.length {
            return usage(format!(
                "word of length {} for an inner code of length {}",
                x.len(),
                self.length
            ));
        }
        Ok(())
    }

    /// Text form: `d rank` on the first line, then the parity-check rows.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let h = &self.parity_check;
        let _ = writeln!(out, "{} {}", self.length, h.n_rows());
        for row in h.rows() {
            let _ = writeln!(out, "{row}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty inner code file".into()))?;
        let fields: Vec<usize> = header
            .split_whitespace()
            .map(|f| f.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse(format!("bad inner code header {header:?}")))?;
        let [d, rows] = fields[..] else {
            return Err(Error::Parse(format!(
                "inner code header must be `d rank`, got {header:?}"
            )));
        };
        let mut parsed = Vec::with_capacity(rows);
        for _ in 0..rows {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse("inner code file ended early".into()))?;
            let row: BitVec = line.parse()?;
            if row.len() != d {
                return Err(Error::Parse(format!(
                    "parity-check row {line:?} does not have length {d}"
                )));
            }
            parsed.push(row);
        }
        if lines.next().is_some() {
            return Err(Error::Parse("trailing data after parity-check rows".into()));
        }
        Self::from_parity_check(BitMatrix::from_rows(parsed, d)?)
    }
}

fn hamming_parity_check(r: usize) -> Result<BitMatrix> {
    if !(2..=4).contains(&r) {
        return usage(format!("Hamming codes are available for r in 2..=4, got {r}"));
    }
    let d = (1 << r) - 1;
    let rows = (0..r)
        .map(|b| BitVec::from_support(d, (0..d).filter(|j| (j + 1) >> b & 1 == 1)))
        .collect::<Result<Vec<_>>>()?;
    BitMatrix::from_rows(rows, d)
}

/// Multi-source BFS over the cube: layer `r` holds the words at distance `r`
/// from the code, and a word's winner is the lexicographic minimum of its
/// lower-layer neighbors' winners.
fn build_table(d: usize, codewords: &[u32]) -> Vec<DecodeEntry> {
    const UNSET: u32 = u32::MAX;
    let size = 1usize << d;
    let mut table = vec![
        DecodeEntry {
            nearest: 0,
            distance: UNSET,
        };
        size
    ];
    let mut layer: Vec<u32> = Vec::with_capacity(codewords.len());
    for &c in codewords {
        table[c as usize] = DecodeEntry {
            nearest: c,
            distance: 0,
        };
        layer.push(c);
    }
    let mut r = 0;
    while !layer.is_empty() {
        let mut next = Vec::new();
        for &w in &layer {
            let winner = table[w as usize].nearest;
            for j in 0..d {
                let u = (w ^ (1 << j)) as usize;
                let entry = &mut table[u];
                if entry.distance == UNSET {
                    *entry = DecodeEntry {
                        nearest: winner,
                        distance: r + 1,
                    };
                    next.push(u as u32);
                } else if entry.distance == r + 1 && lex_key(winner, d) < lex_key(entry.nearest, d)
                {
                    entry.nearest = winner;
                }
            }
        }
        layer = next;
        r += 1;
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: &str) -> BitVec {
        s.parse().unwrap()
    }

    fn builtins() -> Vec<InnerCode> {
        vec![
            InnerCode::parity(2).unwrap(),
            InnerCode::parity(4).unwrap(),
            InnerCode::repetition(3).unwrap(),
            InnerCode::repetition(5).unwrap(),
            InnerCode::hamming(3).unwrap(),
            InnerCode::extended_hamming(3).unwrap(),
            InnerCode::hamming(4).unwrap(),
            InnerCode::extended_hamming(4).unwrap(),
        ]
    }

    #[test]
    fn parity_two() {
        let code = InnerCode::from_parity_check(BitMatrix::from_strs(&["11"]).unwrap()).unwrap();
        assert_eq!(code.codewords(), vec![v("00"), v("11")]);
        assert_eq!(code.min_distance(), Some(2));
        assert_eq!(code.nearest_codeword(&v("01")).unwrap(), v("00"));
        assert_eq!(code.nearest_codeword(&v("10")).unwrap(), v("00"));
    }

    #[test]
    fn repetition_three() {
        let code = InnerCode::repetition(3).unwrap();
        assert_eq!(code.codewords(), vec![v("000"), v("111")]);
        assert_eq!(code.min_distance(), Some(3));
        assert_eq!(code.nearest_codeword(&v("011")).unwrap(), v("111"));
        assert_eq!(code.min_weight_support().unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn hamming_seven() {
        let code = InnerCode::hamming(3).unwrap();
        let words = code.codewords();
        assert_eq!(words.len(), 16);
        let brute_min = words.iter().filter(|w| !w.is_zero()).map(BitVec::weight).min();
        assert_eq!(brute_min, Some(3));
        assert_eq!(code.min_distance(), Some(3));
        let support = code.min_weight_support().unwrap();
        assert_eq!(support.len(), 3);
        let witness = BitVec::from_support(7, support.iter().copied()).unwrap();
        assert!(code.contains(&witness).unwrap());
    }

    #[test]
    fn parity_four_min_weight_support_is_lex_first() {
        let code = InnerCode::parity(4).unwrap();
        let weight_two: Vec<String> = code
            .codewords()
            .iter()
            .filter(|w| w.weight() == 2)
            .map(|w| w.to_string())
            .collect();
        assert_eq!(weight_two[0], "0011");
        assert_eq!(code.min_weight_support().unwrap(), vec![2, 3]);
    }

    #[test]
    fn extended_codes_have_distance_four() {
        assert_eq!(InnerCode::extended_hamming(3).unwrap().min_distance(), Some(4));
        assert_eq!(InnerCode::extended_hamming(4).unwrap().min_distance(), Some(4));
        assert_eq!(InnerCode::extended_hamming(4).unwrap().dimension(), 11);
        assert_eq!(InnerCode::hamming(4).unwrap().min_distance(), Some(3));
    }

    #[test]
    fn trivial_code_has_no_support() {
        let code = InnerCode::from_parity_check(BitMatrix::identity(3)).unwrap();
        assert_eq!(code.min_distance(), None);
        assert!(matches!(code.min_weight_support(), Err(Error::Usage(_))));
    }

    #[test]
    fn rejects_long_codes() {
        let h = BitMatrix::zeros(1, 17);
        assert!(matches!(InnerCode::from_parity_check(h), Err(Error::Capacity(_))));
    }

    #[test]
    fn length_mismatch_is_usage_error() {
        let code = InnerCode::repetition(3).unwrap();
        assert!(matches!(code.nearest_codeword(&v("01")), Err(Error::Usage(_))));
    }

    #[test]
    fn table_agrees_with_scan_on_every_word() {
        for code in builtins() {
            let d = code.length();
            for m in 0..(1u32 << d) {
                let scan = code.scan_nearest(m);
                let (nearest, dist) = code.decode_mask(m);
                assert_eq!(nearest, scan, "length {d} word {m:b}");
                assert_eq!(dist, (scan ^ m).count_ones());
                // No codeword is strictly closer.
                for &c in code.codeword_masks() {
                    assert!((c ^ m).count_ones() >= dist);
                }
            }
        }
    }

    #[test]
    fn codewords_form_a_group() {
        for code in builtins() {
            let words = code.codeword_masks();
            assert_eq!(words.len(), 1 << (code.length() - code.parity_check().rank()));
            assert!(words.contains(&0));
            for &a in words.iter().take(40) {
                for &b in words.iter().take(40) {
                    assert!(code.contains_mask(a ^ b));
                }
            }
        }
    }

    #[test]
    fn unique_decoding_radius() {
        for code in builtins() {
            let d0 = code.min_distance().unwrap();
            let radius = (d0 - 1) / 2;
            for m in 0..(1u32 << code.length()) {
                let (w, dist) = code.decode_mask(m);
                if dist as usize <= radius {
                    let others = code
                        .codeword_masks()
                        .iter()
                        .filter(|&&c| c != w && ((c ^ m).count_ones() as usize) <= radius)
                        .count();
                    assert_eq!(others, 0);
                }
            }
        }
    }

    #[test]
    fn text_round_trip_and_builtins() {
        let code = InnerCode::builtin("hamming7").unwrap();
        let text = code.to_text();
        assert!(text.starts_with("7 3\n"));
        let back = InnerCode::from_text(&text).unwrap();
        assert_eq!(back.codeword_masks(), code.codeword_masks());
        assert_eq!(InnerCode::builtin("ext-hamming8").unwrap().length(), 8);
        assert_eq!(InnerCode::builtin("rep4").unwrap().min_distance(), Some(4));
        assert_eq!(InnerCode::builtin("parity6").unwrap().min_distance(), Some(2));
        assert!(InnerCode::builtin("golay").is_err());
        assert!(InnerCode::from_text("3 1\n11\n").is_err());
        assert!(InnerCode::from_text("3 2\n111\n").is_err());
    }
}
