//! Pauli strings and real-weighted sums of them.
//!
//! A [`PauliString`] is a tensor product of single-qubit Pauli operators,
//! stored bit-packed: qubit `q` contributes bit `q % 64` of words `q / 64`
//! in two bit vectors `x` and `z` (I = 00, X = 10, Z = 01, Y = 11 as x/z
//! pairs). An [`Observable`] is a list of distinct strings with real
//! coefficients, parsed from and written back to a plain text format.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Single-qubit Pauli operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PauliOp {
    I,
    X,
    Y,
    Z,
}

impl PauliOp {
    /// (x, z) bit pair of the symplectic encoding.
    pub fn xz(self) -> (bool, bool) {
        match self {
            PauliOp::I => (false, false),
            PauliOp::X => (true, false),
            PauliOp::Y => (true, true),
            PauliOp::Z => (false, true),
        }
    }

    pub fn from_xz(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => PauliOp::I,
            (true, false) => PauliOp::X,
            (true, true) => PauliOp::Y,
            (false, true) => PauliOp::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            PauliOp::I => 'I',
            PauliOp::X => 'X',
            PauliOp::Y => 'Y',
            PauliOp::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(PauliOp::I),
            'X' => Some(PauliOp::X),
            'Y' => Some(PauliOp::Y),
            'Z' => Some(PauliOp::Z),
            _ => None,
        }
    }
}

impl fmt::Display for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Tensor product of single-qubit Paulis on a fixed number of qubits.
///
/// Bits beyond `len` in the backing words are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    len: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl PauliString {
    pub fn identity(len: usize) -> Self {
        PauliString {
            len,
            x: vec![0; words_for(len)],
            z: vec![0; words_for(len)],
        }
    }

    pub fn from_ops(ops: &[PauliOp]) -> Self {
        let mut s = PauliString::identity(ops.len());
        for (q, &op) in ops.iter().enumerate() {
            s.set(q, op);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn op(&self, q: usize) -> PauliOp {
        assert!(q < self.len, "qubit {q} out of range for length {}", self.len);
        let (w, b) = (q / 64, q % 64);
        PauliOp::from_xz(self.x[w] >> b & 1 == 1, self.z[w] >> b & 1 == 1)
    }

    pub fn set(&mut self, q: usize, op: PauliOp) {
        assert!(q < self.len, "qubit {q} out of range for length {}", self.len);
        let (w, b) = (q / 64, q % 64);
        let (x, z) = op.xz();
        self.x[w] = self.x[w] & !(1 << b) | (x as u64) << b;
        self.z[w] = self.z[w] & !(1 << b) | (z as u64) << b;
    }

    pub fn ops(&self) -> impl Iterator<Item = PauliOp> + '_ {
        (0..self.len).map(|q| self.op(q))
    }

    /// Ops at the given positions, in the given order.
    pub fn ops_at(&self, positions: &[usize]) -> Vec<PauliOp> {
        positions.iter().map(|&q| self.op(q)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().all(|&w| w == 0) && self.z.iter().all(|&w| w == 0)
    }

    /// Number of non-identity positions.
    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(&x, &z)| (x | z).count_ones() as usize)
            .sum()
    }

    fn assert_same_len(&self, other: &Self) {
        assert_eq!(
            self.len, other.len,
            "pauli strings have different lengths ({} vs {})",
            self.len, other.len
        );
    }

    /// True when the two strings agree on every qubit where both are
    /// non-identity. This is joint measurability in a shared single-qubit
    /// basis, strictly stronger than commutation.
    ///
    /// # Panics
    /// Panics if the lengths differ.
    pub fn qubitwise_compatible(&self, other: &Self) -> bool {
        self.assert_same_len(other);
        self.x.iter().zip(&self.z).zip(other.x.iter().zip(&other.z)).all(
            |((&xp, &zp), (&xq, &zq))| {
                let both = (xp | zp) & (xq | zq);
                both & ((xp ^ xq) | (zp ^ zq)) == 0
            },
        )
    }

    /// True when the operators commute: the number of qubits where both are
    /// non-identity and differ is even.
    ///
    /// # Panics
    /// Panics if the lengths differ.
    pub fn commutes_with(&self, other: &Self) -> bool {
        self.assert_same_len(other);
        let parity: u32 = self
            .x
            .iter()
            .zip(&self.z)
            .zip(other.x.iter().zip(&other.z))
            .map(|((&xp, &zp), (&xq, &zq))| {
                ((xp & zq).count_ones() + (zp & xq).count_ones()) & 1
            })
            .sum();
        parity % 2 == 0
    }

    /// Product `self * other` as `(k, r)` with `self * other = i^k * r`.
    ///
    /// # Panics
    /// Panics if the lengths differ.
    pub fn mul(&self, other: &Self) -> (u8, PauliString) {
        self.assert_same_len(other);
        let mut r = PauliString::identity(self.len);
        let mut phase = 0u32;
        for w in 0..self.x.len() {
            r.x[w] = self.x[w] ^ other.x[w];
            r.z[w] = self.z[w] ^ other.z[w];
        }
        for q in 0..self.len {
            phase += quarter_phase(self.op(q), other.op(q)) as u32;
        }
        ((phase % 4) as u8, r)
    }
}

/// Power of i contributed by a single-qubit product a*b.
fn quarter_phase(a: PauliOp, b: PauliOp) -> u8 {
    use PauliOp::*;
    match (a, b) {
        (X, Y) | (Y, Z) | (Z, X) => 1,
        (Y, X) | (Z, Y) | (X, Z) => 3,
        _ => 0,
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for op in self.ops() {
            write!(f, "{op}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for PauliString {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, ParseError> {
        let mut ops = Vec::with_capacity(s.len());
        for c in s.chars() {
            ops.push(PauliOp::from_char(c).ok_or(ParseError::InvalidCharacter { line: 0, ch: c })?);
        }
        if ops.is_empty() {
            return Err(ParseError::Empty);
        }
        Ok(PauliString::from_ops(&ops))
    }
}

/// Error from reading observable text.
#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("line {line}: expected '<coefficient> <pauli word>'")]
    MalformedLine { line: usize },
    #[error("line {line}: invalid coefficient {token:?}")]
    InvalidCoefficient { line: usize, token: String },
    #[error("line {line}: invalid character {ch:?} in pauli word")]
    InvalidCharacter { line: usize, ch: char },
    #[error("line {line}: pauli word has length {found}, expected {expected}")]
    LengthMismatch {
        line: usize,
        found: usize,
        expected: usize,
    },
    #[error("no terms found")]
    Empty,
}

/// Real linear combination of distinct Pauli strings on a common register.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    qubit_count: usize,
    terms: Vec<(f64, PauliString)>,
}

impl Observable {
    /// Parses the line-oriented text format: one `<coefficient> <pauli word>`
    /// pair per line, `#` starting a comment, blank lines ignored. Repeated
    /// words are merged by summing coefficients into the first occurrence;
    /// otherwise file order is kept.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut terms: Vec<(f64, PauliString)> = Vec::new();
        let mut expected_len = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut tokens = content.split_whitespace();
            let (coeff_tok, word_tok) = match (tokens.next(), tokens.next(), tokens.next()) {
                (Some(c), Some(w), None) => (c, w),
                _ => return Err(ParseError::MalformedLine { line }),
            };
            let coeff: f64 = coeff_tok
                .parse()
                .ok()
                .filter(|c: &f64| c.is_finite())
                .ok_or_else(|| ParseError::InvalidCoefficient {
                    line,
                    token: coeff_tok.to_string(),
                })?;
            let mut ops = Vec::with_capacity(word_tok.len());
            for ch in word_tok.chars() {
                ops.push(PauliOp::from_char(ch).ok_or(ParseError::InvalidCharacter { line, ch })?);
            }
            let expected = *expected_len.get_or_insert(ops.len());
            if ops.len() != expected {
                return Err(ParseError::LengthMismatch {
                    line,
                    found: ops.len(),
                    expected,
                });
            }
            let string = PauliString::from_ops(&ops);
            match terms.iter_mut().find(|(_, s)| *s == string) {
                Some((c, _)) => *c += coeff,
                None => terms.push((coeff, string)),
            }
        }
        match expected_len {
            Some(qubit_count) => Ok(Observable { qubit_count, terms }),
            None => Err(ParseError::Empty),
        }
    }

    /// Builds an observable from explicit terms, merging repeated strings.
    ///
    /// # Panics
    /// Panics if `terms` is empty or the strings have mixed lengths.
    pub fn from_terms(terms: Vec<(f64, PauliString)>) -> Self {
        assert!(!terms.is_empty(), "observable needs at least one term");
        let qubit_count = terms[0].1.len();
        let mut merged: Vec<(f64, PauliString)> = Vec::with_capacity(terms.len());
        for (coeff, string) in terms {
            assert_eq!(string.len(), qubit_count, "mixed pauli string lengths");
            match merged.iter_mut().find(|(_, s)| *s == string) {
                Some((c, _)) => *c += coeff,
                None => merged.push((coeff, string)),
            }
        }
        Observable {
            qubit_count,
            terms: merged,
        }
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn term(&self, i: usize) -> (f64, &PauliString) {
        let (c, s) = &self.terms[i];
        (*c, s)
    }

    /// Writes the text format back out; `parse` of the result reproduces
    /// this observable exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (coeff, string) in &self.terms {
            out.push_str(&format!("{coeff} {string}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn ops_round_trip_through_bits() {
        use PauliOp::*;
        for op in [I, X, Y, Z] {
            let (x, z) = op.xz();
            assert_eq!(PauliOp::from_xz(x, z), op);
            assert_eq!(PauliOp::from_char(op.as_char()), Some(op));
        }
    }

    #[test]
    fn string_accessors() {
        let s = ps("XYZI");
        assert_eq!(s.len(), 4);
        assert_eq!(s.op(0), PauliOp::X);
        assert_eq!(s.op(1), PauliOp::Y);
        assert_eq!(s.op(2), PauliOp::Z);
        assert_eq!(s.op(3), PauliOp::I);
        assert_eq!(s.weight(), 3);
        assert_eq!(s.to_string(), "XYZI");
        assert!(PauliString::identity(4).is_identity());
        assert_eq!(s.ops_at(&[2, 0]), vec![PauliOp::Z, PauliOp::X]);
    }

    #[test]
    fn strings_longer_than_one_word() {
        let word: String = "IXYZ".chars().cycle().take(70).collect();
        let s = ps(&word);
        assert_eq!(s.to_string(), word);
        assert_eq!(s.weight(), 70 - 70 / 4 - 1);
    }

    #[test]
    fn qubitwise_compatibility_examples() {
        assert!(ps("XI").qubitwise_compatible(&ps("XZ")));
        assert!(!ps("XX").qubitwise_compatible(&ps("YY")));
        assert!(ps("IIZ").qubitwise_compatible(&ps("ZZI")));
    }

    #[test]
    fn commutation_examples() {
        assert!(ps("XX").commutes_with(&ps("YY")));
        assert!(!ps("XI").commutes_with(&ps("ZI")));
        assert!(ps("XYZ").commutes_with(&ps("YXZ")));
    }

    #[test]
    fn compatibility_implies_commutation_exhaustively() {
        // All pairs up to three qubits.
        use PauliOp::*;
        let ops = [I, X, Y, Z];
        for n in 1..=3usize {
            let count = 4usize.pow(n as u32);
            let strings: Vec<PauliString> = (0..count)
                .map(|mut k| {
                    let mut v = Vec::with_capacity(n);
                    for _ in 0..n {
                        v.push(ops[k % 4]);
                        k /= 4;
                    }
                    PauliString::from_ops(&v)
                })
                .collect();
            for p in &strings {
                assert!(p.qubitwise_compatible(p));
                assert!(p.commutes_with(p));
                for q in &strings {
                    assert_eq!(p.qubitwise_compatible(q), q.qubitwise_compatible(p));
                    assert_eq!(p.commutes_with(q), q.commutes_with(p));
                    if p.qubitwise_compatible(q) {
                        assert!(p.commutes_with(q), "{p} vs {q}");
                    }
                }
            }
        }
    }

    #[test]
    #[should_panic(expected = "different lengths")]
    fn predicates_reject_length_mismatch() {
        ps("XI").commutes_with(&ps("X"));
    }

    #[test]
    fn product_phases() {
        // XY = iZ per qubit; phase accumulates mod 4.
        let (k, r) = ps("X").mul(&ps("Y"));
        assert_eq!((k, r.to_string().as_str()), (1, "Z"));
        let (k, r) = ps("Y").mul(&ps("X"));
        assert_eq!((k, r.to_string().as_str()), (3, "Z"));
        let (k, r) = ps("XX").mul(&ps("YY"));
        assert_eq!((k, r.to_string().as_str()), (2, "ZZ"));
        let (k, r) = ps("XYZ").mul(&ps("XYZ"));
        assert_eq!((k, r.to_string().as_str()), (0, "III"));
        let (k, r) = ps("IZ").mul(&ps("ZI"));
        assert_eq!((k, r.to_string().as_str()), (0, "ZZ"));
    }

    #[test]
    fn parse_plain_sum() {
        let obs = Observable::parse("1.0 XX\n1.0 YY\n1.0 ZZ\n").unwrap();
        assert_eq!(obs.qubit_count(), 2);
        assert_eq!(obs.num_terms(), 3);
        assert_eq!(obs.term(0), (1.0, &ps("XX")));
        assert_eq!(obs.term(2), (1.0, &ps("ZZ")));
    }

    #[test]
    fn parse_merges_duplicates() {
        let obs = Observable::parse("2.0 XI\n-1.0 XI\n").unwrap();
        assert_eq!(obs.num_terms(), 1);
        assert_eq!(obs.term(0), (1.0, &ps("XI")));
    }

    #[test]
    fn parse_comments_and_blanks() {
        let obs = Observable::parse("# heading\n0.5 XYZ\n\n0.5 IIZ # trailing\n").unwrap();
        assert_eq!(obs.qubit_count(), 3);
        assert_eq!(obs.num_terms(), 2);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(
            Observable::parse("abc XX\n"),
            Err(ParseError::InvalidCoefficient {
                line: 1,
                token: "abc".into()
            })
        );
        assert_eq!(
            Observable::parse("1.0 XX\n1.0 XYZ\n"),
            Err(ParseError::LengthMismatch {
                line: 2,
                found: 3,
                expected: 2
            })
        );
        assert_eq!(Observable::parse("# nothing\n"), Err(ParseError::Empty));
        assert_eq!(
            Observable::parse("1.0 XQ\n"),
            Err(ParseError::InvalidCharacter { line: 1, ch: 'Q' })
        );
        assert_eq!(Observable::parse("1.0\n"), Err(ParseError::MalformedLine { line: 1 }));
        assert_eq!(
            Observable::parse("inf XX\n"),
            Err(ParseError::InvalidCoefficient {
                line: 1,
                token: "inf".into()
            })
        );
    }

    #[test]
    fn text_round_trip() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.random_range(1..=8);
            let term_count = rng.random_range(1..=12);
            let mut terms = Vec::new();
            for _ in 0..term_count {
                let ops: Vec<PauliOp> = (0..n)
                    .map(|_| [PauliOp::I, PauliOp::X, PauliOp::Y, PauliOp::Z][rng.random_range(0..4)])
                    .collect();
                let coeff = rng.random_range(-3.0..3.0);
                terms.push((coeff, PauliString::from_ops(&ops)));
            }
            let obs = Observable::from_terms(terms);
            let round = Observable::parse(&obs.to_text()).unwrap();
            assert_eq!(round, obs);
        }
    }
}
