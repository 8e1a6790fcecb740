use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{gates, CMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> CMatrix {
        match self {
            Pauli::I => CMatrix::identity(2, 2),
            Pauli::X => gates::x(),
            Pauli::Y => gates::y(),
            Pauli::Z => gates::z(),
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// Whether this letter flips the basis state it acts on.
    pub fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }
}

/// Tensor product of single-qubit Paulis, one letter per qubit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::InvalidInput("empty Pauli string".into()));
        }
        Ok(Self { letters })
    }

    /// Identity on `n` qubits.
    pub fn identity(n: usize) -> Self {
        Self {
            letters: vec![Pauli::I; n],
        }
    }

    /// Single letter `p` on `qubit`, identity elsewhere.
    pub fn single(n: usize, qubit: usize, p: Pauli) -> Self {
        let mut letters = vec![Pauli::I; n];
        letters[qubit] = p;
        Self { letters }
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn identifier(&self) -> String {
        self.letters.iter().map(|p| p.letter()).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    pub fn is_diagonal(&self) -> bool {
        self.letters.iter().all(|&p| matches!(p, Pauli::I | Pauli::Z))
    }

    /// Appends identities, e.g. to extend a system observable over the environment.
    pub fn padded(&self, extra: usize) -> Self {
        let mut letters = self.letters.clone();
        letters.extend(std::iter::repeat_n(Pauli::I, extra));
        Self { letters }
    }

    /// Dense matrix, first letter on the most significant qubit.
    pub fn matrix(&self) -> CMatrix {
        self.letters
            .iter()
            .skip(1)
            .fold(self.letters[0].matrix(), |acc, p| acc.kronecker(&p.matrix()))
    }

    /// Bit mask of flipped qubits for basis indices over `self.len()` qubits.
    pub fn flip_mask(&self) -> usize {
        let n = self.letters.len();
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, p)| p.flips())
            .map(|(i, _)| 1usize << (n - 1 - i))
            .sum()
    }

    /// `P|b> = phase * |b ^ mask>` for a basis index `b`.
    pub fn apply_to_index(&self, b: usize) -> (usize, Complex64) {
        let n = self.letters.len();
        let mut phase = Complex64::new(1.0, 0.0);
        for (i, p) in self.letters.iter().enumerate() {
            let spin = if b & (1 << (n - 1 - i)) == 0 { 1.0 } else { -1.0 };
            phase *= letter_phase(*p, spin);
        }
        (b ^ self.flip_mask(), phase)
    }

    /// `P|s> = phase * |s'>` for spins (+1 ↔ bit 0). Only the first `len()` spins are read.
    pub fn phase_on_spins(&self, spins: &[i8]) -> Complex64 {
        let mut phase = Complex64::new(1.0, 0.0);
        for (p, &s) in self.letters.iter().zip(spins) {
            phase *= letter_phase(*p, s as f64);
        }
        phase
    }

    /// Symbolic commutation test: Paulis commute iff they anticommute on an even number of sites.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(a, b)| **a != Pauli::I && **b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }
}

/// `k` distinct non-identity Pauli strings on `n` qubits, drawn uniformly.
pub fn random_pauli_strings<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Vec<PauliString>> {
    if n == 0 {
        return Err(Error::InvalidInput("Pauli strings need at least one qubit".into()));
    }
    let available = 4f64.powi(n as i32) - 1.0;
    if k as f64 > available {
        return Err(Error::InvalidInput(format!("only {available} non-identity strings on {n} qubits, asked for {k}")));
    }
    const LETTERS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let mut out: Vec<PauliString> = Vec::with_capacity(k);
    while out.len() < k {
        let p = PauliString {
            letters: (0..n).map(|_| LETTERS[rng.random_range(0..4)]).collect(),
        };
        if !p.is_identity() && !out.contains(&p) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Phase picked up by a basis state with the given spin: `X -> 1`, `Y -> i*s`, `Z -> s`.
fn letter_phase(p: Pauli, spin: f64) -> Complex64 {
    match p {
        Pauli::I | Pauli::X => Complex64::new(1.0, 0.0),
        Pauli::Y => Complex64::new(0.0, spin),
        Pauli::Z => Complex64::new(spin, 0.0),
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .trim()
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Parse(format!("invalid Pauli letter '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        PauliString::new(letters)
    }
}

impl TryFrom<String> for PauliString {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PauliString> for String {
    fn from(p: PauliString) -> String {
        p.identifier()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.identifier())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        let p: PauliString = "xIzY".parse().unwrap();
        assert_eq!(p.identifier(), "XIZY");
        assert!("XQ".parse::<PauliString>().is_err());
        assert!("".parse::<PauliString>().is_err());
    }

    #[test]
    fn random_strings_are_distinct() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let all = random_pauli_strings(1, 3, &mut rng).unwrap();
        assert_eq!(all.len(), 3);
        assert!(all.iter().all(|p| !p.is_identity()));
        assert!(random_pauli_strings(1, 4, &mut rng).is_err());
        let many = random_pauli_strings(3, 20, &mut rng).unwrap();
        let ids: std::collections::HashSet<_> = many.iter().map(|p| p.identifier()).collect();
        assert_eq!(ids.len(), 20);
    }

    #[test]
    fn index_action_matches_dense_matrix() {
        for id in ["XYZ", "YYI", "ZIX", "IYZ", "XXX"] {
            let p: PauliString = id.parse().unwrap();
            let m = p.matrix();
            for b in 0..8 {
                let (b2, phase) = p.apply_to_index(b);
                for row in 0..8 {
                    let expected = if row == b2 { phase } else { Complex64::new(0.0, 0.0) };
                    assert!((m[(row, b)] - expected).norm() < 1e-15, "{id} col {b} row {row}");
                }
            }
        }
    }

    #[test]
    fn symbolic_commutation_matches_matrices() {
        let ids = ["XI", "ZI", "IZ", "XX", "ZZ", "YY", "XY", "YZ"];
        for a in ids {
            for b in ids {
                let pa: PauliString = a.parse().unwrap();
                let pb: PauliString = b.parse().unwrap();
                let comm = pa.matrix() * pb.matrix() - pb.matrix() * pa.matrix();
                let dense = comm.iter().all(|z| z.norm() < 1e-12);
                assert_eq!(pa.commutes_with(&pb), dense, "{a} {b}");
            }
        }
    }

    #[test]
    fn serde_as_string() {
        let p: PauliString = "XZ".parse().unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, "\"XZ\"");
        let back: PauliString = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }
}
