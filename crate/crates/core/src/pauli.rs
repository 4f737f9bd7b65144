//! Pauli strings and weighted Pauli sums.
//!
//! Qubit `q` is bit `q` of a computational-basis index (qubit 0 is the least
//! significant bit). In the text form of a string the leftmost letter belongs
//! to qubit 0, so `"XZ"` is `X` on qubit 0 and `Z` on qubit 1, whose matrix is
//! `Z ⊗ X` in the usual Kronecker ordering.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{CMatrix, C64};

/// Coefficients with magnitude below this are dropped by [`Observable::canonicalize`].
pub const DROP_TOLERANCE: f64 = 1e-12;

/// Imaginary parts below this count as zero in [`Observable::is_hermitian`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Largest register accepted by [`observable_to_matrix`] unless a cap is given.
///
/// A 12-qubit complex matrix is 256 MiB; 14 qubits would need 4 GiB before
/// any diagonalization workspace.
pub const DEFAULT_DENSE_QUBIT_CAP: usize = 12;

/// Largest register accepted by [`matrix_to_observable`] (4^q coefficients).
pub const MAX_DECOMPOSITION_QUBITS: usize = 10;

/// Strings are packed into two 64-bit masks.
pub const MAX_QUBITS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const XYZ: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// `i^k` for `k` taken mod 4.
pub fn i_pow(k: u32) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

/// A phase-free tensor product of single-qubit Paulis.
///
/// Stored as `i^{|x & z|} X^x Z^z`, so a qubit with both bits set is `Y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n_qubits: usize,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::input(format!(
                "{n_qubits} qubits exceeds the {MAX_QUBITS}-qubit string width"
            )));
        }
        Ok(Self {
            n_qubits,
            x: 0,
            z: 0,
        })
    }

    pub fn from_letters(letters: &[Pauli]) -> Result<Self> {
        let mut s = Self::identity(letters.len())?;
        for (q, &p) in letters.iter().enumerate() {
            s.set(q, p);
        }
        Ok(s)
    }

    /// A single Pauli `p` on qubit `q` of an `n_qubits` register.
    pub fn single(n_qubits: usize, q: usize, p: Pauli) -> Result<Self> {
        Self::from_sparse(n_qubits, &[(q, p)])
    }

    pub fn from_sparse(n_qubits: usize, letters: &[(usize, Pauli)]) -> Result<Self> {
        let mut s = Self::identity(n_qubits)?;
        for &(q, p) in letters {
            if q >= n_qubits {
                return Err(Error::input(format!(
                    "qubit {q} out of range for {n_qubits} qubits"
                )));
            }
            s.set(q, p);
        }
        Ok(s)
    }

    pub(crate) fn from_masks(n_qubits: usize, x: u64, z: u64) -> Self {
        Self { n_qubits, x, z }
    }

    fn set(&mut self, q: usize, p: Pauli) {
        let bit = 1u64 << q;
        let (xb, zb) = p.bits();
        self.x = if xb { self.x | bit } else { self.x & !bit };
        self.z = if zb { self.z | bit } else { self.z & !bit };
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn letter(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1)
    }

    pub fn letters(&self) -> Vec<Pauli> {
        (0..self.n_qubits).map(|q| self.letter(q)).collect()
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Qubits on which the string acts non-trivially.
    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    /// Power of `i` carried by the `Y` letters.
    pub(crate) fn y_phase(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Applies the string to basis state `|j⟩`: returns `(j', phase)` with
    /// `P|j⟩ = phase·|j'⟩`.
    #[inline]
    pub fn act(&self, j: usize) -> (usize, C64) {
        let sign = ((self.z & j as u64).count_ones() & 1) * 2;
        (j ^ self.x as usize, i_pow(self.y_phase() + sign))
    }

    /// Operator product `self · other = phase · product`.
    pub fn multiply(&self, other: &PauliString) -> Result<(C64, PauliString)> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::input(format!(
                "cannot multiply {}-qubit and {}-qubit strings",
                self.n_qubits, other.n_qubits
            )));
        }
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        // X^a Z^b X^c Z^d = (-1)^{b·c} X^{a+c} Z^{b+d}
        let k = self.y_phase() + other.y_phase() + 2 * (self.z & other.x).count_ones() + 4
            - ((x & z).count_ones() % 4);
        Ok((
            i_pow(k),
            PauliString {
                n_qubits: self.n_qubits,
                x,
                z,
            },
        ))
    }

    /// Re-indexes the string into a larger register; qubit `q` moves to `map[q]`.
    pub fn embed(&self, n_total: usize, map: &[usize]) -> Result<PauliString> {
        if map.len() != self.n_qubits {
            return Err(Error::input(format!(
                "qubit map has {} entries for a {}-qubit string",
                map.len(),
                self.n_qubits
            )));
        }
        let letters: Vec<(usize, Pauli)> = (0..self.n_qubits)
            .filter(|&q| self.letter(q) != Pauli::I)
            .map(|q| (map[q], self.letter(q)))
            .collect();
        PauliString::from_sparse(n_total, &letters)
    }

    /// Dense `2^n × 2^n` matrix of the string.
    pub fn to_matrix(&self) -> CMatrix {
        let dim = 1usize << self.n_qubits;
        let mut m = CMatrix::zeros(dim, dim);
        for j in 0..dim {
            let (k, ph) = self.act(j);
            m[(k, j)] = ph;
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n_qubits {
            write!(f, "{}", self.letter(q).to_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .trim()
            .chars()
            .map(|c| {
                Pauli::from_char(c.to_ascii_uppercase())
                    .ok_or_else(|| Error::input(format!("bad Pauli letter {c:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        PauliString::from_letters(&letters)
    }
}

/// A weighted sum of Pauli strings on a fixed register.
///
/// In JSON it is `{"n_qubits": n, "terms": [[re, im, "LETTERS"], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ObservableRepr", try_from = "ObservableRepr")]
pub struct Observable {
    n_qubits: usize,
    terms: Vec<(C64, PauliString)>,
}

impl Observable {
    /// The zero operator.
    pub fn zero(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: Vec::new(),
        }
    }

    pub fn scalar(n_qubits: usize, c: C64) -> Result<Self> {
        let mut o = Self::zero(n_qubits);
        o.push(c, PauliString::identity(n_qubits)?)?;
        Ok(o)
    }

    pub fn identity(n_qubits: usize) -> Result<Self> {
        Self::scalar(n_qubits, C64::new(1.0, 0.0))
    }

    pub fn from_terms(
        n_qubits: usize,
        terms: impl IntoIterator<Item = (C64, PauliString)>,
    ) -> Result<Self> {
        let mut o = Self::zero(n_qubits);
        for (c, s) in terms {
            o.push(c, s)?;
        }
        Ok(o)
    }

    /// A single Pauli on one qubit with unit weight.
    pub fn single(n_qubits: usize, q: usize, p: Pauli) -> Result<Self> {
        Self::from_terms(
            n_qubits,
            [(C64::new(1.0, 0.0), PauliString::single(n_qubits, q, p)?)],
        )
    }

    pub fn push(&mut self, c: C64, s: PauliString) -> Result<()> {
        if s.n_qubits() != self.n_qubits {
            return Err(Error::input(format!(
                "{}-qubit string added to a {}-qubit observable",
                s.n_qubits(),
                self.n_qubits
            )));
        }
        self.terms.push((c, s));
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(C64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Combines like strings, drops negligible coefficients and sorts terms.
    pub fn canonicalize(&mut self) {
        let mut acc: BTreeMap<(u64, u64), C64> = BTreeMap::new();
        for (c, s) in &self.terms {
            *acc.entry((s.x, s.z)).or_default() += c;
        }
        let n = self.n_qubits;
        self.terms = acc
            .into_iter()
            .filter(|(_, c)| c.norm() >= DROP_TOLERANCE)
            .map(|((x, z), c)| (c, PauliString::from_masks(n, x, z)))
            .collect();
    }

    pub fn canonical(mut self) -> Self {
        self.canonicalize();
        self
    }

    pub fn is_hermitian(&self) -> bool {
        self.clone()
            .canonical()
            .terms
            .iter()
            .all(|(c, _)| c.im.abs() <= HERMITIAN_TOLERANCE)
    }

    pub fn adjoint(&self) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(c, s)| (c.conj(), *s)).collect(),
        }
    }

    pub fn scaled(&self, f: C64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(c, s)| (c * f, *s)).collect(),
        }
    }

    pub fn sum(&self, other: &Observable) -> Result<Observable> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::input("observable size mismatch in sum"));
        }
        let mut out = self.clone();
        out.terms.extend_from_slice(&other.terms);
        Ok(out.canonical())
    }

    /// Sum of coefficient magnitudes; an upper bound on the spectral norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.norm()).sum()
    }

    /// Coefficient of the identity string after canonicalization.
    pub fn identity_coefficient(&self) -> C64 {
        self.terms
            .iter()
            .filter(|(_, s)| s.is_identity())
            .map(|(c, _)| *c)
            .sum()
    }

    /// Bitmask of qubits touched by any term.
    pub fn support(&self) -> u64 {
        self.terms.iter().fold(0, |m, (_, s)| m | s.support())
    }

    /// Re-indexes into an `n_total`-qubit register; local qubit `q` becomes `map[q]`.
    pub fn embed(&self, n_total: usize, map: &[usize]) -> Result<Observable> {
        let terms = self
            .terms
            .iter()
            .map(|(c, s)| Ok((*c, s.embed(n_total, map)?)))
            .collect::<Result<Vec<_>>>()?;
        Observable::from_terms(n_total, terms)
    }

    /// Serializes one term per line as `re im LETTERS`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (c, s) in &self.terms {
            out.push_str(&format!("{:?} {:?} {}\n", c.re, c.im, s));
        }
        out
    }

    /// Parses the format written by [`Observable::to_text`]. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn parse_text(text: &str) -> Result<Observable> {
        let mut n_qubits = None;
        let mut terms = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::input(format!(
                    "line {}: expected `re im letters`, got {line:?}",
                    lineno + 1
                )));
            }
            let parse = |f: &str| {
                f.parse::<f64>()
                    .map_err(|e| Error::input(format!("line {}: {e}", lineno + 1)))
            };
            let c = C64::new(parse(fields[0])?, parse(fields[1])?);
            let s: PauliString = fields[2].parse()?;
            match n_qubits {
                None => n_qubits = Some(s.n_qubits()),
                Some(n) if n != s.n_qubits() => {
                    return Err(Error::input(format!(
                        "line {}: string length {} differs from {n}",
                        lineno + 1,
                        s.n_qubits()
                    )))
                }
                _ => {}
            }
            terms.push((c, s));
        }
        let n = n_qubits.ok_or_else(|| Error::input("observable text has no terms"))?;
        Observable::from_terms(n, terms)
    }
}

#[derive(Serialize, Deserialize)]
struct ObservableRepr {
    n_qubits: usize,
    terms: Vec<(f64, f64, String)>,
}

impl From<Observable> for ObservableRepr {
    fn from(o: Observable) -> Self {
        Self {
            n_qubits: o.n_qubits,
            terms: o
                .terms
                .iter()
                .map(|(c, s)| (c.re, c.im, s.to_string()))
                .collect(),
        }
    }
}

impl TryFrom<ObservableRepr> for Observable {
    type Error = Error;

    fn try_from(r: ObservableRepr) -> Result<Self> {
        let terms = r
            .terms
            .iter()
            .map(|(re, im, letters)| Ok((C64::new(*re, *im), letters.parse::<PauliString>()?)))
            .collect::<Result<Vec<_>>>()?;
        Observable::from_terms(r.n_qubits, terms)
    }
}

/// Product `a·b` of two observables, canonicalized.
pub fn observable_product(a: &Observable, b: &Observable) -> Result<Observable> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::input(format!(
            "cannot multiply {}-qubit and {}-qubit observables",
            a.n_qubits, b.n_qubits
        )));
    }
    let mut out = Observable::zero(a.n_qubits);
    for (ca, sa) in &a.terms {
        for (cb, sb) in &b.terms {
            let (ph, s) = sa.multiply(sb)?;
            out.terms.push((ca * cb * ph, s));
        }
    }
    Ok(out.canonical())
}

/// Tensor product of an observable on qubits `0..a.n` with one on the next
/// `b.n` qubits.
pub fn observable_kron(a: &Observable, b: &Observable) -> Result<Observable> {
    let n = a.n_qubits + b.n_qubits;
    let left: Vec<usize> = (0..a.n_qubits).collect();
    let right: Vec<usize> = (a.n_qubits..n).collect();
    observable_product(&a.embed(n, &left)?, &b.embed(n, &right)?)
}

fn log2_dim(dim: usize) -> Option<usize> {
    (dim.is_power_of_two()).then(|| dim.trailing_zeros() as usize)
}

/// Pauli decomposition `c_P = Tr(P† M) / 2^q` over all `4^q` strings.
pub fn matrix_to_observable(m: &CMatrix) -> Result<Observable> {
    if m.nrows() != m.ncols() {
        return Err(Error::input(format!(
            "matrix is {}×{}, not square",
            m.nrows(),
            m.ncols()
        )));
    }
    let dim = m.nrows();
    let q = log2_dim(dim)
        .ok_or_else(|| Error::input(format!("dimension {dim} is not a power of two")))?;
    if q > MAX_DECOMPOSITION_QUBITS {
        return Err(Error::resource(format!(
            "{q}-qubit decomposition exceeds the {MAX_DECOMPOSITION_QUBITS}-qubit cap"
        )));
    }
    let norm = 1.0 / dim as f64;
    let mut out = Observable::zero(q);
    let mut f = vec![C64::default(); dim];
    for x in 0..dim {
        // f(j) = M[j^x, j]; the z-sum is a Walsh-Hadamard transform of f.
        for (j, fj) in f.iter_mut().enumerate() {
            *fj = m[(j ^ x, j)];
        }
        walsh_hadamard(&mut f);
        for (z, fz) in f.iter().enumerate() {
            if fz.norm() * norm < DROP_TOLERANCE {
                continue;
            }
            let ph = i_pow(((x & z) as u64).count_ones()).conj();
            out.terms.push((
                ph * fz * norm,
                PauliString::from_masks(q, x as u64, z as u64),
            ));
        }
    }
    Ok(out.canonical())
}

fn walsh_hadamard(f: &mut [C64]) {
    let mut h = 1;
    while h < f.len() {
        for block in f.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (s, d) = (*a + *b, *a - *b);
                *a = s;
                *b = d;
            }
        }
        h *= 2;
    }
}

/// Dense matrix of an observable, refusing registers above `cap` qubits.
pub fn observable_to_matrix_capped(o: &Observable, cap: usize) -> Result<CMatrix> {
    if o.n_qubits > cap {
        return Err(Error::resource(format!(
            "{}-qubit dense matrix exceeds the {cap}-qubit cap",
            o.n_qubits
        )));
    }
    let dim = 1usize << o.n_qubits;
    let mut m = CMatrix::zeros(dim, dim);
    for (c, s) in &o.terms {
        for j in 0..dim {
            let (k, ph) = s.act(j);
            m[(k, j)] += c * ph;
        }
    }
    Ok(m)
}

pub fn observable_to_matrix(o: &Observable) -> Result<CMatrix> {
    observable_to_matrix_capped(o, DEFAULT_DENSE_QUBIT_CAP)
}
