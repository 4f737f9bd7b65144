//! Dense statevector simulation.
//!
//! Amplitude index bit `q` is qubit `q`. Gate kernels work in place over the
//! index pairs (or groups) that differ only in the target bits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_eigen, norm_sqr, vdot};
use crate::pauli::{i_pow, Observable};
use crate::{CMatrix, C64};

/// Largest register a [`Statevector`] may be allocated for (2^26 amplitudes = 1 GiB).
pub const DEFAULT_STATE_QUBIT_CAP: usize = 26;

pub const NORM_TOLERANCE: f64 = 1e-10;

/// Read access to a vector of `2^n` amplitudes.
pub trait Amplitudes {
    fn n_qubits(&self) -> usize;
    fn amplitudes(&self) -> &[C64];
}

/// A normalized pure state. In JSON it is `{"re": [...], "im": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "StateRepr", try_from = "StateRepr")]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
struct StateRepr(#[serde(with = "linalg::vector_json")] Vec<C64>);

impl From<Statevector> for StateRepr {
    fn from(s: Statevector) -> Self {
        StateRepr(s.amps)
    }
}

impl TryFrom<StateRepr> for Statevector {
    type Error = Error;

    fn try_from(r: StateRepr) -> Result<Self> {
        Statevector::from_amplitudes(r.0)
    }
}

/// The unnormalized result of applying an operator to a state.
#[derive(Debug, Clone, PartialEq)]
pub struct RawVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl Amplitudes for Statevector {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }
    fn amplitudes(&self) -> &[C64] {
        &self.amps
    }
}

impl Amplitudes for RawVector {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }
    fn amplitudes(&self) -> &[C64] {
        &self.amps
    }
}

fn check_cap(n_qubits: usize) -> Result<()> {
    if n_qubits > DEFAULT_STATE_QUBIT_CAP {
        return Err(Error::resource(format!(
            "{n_qubits}-qubit statevector exceeds the {DEFAULT_STATE_QUBIT_CAP}-qubit cap"
        )));
    }
    Ok(())
}

impl Statevector {
    /// `|0…0⟩`.
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        Self::basis_state(n_qubits, 0)
    }

    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        check_cap(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::input(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        let mut amps = vec![C64::default(); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// Wraps amplitudes that must already be normalized to [`NORM_TOLERANCE`].
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let n_qubits = qubits_for_len(amps.len())?;
        check_cap(n_qubits)?;
        let norm = norm_sqr(&amps).sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::input(format!("state norm {norm} is not 1")));
        }
        Ok(Self { n_qubits, amps })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalize(amps: Vec<C64>) -> Result<Self> {
        let n_qubits = qubits_for_len(amps.len())?;
        check_cap(n_qubits)?;
        let norm = norm_sqr(&amps).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::input("cannot normalize a zero or non-finite vector"));
        }
        let inv = 1.0 / norm;
        Ok(Self {
            n_qubits,
            amps: amps.into_iter().map(|z| z * inv).collect(),
        })
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amps).sqrt()
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    /// Applies a gate in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.n_qubits)?;
        gate.apply_unchecked(&mut self.amps);
        Ok(())
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    /// Tensor product `self ⊗ other` with `self` on the low qubits.
    pub fn tensor(&self, other: &Statevector) -> Result<Statevector> {
        let n = self.n_qubits + other.n_qubits;
        check_cap(n)?;
        let mut amps = Vec::with_capacity(1 << n);
        for b in &other.amps {
            for a in &self.amps {
                amps.push(a * b);
            }
        }
        Ok(Statevector { n_qubits: n, amps })
    }
}

impl RawVector {
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let n_qubits = qubits_for_len(amps.len())?;
        Ok(Self { n_qubits, amps })
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amps).sqrt()
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }
}

fn qubits_for_len(len: usize) -> Result<usize> {
    if !len.is_power_of_two() {
        return Err(Error::input(format!(
            "{len} amplitudes is not a power of two"
        )));
    }
    Ok(len.trailing_zeros() as usize)
}

/// A unitary acting on a few qubits.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    /// `Rz(α)·Ry(β)·Rz(γ)` with `angles = [α, β, γ]`.
    SingleQubit { target: usize, angles: [f64; 3] },
    /// `exp(−iθ(XX + YY + ZZ))` on the two targets.
    HeisenbergPair { targets: (usize, usize), theta: f64 },
    /// An explicit unitary; basis index bit `b` of the matrix is `targets[b]`.
    DenseBlock { targets: Vec<usize>, matrix: CMatrix },
}

impl Gate {
    fn targets(&self) -> Vec<usize> {
        match self {
            Gate::SingleQubit { target, .. } => vec![*target],
            Gate::HeisenbergPair { targets, .. } => vec![targets.0, targets.1],
            Gate::DenseBlock { targets, .. } => targets.clone(),
        }
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        let targets = self.targets();
        check_targets(&targets, n_qubits)?;
        if let Gate::DenseBlock { matrix, targets } = self {
            let dim = 1usize << targets.len();
            if matrix.nrows() != dim || matrix.ncols() != dim {
                return Err(Error::input(format!(
                    "{}×{} block for {} targets",
                    matrix.nrows(),
                    matrix.ncols(),
                    targets.len()
                )));
            }
            let err = linalg::unitarity_error(matrix);
            if err > 1e-10 {
                return Err(Error::input(format!("dense block is not unitary ({err:.2e})")));
            }
        }
        Ok(())
    }

    pub(crate) fn apply_unchecked(&self, amps: &mut [C64]) {
        match self {
            Gate::SingleQubit { target, angles } => {
                apply_single(amps, *target, &euler_matrix(*angles))
            }
            Gate::HeisenbergPair { targets, theta } => {
                apply_exchange(amps, targets.0, targets.1, *theta)
            }
            Gate::DenseBlock { targets, matrix } => apply_dense(amps, targets, matrix),
        }
    }
}

pub(crate) fn check_targets(targets: &[usize], n_qubits: usize) -> Result<()> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= n_qubits {
            return Err(Error::input(format!(
                "target {t} out of range for {n_qubits} qubits"
            )));
        }
        if targets[..i].contains(&t) {
            return Err(Error::input(format!("repeated target {t}")));
        }
    }
    Ok(())
}

/// Applies a gate to a copy of `state`.
pub fn apply_gate(state: &Statevector, gate: &Gate) -> Result<Statevector> {
    let mut out = state.clone();
    out.apply(gate)?;
    Ok(out)
}

pub(crate) fn rz(theta: f64) -> [[C64; 2]; 2] {
    let h = theta / 2.0;
    [
        [C64::from_polar(1.0, -h), C64::default()],
        [C64::default(), C64::from_polar(1.0, h)],
    ]
}

pub(crate) fn ry(theta: f64) -> [[C64; 2]; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [C64::new(c, 0.0), C64::new(-s, 0.0)],
        [C64::new(s, 0.0), C64::new(c, 0.0)],
    ]
}

fn mul2(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> [[C64; 2]; 2] {
    let mut out = [[C64::default(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub(crate) fn euler_matrix([alpha, beta, gamma]: [f64; 3]) -> [[C64; 2]; 2] {
    mul2(&rz(alpha), &mul2(&ry(beta), &rz(gamma)))
}

pub(crate) fn apply_single(amps: &mut [C64], target: usize, m: &[[C64; 2]; 2]) {
    let stride = 1usize << target;
    for block in amps.chunks_mut(2 * stride) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = m[0][0] * x + m[0][1] * y;
            *b = m[1][0] * x + m[1][1] * y;
        }
    }
}

/// Calls `f(base)` for every index whose bits at `sorted_targets` are zero.
#[inline]
fn for_each_base(n_free: usize, sorted_targets: &[usize], mut f: impl FnMut(usize)) {
    for i in 0..(1usize << n_free) {
        let mut base = i;
        for &t in sorted_targets {
            base = ((base >> t) << (t + 1)) | (base & ((1 << t) - 1));
        }
        f(base);
    }
}

fn n_qubits_of(amps: &[C64]) -> usize {
    amps.len().trailing_zeros() as usize
}

pub(crate) fn apply_exchange(amps: &mut [C64], a: usize, b: usize, theta: f64) {
    let n = n_qubits_of(amps);
    let (ma, mb) = (1usize << a, 1usize << b);
    let diag = C64::from_polar(1.0, -theta);
    let outer = C64::from_polar(1.0, theta);
    let (s, c) = (2.0 * theta).sin_cos();
    let cc = outer * c;
    let ms = outer * C64::new(0.0, -s);
    let mut sorted = [a.min(b), a.max(b)];
    sorted.sort_unstable();
    for_each_base(n - 2, &sorted, |base| {
        amps[base] *= diag;
        amps[base | ma | mb] *= diag;
        let (u, v) = (amps[base | ma], amps[base | mb]);
        amps[base | ma] = cc * u + ms * v;
        amps[base | mb] = ms * u + cc * v;
    });
}

/// Indices where the block differs from the identity.
fn active_indices(m: &CMatrix, reference_identity: bool) -> Vec<usize> {
    let d = m.nrows();
    (0..d)
        .filter(|&i| {
            (0..d).any(|j| {
                let expect = if reference_identity && i == j {
                    C64::new(1.0, 0.0)
                } else {
                    C64::default()
                };
                m[(i, j)] != expect || m[(j, i)] != expect
            })
        })
        .collect()
}

fn block_offsets(targets: &[usize]) -> Vec<usize> {
    (0..1usize << targets.len())
        .map(|a| {
            targets
                .iter()
                .enumerate()
                .filter(|(b, _)| a >> b & 1 == 1)
                .map(|(_, &t)| 1usize << t)
                .sum()
        })
        .collect()
}

/// Dense block application restricted to the rows where the unitary is not
/// the identity; groups whose active amplitudes are all zero are skipped.
pub(crate) fn apply_dense(amps: &mut [C64], targets: &[usize], m: &CMatrix) {
    let active = active_indices(m, true);
    if active.is_empty() {
        return;
    }
    let n = n_qubits_of(amps);
    let offsets = block_offsets(targets);
    let act_off: Vec<usize> = active.iter().map(|&a| offsets[a]).collect();
    let sub: Vec<C64> = active
        .iter()
        .flat_map(|&i| active.iter().map(move |&j| (i, j)))
        .map(|(i, j)| m[(i, j)])
        .collect();
    let k = active.len();
    let mut sorted = targets.to_vec();
    sorted.sort_unstable();
    let mut gathered = vec![C64::default(); k];
    for_each_base(n - targets.len(), &sorted, |base| {
        let mut any = false;
        for (g, &o) in gathered.iter_mut().zip(&act_off) {
            *g = amps[base + o];
            any |= *g != C64::default();
        }
        if !any {
            return;
        }
        for (r, &o) in act_off.iter().enumerate() {
            let row = &sub[r * k..(r + 1) * k];
            amps[base + o] = row.iter().zip(&gathered).map(|(x, y)| x * y).sum();
        }
    });
}

/// A linear operator that can act on raw amplitude vectors.
pub trait Operator: Sync {
    fn n_qubits(&self) -> usize;

    /// Writes `O·input` into `out`.
    fn apply_into(&self, input: &[C64], out: &mut [C64]);

    /// `⟨ψ|O|ψ⟩` without normalization.
    fn expectation_value(&self, amps: &[C64]) -> C64;

    fn is_hermitian(&self) -> bool;

    fn apply_to(&self, input: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::default(); input.len()];
        self.apply_into(input, &mut out);
        out
    }
}

impl Operator for Observable {
    fn n_qubits(&self) -> usize {
        Observable::n_qubits(self)
    }

    fn is_hermitian(&self) -> bool {
        Observable::is_hermitian(self)
    }

    fn apply_into(&self, input: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|z| *z = C64::default());
        for (c, s) in self.terms() {
            let x = s.x_mask() as usize;
            let z = s.z_mask();
            let plus = c * i_pow(s.y_phase());
            let minus = -plus;
            for (j, amp) in input.iter().enumerate() {
                let f = if (z & j as u64).count_ones() & 1 == 1 {
                    minus
                } else {
                    plus
                };
                out[j ^ x] += f * amp;
            }
        }
    }

    fn expectation_value(&self, amps: &[C64]) -> C64 {
        let mut total = C64::default();
        for (c, s) in self.terms() {
            let x = s.x_mask() as usize;
            let z = s.z_mask();
            let mut acc = C64::default();
            for (j, amp) in amps.iter().enumerate() {
                let t = amps[j ^ x].conj() * amp;
                if (z & j as u64).count_ones() & 1 == 1 {
                    acc -= t;
                } else {
                    acc += t;
                }
            }
            total += c * i_pow(s.y_phase()) * acc;
        }
        total
    }
}

fn check_size(o_qubits: usize, v_qubits: usize) -> Result<()> {
    if o_qubits != v_qubits {
        return Err(Error::input(format!(
            "{o_qubits}-qubit operator on a {v_qubits}-qubit vector"
        )));
    }
    Ok(())
}

/// `⟨ψ|O|ψ⟩` for a Hermitian observable.
pub fn expectation(state: &Statevector, o: &Observable) -> Result<f64> {
    check_size(o.n_qubits(), state.n_qubits)?;
    if !o.is_hermitian() {
        return Err(Error::input("expectation of a non-Hermitian observable"));
    }
    Ok(o.expectation_value(&state.amps).re)
}

/// `⟨bra|O|ket⟩`.
pub fn transition_element(
    bra: &impl Amplitudes,
    o: &dyn Operator,
    ket: &impl Amplitudes,
) -> Result<C64> {
    check_size(o.n_qubits(), bra.n_qubits())?;
    check_size(o.n_qubits(), ket.n_qubits())?;
    let applied = o.apply_to(ket.amplitudes());
    Ok(vdot(bra.amplitudes(), &applied))
}

/// `O|ψ⟩`, unnormalized.
pub fn apply_observable(state: &impl Amplitudes, o: &dyn Operator) -> Result<RawVector> {
    check_size(o.n_qubits(), state.n_qubits())?;
    Ok(RawVector {
        n_qubits: state.n_qubits(),
        amps: o.apply_to(state.amplitudes()),
    })
}

/// A Hermitian matrix kept in eigendecomposed form so that `exp(−iθA)` is
/// cheap to rebuild for many angles.
#[derive(Debug, Clone)]
pub struct HermitianGenerator {
    matrix: CMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
}

impl HermitianGenerator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let err = linalg::hermiticity_error(&matrix);
        if err > 1e-10 {
            return Err(Error::input(format!(
                "generator is not Hermitian ({err:.2e})"
            )));
        }
        let (eigenvalues, eigenvectors) = hermitian_eigen(&matrix)?;
        Ok(Self {
            matrix,
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    /// `exp(−iθA)`.
    pub fn unitary(&self, theta: f64) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let ph = C64::from_polar(1.0, -theta * lambda);
            scaled.column_mut(j).iter_mut().for_each(|z| *z *= ph);
        }
        let mut u = scaled * v.adjoint();
        restore_identity_rows(&self.matrix, &mut u);
        u
    }
}

/// Rows and columns where the generator vanishes are exactly the identity in
/// its exponential.
fn restore_identity_rows(generator: &CMatrix, u: &mut CMatrix) {
    let d = generator.nrows();
    for i in 0..d {
        let zero = (0..d).all(|j| {
            generator[(i, j)] == C64::default() && generator[(j, i)] == C64::default()
        });
        if zero {
            for j in 0..d {
                u[(i, j)] = C64::default();
                u[(j, i)] = C64::default();
            }
            u[(i, i)] = C64::new(1.0, 0.0);
        }
    }
}

/// `exp(−iθA)` for Hermitian `A`, through its eigendecomposition.
pub fn expm_hermitian(a: &CMatrix, theta: f64) -> Result<CMatrix> {
    Ok(HermitianGenerator::new(a.clone())?.unitary(theta))
}

/// A sum of dense Hermitian blocks, each acting on a list of qubits, plus a
/// constant.
///
/// This is the same operator as the Pauli expansion of the blocks but is
/// evaluated with one gather/scatter per block instead of one pass per Pauli
/// term.
#[derive(Debug, Clone)]
pub struct BlockOperator {
    n_qubits: usize,
    blocks: Vec<DenseTerm>,
    constant: f64,
}

#[derive(Debug, Clone)]
struct DenseTerm {
    sorted_targets: Vec<usize>,
    offsets: Vec<usize>,
    active: Vec<usize>,
    sub: Vec<C64>,
}

impl BlockOperator {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            blocks: Vec::new(),
            constant: 0.0,
        }
    }

    /// Adds a block; basis index bit `b` of `matrix` is qubit `targets[b]`.
    pub fn push(&mut self, targets: &[usize], matrix: &CMatrix) -> Result<()> {
        check_targets(targets, self.n_qubits)?;
        let dim = 1usize << targets.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::input("block dimension does not match its targets"));
        }
        let err = linalg::hermiticity_error(matrix);
        if err > 1e-10 {
            return Err(Error::input(format!("block is not Hermitian ({err:.2e})")));
        }
        let offsets = block_offsets(targets);
        let active = active_indices(matrix, false);
        let sub = active
            .iter()
            .flat_map(|&i| active.iter().map(move |&j| (i, j)))
            .map(|(i, j)| matrix[(i, j)])
            .collect();
        let mut sorted_targets = targets.to_vec();
        sorted_targets.sort_unstable();
        self.blocks.push(DenseTerm {
            sorted_targets,
            offsets,
            active,
            sub,
        });
        Ok(())
    }

    /// Adds `c·I`.
    pub fn add_constant(&mut self, c: f64) {
        self.constant += c;
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }
}

impl Operator for BlockOperator {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn is_hermitian(&self) -> bool {
        true
    }

    fn apply_into(&self, input: &[C64], out: &mut [C64]) {
        for (o, i) in out.iter_mut().zip(input) {
            *o = i * self.constant;
        }
        let n = self.n_qubits;
        for b in &self.blocks {
            let k = b.active.len();
            if k == 0 {
                continue;
            }
            let act_off: Vec<usize> = b.active.iter().map(|&a| b.offsets[a]).collect();
            let mut gathered = vec![C64::default(); k];
            for_each_base(n - b.sorted_targets.len(), &b.sorted_targets, |base| {
                let mut any = false;
                for (g, &o) in gathered.iter_mut().zip(&act_off) {
                    *g = input[base + o];
                    any |= *g != C64::default();
                }
                if !any {
                    return;
                }
                for (r, &o) in act_off.iter().enumerate() {
                    let row = &b.sub[r * k..(r + 1) * k];
                    out[base + o] += row
                        .iter()
                        .zip(&gathered)
                        .map(|(x, y)| x * y)
                        .sum::<C64>();
                }
            });
        }
    }

    fn expectation_value(&self, amps: &[C64]) -> C64 {
        let mut total = C64::new(self.constant * norm_sqr(amps), 0.0);
        let n = self.n_qubits;
        for b in &self.blocks {
            let k = b.active.len();
            if k == 0 {
                continue;
            }
            let act_off: Vec<usize> = b.active.iter().map(|&a| b.offsets[a]).collect();
            let mut gathered = vec![C64::default(); k];
            for_each_base(n - b.sorted_targets.len(), &b.sorted_targets, |base| {
                let mut any = false;
                for (g, &o) in gathered.iter_mut().zip(&act_off) {
                    *g = amps[base + o];
                    any |= *g != C64::default();
                }
                if !any {
                    return;
                }
                for (r, g) in gathered.iter().enumerate() {
                    let row = &b.sub[r * k..(r + 1) * k];
                    let hv: C64 = row.iter().zip(&gathered).map(|(x, y)| x * y).sum();
                    total += g.conj() * hv;
                }
            });
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> C64 {
        C64::new(1.0, 0.0)
    }
    use crate::pauli::{observable_to_matrix, Pauli, PauliString};
    use nalgebra::DVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_state(n: usize, rng: &mut ChaCha8Rng) -> Statevector {
        let amps = (0..1 << n)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Statevector::normalize(amps).unwrap()
    }

    fn heisenberg2() -> Observable {
        Observable::from_terms(
            2,
            ["XX", "YY", "ZZ"]
                .iter()
                .map(|s| (one(), s.parse::<PauliString>().unwrap())),
        )
        .unwrap()
    }

    fn dense_vec(s: &impl Amplitudes) -> DVector<C64> {
        DVector::from_column_slice(s.amplitudes())
    }

    /// Full-register matrix of a gate built from its single/two-qubit action
    /// on every basis vector.
    fn full_matrix(gate: &Gate, n: usize) -> CMatrix {
        let dim = 1 << n;
        let mut m = CMatrix::zeros(dim, dim);
        for j in 0..dim {
            let mut s = Statevector::basis_state(n, j).unwrap();
            gate.apply_unchecked(s.amplitudes_mut());
            m.set_column(j, &dense_vec(&s));
        }
        m
    }

    #[test]
    fn identity_gates_leave_state_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_state(3, &mut rng);
        let g1 = Gate::SingleQubit {
            target: 1,
            angles: [0.0; 3],
        };
        let g2 = Gate::HeisenbergPair {
            targets: (0, 2),
            theta: 0.0,
        };
        for g in [g1, g2] {
            let out = apply_gate(&s, &g).unwrap();
            let d = dense_vec(&out) - dense_vec(&s);
            assert!(d.norm() < 1e-15);
        }
    }

    #[test]
    fn exchange_gate_matches_eigendecomposition_expm() {
        let theta = std::f64::consts::FRAC_PI_4;
        let h = observable_to_matrix(&heisenberg2()).unwrap();
        let u = expm_hermitian(&h, theta).unwrap();
        // |01⟩: qubit 0 = 1, qubit 1 = 0 → index 1.
        let s = Statevector::basis_state(2, 1).unwrap();
        let out = apply_gate(
            &s,
            &Gate::HeisenbergPair {
                targets: (0, 1),
                theta,
            },
        )
        .unwrap();
        let expected = &u * dense_vec(&s);
        assert!((dense_vec(&out) - expected).norm() < 1e-12);
    }

    #[test]
    fn gates_agree_with_dense_kron_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 4;
        let eye = CMatrix::identity(2, 2);
        let angles = [0.3, -1.1, 0.7];
        let m = euler_matrix(angles);
        let single = CMatrix::from_fn(2, 2, |i, j| m[i][j]);
        // qubit 2 of 4: I ⊗ U ⊗ I ⊗ I in big-endian Kronecker order.
        let expected = eye.kronecker(&single).kronecker(&eye).kronecker(&eye);
        let g = Gate::SingleQubit { target: 2, angles };
        assert!(linalg::max_abs(&(full_matrix(&g, n) - expected)) < 1e-13);

        let s = random_state(n, &mut rng);
        let pair = Gate::HeisenbergPair {
            targets: (3, 1),
            theta: 0.37,
        };
        let h = observable_to_matrix(&heisenberg2().embed(n, &[3, 1]).unwrap()).unwrap();
        let u = expm_hermitian(&h, 0.37).unwrap();
        let out = apply_gate(&s, &pair).unwrap();
        assert!((dense_vec(&out) - u * dense_vec(&s)).norm() < 1e-12);
    }

    #[test]
    fn dense_block_respects_target_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 3;
        let s = random_state(n, &mut rng);
        let mut ob = Observable::single(2, 0, Pauli::X).unwrap();
        ob.push(c(0.4, 0.0), "ZY".parse().unwrap()).unwrap();
        let local = observable_to_matrix(&ob).unwrap();
        let u = expm_hermitian(&local, 0.8).unwrap();
        let g = Gate::DenseBlock {
            targets: vec![2, 0],
            matrix: u,
        };
        let full = observable_to_matrix(&ob.embed(n, &[2, 0]).unwrap()).unwrap();
        let expected = expm_hermitian(&full, 0.8).unwrap() * dense_vec(&s);
        let out = apply_gate(&s, &g).unwrap();
        assert!((dense_vec(&out) - expected).norm() < 1e-12);
    }

    #[test]
    fn bad_targets_are_rejected() {
        let mut s = Statevector::zero_state(2).unwrap();
        let g = Gate::HeisenbergPair {
            targets: (1, 1),
            theta: 0.1,
        };
        assert!(matches!(s.apply(&g), Err(Error::Input(_))));
        let g = Gate::SingleQubit {
            target: 2,
            angles: [0.0; 3],
        };
        assert!(matches!(s.apply(&g), Err(Error::Input(_))));
        let g = Gate::DenseBlock {
            targets: vec![0],
            matrix: CMatrix::from_element(2, 2, one()),
        };
        assert!(matches!(s.apply(&g), Err(Error::Input(_))));
    }

    #[test]
    fn expectation_examples() {
        let z = Observable::single(1, 0, Pauli::Z).unwrap();
        assert_eq!(expectation(&Statevector::zero_state(1).unwrap(), &z).unwrap(), 1.0);

        let r = std::f64::consts::FRAC_1_SQRT_2;
        let singlet =
            Statevector::from_amplitudes(vec![c(0.0, 0.0), c(r, 0.0), c(-r, 0.0), c(0.0, 0.0)])
                .unwrap();
        let e = expectation(&singlet, &heisenberg2()).unwrap();
        assert!((e + 3.0).abs() < 1e-12);

        let mut bad = z.clone();
        bad.push(c(0.0, 1.0), "X".parse().unwrap()).unwrap();
        assert!(expectation(&Statevector::zero_state(1).unwrap(), &bad).is_err());
    }

    #[test]
    fn transition_element_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let psi = random_state(3, &mut rng);
        let phi = random_state(3, &mut rng);
        let mut o = heisenberg2().embed(3, &[0, 2]).unwrap();
        o.push(c(0.3, 0.0), "ZXY".parse().unwrap()).unwrap();
        let diag = transition_element(&psi, &o, &psi).unwrap();
        assert!((diag.re - expectation(&psi, &o).unwrap()).abs() < 1e-12);
        assert!(diag.im.abs() < 1e-12);

        let e0 = Statevector::basis_state(3, 0).unwrap();
        let e5 = Statevector::basis_state(3, 5).unwrap();
        let id = Observable::identity(3).unwrap();
        assert_eq!(transition_element(&e0, &id, &e5).unwrap(), C64::default());

        let m = observable_to_matrix(&o).unwrap();
        let expected = dense_vec(&phi).adjoint() * m * dense_vec(&psi);
        let got = transition_element(&phi, &o, &psi).unwrap();
        assert!((got - expected[(0, 0)]).norm() < 1e-12);

        let two = Statevector::zero_state(2).unwrap();
        assert!(transition_element(&two, &o, &psi).is_err());
    }

    #[test]
    fn apply_observable_examples() {
        let z = Observable::single(1, 0, Pauli::Z).unwrap();
        let one_state = Statevector::basis_state(1, 1).unwrap();
        let out = apply_observable(&one_state, &z).unwrap();
        assert_eq!(out.amplitudes(), &[c(0.0, 0.0), c(-1.0, 0.0)]);
        let zero_state = Statevector::zero_state(1).unwrap();
        let out = apply_observable(&zero_state, &z).unwrap();
        assert_eq!(out.amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);

        // |01⟩ (index 1) → 2|10⟩ − |01⟩
        let s = Statevector::basis_state(2, 1).unwrap();
        let out = apply_observable(&s, &heisenberg2()).unwrap();
        let expected = [c(0.0, 0.0), c(-1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0)];
        for (a, b) in out.amplitudes().iter().zip(expected) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn expm_examples() {
        let z = observable_to_matrix(&Observable::single(1, 0, Pauli::Z).unwrap()).unwrap();
        let u0 = expm_hermitian(&z, 0.0).unwrap();
        assert!(linalg::max_abs(&(u0 - CMatrix::identity(2, 2))) < 1e-15);
        let u = expm_hermitian(&z, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((u[(0, 0)] - c(0.0, -1.0)).norm() < 1e-15);
        assert!((u[(1, 1)] - c(0.0, 1.0)).norm() < 1e-15);
        assert!(u[(0, 1)].norm() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let raw = CMatrix::from_fn(4, 4, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let h = (&raw + raw.adjoint()) * c(0.5, 0.0);
        let theta = 0.9;
        let u = expm_hermitian(&h, theta).unwrap();
        assert!(linalg::unitarity_error(&u) < 1e-10);
        let (vals, vecs) = hermitian_eigen(&h).unwrap();
        for (k, &lambda) in vals.iter().enumerate() {
            let v = vecs.column(k).into_owned();
            let lhs = &u * &v;
            let rhs = v * C64::from_polar(1.0, -theta * lambda);
            assert!((lhs - rhs).norm() < 1e-10);
        }
        assert!(expm_hermitian(&raw, 1.0).is_err());
    }

    #[test]
    fn block_operator_matches_pauli_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 4;
        let s = random_state(n, &mut rng);
        let local = heisenberg2();
        let mut padded = observable_to_matrix(&local).unwrap();
        // zero one row/column to exercise the active-index path
        for j in 0..4 {
            padded[(3, j)] = C64::default();
            padded[(j, 3)] = C64::default();
        }
        let mut blocks = BlockOperator::new(n);
        blocks.push(&[3, 1], &padded).unwrap();
        blocks.add_constant(0.5);
        let pauli = crate::pauli::matrix_to_observable(&padded)
            .unwrap()
            .embed(n, &[3, 1])
            .unwrap()
            .sum(&Observable::scalar(n, c(0.5, 0.0)).unwrap())
            .unwrap();
        let a = blocks.expectation_value(s.amplitudes());
        let b = pauli.expectation_value(s.amplitudes());
        assert!((a - b).norm() < 1e-12);
        let va = blocks.apply_to(s.amplitudes());
        let vb = pauli.apply_to(s.amplitudes());
        let d: f64 = va.iter().zip(&vb).map(|(x, y)| (x - y).norm()).sum();
        assert!(d < 1e-12);
    }
}
