//! Local excitation bases, effective Hamiltonians and their qubit encoding.
//!
//! Each subsystem ground state `|ψ₀⟩` is expanded into the vectors
//! `W_k|ψ₀⟩` for a list of boundary excitations `W_k` (identity first). The
//! Gram matrix `S_kl = ⟨ψ₀|W_k†W_l|ψ₀⟩` is orthonormalized into a transform
//! `P` with `|ψ̃_a⟩ = Σ_k P_ak W_k|ψ₀⟩`, so that `P* S Pᵀ = I`. Operators are
//! then represented by their matrices `⟨ψ̃_a|O|ψ̃_b⟩ = (P* Ō Pᵀ)_ab` in that
//! basis, and the product of all site bases carries the effective
//! Hamiltonian `Σ H_i + Σ V_ij`.
//!
//! A site with `K` basis states occupies `q = ⌈log₂K⌉` qubits (at least one);
//! basis index `k` is the register value, and values `≥ K` are padding on
//! which every block acts as zero.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    ceil_log2, hermitian_part, hermiticity_error, matrix_json, max_abs, vdot, zero_pad,
};
use crate::pauli::{matrix_to_observable, Observable, Pauli};
use crate::simulator::{
    apply_observable, Amplitudes, BlockOperator, Operator, Statevector, DEFAULT_STATE_QUBIT_CAP,
};
use crate::vqe::{build_hardware_efficient, run_vqe, Ansatz, OptimizationResult, VqeConfig};
use crate::{CMatrix, C64};

/// Excitation vectors whose residual norm after projection falls below this
/// are treated as linearly dependent and dropped.
pub const BASIS_DROP_TOLERANCE: f64 = 1e-8;

/// Effective blocks must be Hermitian to this absolute tolerance.
pub const EFFECTIVE_HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Distance kept between the shifted product-state energy and zero.
pub const NEGATIVITY_MARGIN: f64 = 1.0;

/// A subsystem Hamiltonian with its boundary and excitation operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsystemSpec {
    pub n_qubits: usize,
    pub hamiltonian: Observable,
    pub boundary_qubits: Vec<usize>,
    /// `W_1 = I` followed by the boundary excitations.
    pub excitations: Vec<Observable>,
}

impl SubsystemSpec {
    /// A subsystem with `X`, `Y` and `Z` excitations on each boundary qubit.
    pub fn new(hamiltonian: Observable, boundary_qubits: Vec<usize>) -> Result<Self> {
        let n = hamiltonian.n_qubits();
        let excitations = default_excitations(n, &boundary_qubits, &Pauli::XYZ)?;
        Self::with_excitations(hamiltonian, boundary_qubits, excitations)
    }

    pub fn with_excitations(
        hamiltonian: Observable,
        boundary_qubits: Vec<usize>,
        excitations: Vec<Observable>,
    ) -> Result<Self> {
        let n = hamiltonian.n_qubits();
        if !hamiltonian.is_hermitian() {
            return Err(Error::input("subsystem Hamiltonian is not Hermitian"));
        }
        if let Some(&q) = boundary_qubits.iter().find(|&&q| q >= n) {
            return Err(Error::input(format!(
                "boundary qubit {q} outside a {n}-qubit subsystem"
            )));
        }
        check_excitations(n, &excitations)?;
        Ok(Self {
            n_qubits: n,
            hamiltonian,
            boundary_qubits,
            excitations,
        })
    }
}

fn is_identity(o: &Observable) -> bool {
    let c = o.clone().canonical();
    c.len() == 1 && c.terms()[0].1.is_identity() && (c.terms()[0].0 - C64::new(1.0, 0.0)).norm() < 1e-12
}

fn check_excitations(n: usize, excitations: &[Observable]) -> Result<()> {
    let first = excitations
        .first()
        .ok_or_else(|| Error::input("excitation list is empty"))?;
    if !is_identity(first) {
        return Err(Error::input("the first excitation must be the identity"));
    }
    if let Some(w) = excitations.iter().find(|w| w.n_qubits() != n) {
        return Err(Error::input(format!(
            "{}-qubit excitation on a {n}-qubit subsystem",
            w.n_qubits()
        )));
    }
    Ok(())
}

/// `[I] ++ [A_μ for each boundary qubit μ, for each A in paulis]`.
pub fn default_excitations(
    n_qubits: usize,
    boundary: &[usize],
    paulis: &[Pauli],
) -> Result<Vec<Observable>> {
    let mut out = vec![Observable::identity(n_qubits)?];
    for &q in boundary {
        for &p in paulis {
            out.push(Observable::single(n_qubits, q, p)?);
        }
    }
    Ok(out)
}

/// One term `v · left ⊗ right` of a coupling between two sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionTerm {
    pub coeff: f64,
    pub left: Observable,
    pub right: Observable,
}

/// Coupling `Σ_ν v_ν · left_ν ⊗ right_ν` between sites `i` and `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionSpec {
    pub sites: (usize, usize),
    pub terms: Vec<InteractionTerm>,
}

impl InteractionSpec {
    /// The coupling as one observable with the left site on the low qubits.
    pub fn to_observable(&self) -> Result<Observable> {
        let first = self
            .terms
            .first()
            .ok_or_else(|| Error::input("interaction has no terms"))?;
        let (nl, nr) = (first.left.n_qubits(), first.right.n_qubits());
        let mut total = Observable::zero(nl + nr);
        for t in &self.terms {
            if t.left.n_qubits() != nl || t.right.n_qubits() != nr {
                return Err(Error::input("interaction factors differ in size"));
            }
            let kron = crate::pauli::observable_kron(&t.left, &t.right)?;
            total = total.sum(&kron.scaled(C64::new(t.coeff, 0.0)))?;
        }
        Ok(total.canonical())
    }

    pub fn is_hermitian(&self) -> Result<bool> {
        Ok(self.to_observable()?.is_hermitian())
    }
}

/// Orthonormalized excitation basis of one subsystem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalBasis {
    pub k_raw: usize,
    pub k: usize,
    /// Gram matrix `S` of the raw vectors `W_k|ψ₀⟩` (`K_raw × K_raw`).
    #[serde(with = "matrix_json")]
    pub overlap: CMatrix,
    /// `P` (`K × K_raw`): `|ψ̃_a⟩ = Σ_k P_ak W_k|ψ₀⟩`.
    #[serde(with = "matrix_json")]
    pub transform: CMatrix,
    pub ground_state: Statevector,
    pub excitations: Vec<Observable>,
    /// Raw excitation indices that survived orthonormalization.
    pub kept: Vec<usize>,
}

impl LocalBasis {
    pub fn n_qubits(&self) -> usize {
        self.ground_state.n_qubits()
    }

    /// `W_k|ψ₀⟩` for every raw excitation.
    pub fn raw_vectors(&self) -> Result<Vec<Vec<C64>>> {
        self.excitations
            .iter()
            .map(|w| Ok(apply_observable(&self.ground_state, w)?.into_amplitudes()))
            .collect()
    }

    /// The orthonormal basis vectors `|ψ̃_a⟩`.
    pub fn vectors(&self) -> Result<Vec<Vec<C64>>> {
        let raw = self.raw_vectors()?;
        let dim = raw[0].len();
        Ok((0..self.k)
            .map(|a| {
                let mut v = vec![C64::default(); dim];
                for (k, r) in raw.iter().enumerate() {
                    let c = self.transform[(a, k)];
                    if c != C64::default() {
                        v.iter_mut().zip(r).for_each(|(x, y)| *x += c * y);
                    }
                }
                v
            })
            .collect())
    }

    /// Largest entry of `|P* S Pᵀ − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let p = &self.transform;
        let g = p.conjugate() * &self.overlap * p.transpose();
        max_abs(&(g - CMatrix::identity(self.k, self.k)))
    }

    /// `(P* Ō Pᵀ)` with `Ō_kl = ⟨ψ₀|W_k† O W_l|ψ₀⟩`: the matrix of `O` in the
    /// orthonormal basis.
    pub fn project(&self, op: &dyn Operator) -> Result<CMatrix> {
        if op.n_qubits() != self.n_qubits() {
            return Err(Error::input(format!(
                "{}-qubit operator on a {}-qubit subsystem",
                op.n_qubits(),
                self.n_qubits()
            )));
        }
        let raw = self.raw_vectors()?;
        let applied: Vec<Vec<C64>> = raw.iter().map(|v| op.apply_to(v)).collect();
        let bar = CMatrix::from_fn(self.k_raw, self.k_raw, |k, l| vdot(&raw[k], &applied[l]));
        let p = &self.transform;
        Ok(p.conjugate() * bar * p.transpose())
    }
}

/// Overlaps and Gram-Schmidt transform for `W_k|ψ₀⟩`.
///
/// Gram-Schmidt runs in coefficient space with the `S` inner product, in the
/// given order, with a second projection pass for numerical orthogonality.
pub fn build_local_basis(ground_state: &Statevector, excitations: &[Observable]) -> Result<LocalBasis> {
    let n = ground_state.n_qubits();
    if (ground_state.norm() - 1.0).abs() > 1e-8 {
        return Err(Error::input("ground state is not normalized"));
    }
    check_excitations(n, excitations)?;
    let raw: Vec<Vec<C64>> = excitations
        .iter()
        .map(|w| Ok(apply_observable(ground_state, w)?.into_amplitudes()))
        .collect::<Result<_>>()?;
    let k_raw = raw.len();
    let overlap = CMatrix::from_fn(k_raw, k_raw, |k, l| vdot(&raw[k], &raw[l]));

    let inner = |u: &[C64], c: &[C64]| -> C64 {
        let mut acc = C64::default();
        for k in 0..k_raw {
            if u[k] == C64::default() {
                continue;
            }
            let sc: C64 = (0..k_raw).map(|l| overlap[(k, l)] * c[l]).sum();
            acc += u[k].conj() * sc;
        }
        acc
    };
    let mut rows: Vec<Vec<C64>> = Vec::new();
    let mut kept = Vec::new();
    for k in 0..k_raw {
        let mut c = vec![C64::default(); k_raw];
        c[k] = C64::new(1.0, 0.0);
        for _ in 0..2 {
            for u in &rows {
                let proj = inner(u, &c);
                c.iter_mut().zip(u).for_each(|(x, y)| *x -= proj * y);
            }
        }
        let norm = inner(&c, &c).re.max(0.0).sqrt();
        if norm < BASIS_DROP_TOLERANCE {
            continue;
        }
        c.iter_mut().for_each(|x| *x /= norm);
        rows.push(c);
        kept.push(k);
    }
    let k = rows.len();
    let transform = CMatrix::from_fn(k, k_raw, |a, l| rows[a][l]);
    Ok(LocalBasis {
        k_raw,
        k,
        overlap,
        transform,
        ground_state: ground_state.clone(),
        excitations: excitations.to_vec(),
        kept,
    })
}

fn checked_hermitian(m: CMatrix, what: &str) -> Result<CMatrix> {
    let err = hermiticity_error(&m);
    if err > EFFECTIVE_HERMITIAN_TOLERANCE {
        return Err(Error::input(format!("{what} is not Hermitian ({err:.2e})")));
    }
    Ok(hermitian_part(&m))
}

/// `H_eff = P* H̄ Pᵀ` for a Hermitian subsystem operator.
pub fn effective_site_matrix(basis: &LocalBasis, h: &dyn Operator) -> Result<CMatrix> {
    if !h.is_hermitian() {
        return Err(Error::input("site Hamiltonian is not Hermitian"));
    }
    checked_hermitian(basis.project(h)?, "effective site matrix")
}

/// Matrices `⟨ψ̃_a|W|ψ̃_b⟩` of each operator in `ops`.
pub fn effective_excitations(basis: &LocalBasis, ops: &[Observable]) -> Result<Vec<CMatrix>> {
    ops.iter().map(|w| basis.project(w)).collect()
}

/// One factorized term `v · A ⊗ B` of an effective coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairFactor {
    pub coeff: f64,
    #[serde(with = "matrix_json")]
    pub left: CMatrix,
    #[serde(with = "matrix_json")]
    pub right: CMatrix,
}

/// Effective coupling between two sites, kept as a sum of products.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTensor {
    pub sites: (usize, usize),
    pub k_left: usize,
    pub k_right: usize,
    pub factors: Vec<PairFactor>,
}

impl PairTensor {
    pub fn new(sites: (usize, usize), k_left: usize, k_right: usize) -> Self {
        Self {
            sites,
            k_left,
            k_right,
            factors: Vec::new(),
        }
    }

    pub fn push(&mut self, coeff: f64, left: CMatrix, right: CMatrix) -> Result<()> {
        if left.shape() != (self.k_left, self.k_left) || right.shape() != (self.k_right, self.k_right) {
            return Err(Error::input("pair factor dimensions do not match the sites"));
        }
        self.factors.push(PairFactor { coeff, left, right });
        Ok(())
    }

    /// `V_{k k' l l'}`: `k, l` on the left site, `k', l'` on the right.
    pub fn element(&self, k: usize, kp: usize, l: usize, lp: usize) -> C64 {
        self.factors
            .iter()
            .map(|f| f.left[(k, l)] * f.right[(kp, lp)] * f.coeff)
            .sum()
    }

    /// Dense `K_i K_j × K_i K_j` matrix with row `(k, k') → k·K_j + k'`.
    pub fn dense(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.k_left * self.k_right, self.k_left * self.k_right);
        for f in &self.factors {
            out += f.left.kronecker(&f.right) * C64::new(f.coeff, 0.0);
        }
        out
    }

    /// Dense matrix on a two-site register of `q` qubits each: index
    /// `k + 2^q·k'` (left site on the low bits), zero on padding.
    pub fn embedded(&self, q: usize) -> CMatrix {
        let d = 1usize << q;
        let mut out = CMatrix::zeros(d * d, d * d);
        for k in 0..self.k_left {
            for kp in 0..self.k_right {
                for l in 0..self.k_left {
                    for lp in 0..self.k_right {
                        out[(k + d * kp, l + d * lp)] = self.element(k, kp, l, lp);
                    }
                }
            }
        }
        out
    }
}

/// `V_eff = Σ_ν v_ν (P_i* Ā_ν P_iᵀ) ⊗ (P_j* B̄_ν P_jᵀ)`, each factor evaluated
/// on its own subsystem.
pub fn effective_interaction(
    basis_i: &LocalBasis,
    basis_j: &LocalBasis,
    v: &InteractionSpec,
) -> Result<PairTensor> {
    let mut out = PairTensor::new(v.sites, basis_i.k, basis_j.k);
    for t in &v.terms {
        if t.left.n_qubits() != basis_i.n_qubits() || t.right.n_qubits() != basis_j.n_qubits() {
            return Err(Error::input(format!(
                "coupling factor on {}+{} qubits for sites of {}+{} qubits",
                t.left.n_qubits(),
                t.right.n_qubits(),
                basis_i.n_qubits(),
                basis_j.n_qubits()
            )));
        }
        out.push(t.coeff, basis_i.project(&t.left)?, basis_j.project(&t.right)?)?;
    }
    let err = hermiticity_error(&out.dense());
    if err > EFFECTIVE_HERMITIAN_TOLERANCE {
        return Err(Error::input(format!(
            "effective interaction is not Hermitian ({err:.2e})"
        )));
    }
    Ok(out)
}

/// Effective Hamiltonian `Σ H_i + Σ V_ij` on `N` sites and its encoding on
/// `N·q` qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveProblem {
    #[serde(with = "matrix_json::list")]
    pub site_matrices: Vec<CMatrix>,
    pub pair_tensors: Vec<PairTensor>,
    pub q_per_site: usize,
    /// Energy subtracted from every site block on its valid levels so that
    /// the encoded product state has negative energy (zero when already so).
    pub shift: f64,
}

impl EffectiveProblem {
    pub fn n_sites(&self) -> usize {
        self.site_matrices.len()
    }

    /// Basis size of each site.
    pub fn dims(&self) -> Vec<usize> {
        self.site_matrices.iter().map(|m| m.nrows()).collect()
    }

    pub fn k_max(&self) -> usize {
        self.dims().into_iter().max().unwrap_or(0)
    }

    pub fn q_per_site(&self) -> usize {
        self.q_per_site
    }

    /// Qubits of the encoded register.
    pub fn n_qubits(&self) -> usize {
        self.n_sites() * self.q_per_site
    }

    /// Total energy removed by the shift; add it back to encoded energies.
    pub fn total_shift(&self) -> f64 {
        self.shift * self.n_sites() as f64
    }

    /// Register qubits of site `i`; bit `b` of the level index is qubit
    /// `i·q + b`.
    pub fn site_register(&self, i: usize) -> Vec<usize> {
        (i * self.q_per_site..(i + 1) * self.q_per_site).collect()
    }

    /// Site `i`'s block padded to `2^q`, optionally shifted on its valid
    /// levels.
    pub fn embedded_site(&self, i: usize, shifted: bool) -> CMatrix {
        let m = &self.site_matrices[i];
        let mut out = zero_pad(m, 1 << self.q_per_site);
        if shifted {
            for k in 0..m.nrows() {
                out[(k, k)] -= C64::new(self.shift, 0.0);
            }
        }
        out
    }

    fn pair_register(&self, p: &PairTensor) -> Vec<usize> {
        let mut t = self.site_register(p.sites.0);
        t.extend(self.site_register(p.sites.1));
        t
    }

    fn block_operator(&self, shifted: bool) -> Result<BlockOperator> {
        let mut op = BlockOperator::new(self.n_qubits());
        for i in 0..self.n_sites() {
            op.push(&self.site_register(i), &self.embedded_site(i, shifted))?;
        }
        for p in &self.pair_tensors {
            op.push(&self.pair_register(p), &hermitian_part(&p.embedded(self.q_per_site)))?;
        }
        Ok(op)
    }

    /// The shifted encoded Hamiltonian as dense blocks (what the second VQE
    /// minimizes).
    pub fn operator(&self) -> Result<BlockOperator> {
        self.block_operator(true)
    }

    pub fn unshifted_operator(&self) -> Result<BlockOperator> {
        self.block_operator(false)
    }

    /// The shifted encoded Hamiltonian as a Pauli sum on `N·q` qubits.
    pub fn encoded(&self) -> Result<Observable> {
        let m = self.n_qubits();
        let mut total = Observable::zero(m);
        for i in 0..self.n_sites() {
            let local = matrix_to_observable(&self.embedded_site(i, true))?;
            total = total.sum(&local.embed(m, &self.site_register(i))?)?;
        }
        for p in &self.pair_tensors {
            let local = matrix_to_observable(&p.embedded(self.q_per_site))?;
            total = total.sum(&local.embed(m, &self.pair_register(p))?)?;
        }
        Ok(total.canonical())
    }

    /// Matrix of a site operator zero-padded into site `i`'s register of the
    /// full encoded register, as a Pauli sum.
    pub fn embed_site_operator(&self, i: usize, m: &CMatrix) -> Result<Observable> {
        if m.nrows() != self.site_matrices[i].nrows() || !m.is_square() {
            return Err(Error::input("operator size does not match the site"));
        }
        let local = matrix_to_observable(&zero_pad(m, 1 << self.q_per_site))?;
        local.embed(self.n_qubits(), &self.site_register(i))
    }
}

/// Combines site matrices and pair tensors, choosing the register size and
/// the negativity shift.
pub fn assemble_effective(
    site_matrices: Vec<CMatrix>,
    pair_tensors: Vec<PairTensor>,
) -> Result<EffectiveProblem> {
    if site_matrices.is_empty() {
        return Err(Error::input("effective problem needs at least one site"));
    }
    for (i, m) in site_matrices.iter().enumerate() {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::input(format!("site {i} matrix is not square")));
        }
        let err = hermiticity_error(m);
        if err > EFFECTIVE_HERMITIAN_TOLERANCE {
            return Err(Error::input(format!("site {i} matrix is not Hermitian ({err:.2e})")));
        }
    }
    let n = site_matrices.len();
    for p in &pair_tensors {
        let (i, j) = p.sites;
        if i >= n || j >= n || i == j {
            return Err(Error::input(format!("pair ({i}, {j}) is not a pair of distinct sites")));
        }
        if p.k_left != site_matrices[i].nrows() || p.k_right != site_matrices[j].nrows() {
            return Err(Error::input(format!("pair ({i}, {j}) dimensions do not match its sites")));
        }
        let err = hermiticity_error(&p.dense());
        if err > EFFECTIVE_HERMITIAN_TOLERANCE {
            return Err(Error::input(format!("pair ({i}, {j}) is not Hermitian ({err:.2e})")));
        }
    }
    let k_max = site_matrices.iter().map(|m| m.nrows()).max().unwrap_or(1);
    let q = ceil_log2(k_max).max(1);
    let mut problem = EffectiveProblem {
        site_matrices: site_matrices.into_iter().map(|m| hermitian_part(&m)).collect(),
        pair_tensors,
        q_per_site: q,
        shift: 0.0,
    };
    let h00 = local_product_energy(&problem);
    if h00 >= 0.0 {
        problem.shift = h00 / n as f64 + NEGATIVITY_MARGIN;
    }
    Ok(problem)
}

/// One site of an effective problem: its basis and the Hamiltonian it
/// projects.
pub struct SiteInput<'a> {
    pub basis: &'a LocalBasis,
    pub hamiltonian: &'a dyn Operator,
}

/// Site matrices and pair tensors for the given sites and couplings,
/// assembled into one problem. Couplings refer to sites by position.
pub fn build_effective_problem(
    sites: &[SiteInput<'_>],
    interactions: &[InteractionSpec],
) -> Result<EffectiveProblem> {
    let site_matrices = sites
        .par_iter()
        .map(|s| effective_site_matrix(s.basis, s.hamiltonian))
        .collect::<Result<Vec<_>>>()?;
    let pairs = interactions
        .par_iter()
        .map(|v| {
            let (i, j) = v.sites;
            if i >= sites.len() || j >= sites.len() {
                return Err(Error::input(format!("coupling ({i}, {j}) names a missing site")));
            }
            effective_interaction(sites[i].basis, sites[j].basis, v)
        })
        .collect::<Result<Vec<_>>>()?;
    assemble_effective(site_matrices, pairs)
}

/// `Σ_i (H_i)_00 + Σ_ij (V_ij)_0000`, the energy of the product of local
/// ground states (unshifted).
pub fn local_product_energy(problem: &EffectiveProblem) -> f64 {
    let sites: f64 = problem.site_matrices.iter().map(|m| m[(0, 0)].re).sum();
    let pairs: f64 = problem
        .pair_tensors
        .iter()
        .map(|p| p.element(0, 0, 0, 0).re)
        .sum();
    sites + pairs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SecondStageAnsatz {
    /// Cycles of `exp(−iθ H_i)` on every site register (ascending), then
    /// `exp(−iθ V_ij)` on every coupled pair (in stored order).
    #[default]
    EffectiveGenerated,
    /// The hardware-efficient circuit on the encoded register with exchange
    /// gates between neighbouring qubits.
    HardwareEfficient,
}

/// The second-stage circuit for `problem`.
pub fn effective_ansatz(
    problem: &EffectiveProblem,
    kind: SecondStageAnsatz,
    depth: usize,
) -> Result<Ansatz> {
    let m = problem.n_qubits();
    match kind {
        SecondStageAnsatz::HardwareEfficient => {
            let edges: Vec<(usize, usize)> = (1..m).map(|q| (q - 1, q)).collect();
            build_hardware_efficient(m, depth, &edges)
        }
        SecondStageAnsatz::EffectiveGenerated => {
            if depth == 0 {
                return Err(Error::input("ansatz depth must be at least 1"));
            }
            let sites: Vec<CMatrix> = (0..problem.n_sites())
                .map(|i| problem.embedded_site(i, false))
                .collect();
            let pairs: Vec<CMatrix> = problem
                .pair_tensors
                .iter()
                .map(|p| hermitian_part(&p.embedded(problem.q_per_site)))
                .collect();
            let mut ansatz = Ansatz::empty(m);
            for _ in 0..depth {
                for (i, g) in sites.iter().enumerate() {
                    ansatz.push_generated(&problem.site_register(i), g)?;
                }
                for (p, g) in problem.pair_tensors.iter().zip(&pairs) {
                    ansatz.push_generated(&problem.pair_register(p), g)?;
                }
            }
            ansatz.set_depth(depth);
            Ok(ansatz)
        }
    }
}

/// Outcome of a second-stage VQE with energies reported unshifted.
#[derive(Debug, Clone)]
pub struct StageSolution {
    pub result: OptimizationResult,
    /// Optimized state on the encoded register.
    pub state: Statevector,
}

/// Runs the second VQE from `|0…0⟩` (the product of local ground states) and
/// returns the optimized state.
pub fn solve_effective(
    problem: &EffectiveProblem,
    kind: SecondStageAnsatz,
    config: &VqeConfig,
) -> Result<StageSolution> {
    let m = problem.n_qubits();
    if m > DEFAULT_STATE_QUBIT_CAP {
        return Err(Error::resource(format!(
            "encoded register of {m} qubits exceeds the {DEFAULT_STATE_QUBIT_CAP}-qubit cap"
        )));
    }
    let ansatz = effective_ansatz(problem, kind, config.depth)?;
    let op = problem.operator()?;
    let initial = Statevector::zero_state(m)?;
    let mut result = run_vqe(&ansatz, &op, &initial, config)?;
    let state = ansatz.prepare(&result.best_params, &initial)?;
    let offset = problem.total_shift();
    result.best_energy += offset;
    result.history.iter_mut().for_each(|e| *e += offset);
    result.restart_energies.iter_mut().for_each(|(_, e)| *e += offset);
    Ok(StageSolution { result, state })
}

/// Second VQE on the encoded problem; energies are unshifted.
pub fn second_stage_vqe(
    problem: &EffectiveProblem,
    kind: SecondStageAnsatz,
    config: &VqeConfig,
) -> Result<OptimizationResult> {
    Ok(solve_effective(problem, kind, config)?.result)
}

/// Summary of one level of the hierarchy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub level: usize,
    pub groups: Vec<Vec<usize>>,
    /// Encoded register size of each group's VQE.
    pub group_qubits: Vec<usize>,
    /// Optimized (unshifted) energy of each group.
    pub group_energies: Vec<f64>,
    /// Basis size each group exports to the next level.
    pub exported_k: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecursionOutcome {
    pub energy: f64,
    pub levels: Vec<LevelReport>,
}

/// Sites `members` of `problem` as a standalone problem, with couplings
/// internal to the group.
fn sub_problem(problem: &EffectiveProblem, members: &[usize]) -> Result<EffectiveProblem> {
    let position: BTreeMap<usize, usize> = members.iter().enumerate().map(|(p, &s)| (s, p)).collect();
    let sites = members.iter().map(|&s| problem.site_matrices[s].clone()).collect();
    let pairs = problem
        .pair_tensors
        .iter()
        .filter_map(|p| {
            let (a, b) = (position.get(&p.sites.0)?, position.get(&p.sites.1)?);
            let mut t = p.clone();
            t.sites = (*a, *b);
            Some(t)
        })
        .collect();
    assemble_effective(sites, pairs)
}

fn check_grouping(groups: &[Vec<usize>], n_sites: usize) -> Result<()> {
    let mut seen = vec![false; n_sites];
    for g in groups {
        if g.is_empty() {
            return Err(Error::input("empty group in recursion plan"));
        }
        for &s in g {
            if s >= n_sites || std::mem::replace(&mut seen[s], true) {
                return Err(Error::input(format!(
                    "site {s} is missing or repeated in a grouping of {n_sites} sites"
                )));
            }
        }
    }
    if seen.iter().any(|&x| !x) {
        return Err(Error::input("grouping does not cover every site"));
    }
    Ok(())
}

/// Repeats the construction on groups of sites.
///
/// Each grouping partitions the current sites. Every group is solved as a
/// standalone effective problem; its optimized state becomes the ground state
/// of a new site whose excitations are the group-side factors of the
/// couplings leaving the group. The last grouping must be a single group,
/// whose energy is returned.
pub fn recurse(
    base: &EffectiveProblem,
    levels: &[Vec<Vec<usize>>],
    kind: SecondStageAnsatz,
    config: &VqeConfig,
) -> Result<RecursionOutcome> {
    let last = levels
        .last()
        .ok_or_else(|| Error::input("recursion plan has no levels"))?;
    if last.len() != 1 {
        return Err(Error::input("the last recursion level must form a single group"));
    }
    let mut problem = base.clone();
    let mut reports = Vec::new();
    for (level, groups) in levels.iter().enumerate() {
        check_grouping(groups, problem.n_sites())?;
        let mut owner = vec![(0, 0); problem.n_sites()];
        for (g, members) in groups.iter().enumerate() {
            for (p, &s) in members.iter().enumerate() {
                owner[s] = (g, p);
            }
        }
        let subs: Vec<EffectiveProblem> = groups
            .iter()
            .map(|members| sub_problem(&problem, members))
            .collect::<Result<_>>()?;
        let solutions: Vec<StageSolution> = subs
            .iter()
            .map(|sub| solve_effective(sub, kind, config))
            .collect::<Result<_>>()?;
        let mut report = LevelReport {
            level: level + 1,
            groups: groups.clone(),
            group_qubits: subs.iter().map(|s| s.n_qubits()).collect(),
            group_energies: solutions.iter().map(|s| s.result.best_energy).collect(),
            exported_k: Vec::new(),
        };
        if groups.len() == 1 {
            let energy = solutions[0].result.best_energy;
            report.exported_k = vec![1];
            reports.push(report);
            return Ok(RecursionOutcome {
                energy,
                levels: reports,
            });
        }

        // Couplings that leave a group, with the factor on each side
        // embedded into its group's register.
        let crossing: Vec<&PairTensor> = problem
            .pair_tensors
            .iter()
            .filter(|p| owner[p.sites.0].0 != owner[p.sites.1].0)
            .collect();
        let side_operator = |site: usize, m: &CMatrix| -> Result<Observable> {
            let (g, pos) = owner[site];
            subs[g].embed_site_operator(pos, m)
        };
        let mut excitations: Vec<Vec<Observable>> = subs
            .iter()
            .map(|s| Ok(vec![Observable::identity(s.n_qubits())?]))
            .collect::<Result<_>>()?;
        for p in &crossing {
            for f in &p.factors {
                excitations[owner[p.sites.0].0].push(side_operator(p.sites.0, &f.left)?);
                excitations[owner[p.sites.1].0].push(side_operator(p.sites.1, &f.right)?);
            }
        }
        let bases: Vec<LocalBasis> = solutions
            .iter()
            .zip(&excitations)
            .map(|(sol, ex)| build_local_basis(&sol.state, ex))
            .collect::<Result<_>>()?;
        let site_matrices = subs
            .iter()
            .zip(&bases)
            .map(|(sub, basis)| effective_site_matrix(basis, &sub.unshifted_operator()?))
            .collect::<Result<Vec<_>>>()?;

        let mut merged: BTreeMap<(usize, usize), PairTensor> = BTreeMap::new();
        for p in &crossing {
            let (ga, gb) = (owner[p.sites.0].0, owner[p.sites.1].0);
            let (lo, hi) = (ga.min(gb), ga.max(gb));
            let entry = merged
                .entry((lo, hi))
                .or_insert_with(|| PairTensor::new((lo, hi), bases[lo].k, bases[hi].k));
            for f in &p.factors {
                let left = bases[ga].project(&side_operator(p.sites.0, &f.left)?)?;
                let right = bases[gb].project(&side_operator(p.sites.1, &f.right)?)?;
                if ga < gb {
                    entry.push(f.coeff, left, right)?;
                } else {
                    entry.push(f.coeff, right, left)?;
                }
            }
        }
        report.exported_k = bases.iter().map(|b| b.k).collect();
        reports.push(report);
        problem = assemble_effective(site_matrices, merged.into_values().collect())?;
    }
    unreachable!("the last level has a single group")
}

/// Resources of one level of a square-lattice hierarchy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelResources {
    pub level: usize,
    /// Sites per side of the blocks combined at this level.
    pub block_side: usize,
    /// Physical sites per side covered by one block after this level.
    pub covered_side: usize,
    /// Basis size of the sites combined at this level (2 for physical qubits).
    pub site_k: usize,
    pub qubits_per_site: usize,
    pub vqe_qubits: usize,
    /// Basis size this level's blocks export: `1 + e·(4·side − 4)`.
    pub exported_k: usize,
    /// Pauli-term count of the level Hamiltonian when every site block
    /// and pair block is fully dense: `sites·4^q + pairs·4^{2q}`.
    pub pauli_terms: u128,
    /// Matrix-element count `sites·K² + pairs·K⁴`.
    pub matrix_elements: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub levels: Vec<LevelResources>,
    pub physical_qubits: usize,
    pub max_vqe_qubits: usize,
}

/// Resource counts for a hierarchy of `l×l` blockings.
pub fn resource_estimate(
    level_sizes: &[usize],
    excitations_per_boundary_qubit: usize,
) -> Result<ResourceReport> {
    if level_sizes.is_empty() || level_sizes.contains(&0) {
        return Err(Error::input("level sizes must be a nonempty list of positive sides"));
    }
    let mut levels = Vec::new();
    let mut covered = 1usize;
    let mut site_k = 2usize;
    let mut q = 1usize;
    for (idx, &l) in level_sizes.iter().enumerate() {
        covered = covered
            .checked_mul(l)
            .ok_or_else(|| Error::input("lattice side overflows"))?;
        let boundary = if covered >= 2 { 4 * covered - 4 } else { 1 };
        let exported_k = 1 + excitations_per_boundary_qubit * boundary;
        let sites = (l * l) as u128;
        let pairs = (2 * l * (l - 1)) as u128;
        let k = site_k as u128;
        levels.push(LevelResources {
            level: idx + 1,
            block_side: l,
            covered_side: covered,
            site_k,
            qubits_per_site: q,
            vqe_qubits: l * l * q,
            exported_k,
            pauli_terms: sites * 4u128.pow(q as u32) + pairs * 4u128.pow(2 * q as u32),
            matrix_elements: sites * k * k + pairs * k * k * k * k,
        });
        site_k = exported_k;
        q = ceil_log2(exported_k).max(1);
    }
    Ok(ResourceReport {
        physical_qubits: covered * covered,
        max_vqe_qubits: levels.iter().map(|l| l.vqe_qubits).max().unwrap_or(0),
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigen;
    use crate::oracle::exact_ground_dense;
    use crate::pauli::PauliString;
    use crate::simulator::Amplitudes;

    fn heisenberg(n: usize, edges: &[(usize, usize)]) -> Observable {
        let mut o = Observable::zero(n);
        for &(a, b) in edges {
            for p in Pauli::XYZ {
                let s = PauliString::from_sparse(n, &[(a, p), (b, p)]).unwrap();
                o.push(C64::new(1.0, 0.0), s).unwrap();
            }
        }
        o
    }

    fn block4() -> Observable {
        heisenberg(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)])
    }

    fn ground(o: &Observable) -> Statevector {
        let r = exact_ground_dense(o).unwrap();
        Statevector::normalize(r.ground_subspace[0].clone()).unwrap()
    }

    #[test]
    fn default_excitation_counts() {
        assert_eq!(default_excitations(4, &[0, 2], &Pauli::XYZ).unwrap().len(), 7);
        assert_eq!(default_excitations(4, &[], &Pauli::XYZ).unwrap().len(), 1);
        assert!(default_excitations(4, &[4], &Pauli::XYZ).is_err());
    }

    #[test]
    fn identity_only_basis() {
        let psi = ground(&block4());
        let b = build_local_basis(&psi, &[Observable::identity(4).unwrap()]).unwrap();
        assert_eq!(b.k, 1);
        assert!((b.transform[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn basis_rejects_bad_inputs() {
        let psi = ground(&block4());
        let x = Observable::single(4, 0, Pauli::X).unwrap();
        assert!(build_local_basis(&psi, &[x]).is_err());
        assert!(build_local_basis(&psi, &[]).is_err());
    }

    #[test]
    fn dependent_excitations_are_dropped() {
        let psi = Statevector::zero_state(2).unwrap();
        let ex = vec![
            Observable::identity(2).unwrap(),
            Observable::single(2, 0, Pauli::Z).unwrap(),
            Observable::single(2, 0, Pauli::X).unwrap(),
            Observable::single(2, 0, Pauli::Y).unwrap(),
        ];
        let b = build_local_basis(&psi, &ex).unwrap();
        // Z|00⟩ = |00⟩ and Y|00⟩ = i X|00⟩
        assert_eq!(b.kept, vec![0, 2]);
        assert!(b.orthonormality_error() < 1e-12);
    }

    #[test]
    fn scalar_site_matrix() {
        let psi = ground(&block4());
        let b = build_local_basis(&psi, &default_excitations(4, &[0, 2], &Pauli::XYZ).unwrap())
            .unwrap();
        let c = Observable::scalar(4, C64::new(2.5, 0.0)).unwrap();
        let m = effective_site_matrix(&b, &c).unwrap();
        assert!(max_abs(&(m - CMatrix::identity(b.k, b.k) * C64::new(2.5, 0.0))) < 1e-12);
    }

    #[test]
    fn identity_interaction_is_delta() {
        let psi = ground(&block4());
        let b = build_local_basis(&psi, &default_excitations(4, &[0, 2], &Pauli::XYZ).unwrap())
            .unwrap();
        let v = InteractionSpec {
            sites: (0, 1),
            terms: vec![InteractionTerm {
                coeff: 1.0,
                left: Observable::identity(4).unwrap(),
                right: Observable::identity(4).unwrap(),
            }],
        };
        let t = effective_interaction(&b, &b, &v).unwrap();
        let d = t.dense();
        assert!(max_abs(&(d - CMatrix::identity(b.k * b.k, b.k * b.k))) < 1e-12);
    }

    #[test]
    fn single_site_encoding_matches_site_block() {
        let m = CMatrix::from_fn(3, 3, |i, j| {
            if i == j {
                C64::new(i as f64 - 2.0, 0.0)
            } else {
                C64::new(0.3, if i < j { 0.1 } else { -0.1 })
            }
        });
        let p = assemble_effective(vec![m.clone()], vec![]).unwrap();
        assert_eq!(p.q_per_site(), 2);
        let (vals, _) = hermitian_eigen(&m).unwrap();
        let enc = crate::oracle::exact_ground_dense(&p.encoded().unwrap()).unwrap();
        assert!((enc.ground_energy + p.total_shift() - vals[0]).abs() < 1e-10);
    }

    #[test]
    fn positive_problems_are_shifted() {
        let m = CMatrix::from_fn(2, 2, |i, j| C64::new(if i == j { 3.0 } else { 0.5 }, 0.0));
        let p = assemble_effective(vec![m.clone(), m], vec![]).unwrap();
        assert_eq!(p.shift, 4.0);
        assert_eq!(local_product_energy(&p), 6.0);
        let op = p.operator().unwrap();
        let zero = Statevector::zero_state(2).unwrap();
        let e = op.expectation_value(zero.amplitudes()).re;
        assert!((e - (6.0 - 8.0)).abs() < 1e-12);
        assert!(assemble_effective(vec![], vec![]).is_err());
    }

    #[test]
    fn resource_examples() {
        let r = resource_estimate(&[2, 2, 2, 2], 3).unwrap();
        let ks: Vec<usize> = r.levels.iter().map(|l| l.site_k).collect();
        assert_eq!(ks, vec![2, 13, 37, 85]);
        let qs: Vec<usize> = r.levels.iter().map(|l| l.qubits_per_site).collect();
        assert_eq!(qs, vec![1, 4, 6, 7]);
        let v: Vec<usize> = r.levels.iter().map(|l| l.vqe_qubits).collect();
        assert_eq!(v, vec![4, 16, 24, 28]);
        assert_eq!(r.physical_qubits, 256);
        let r = resource_estimate(&[2, 2, 2, 2, 2], 3).unwrap();
        assert_eq!((r.physical_qubits, r.max_vqe_qubits), (1024, 32));
        let r = resource_estimate(&[2], 3).unwrap();
        assert_eq!(r.levels[0].vqe_qubits, 4);
        assert_eq!(r.levels[0].exported_k, 13);
        assert!(resource_estimate(&[], 3).is_err());
    }
}
