//! Benchmark Hamiltonians and one-dimensional chains of coupled blocks.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::effective::{InteractionSpec, InteractionTerm, SubsystemSpec};
use crate::error::{Error, Result};
use crate::pauli::{Observable, Pauli, PauliString};
use crate::simulator::DEFAULT_STATE_QUBIT_CAP;
use crate::C64;

/// Edges of the four-qubit block: a square with one diagonal.
pub const BLOCK4_EDGES: [(usize, usize); 5] = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)];

const KAGOME12_EDGES: &str = include_str!("../data/kagome12.edges");

/// `Σ_{(a,b)} X_aX_b + Y_aY_b + Z_aZ_b` with unit couplings.
pub fn heisenberg(n_qubits: usize, edges: &[(usize, usize)]) -> Result<Observable> {
    let mut o = Observable::zero(n_qubits);
    for &(a, b) in edges {
        if a == b {
            return Err(Error::input(format!("edge ({a}, {b}) is a self-loop")));
        }
        for p in Pauli::XYZ {
            o.push(C64::new(1.0, 0.0), PauliString::from_sparse(n_qubits, &[(a, p), (b, p)])?)?;
        }
    }
    Ok(o)
}

/// Parses one `a b` pair per line; `#` starts a comment.
pub fn parse_edges(text: &str) -> Result<Vec<(usize, usize)>> {
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let ends: Vec<usize> = line
            .split_whitespace()
            .map(|f| {
                f.parse()
                    .map_err(|e| Error::input(format!("edge line {}: {e}", lineno + 1)))
            })
            .collect::<Result<_>>()?;
        match ends.as_slice() {
            [a, b] => edges.push((*a, *b)),
            _ => {
                return Err(Error::input(format!(
                    "edge line {}: expected two site indices",
                    lineno + 1
                )))
            }
        }
    }
    Ok(edges)
}

/// The four-qubit Heisenberg block with boundary qubits {0, 2}.
pub fn heisenberg_block4() -> Result<SubsystemSpec> {
    SubsystemSpec::new(heisenberg(4, &BLOCK4_EDGES)?, vec![0, 2])
}

pub fn kagome12_edges() -> Vec<(usize, usize)> {
    parse_edges(KAGOME12_EDGES).expect("bundled edge list parses")
}

/// The 12-site kagome Heisenberg cluster with boundary qubits {0, 6}.
pub fn kagome12() -> Result<SubsystemSpec> {
    SubsystemSpec::new(heisenberg(12, &kagome12_edges())?, vec![0, 6])
}

/// Template for the coupling between consecutive blocks: `left` acts on the
/// lower-indexed block.
pub type CouplingTemplate = Vec<InteractionTerm>;

/// `X_aX_b + Y_aY_b + Z_aZ_b` with `a` on the left block and `b` on the
/// right one.
pub fn heisenberg_coupling(n_qubits: usize, left_qubit: usize, right_qubit: usize) -> Result<CouplingTemplate> {
    Pauli::XYZ
        .iter()
        .map(|&p| {
            Ok(InteractionTerm {
                coeff: 1.0,
                left: Observable::single(n_qubits, left_qubit, p)?,
                right: Observable::single(n_qubits, right_qubit, p)?,
            })
        })
        .collect()
}

/// `N` copies of a block coupled in a line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockChainProblem {
    pub block: SubsystemSpec,
    pub n_blocks: usize,
    pub coupling: CouplingTemplate,
    /// Also couple the last block to the first.
    pub periodic: bool,
}

impl BlockChainProblem {
    /// Instantiated couplings between consecutive blocks.
    pub fn couplings(&self) -> Vec<InteractionSpec> {
        let n = self.n_blocks;
        let mut pairs: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        if self.periodic && n > 2 {
            pairs.push((n - 1, 0));
        }
        pairs
            .into_iter()
            .map(|sites| InteractionSpec {
                sites,
                terms: self.coupling.clone(),
            })
            .collect()
    }

    pub fn n_qubits(&self) -> usize {
        self.block.n_qubits * self.n_blocks
    }
}

/// Open chain of `n_blocks` copies of `block`.
pub fn chain(block: SubsystemSpec, n_blocks: usize, coupling: CouplingTemplate) -> Result<BlockChainProblem> {
    if n_blocks == 0 {
        return Err(Error::input("a chain needs at least one block"));
    }
    let n = block.n_qubits;
    for t in &coupling {
        if t.left.n_qubits() != n || t.right.n_qubits() != n {
            return Err(Error::input(format!(
                "coupling factors act on {} and {} qubits, blocks have {n}",
                t.left.n_qubits(),
                t.right.n_qubits()
            )));
        }
    }
    let spec = InteractionSpec {
        sites: (0, 1),
        terms: coupling.clone(),
    };
    if !coupling.is_empty() && !spec.is_hermitian()? {
        return Err(Error::input("coupling template is not Hermitian"));
    }
    Ok(BlockChainProblem {
        block,
        n_blocks,
        coupling,
        periodic: false,
    })
}

/// The whole chain as one observable; block `b` occupies qubits
/// `b·n .. (b+1)·n`.
pub fn materialize_full(problem: &BlockChainProblem) -> Result<Observable> {
    let total = problem.n_qubits();
    if total > DEFAULT_STATE_QUBIT_CAP {
        return Err(Error::resource(format!(
            "{total} qubits exceed the {DEFAULT_STATE_QUBIT_CAP}-qubit oracle cap"
        )));
    }
    let n = problem.block.n_qubits;
    let register = |b: usize| -> Vec<usize> { (b * n..(b + 1) * n).collect() };
    let mut out = Observable::zero(total);
    for b in 0..problem.n_blocks {
        out = out.sum(&problem.block.hamiltonian.embed(total, &register(b))?)?;
    }
    for v in problem.couplings() {
        let (i, j) = v.sites;
        for t in &v.terms {
            let l = t.left.embed(total, &register(i))?;
            let r = t.right.embed(total, &register(j))?;
            let prod = crate::pauli::observable_product(&l, &r)?;
            out = out.sum(&prod.scaled(C64::new(t.coeff, 0.0)))?;
        }
    }
    Ok(out)
}

/// User-defined model file:
/// `{"n_qubits", "terms": [[coeff, "LETTERS"]], "boundary": [..],
/// "coupling": [[coeff, "LEFT", "RIGHT"]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub n_qubits: usize,
    pub terms: Vec<(f64, String)>,
    pub boundary: Vec<usize>,
    #[serde(default)]
    pub coupling: Vec<(f64, String, String)>,
}

fn string(n: usize, s: &str) -> Result<PauliString> {
    let p: PauliString = s.parse()?;
    if p.n_qubits() != n {
        return Err(Error::input(format!("string {s:?} is not {n} letters long")));
    }
    Ok(p)
}

fn letters(n: usize, s: &str) -> Result<Observable> {
    Observable::from_terms(n, [(C64::new(1.0, 0.0), string(n, s)?)])
}

impl ModelFile {
    pub fn into_model(self) -> Result<(SubsystemSpec, CouplingTemplate)> {
        let n = self.n_qubits;
        let mut h = Observable::zero(n);
        // term order is kept: it fixes the gate order of the block ansatz
        for (c, s) in &self.terms {
            h.push(C64::new(*c, 0.0), string(n, s)?)?;
        }
        let block = SubsystemSpec::new(h, self.boundary)?;
        let coupling = self
            .coupling
            .iter()
            .map(|(c, l, r)| {
                Ok(InteractionTerm {
                    coeff: *c,
                    left: letters(n, l)?,
                    right: letters(n, r)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok((block, coupling))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// A built-in block (`block4` or `kagome12`) or a model file, with its
/// default chain coupling.
pub fn load_model(name: &str) -> Result<(SubsystemSpec, CouplingTemplate)> {
    match name {
        "block4" => Ok((heisenberg_block4()?, heisenberg_coupling(4, 0, 2)?)),
        "kagome12" => Ok((kagome12()?, heisenberg_coupling(12, 0, 6)?)),
        path => ModelFile::load(Path::new(path))?.into_model(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::exact_ground_dense;
    use crate::simulator::{expectation, Statevector};

    #[test]
    fn block4_terms_and_energy() {
        let b = heisenberg_block4().unwrap();
        assert_eq!(b.hamiltonian.len(), 15);
        assert!(b.hamiltonian.is_hermitian());
        assert!(b.hamiltonian.terms().iter().all(|(c, _)| *c == C64::new(1.0, 0.0)));
        let e = exact_ground_dense(&b.hamiltonian).unwrap().ground_energy;
        assert!((e + 7.0).abs() < 1e-10);
        assert_eq!(b.excitations.len(), 7);
    }

    #[test]
    fn kagome_connectivity() {
        let edges = kagome12_edges();
        assert_eq!(edges.len(), 24);
        for q in 0..12 {
            let degree = edges.iter().filter(|&&(a, b)| a == q || b == q).count();
            assert_eq!(degree, 4, "site {q}");
        }
        let k = kagome12().unwrap();
        assert_eq!(k.boundary_qubits, vec![0, 6]);
        assert!(k.hamiltonian.is_hermitian());
    }

    #[test]
    fn materialized_chain_counts() {
        let (b, c) = load_model("block4").unwrap();
        let p = chain(b.clone(), 2, c.clone()).unwrap();
        let full = materialize_full(&p).unwrap();
        assert_eq!(full.n_qubits(), 8);
        assert_eq!(full.len(), 33);
        // every ZZ term is +1 on |0…0⟩
        let zero = Statevector::zero_state(8).unwrap();
        assert!((expectation(&zero, &full).unwrap() - 11.0).abs() < 1e-12);

        let single = materialize_full(&chain(b.clone(), 1, c.clone()).unwrap()).unwrap();
        assert_eq!(single.canonical(), b.hamiltonian.clone().canonical());
        assert!(chain(b, 0, c).is_err());
    }

    #[test]
    fn bad_coupling_indices() {
        assert!(heisenberg_coupling(4, 0, 4).is_err());
        let (b, _) = load_model("block4").unwrap();
        let c = heisenberg_coupling(3, 0, 2).unwrap();
        assert!(chain(b, 2, c).is_err());
    }

    #[test]
    fn model_file_round_trip() {
        let text = r#"{"n_qubits": 2, "terms": [[1.0, "XX"], [1.0, "YY"], [1.0, "ZZ"]],
                       "boundary": [1], "coupling": [[0.5, "IZ", "ZI"]]}"#;
        let m: ModelFile = serde_json::from_str(text).unwrap();
        let (block, coupling) = m.into_model().unwrap();
        assert_eq!(block.hamiltonian.len(), 3);
        assert_eq!(block.excitations.len(), 4);
        assert_eq!(coupling.len(), 1);
        let e = exact_ground_dense(&block.hamiltonian).unwrap().ground_energy;
        assert!((e + 3.0).abs() < 1e-12);
    }
}
