//! End-to-end runs: first VQE, basis construction, effective problem, second
//! VQE, optional recursion and reference solvers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::effective::{
    build_effective_problem, build_local_basis, default_excitations, local_product_energy,
    recurse, resource_estimate, solve_effective, EffectiveProblem, LocalBasis, RecursionOutcome,
    ResourceReport, SecondStageAnsatz, SiteInput, SubsystemSpec,
};
use crate::error::{Error, Result};
use crate::models::{chain, load_model, materialize_full, BlockChainProblem};
use crate::oracle::{
    exact_ground_dense, exact_ground_effective, imaginary_time_evolution, lanczos_ground,
    random_state, IteConfig, LanczosConfig, SpectrumResult,
};
use crate::pauli::{Pauli, DEFAULT_DENSE_QUBIT_CAP};
use crate::simulator::{Statevector, DEFAULT_STATE_QUBIT_CAP};
use crate::vqe::{build_hardware_efficient, fidelity, run_vqe, GradientMethod, OptimizationResult, VqeConfig};

/// Which reference solvers a pipeline run invokes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleToggles {
    /// Dense diagonalization of one block (gives the fidelity of the first VQE).
    pub dense: bool,
    /// Lanczos on the whole materialized system.
    pub lanczos: bool,
    /// Imaginary time evolution on the whole materialized system.
    pub ite: bool,
    /// Exact ground energy of the effective Hamiltonian.
    pub effective_exact: bool,
}

impl Default for OracleToggles {
    fn default() -> Self {
        Self {
            dense: true,
            lanczos: false,
            ite: false,
            effective_exact: true,
        }
    }
}

/// Second-stage VQE settings: four layers, four restarts, adjoint gradient.
pub fn second_stage_defaults() -> VqeConfig {
    VqeConfig {
        depth: 4,
        restarts: 4,
        gradient: GradientMethod::Adjoint,
        ..VqeConfig::default()
    }
}

/// A complete, serializable description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `block4`, `kagome12`, or the path of a model file.
    pub model: String,
    pub n_blocks: usize,
    pub first_vqe: VqeConfig,
    /// Paulis applied to each boundary qubit to form the local basis.
    pub excitation_paulis: String,
    pub second_ansatz: SecondStageAnsatz,
    pub second_vqe: VqeConfig,
    pub oracles: OracleToggles,
    pub lanczos: LanczosConfig,
    pub ite: IteConfig,
    /// Groupings of sites for further levels; empty runs a single level. The
    /// last grouping must hold every site in one group.
    pub levels: Vec<Vec<Vec<usize>>>,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: "block4".into(),
            n_blocks: 2,
            first_vqe: VqeConfig::default(),
            excitation_paulis: "XYZ".into(),
            second_ansatz: SecondStageAnsatz::EffectiveGenerated,
            second_vqe: second_stage_defaults(),
            oracles: OracleToggles::default(),
            lanczos: LanczosConfig::default(),
            ite: IteConfig::default(),
            levels: Vec::new(),
            output: None,
        }
    }
}

impl RunConfig {
    /// Applies a seed override to both VQE stages.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.first_vqe.seed_base = seed;
        self.second_vqe.seed_base = seed;
        self
    }

    fn paulis(&self) -> Result<Vec<Pauli>> {
        self.excitation_paulis
            .chars()
            .map(|c| {
                Pauli::from_char(c.to_ascii_uppercase())
                    .filter(|p| *p != Pauli::I)
                    .ok_or_else(|| Error::input(format!("bad excitation Pauli {c:?}")))
            })
            .collect()
    }

    /// The chain problem named by the configuration.
    pub fn problem(&self) -> Result<BlockChainProblem> {
        let (block, coupling) = load_model(&self.model)?;
        let excitations = default_excitations(block.n_qubits, &block.boundary_qubits, &self.paulis()?)?;
        let block = SubsystemSpec::with_excitations(block.hamiltonian, block.boundary_qubits, excitations)?;
        chain(block, self.n_blocks, coupling)
    }
}

/// First-stage result for the (shared) block.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockSolution {
    pub result: OptimizationResult,
    pub state: Statevector,
    pub exact_energy: Option<f64>,
    pub degeneracy: Option<usize>,
    pub fidelity: Option<f64>,
    pub edges: Vec<(usize, usize)>,
}

/// Edges of the block's interaction graph, in first-appearance order.
pub fn interaction_edges(spec: &SubsystemSpec) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for (_, s) in spec.hamiltonian.terms() {
        let support: Vec<usize> = (0..spec.n_qubits)
            .filter(|&q| s.support() >> q & 1 == 1)
            .collect();
        if let [a, b] = support[..] {
            if !edges.contains(&(a, b)) {
                edges.push((a, b));
            }
        }
    }
    edges
}

/// VQE on one block with the hardware-efficient ansatz over its own
/// interaction graph; every block of a chain shares this solution.
pub fn solve_block(config: &RunConfig, problem: &BlockChainProblem, with_oracle: bool) -> Result<BlockSolution> {
    let spec = &problem.block;
    let edges = interaction_edges(spec);
    let ansatz = build_hardware_efficient(spec.n_qubits, config.first_vqe.depth, &edges)?;
    let initial = Statevector::zero_state(spec.n_qubits)?;
    let result = run_vqe(&ansatz, &spec.hamiltonian, &initial, &config.first_vqe)?;
    let state = ansatz.prepare(&result.best_params, &initial)?;
    let mut out = BlockSolution {
        result,
        state,
        exact_energy: None,
        degeneracy: None,
        fidelity: None,
        edges,
    };
    if with_oracle && spec.n_qubits <= DEFAULT_DENSE_QUBIT_CAP {
        let exact = exact_ground_dense(&spec.hamiltonian)?;
        out.fidelity = Some(fidelity(&out.state, &exact.ground_subspace)?);
        out.exact_energy = Some(exact.ground_energy);
        out.degeneracy = Some(exact.degeneracy);
    }
    Ok(out)
}

/// The local basis shared by all blocks and the effective problem of the
/// chain.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EffectiveArtifact {
    pub basis: LocalBasis,
    pub problem: EffectiveProblem,
    pub local_energy: f64,
}

pub fn build_effective(problem: &BlockChainProblem, block: &BlockSolution) -> Result<EffectiveArtifact> {
    let basis = build_local_basis(&block.state, &problem.block.excitations)?;
    let sites: Vec<SiteInput<'_>> = (0..problem.n_blocks)
        .map(|_| SiteInput {
            basis: &basis,
            hamiltonian: &problem.block.hamiltonian,
        })
        .collect();
    let effective = build_effective_problem(&sites, &problem.couplings())?;
    Ok(EffectiveArtifact {
        local_energy: local_product_energy(&effective),
        basis,
        problem: effective,
    })
}

/// Second-stage result, possibly through several levels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SecondStageArtifact {
    pub energy: f64,
    pub result: Option<OptimizationResult>,
    pub recursion: Option<RecursionOutcome>,
}

pub fn solve_second_stage(config: &RunConfig, effective: &EffectiveArtifact) -> Result<SecondStageArtifact> {
    if config.levels.is_empty() {
        let sol = solve_effective(&effective.problem, config.second_ansatz, &config.second_vqe)?;
        Ok(SecondStageArtifact {
            energy: sol.result.best_energy,
            result: Some(sol.result),
            recursion: None,
        })
    } else {
        let outcome = recurse(
            &effective.problem,
            &config.levels,
            config.second_ansatz,
            &config.second_vqe,
        )?;
        Ok(SecondStageArtifact {
            energy: outcome.energy,
            result: None,
            recursion: Some(outcome),
        })
    }
}

/// Whole-system reference energies.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub effective_exact: Option<f64>,
    pub lanczos_energy: Option<f64>,
    pub ite_energy: Option<f64>,
    /// Reasons for oracles that were requested but skipped.
    pub skipped: Vec<String>,
}

pub fn run_oracles(config: &RunConfig, problem: &BlockChainProblem, effective: Option<&EffectiveArtifact>) -> Result<OracleReport> {
    let mut report = OracleReport::default();
    if config.oracles.effective_exact {
        if let Some(eff) = effective {
            match exact_ground_effective(&eff.problem) {
                Ok(r) => report.effective_exact = Some(r.ground_energy),
                Err(Error::Resource(msg)) => report.skipped.push(format!("effective: {msg}")),
                Err(e) => return Err(e),
            }
        }
    }
    if config.oracles.lanczos || config.oracles.ite {
        let full = match materialize_full(problem) {
            Ok(f) => Some(f),
            Err(Error::Resource(msg)) => {
                report.skipped.push(format!("full system: {msg}"));
                None
            }
            Err(e) => return Err(e),
        };
        if let Some(full) = full {
            if config.oracles.lanczos {
                report.lanczos_energy = Some(lanczos_ground(&full, &config.lanczos)?.ground_energy);
            }
            if config.oracles.ite {
                let start = random_state(full.n_qubits(), config.ite.seed)?;
                report.ite_energy = Some(imaginary_time_evolution(&full, &start, &config.ite)?.energy);
            }
        }
    }
    Ok(report)
}

/// The results document of a pipeline run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResults {
    pub model: String,
    pub n_blocks: usize,
    pub physical_qubits: usize,
    pub first_vqe_energy: f64,
    pub first_vqe_iterations: usize,
    pub block_exact_energy: Option<f64>,
    pub fidelity: Option<f64>,
    pub basis_size: usize,
    pub encoded_qubits: usize,
    pub shift: f64,
    pub local_energy: f64,
    pub effective_exact: Option<f64>,
    pub deep_vqe_energy: f64,
    pub recursion: Option<RecursionOutcome>,
    pub lanczos_energy: Option<f64>,
    pub ite_energy: Option<f64>,
    pub skipped: Vec<String>,
    pub seeds: BTreeMap<String, u64>,
    /// Seconds per stage; the only field that differs between reruns.
    pub wall_times: BTreeMap<String, f64>,
}

fn timed<T>(times: &mut BTreeMap<String, f64>, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f().map_err(|e| e.in_stage(stage))?;
    times.insert(stage.to_string(), start.elapsed().as_secs_f64());
    Ok(out)
}

/// Pipeline stages in execution order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    SolveBlock,
    BuildEffective,
    SolveEffective,
    Oracle,
}

impl Stage {
    pub const ALL: [Stage; 4] = [
        Stage::SolveBlock,
        Stage::BuildEffective,
        Stage::SolveEffective,
        Stage::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::SolveBlock => "solve-block",
            Stage::BuildEffective => "build-effective",
            Stage::SolveEffective => "solve-effective",
            Stage::Oracle => "oracle",
        }
    }

    /// File name of the stage's artifact inside an artifact directory.
    pub fn artifact(self) -> String {
        format!("{}.json", self.name())
    }
}

impl std::str::FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::input(format!("unknown stage {s:?}")))
    }
}

/// Loads `stage`'s artifact from `dir` if present, otherwise computes it and
/// stores it there.
fn cached<T: Serialize + DeserializeOwned>(
    dir: Option<&Path>,
    stage: Stage,
    times: &mut BTreeMap<String, f64>,
    compute: impl FnOnce() -> Result<T>,
) -> Result<T> {
    let path = dir.map(|d| d.join(stage.artifact()));
    if let Some(p) = path.as_ref().filter(|p| p.exists()) {
        let text = std::fs::read_to_string(p).map_err(|e| Error::from(e).in_stage(stage.name()))?;
        return serde_json::from_str(&text).map_err(|e| Error::from(e).in_stage(stage.name()));
    }
    let value = timed(times, stage.name(), compute)?;
    if let Some(p) = path {
        std::fs::write(&p, serde_json::to_string(&value)?).map_err(|e| Error::from(e).in_stage(stage.name()))?;
    }
    Ok(value)
}

/// Records the configuration in an artifact directory, refusing to mix
/// artifacts of different configurations.
fn claim_directory(dir: &Path, config: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join("config.json");
    let mut canonical = config.clone();
    canonical.output = None;
    let text = serde_json::to_string_pretty(&canonical)?;
    if path.exists() {
        let existing: RunConfig = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
        if existing != canonical {
            return Err(Error::input(format!(
                "{} holds artifacts of a different configuration",
                dir.display()
            )));
        }
    } else {
        std::fs::write(path, text)?;
    }
    Ok(())
}

/// Runs the stages up to and including `stop_after` (all when `None`),
/// reusing and saving artifacts in `artifacts` when given. Returns the
/// results document only when every stage ran.
pub fn run_staged(
    config: &RunConfig,
    artifacts: Option<&Path>,
    stop_after: Option<Stage>,
) -> Result<Option<RunResults>> {
    if let Some(dir) = artifacts {
        claim_directory(dir, config)?;
    }
    let last = stop_after.unwrap_or(Stage::Oracle);
    let mut times = BTreeMap::new();
    let problem = timed(&mut times, "model", || config.problem())?;
    let block: BlockSolution = cached(artifacts, Stage::SolveBlock, &mut times, || {
        solve_block(config, &problem, config.oracles.dense)
    })?;
    if last == Stage::SolveBlock {
        return Ok(None);
    }
    let effective: EffectiveArtifact = cached(artifacts, Stage::BuildEffective, &mut times, || {
        build_effective(&problem, &block)
    })?;
    if last == Stage::BuildEffective {
        return Ok(None);
    }
    let second: SecondStageArtifact = cached(artifacts, Stage::SolveEffective, &mut times, || {
        solve_second_stage(config, &effective)
    })?;
    if last == Stage::SolveEffective {
        return Ok(None);
    }
    let oracles: OracleReport = cached(artifacts, Stage::Oracle, &mut times, || {
        run_oracles(config, &problem, Some(&effective))
    })?;
    let mut seeds = BTreeMap::new();
    seeds.insert("first_vqe".to_string(), block.result.seed);
    if let Some(r) = &second.result {
        seeds.insert("second_vqe".to_string(), r.seed);
    }
    Ok(Some(RunResults {
        model: config.model.clone(),
        n_blocks: config.n_blocks,
        physical_qubits: problem.n_qubits(),
        first_vqe_energy: block.result.best_energy,
        first_vqe_iterations: block.result.iterations,
        block_exact_energy: block.exact_energy,
        fidelity: block.fidelity,
        basis_size: effective.basis.k,
        encoded_qubits: effective.problem.n_qubits(),
        shift: effective.problem.total_shift(),
        local_energy: effective.local_energy,
        effective_exact: oracles.effective_exact,
        deep_vqe_energy: second.energy,
        recursion: second.recursion,
        lanczos_energy: oracles.lanczos_energy,
        ite_energy: oracles.ite_energy,
        skipped: oracles.skipped,
        seeds,
        wall_times: times,
    }))
}

/// Executes every stage; errors carry the name of the failing stage.
pub fn run_pipeline(config: &RunConfig) -> Result<RunResults> {
    Ok(run_staged(config, None, None)?.expect("all stages ran"))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"))
}

impl RunResults {
    /// Aligned two-column text form.
    pub fn to_text(&self) -> String {
        let rows = [
            ("model", self.model.clone()),
            ("blocks", self.n_blocks.to_string()),
            ("physical qubits", self.physical_qubits.to_string()),
            ("first VQE energy", format!("{:.6}", self.first_vqe_energy)),
            ("block exact energy", fmt_opt(self.block_exact_energy)),
            ("fidelity", fmt_opt(self.fidelity)),
            ("basis size K", self.basis_size.to_string()),
            ("encoded qubits", self.encoded_qubits.to_string()),
            ("local energy", format!("{:.6}", self.local_energy)),
            ("effective exact", fmt_opt(self.effective_exact)),
            ("deep VQE energy", format!("{:.6}", self.deep_vqe_energy)),
            ("Lanczos energy", fmt_opt(self.lanczos_energy)),
            ("ITE energy", fmt_opt(self.ite_energy)),
        ];
        let mut out = String::new();
        for (k, v) in rows {
            let _ = writeln!(out, "{k:<20} {v:>14}");
        }
        for s in &self.skipped {
            let _ = writeln!(out, "skipped: {s}");
        }
        out
    }
}

/// Reference values of the 4×N Heisenberg table: (N, Deep VQE, Local,
/// Effective, ITE).
pub const TABLE1_REFERENCE: [(usize, f64, f64, Option<f64>, Option<f64>); 6] = [
    (2, -14.46, -14.00, Some(-14.46), Some(-14.46)),
    (3, -21.89, -21.00, Some(-21.89), Some(-21.92)),
    (4, -29.31, -28.00, Some(-29.32), Some(-29.39)),
    (5, -36.70, -35.00, Some(-36.75), Some(-36.85)),
    (6, -44.13, -42.00, None, Some(-44.31)),
    (8, -59.02, -56.00, None, None),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Table1Config {
    pub sizes: Vec<usize>,
    pub first_vqe: VqeConfig,
    pub second_vqe: VqeConfig,
    /// Rows whose encoded register exceeds this report NA for Deep VQE.
    pub max_vqe_qubits: usize,
    /// Whole-system oracles run only up to this many qubits.
    pub max_oracle_qubits: usize,
    /// Up to this size the whole-system energy comes from imaginary time
    /// evolution; above it from Lanczos.
    pub ite_max_qubits: usize,
    pub lanczos: LanczosConfig,
    pub ite: IteConfig,
}

impl Default for Table1Config {
    fn default() -> Self {
        Self {
            sizes: vec![1, 2, 3, 4, 5, 6, 8],
            first_vqe: VqeConfig::default(),
            second_vqe: second_stage_defaults(),
            max_vqe_qubits: 15,
            max_oracle_qubits: 20,
            ite_max_qubits: 12,
            lanczos: LanczosConfig::default(),
            ite: IteConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub n_blocks: usize,
    pub deep_vqe: Option<f64>,
    pub local: Option<f64>,
    pub effective: Option<f64>,
    pub ite: Option<f64>,
    pub notes: Vec<String>,
}

fn cell<T>(notes: &mut Vec<String>, what: &str, r: Result<T>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(e) => {
            notes.push(format!("{what}: {e}"));
            None
        }
    }
}

/// Runs the 4×N table. The block VQE is solved once and shared by all rows.
pub fn reproduce_table1(config: &Table1Config) -> Result<Vec<TableRow>> {
    let run = RunConfig {
        first_vqe: config.first_vqe.clone(),
        second_vqe: config.second_vqe.clone(),
        n_blocks: 1,
        ..RunConfig::default()
    };
    let block = solve_block(&run, &run.problem()?, false).map_err(|e| e.in_stage("solve-block"))?;
    let mut rows = Vec::new();
    for &n in &config.sizes {
        let mut notes = Vec::new();
        let run = RunConfig {
            n_blocks: n,
            ..run.clone()
        };
        let problem = run.problem()?;
        let eff = cell(&mut notes, "effective", build_effective(&problem, &block));
        let local = eff.as_ref().map(|e| e.local_energy);
        let effective = eff
            .as_ref()
            .and_then(|e| cell(&mut notes, "effective exact", exact_ground_effective(&e.problem).map(|r| r.ground_energy)));
        let deep_vqe = eff.as_ref().and_then(|e| {
            if e.problem.n_qubits() > config.max_vqe_qubits {
                notes.push(format!(
                    "deep VQE: {} encoded qubits exceed the configured {}",
                    e.problem.n_qubits(),
                    config.max_vqe_qubits
                ));
                return None;
            }
            cell(
                &mut notes,
                "deep VQE",
                solve_effective(&e.problem, SecondStageAnsatz::EffectiveGenerated, &config.second_vqe)
                    .map(|s| s.result.best_energy),
            )
        });
        let ite = if problem.n_qubits() > config.max_oracle_qubits.min(DEFAULT_STATE_QUBIT_CAP) {
            notes.push(format!(
                "ITE: {} qubits exceed the configured {}",
                problem.n_qubits(),
                config.max_oracle_qubits
            ));
            None
        } else {
            let energy = materialize_full(&problem).and_then(|full| {
                if full.n_qubits() <= config.ite_max_qubits {
                    let start = random_state(full.n_qubits(), config.ite.seed)?;
                    Ok(imaginary_time_evolution(&full, &start, &config.ite)?.energy)
                } else {
                    Ok(lanczos_ground(&full, &config.lanczos)?.ground_energy)
                }
            });
            cell(&mut notes, "ITE", energy)
        };
        rows.push(TableRow {
            n_blocks: n,
            deep_vqe,
            local,
            effective,
            ite,
            notes,
        });
    }
    Ok(rows)
}

fn csv_cell(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.4}"))
}

/// CSV with the computed columns followed by the reference columns.
pub fn table1_csv(rows: &[TableRow]) -> String {
    let mut out = String::from("system,DeepVQE,Local,Effective,ITE,ref_DeepVQE,ref_Local,ref_Effective,ref_ITE\n");
    for r in rows {
        let reference = TABLE1_REFERENCE.iter().find(|t| t.0 == r.n_blocks);
        let refs = match reference {
            Some(&(_, d, l, e, i)) => [Some(d), Some(l), e, i].map(csv_cell).join(","),
            None => "NA,NA,NA,NA".to_string(),
        };
        let _ = writeln!(
            out,
            "4x{},{},{},{},{},{}",
            r.n_blocks,
            csv_cell(r.deep_vqe),
            csv_cell(r.local),
            csv_cell(r.effective),
            csv_cell(r.ite),
            refs
        );
    }
    out
}

/// Aligned table with reference values in brackets.
pub fn table1_text(rows: &[TableRow]) -> String {
    let mut out = format!(
        "{:<7} {:>20} {:>20} {:>20} {:>20}\n",
        "system", "Deep VQE", "Local", "Effective", "ITE"
    );
    for r in rows {
        let reference = TABLE1_REFERENCE.iter().find(|t| t.0 == r.n_blocks);
        let pair = |v: Option<f64>, rf: Option<f64>| match rf {
            Some(x) => format!("{} [{x:.2}]", csv_cell(v)),
            None => csv_cell(v),
        };
        let (d, l, e, i) = match reference {
            Some(&(_, d, l, e, i)) => (Some(d), Some(l), e, i),
            None => (None, None, None, None),
        };
        let _ = writeln!(
            out,
            "{:<7} {:>20} {:>20} {:>20} {:>20}",
            format!("4x{}", r.n_blocks),
            pair(r.deep_vqe, d),
            pair(r.local, l),
            pair(r.effective, e),
            pair(r.ite, i)
        );
        for n in &r.notes {
            let _ = writeln!(out, "        note: {n}");
        }
    }
    out
}

/// Resource report for a plan of block sides.
pub fn estimate_resources(plan: &[usize]) -> Result<ResourceReport> {
    resource_estimate(plan, 3)
}

pub fn resources_text(report: &ResourceReport) -> String {
    let mut out = format!(
        "{:>5} {:>5} {:>7} {:>6} {:>4} {:>10} {:>10} {:>14} {:>16}\n",
        "level", "side", "covered", "K", "q", "VQE qubits", "exports K", "Pauli terms", "matrix elements"
    );
    for l in &report.levels {
        let _ = writeln!(
            out,
            "{:>5} {:>5} {:>7} {:>6} {:>4} {:>10} {:>10} {:>14} {:>16}",
            l.level,
            l.block_side,
            l.covered_side,
            l.site_k,
            l.qubits_per_site,
            l.vqe_qubits,
            l.exported_k,
            l.pauli_terms,
            l.matrix_elements
        );
    }
    let _ = writeln!(
        out,
        "physical qubits: {}, largest VQE: {} qubits",
        report.physical_qubits, report.max_vqe_qubits
    );
    out
}

/// Spectrum of one block, for the `oracle` stage.
pub fn block_spectrum(config: &RunConfig) -> Result<SpectrumResult> {
    let problem = config.problem()?;
    exact_ground_dense(&problem.block.hamiltonian)
}
