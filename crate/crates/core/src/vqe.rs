//! Parameterized circuits, energy cost, gradients and BFGS with restarts.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm_sqr, vdot};
use crate::simulator::{
    apply_dense, apply_exchange, apply_single, check_targets, ry, rz, Amplitudes,
    Gate, HermitianGenerator, Operator, Statevector,
};
use crate::C64;

#[derive(Debug, Clone)]
enum Slot {
    /// Parameters `[α, β, γ]` at `offset..offset + 3`.
    Euler { target: usize, offset: usize },
    Exchange { a: usize, b: usize, offset: usize },
    Generated {
        targets: Vec<usize>,
        generator: Arc<HermitianGenerator>,
        offset: usize,
    },
}

/// A parameterized circuit with a flat parameter vector.
///
/// Every gate is the identity at zero parameters.
#[derive(Debug, Clone)]
pub struct Ansatz {
    n_qubits: usize,
    depth: usize,
    edges: Vec<(usize, usize)>,
    slots: Vec<Slot>,
    n_params: usize,
}

impl Ansatz {
    /// A circuit with no gates; extend it with the `push_*` methods.
    pub fn empty(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            depth: 0,
            edges: Vec::new(),
            slots: Vec::new(),
            n_params: 0,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn set_depth(&mut self, depth: usize) {
        self.depth = depth;
    }

    /// Appends an arbitrary single-qubit gate (three Euler angles).
    pub fn push_single(&mut self, target: usize) -> Result<()> {
        check_targets(&[target], self.n_qubits)?;
        self.slots.push(Slot::Euler {
            target,
            offset: self.n_params,
        });
        self.n_params += 3;
        Ok(())
    }

    /// Appends `exp(−iθ(XX + YY + ZZ))` on a qubit pair.
    pub fn push_exchange(&mut self, a: usize, b: usize) -> Result<()> {
        check_targets(&[a, b], self.n_qubits)?;
        self.slots.push(Slot::Exchange {
            a,
            b,
            offset: self.n_params,
        });
        self.n_params += 1;
        Ok(())
    }

    /// Appends `exp(−iθG)` for a Hermitian `G` on `targets` (bit `b` of the
    /// matrix index is `targets[b]`).
    pub fn push_generated(&mut self, targets: &[usize], generator: &crate::CMatrix) -> Result<()> {
        check_targets(targets, self.n_qubits)?;
        let dim = 1usize << targets.len();
        if generator.nrows() != dim || generator.ncols() != dim {
            return Err(Error::input("generator size does not match its targets"));
        }
        let spectral = HermitianGenerator::new(generator.clone())?;
        self.slots.push(Slot::Generated {
            targets: targets.to_vec(),
            generator: Arc::new(spectral),
            offset: self.n_params,
        });
        self.n_params += 1;
        Ok(())
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params {
            return Err(Error::input(format!(
                "{} parameters for an ansatz with {}",
                params.len(),
                self.n_params
            )));
        }
        Ok(())
    }

    /// Binds parameters to concrete gates, in application order.
    pub fn gates(&self, params: &[f64]) -> Result<Vec<Gate>> {
        self.check_params(params)?;
        Ok(self
            .slots
            .iter()
            .map(|slot| match slot {
                Slot::Euler { target, offset } => Gate::SingleQubit {
                    target: *target,
                    angles: [params[*offset], params[offset + 1], params[offset + 2]],
                },
                Slot::Exchange { a, b, offset } => Gate::HeisenbergPair {
                    targets: (*a, *b),
                    theta: params[*offset],
                },
                Slot::Generated {
                    targets,
                    generator,
                    offset,
                } => Gate::DenseBlock {
                    targets: targets.clone(),
                    matrix: generator.unitary(params[*offset]),
                },
            })
            .collect())
    }

    /// Runs the circuit on `initial`.
    pub fn prepare(&self, params: &[f64], initial: &Statevector) -> Result<Statevector> {
        self.check_params(params)?;
        if initial.n_qubits() != self.n_qubits {
            return Err(Error::input(format!(
                "{}-qubit initial state for a {}-qubit ansatz",
                initial.n_qubits(),
                self.n_qubits
            )));
        }
        let mut state = initial.clone();
        for rot in self.rotations() {
            rot.apply(state.amplitudes_mut(), params[rot.param], false);
        }
        Ok(state)
    }

    /// The circuit as a sequence of one-parameter rotations `exp(−iθG)`.
    fn rotations(&self) -> Vec<Rotation<'_>> {
        let mut out = Vec::new();
        for slot in &self.slots {
            match slot {
                Slot::Euler { target, offset } => {
                    // Rz(α)·Ry(β)·Rz(γ) acts with Rz(γ) first.
                    out.push(Rotation {
                        kind: RotationKind::HalfZ(*target),
                        param: offset + 2,
                    });
                    out.push(Rotation {
                        kind: RotationKind::HalfY(*target),
                        param: offset + 1,
                    });
                    out.push(Rotation {
                        kind: RotationKind::HalfZ(*target),
                        param: *offset,
                    });
                }
                Slot::Exchange { a, b, offset } => out.push(Rotation {
                    kind: RotationKind::Exchange(*a, *b),
                    param: *offset,
                }),
                Slot::Generated {
                    targets,
                    generator,
                    offset,
                } => out.push(Rotation {
                    kind: RotationKind::Generated(targets, generator),
                    param: *offset,
                }),
            }
        }
        out
    }
}

/// The hardware-efficient circuit: each cycle applies an arbitrary
/// single-qubit gate to every qubit in ascending order, then an exchange gate
/// on every edge in the given order.
pub fn build_hardware_efficient(
    n_qubits: usize,
    depth: usize,
    edges: &[(usize, usize)],
) -> Result<Ansatz> {
    if depth == 0 {
        return Err(Error::input("ansatz depth must be at least 1"));
    }
    let mut ansatz = Ansatz::empty(n_qubits);
    for _ in 0..depth {
        for q in 0..n_qubits {
            ansatz.push_single(q)?;
        }
        for &(a, b) in edges {
            ansatz.push_exchange(a, b)?;
        }
    }
    ansatz.depth = depth;
    ansatz.edges = edges.to_vec();
    Ok(ansatz)
}

enum RotationKind<'a> {
    /// Generator `Z/2`.
    HalfZ(usize),
    /// Generator `Y/2`.
    HalfY(usize),
    /// Generator `XX + YY + ZZ`.
    Exchange(usize, usize),
    Generated(&'a [usize], &'a HermitianGenerator),
}

struct Rotation<'a> {
    kind: RotationKind<'a>,
    param: usize,
}

impl Rotation<'_> {
    /// Applies `exp(−iθG)`, or its inverse when `inverse` is set.
    fn apply(&self, amps: &mut [C64], theta: f64, inverse: bool) {
        let theta = if inverse { -theta } else { theta };
        match self.kind {
            RotationKind::HalfZ(q) => apply_single(amps, q, &rz(theta)),
            RotationKind::HalfY(q) => apply_single(amps, q, &ry(theta)),
            RotationKind::Exchange(a, b) => apply_exchange(amps, a, b, theta),
            RotationKind::Generated(targets, block) => {
                apply_dense(amps, targets, &block.unitary(theta))
            }
        }
    }

    /// `⟨bra|G|ket⟩`.
    fn generator_element(&self, bra: &[C64], ket: &[C64]) -> C64 {
        match self.kind {
            RotationKind::HalfZ(q) => {
                let m = 1usize << q;
                ket.iter()
                    .zip(bra)
                    .enumerate()
                    .map(|(j, (k, b))| {
                        let v = b.conj() * k;
                        if j & m == 0 {
                            v * 0.5
                        } else {
                            v * -0.5
                        }
                    })
                    .sum()
            }
            RotationKind::HalfY(q) => {
                // Y/2 |0⟩ = i/2 |1⟩, Y/2 |1⟩ = −i/2 |0⟩
                let m = 1usize << q;
                let mut acc = C64::default();
                for j in 0..ket.len() {
                    if j & m == 0 {
                        acc += bra[j | m].conj() * ket[j] * C64::new(0.0, 0.5);
                        acc += bra[j].conj() * ket[j | m] * C64::new(0.0, -0.5);
                    }
                }
                acc
            }
            RotationKind::Exchange(a, b) => {
                // XX + YY + ZZ = 2·SWAP − I
                let (ma, mb) = (1usize << a, 1usize << b);
                let mut acc = C64::default();
                for j in 0..ket.len() {
                    let bit_a = (j & ma != 0) as usize;
                    let bit_b = (j & mb != 0) as usize;
                    let swapped = if bit_a == bit_b { j } else { j ^ ma ^ mb };
                    acc += bra[swapped].conj() * ket[j] * 2.0 - bra[j].conj() * ket[j];
                }
                acc
            }
            RotationKind::Generated(targets, block) => {
                let mut applied = ket.to_vec();
                apply_dense(&mut applied, targets, block.matrix());
                vdot(bra, &applied)
            }
        }
    }
}

fn check_problem(ansatz: &Ansatz, op: &dyn Operator, initial: &Statevector) -> Result<()> {
    if op.n_qubits() != ansatz.n_qubits || initial.n_qubits() != ansatz.n_qubits {
        return Err(Error::input(format!(
            "ansatz on {} qubits, operator on {}, initial state on {}",
            ansatz.n_qubits,
            op.n_qubits(),
            initial.n_qubits()
        )));
    }
    if !op.is_hermitian() {
        return Err(Error::input("cost operator is not Hermitian"));
    }
    Ok(())
}

/// Energy `⟨init|U(θ)† O U(θ)|init⟩`.
pub fn cost(
    ansatz: &Ansatz,
    params: &[f64],
    op: &dyn Operator,
    initial: &Statevector,
) -> Result<f64> {
    check_problem(ansatz, op, initial)?;
    let state = ansatz.prepare(params, initial)?;
    Ok(op.expectation_value(state.amplitudes()).re)
}

/// Central-difference gradient with step `step`.
pub fn gradient_fd(
    mut f: impl FnMut(&[f64]) -> Result<f64>,
    params: &[f64],
    step: f64,
) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(Error::input("finite-difference step must be positive"));
    }
    let mut x = params.to_vec();
    let mut grad = Vec::with_capacity(params.len());
    for j in 0..params.len() {
        x[j] = params[j] + step;
        let plus = f(&x)?;
        x[j] = params[j] - step;
        let minus = f(&x)?;
        x[j] = params[j];
        grad.push((plus - minus) / (2.0 * step));
    }
    Ok(grad)
}

/// Energy and its exact gradient by reverse-mode propagation through the
/// circuit: one forward pass, then one backward pass carrying `O|ψ⟩`.
pub fn adjoint_gradient(
    ansatz: &Ansatz,
    params: &[f64],
    op: &dyn Operator,
    initial: &Statevector,
) -> Result<(f64, Vec<f64>)> {
    check_problem(ansatz, op, initial)?;
    let state = ansatz.prepare(params, initial)?;
    let mut psi = state.into_amplitudes();
    let mut lambda = op.apply_to(&psi);
    let energy = vdot(&psi, &lambda).re;
    let mut grad = vec![0.0; params.len()];
    for rot in ansatz.rotations().iter().rev() {
        let theta = params[rot.param];
        grad[rot.param] += 2.0 * rot.generator_element(&lambda, &psi).im;
        rot.apply(&mut psi, theta, true);
        rot.apply(&mut lambda, theta, true);
    }
    Ok((energy, grad))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMethod {
    #[default]
    CentralDifference,
    Adjoint,
}

/// Optimizer settings shared by both VQE stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VqeConfig {
    pub depth: usize,
    /// Number of randomized starts; zero means one run from all-zero parameters.
    pub restarts: usize,
    pub seed_base: u64,
    pub tol_grad: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    /// Initial parameters are drawn uniformly from `[−init_range, init_range]`.
    pub init_range: f64,
    pub gradient: GradientMethod,
}

impl Default for VqeConfig {
    fn default() -> Self {
        Self {
            depth: 2,
            restarts: 10,
            seed_base: 0,
            tol_grad: 1e-6,
            max_iter: 2000,
            fd_step: 1e-5,
            init_range: 0.1,
            gradient: GradientMethod::CentralDifference,
        }
    }
}

impl VqeConfig {
    pub fn bfgs(&self) -> BfgsConfig {
        BfgsConfig {
            tol_grad: self.tol_grad,
            max_iter: self.max_iter,
            fd_step: self.fd_step,
            ..BfgsConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BfgsConfig {
    pub tol_grad: f64,
    pub max_iter: usize,
    pub fd_step: f64,
    /// Sufficient-decrease constant of the Armijo condition.
    pub armijo: f64,
    pub max_backtracks: usize,
}

impl Default for BfgsConfig {
    fn default() -> Self {
        Self {
            tol_grad: 1e-6,
            max_iter: 2000,
            fd_step: 1e-5,
            armijo: 1e-4,
            max_backtracks: 60,
        }
    }
}

/// Something BFGS can minimize.
pub trait Objective {
    fn value(&mut self, x: &[f64]) -> Result<f64>;
    fn value_and_gradient(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)>;
}

/// A plain cost closure differentiated by central differences.
pub struct FiniteDifference<F> {
    pub cost: F,
    pub step: f64,
}

impl<F: FnMut(&[f64]) -> Result<f64>> Objective for FiniteDifference<F> {
    fn value(&mut self, x: &[f64]) -> Result<f64> {
        (self.cost)(x)
    }

    fn value_and_gradient(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let f = (self.cost)(x)?;
        let g = gradient_fd(&mut self.cost, x, self.step)?;
        Ok((f, g))
    }
}

/// The VQE energy of an ansatz as an [`Objective`].
pub struct CircuitObjective<'a> {
    pub ansatz: &'a Ansatz,
    pub operator: &'a dyn Operator,
    pub initial: &'a Statevector,
    pub gradient: GradientMethod,
    pub fd_step: f64,
}

impl<'a> CircuitObjective<'a> {
    pub fn new(
        ansatz: &'a Ansatz,
        operator: &'a dyn Operator,
        initial: &'a Statevector,
        config: &VqeConfig,
    ) -> Result<Self> {
        check_problem(ansatz, operator, initial)?;
        Ok(Self {
            ansatz,
            operator,
            initial,
            gradient: config.gradient,
            fd_step: config.fd_step,
        })
    }

    fn energy(&self, x: &[f64]) -> Result<f64> {
        let state = self.ansatz.prepare(x, self.initial)?;
        Ok(self.operator.expectation_value(state.amplitudes()).re)
    }
}

impl Objective for CircuitObjective<'_> {
    fn value(&mut self, x: &[f64]) -> Result<f64> {
        self.energy(x)
    }

    fn value_and_gradient(&mut self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        match self.gradient {
            GradientMethod::CentralDifference => {
                let f = self.energy(x)?;
                let g = gradient_fd(|p| self.energy(p), x, self.fd_step)?;
                Ok((f, g))
            }
            GradientMethod::Adjoint => {
                adjoint_gradient(self.ansatz, x, self.operator, self.initial)
            }
        }
    }
}

/// Result of one BFGS run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BfgsOutcome {
    pub params: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Accepted objective values, starting with the initial one.
    pub history: Vec<f64>,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Optimizer(format!("non-finite {what} ({v})")))
    }
}

/// BFGS with an inverse-Hessian update and backtracking Armijo line search.
pub fn minimize(
    objective: &mut dyn Objective,
    x0: &[f64],
    config: &BfgsConfig,
) -> Result<BfgsOutcome> {
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("initial parameters must be finite"));
    }
    let n = x0.len();
    let mut x = x0.to_vec();
    let (f0, g0) = objective.value_and_gradient(&x)?;
    let mut f = finite(f0, "initial cost")?;
    let mut g = g0;
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Optimizer("non-finite initial gradient".into()));
    }
    let mut history = vec![f];
    // Row-major inverse Hessian approximation.
    let mut h = identity(n);
    let mut fresh = true;
    let mut iterations = 0;
    let mut converged = n == 0 || inf_norm(&g) < config.tol_grad;

    while !converged && iterations < config.max_iter {
        let mut p = mat_vec(&h, &g, n).into_iter().map(|v| -v).collect::<Vec<_>>();
        let mut slope = dot(&g, &p);
        if slope >= 0.0 {
            h = identity(n);
            fresh = true;
            p = g.iter().map(|v| -v).collect();
            slope = dot(&g, &p);
        }
        let Some((trial, f_new, g_new)) = armijo_step(objective, &x, f, &p, slope, config)? else {
            if fresh {
                // no descent possible along the gradient: at working precision
                break;
            }
            h = identity(n);
            fresh = true;
            continue;
        };
        let s: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        let yy = dot(&y, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * yy.sqrt() {
            if fresh {
                let scale = sy / yy;
                h.iter_mut().for_each(|v| *v *= scale);
            }
            bfgs_update(&mut h, &s, &y, sy, n);
            fresh = false;
        }
        x = trial;
        // Armijo guarantees f_new ≤ f; keep the accepted sequence monotone
        // even if the re-evaluation differs in the last bit.
        f = f_new.min(f);
        g = g_new;
        history.push(f);
        iterations += 1;
        converged = inf_norm(&g) < config.tol_grad;
    }
    Ok(BfgsOutcome {
        params: x,
        value: f,
        iterations,
        converged,
        history,
    })
}

type Step = Option<(Vec<f64>, f64, Vec<f64>)>;

fn along(x: &[f64], p: &[f64], alpha: f64) -> Vec<f64> {
    x.iter().zip(p).map(|(a, b)| a + alpha * b).collect()
}

fn armijo_step(
    objective: &mut dyn Objective,
    x: &[f64],
    f: f64,
    p: &[f64],
    slope: f64,
    config: &BfgsConfig,
) -> Result<Step> {
    let mut alpha = 1.0;
    for _ in 0..config.max_backtracks {
        let trial = along(x, p, alpha);
        let ft = objective.value(&trial)?;
        if !ft.is_finite() {
            return Err(Error::Optimizer(format!(
                "non-finite cost {ft} during line search at step {alpha:.3e}"
            )));
        }
        if ft <= f + config.armijo * alpha * slope {
            let (f_new, g_new) = objective.value_and_gradient(&trial)?;
            let f_new = finite(f_new, "cost")?;
            if g_new.iter().any(|v| !v.is_finite()) {
                return Err(Error::Optimizer("non-finite gradient".into()));
            }
            return Ok(Some((trial, f_new, g_new)));
        }
        alpha *= 0.5;
    }
    Ok(None)
}

fn identity(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    h
}

fn mat_vec(h: &[f64], v: &[f64], n: usize) -> Vec<f64> {
    (0..n).map(|i| dot(&h[i * n..(i + 1) * n], v)).collect()
}

/// `H ← (I − ρsyᵀ) H (I − ρysᵀ) + ρssᵀ` for symmetric `H`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64, n: usize) {
    let rho = 1.0 / sy;
    let hy = mat_vec(h, y, n);
    let yhy = dot(y, &hy);
    let coef = rho * rho * yhy + rho;
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += coef * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
    }
}

/// Minimizes a cost closure by BFGS with central-difference gradients.
pub fn minimize_bfgs(
    cost: impl FnMut(&[f64]) -> Result<f64>,
    initial_params: &[f64],
    config: &BfgsConfig,
) -> Result<BfgsOutcome> {
    let mut objective = FiniteDifference {
        cost,
        step: config.fd_step,
    };
    minimize(&mut objective, initial_params, config)
}

/// Best of all restarts of a VQE run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub best_params: Vec<f64>,
    pub best_energy: f64,
    pub iterations: usize,
    pub restarts_used: usize,
    pub converged: bool,
    pub seed: u64,
    /// Final energy of every restart, by seed.
    pub restart_energies: Vec<(u64, f64)>,
    /// Accepted energies of the winning run.
    pub history: Vec<f64>,
}

/// Parameters for one restart: uniform in `[−range, range]` from `seed`.
pub fn initial_parameters(n: usize, seed: u64, range: f64) -> Vec<f64> {
    if range == 0.0 {
        return vec![0.0; n];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-range..=range)).collect()
}

/// Runs BFGS from every restart and keeps the lowest energy (lowest seed on
/// ties). Restarts run concurrently on the current rayon pool.
pub fn run_vqe(
    ansatz: &Ansatz,
    op: &dyn Operator,
    initial: &Statevector,
    config: &VqeConfig,
) -> Result<OptimizationResult> {
    check_problem(ansatz, op, initial)?;
    let bfgs = config.bfgs();
    let starts: Vec<(u64, Vec<f64>)> = if config.restarts == 0 {
        vec![(config.seed_base, vec![0.0; ansatz.n_params()])]
    } else {
        (0..config.restarts as u64)
            .map(|r| {
                let seed = config.seed_base + r;
                (seed, initial_parameters(ansatz.n_params(), seed, config.init_range))
            })
            .collect()
    };
    let runs: Vec<(u64, BfgsOutcome)> = starts
        .into_par_iter()
        .map(|(seed, x0)| {
            let mut objective = CircuitObjective::new(ansatz, op, initial, config)?;
            Ok((seed, minimize(&mut objective, &x0, &bfgs)?))
        })
        .collect::<Result<_>>()?;
    let restart_energies = runs.iter().map(|(s, o)| (*s, o.value)).collect();
    let (seed, best) = runs
        .into_iter()
        .min_by(|(sa, a), (sb, b)| a.value.total_cmp(&b.value).then(sa.cmp(sb)))
        .expect("at least one start");
    Ok(OptimizationResult {
        best_params: best.params,
        best_energy: best.value,
        iterations: best.iterations,
        restarts_used: config.restarts,
        converged: best.converged,
        seed,
        restart_energies,
        history: best.history,
    })
}

/// Weight of `state` inside the span of an orthonormal set.
pub fn fidelity(state: &impl Amplitudes, subspace: &[Vec<C64>]) -> Result<f64> {
    let amps = state.amplitudes();
    for (i, v) in subspace.iter().enumerate() {
        if v.len() != amps.len() {
            return Err(Error::input("reference vector size differs from the state"));
        }
        for (j, w) in subspace.iter().enumerate().take(i + 1) {
            let expect = if i == j { 1.0 } else { 0.0 };
            if (vdot(v, w) - C64::new(expect, 0.0)).norm() > 1e-8 {
                return Err(Error::input("reference subspace is not orthonormal"));
            }
        }
    }
    let norm = norm_sqr(amps);
    let weight: f64 = subspace.iter().map(|v| vdot(v, amps).norm_sqr()).sum();
    Ok((weight / norm).clamp(0.0, 1.0))
}
