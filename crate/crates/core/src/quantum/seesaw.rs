use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{expectation, operator_from_table, table_coefficients, CMatrix, QuantumError, QuantumModel, C64};
use crate::exactgeom::Inequality;
use crate::scenario::{JointTable, Scenario};
use crate::sdp::{embed_hermitian, extract_hermitian, hermitian_structure, Constraint, Entry, SdpOptions, SdpProblem, SdpSolver};

#[derive(Debug, Clone)]
pub struct SeesawOptions {
    pub restarts: usize,
    pub max_sweeps: usize,
    /// Stop a restart when one sweep improves the value by less than
    /// `tol · max(1, |value|)`.
    pub tol: f64,
    pub seed: u64,
    /// Extra starting point tried before the random restarts. It may have a
    /// smaller local dimension; it is then padded.
    pub initial: Option<QuantumModel>,
}

impl Default for SeesawOptions {
    fn default() -> Self {
        SeesawOptions { restarts: 20, max_sweeps: 500, tol: 1e-8, seed: 0, initial: None }
    }
}

#[derive(Debug, Clone)]
pub struct SeesawResult {
    /// Born value of `model`.
    pub value: f64,
    pub model: QuantumModel,
    /// Values after each sweep of the best restart, starting point first.
    pub trace: Vec<f64>,
    /// Final value of every restart, the padded initial model first if given.
    pub restart_values: Vec<f64>,
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
}

fn complex_gaussian<R: Rng>(rng: &mut R) -> C64 {
    C64::new(gaussian(rng), gaussian(rng)) * core::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..d {
        let z = r[(k, k)];
        let n = libm::hypot(z.re, z.im);
        if n > 0.0 {
            let phase = z / C64::new(n, 0.0);
            for i in 0..d {
                q[(i, k)] *= phase;
            }
        }
    }
    q
}

/// Random pure state and random projective measurements: column `k` of a
/// random unitary goes to outcome `π(k mod outputs)` for a random
/// permutation `π`, so that with more outcomes than dimensions the unused
/// outcomes vary.
pub fn random_model<R: Rng>(s: &Scenario, d: usize, rng: &mut R) -> QuantumModel {
    let psi = DVector::from_fn(d * d, |_, _| complex_gaussian(rng));
    let psi = &psi / C64::new(psi.norm(), 0.0);
    let measure = |inputs: usize, outputs: usize, rng: &mut R| -> Vec<Vec<CMatrix>> {
        (0..inputs)
            .map(|_| {
                let u = random_unitary(d, rng);
                let mut labels: Vec<usize> = (0..outputs).collect();
                labels.shuffle(rng);
                let mut povm = vec![CMatrix::zeros(d, d); outputs];
                for k in 0..d {
                    let col = u.column(k);
                    povm[labels[k % outputs]] += &col * col.adjoint();
                }
                povm
            })
            .collect()
    };
    let alice = measure(s.inputs_a(), s.outputs_a(), rng);
    let bob = measure(s.inputs_b(), s.outputs_b(), rng);
    QuantumModel { scenario: *s, d, state: &psi * psi.adjoint(), alice, bob }
}

/// Pads a model to local dimension `d`: the state is supported on the old
/// subspace and the new basis vectors are added to outcome 0.
pub fn embed_model(m: &QuantumModel, d: usize) -> QuantumModel {
    assert!(d >= m.d);
    let od = m.d;
    let mut state = CMatrix::zeros(d * d, d * d);
    for r in 0..od * od {
        for c in 0..od * od {
            state[((r / od) * d + r % od, (c / od) * d + c % od)] = m.state[(r, c)];
        }
    }
    let pad = |p: &[Vec<CMatrix>]| -> Vec<Vec<CMatrix>> {
        p.iter()
            .map(|povm| {
                povm.iter()
                    .enumerate()
                    .map(|(a, e)| {
                        let mut out = CMatrix::zeros(d, d);
                        out.view_mut((0, 0), (od, od)).copy_from(e);
                        if a == 0 {
                            for k in od..d {
                                out[(k, k)] = C64::new(1.0, 0.0);
                            }
                        }
                        out
                    })
                    .collect()
            })
            .collect()
    };
    QuantumModel { scenario: m.scenario, d, state, alice: pad(&m.alice), bob: pad(&m.bob) }
}

fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// `f(H)` applied to the spectrum of a Hermitian matrix.
fn spectral(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let eig = hermitize(m).symmetric_eigen();
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    for k in 0..n {
        let v = eig.eigenvectors.column(k);
        out += (&v * v.adjoint()) * C64::new(f(eig.eigenvalues[k]), 0.0);
    }
    out
}

/// Which party a POVM update acts on.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Alice,
    Bob,
}

/// `R_k` with `Σ_k tr(E_k R_k)` the value as a function of one POVM `{E_k}`.
fn effective_operators(c: &JointTable<f64>, m: &QuantumModel, side: Side, input: usize) -> Vec<CMatrix> {
    let s = m.scenario;
    let d = m.d;
    let (n_out, other_inputs, other_out) = match side {
        Side::Alice => (s.outputs_a(), s.inputs_b(), s.outputs_b()),
        Side::Bob => (s.outputs_b(), s.inputs_a(), s.outputs_a()),
    };
    (0..n_out)
        .map(|k| {
            let mut op = CMatrix::zeros(d, d);
            for z in 0..other_inputs {
                for o in 0..other_out {
                    let (v, e) = match side {
                        Side::Alice => (*c.get(input, z, k, o), &m.bob[z][o]),
                        Side::Bob => (*c.get(z, input, o, k), &m.alice[z][o]),
                    };
                    if v != 0.0 {
                        op += e * C64::new(v, 0.0);
                    }
                }
            }
            let mut r = CMatrix::zeros(d, d);
            for i in 0..d {
                for i2 in 0..d {
                    let mut acc = C64::new(0.0, 0.0);
                    for j in 0..d {
                        for j2 in 0..d {
                            acc += match side {
                                Side::Alice => m.state[(i * d + j, i2 * d + j2)] * op[(j2, j)],
                                Side::Bob => m.state[(j * d + i, j2 * d + i2)] * op[(j2, j)],
                            };
                        }
                    }
                    r[(i, i2)] = acc;
                }
            }
            hermitize(&r)
        })
        .collect()
}

fn povm_value(povm: &[CMatrix], r: &[CMatrix]) -> f64 {
    povm.iter().zip(r).map(|(e, r)| expectation(e, r)).sum()
}

/// POVM problem over `n` blocks of order `2d`: Hermitian structure in each
/// block and `Σ_k E_k = I`.
fn povm_problem(n: usize, d: usize) -> SdpProblem {
    let mut constraints = Vec::new();
    for k in 0..n {
        constraints.extend(hermitian_structure(k, d));
    }
    for i in 0..d {
        for j in i..d {
            constraints.push(Constraint {
                entries: (0..n).map(|k| Entry::new(k, i, j, 1.0)).collect(),
                rhs: if i == j { 1.0 } else { 0.0 },
            });
            if i < j {
                constraints.push(Constraint { entries: (0..n).map(|k| Entry::new(k, i, j + d, 1.0)).collect(), rhs: 0.0 });
            }
        }
    }
    SdpProblem { blocks: vec![2 * d; n], objective: Vec::new(), constraints }
}

struct PovmSolver {
    solver: Option<SdpSolver>,
    /// Warm starts per input.
    warm: Vec<Option<(Vec<DMatrix<f64>>, Vec<f64>)>>,
}

impl PovmSolver {
    fn new(outputs: usize, inputs: usize, d: usize) -> Result<Self, QuantumError> {
        let solver = if outputs > 2 { Some(SdpSolver::new(&povm_problem(outputs, d))?) } else { None };
        Ok(PovmSolver { solver, warm: vec![None; inputs] })
    }

    /// Best POVM for the operators `r`.
    fn optimize(&mut self, input: usize, r: &[CMatrix]) -> Result<Vec<CMatrix>, QuantumError> {
        let d = r[0].nrows();
        let Some(solver) = &self.solver else {
            // two outcomes: project onto the positive part of R_0 - R_1
            let p = spectral(&(&r[0] - &r[1]), |l| if l > 0.0 { 1.0 } else { 0.0 });
            let q = CMatrix::identity(d, d) - &p;
            return Ok(vec![p, q]);
        };
        let mut objective = Vec::new();
        for (k, rk) in r.iter().enumerate() {
            let e = embed_hermitian(rk);
            for i in 0..2 * d {
                for j in i..2 * d {
                    let v = 0.5 * e[(i, j)];
                    if v != 0.0 {
                        objective.push(Entry::new(k, i, j, v));
                    }
                }
            }
        }
        let opts = SdpOptions { tol: 1e-8, max_iters: 20_000, warm_start: self.warm[input].take(), ..Default::default() };
        let sol = solver.solve(&objective, &opts)?;
        self.warm[input] = Some((sol.matrices.clone(), sol.dual.clone()));
        let raw: Vec<CMatrix> = sol.matrices.iter().map(|m| spectral(&extract_hermitian(m), |l| l.max(0.0))).collect();
        let mut total = CMatrix::zeros(d, d);
        for e in &raw {
            total += e;
        }
        let inv_sqrt = spectral(&total, |l| if l > 1e-12 { 1.0 / libm::sqrt(l) } else { 0.0 });
        Ok(raw.iter().map(|e| hermitize(&(&inv_sqrt * e * &inv_sqrt))).collect())
    }
}

fn top_eigenvector(w: &CMatrix) -> CMatrix {
    let eig = hermitize(w).symmetric_eigen();
    let mut best = 0;
    for k in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[k] > eig.eigenvalues[best] {
            best = k;
        }
    }
    let v = eig.eigenvectors.column(best).into_owned();
    &v * v.adjoint()
}

fn current_value(c: &JointTable<f64>, m: &QuantumModel) -> f64 {
    expectation(&m.state, &operator_from_table(c, &m.alice, &m.bob, m.d))
}

struct Run {
    model: QuantumModel,
    trace: Vec<f64>,
}

fn improve(c: &JointTable<f64>, mut m: QuantumModel, opts: &SeesawOptions) -> Result<Run, QuantumError> {
    let s = m.scenario;
    let d = m.d;
    let mut sa = PovmSolver::new(s.outputs_a(), s.inputs_a(), d)?;
    let mut sb = PovmSolver::new(s.outputs_b(), s.inputs_b(), d)?;
    let mut value = current_value(c, &m);
    let mut trace = vec![value];
    for _ in 0..opts.max_sweeps {
        let start = value;
        for (side, inputs) in [(Side::Alice, s.inputs_a()), (Side::Bob, s.inputs_b())] {
            for x in 0..inputs {
                let r = effective_operators(c, &m, side, x);
                let solver = if side == Side::Alice { &mut sa } else { &mut sb };
                let povm = solver.optimize(x, &r)?;
                // inexact SDP solutions are only kept when they help
                let slot = if side == Side::Alice { &mut m.alice[x] } else { &mut m.bob[x] };
                if povm_value(&povm, &r) >= povm_value(slot, &r) {
                    *slot = povm;
                }
            }
        }
        let w = operator_from_table(c, &m.alice, &m.bob, d);
        let rho = top_eigenvector(&w);
        if expectation(&rho, &w) >= expectation(&m.state, &w) {
            m.state = rho;
        }
        value = current_value(c, &m);
        trace.push(value);
        if value - start < opts.tol * start.abs().max(1.0) {
            break;
        }
    }
    Ok(Run { model: m, trace })
}

/// Best value found by alternating state and measurement updates from
/// several random starting points.
pub fn seesaw(ineq: &Inequality, d: usize, opts: &SeesawOptions) -> Result<SeesawResult, QuantumError> {
    if !(1..=8).contains(&d) {
        return Err(QuantumError::UnsupportedDimension(d));
    }
    let s = ineq.scenario();
    let c = table_coefficients(ineq);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = Vec::new();
    if let Some(init) = &opts.initial {
        if init.scenario != s || init.d > d {
            return Err(QuantumError::DimensionMismatch(s));
        }
        starts.push(embed_model(init, d));
    }
    let mut best: Option<Run> = None;
    let mut restart_values = Vec::new();
    let total = starts.len() + opts.restarts.max(1);
    let mut starts = starts.into_iter();
    for _ in 0..total {
        let start = starts.next().unwrap_or_else(|| random_model(&s, d, &mut rng));
        let run = improve(&c, start, opts)?;
        let v = *run.trace.last().expect("trace starts non-empty");
        restart_values.push(v);
        if best.as_ref().is_none_or(|b| v > *b.trace.last().expect("non-empty")) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    let value = quantum_value_of(&best.model, ineq);
    Ok(SeesawResult { value, model: best.model, trace: best.trace, restart_values })
}

fn quantum_value_of(m: &QuantumModel, ineq: &Inequality) -> f64 {
    super::quantum_value(ineq, m).expect("model built for this scenario")
}

/// Runs one restart from `model` and returns the value after every sweep.
pub fn seesaw_trace(ineq: &Inequality, model: &QuantumModel, opts: &SeesawOptions) -> Result<Vec<f64>, QuantumError> {
    if model.scenario != ineq.scenario() {
        return Err(QuantumError::DimensionMismatch(model.scenario));
    }
    Ok(improve(&table_coefficients(ineq), model.clone(), opts)?.trace)
}
