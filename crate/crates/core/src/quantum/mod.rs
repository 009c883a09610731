//! Quantum figures of merit of Bell inequalities: Bell operators, the Born
//! rule, seesaw lower bounds, NPA upper bounds, white-noise resistance,
//! symmetric detection efficiency and concurrence.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Complex, DMatrix};

use crate::exactgeom::Inequality;
use crate::scenario::{expand_functional, party_strategies, p_to_cg_unchecked, JointTable, Scenario};

mod npa;
mod seesaw;

pub use npa::{npa_problem, npa_upper_bound, NpaLevel, NpaResult};
pub use seesaw::{embed_model, random_model, random_unitary, seesaw, seesaw_trace, SeesawOptions, SeesawResult};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QuantumError {
    #[error("model does not match scenario {0}")]
    DimensionMismatch(Scenario),
    #[error("invalid model: {0}")]
    InvalidModel(&'static str),
    #[error("local dimension {0} is not supported")]
    UnsupportedDimension(usize),
    #[error("expected a two-qubit density matrix")]
    NotTwoQubit,
    #[error(transparent)]
    Sdp(#[from] crate::sdp::SdpError),
}

/// A state on `C^d ⊗ C^d` with one POVM per input of each party.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumModel {
    pub scenario: Scenario,
    pub d: usize,
    /// Density matrix of order `d²`, Alice's factor first.
    pub state: CMatrix,
    /// `alice[x][a]`.
    pub alice: Vec<Vec<CMatrix>>,
    pub bob: Vec<Vec<CMatrix>>,
}

const MODEL_TOL: f64 = 1e-9;

fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    h.symmetric_eigen().eigenvalues.iter().copied().collect()
}

impl QuantumModel {
    /// Checks shapes, positivity, normalization and completeness to 1e-9.
    pub fn new(scenario: Scenario, state: CMatrix, alice: Vec<Vec<CMatrix>>, bob: Vec<Vec<CMatrix>>) -> Result<Self, QuantumError> {
        let n = state.nrows();
        let d = (1..=n).find(|k| k * k == n).ok_or(QuantumError::InvalidModel("state order is not a square"))?;
        let m = QuantumModel { scenario, d, state, alice, bob };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), QuantumError> {
        let s = self.scenario;
        let d = self.d;
        if self.state.nrows() != d * d || self.state.ncols() != d * d {
            return Err(QuantumError::DimensionMismatch(s));
        }
        let shape_ok = |p: &[Vec<CMatrix>], n: usize, o: usize| {
            p.len() == n && p.iter().all(|m| m.len() == o && m.iter().all(|e| e.nrows() == d && e.ncols() == d))
        };
        if !shape_ok(&self.alice, s.inputs_a(), s.outputs_a()) || !shape_ok(&self.bob, s.inputs_b(), s.outputs_b()) {
            return Err(QuantumError::DimensionMismatch(s));
        }
        if (&self.state - self.state.adjoint()).norm() > MODEL_TOL {
            return Err(QuantumError::InvalidModel("state is not Hermitian"));
        }
        if (self.state.trace().re - 1.0).abs() > MODEL_TOL {
            return Err(QuantumError::InvalidModel("state trace differs from 1"));
        }
        if hermitian_eigenvalues(&self.state).iter().any(|&l| l < -MODEL_TOL) {
            return Err(QuantumError::InvalidModel("state is not positive"));
        }
        let id = CMatrix::identity(d, d);
        for povm in self.alice.iter().chain(&self.bob) {
            let mut sum = CMatrix::zeros(d, d);
            for e in povm {
                if (e - e.adjoint()).norm() > MODEL_TOL || hermitian_eigenvalues(e).iter().any(|&l| l < -MODEL_TOL) {
                    return Err(QuantumError::InvalidModel("POVM element is not positive"));
                }
                sum += e;
            }
            if (sum - &id).norm() > MODEL_TOL {
                return Err(QuantumError::InvalidModel("POVM does not sum to identity"));
            }
        }
        Ok(())
    }
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `|Φ⁺⟩⟨Φ⁺|` with `|Φ⁺⟩ = Σ_i |ii⟩ / √d`.
pub fn maximally_entangled(d: usize) -> CMatrix {
    let n = d * d;
    let v = C64::new(1.0 / d as f64, 0.0);
    CMatrix::from_fn(n, n, |r, c| if r % (d + 1) == 0 && c % (d + 1) == 0 { v } else { C64::new(0.0, 0.0) })
}

/// `|ψ⟩⟨ψ|` for a state vector of length `d²`.
pub fn pure_state(psi: &nalgebra::DVector<C64>) -> CMatrix {
    psi * psi.adjoint()
}

/// Full-table coefficients of `ineq` as reals.
pub(crate) fn table_coefficients(ineq: &Inequality) -> JointTable<f64> {
    let s = ineq.scenario();
    let t = expand_functional(&s, ineq.coeffs());
    JointTable::from_fn(s, |x, y, a, b| *t.get(x, y, a, b) as f64)
}

pub(crate) fn operator_from_table(c: &JointTable<f64>, alice: &[Vec<CMatrix>], bob: &[Vec<CMatrix>], d: usize) -> CMatrix {
    let s = c.scenario();
    let mut w = CMatrix::zeros(d * d, d * d);
    for x in 0..s.inputs_a() {
        for a in 0..s.outputs_a() {
            // Σ_{y,b} c · A ⊗ B factored as A ⊗ (Σ c B)
            let mut k = CMatrix::zeros(d, d);
            for y in 0..s.inputs_b() {
                for b in 0..s.outputs_b() {
                    let v = *c.get(x, y, a, b);
                    if v != 0.0 {
                        k += &bob[y][b] * C64::new(v, 0.0);
                    }
                }
            }
            if k.iter().any(|z| z.norm_sqr() > 0.0) {
                w += kron(&alice[x][a], &k);
            }
        }
    }
    w
}

/// `Σ α Π^A ⊗ Π^B + Σ α^A Π^A ⊗ I + Σ α^B I ⊗ Π^B`.
pub fn bell_operator(ineq: &Inequality, model: &QuantumModel) -> Result<CMatrix, QuantumError> {
    if ineq.scenario() != model.scenario {
        return Err(QuantumError::DimensionMismatch(model.scenario));
    }
    Ok(operator_from_table(&table_coefficients(ineq), &model.alice, &model.bob, model.d))
}

/// `Re tr(ρ O)`.
pub fn expectation(rho: &CMatrix, op: &CMatrix) -> f64 {
    let mut t = 0.0;
    for i in 0..rho.nrows() {
        for j in 0..rho.ncols() {
            t += (rho[(i, j)] * op[(j, i)]).re;
        }
    }
    t
}

/// `p(ab|xy) = tr((Π^A_{a|x} ⊗ Π^B_{b|y}) ρ)`.
pub fn born_table(model: &QuantumModel) -> JointTable<f64> {
    let s = model.scenario;
    JointTable::from_fn(s, |x, y, a, b| expectation(&model.state, &kron(&model.alice[x][a], &model.bob[y][b])))
}

/// The model's behavior in CG coordinates.
pub fn born_behavior(model: &QuantumModel) -> Vec<f64> {
    p_to_cg_unchecked(&born_table(model)).coords
}

/// Value of the Bell functional on the model.
pub fn quantum_value(ineq: &Inequality, model: &QuantumModel) -> Result<f64, QuantumError> {
    Ok(expectation(&model.state, &bell_operator(ineq, model)?))
}

/// White-noise resistance of a violating model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseResistance {
    /// Critical visibility; 1.0 when the model does not violate.
    pub lambda: f64,
    pub violated: bool,
    /// Value of the functional on the maximally mixed state.
    pub noise_value: f64,
}

/// `λ = (L - N) / (Q - N)` with `N` the value on `I/d²`.
pub fn resistance_to_noise(ineq: &Inequality, model: &QuantumModel) -> Result<NoiseResistance, QuantumError> {
    let w = bell_operator(ineq, model)?;
    let q = expectation(&model.state, &w);
    let dd = (model.d * model.d) as f64;
    let n = w.trace().re / dd;
    let l = ineq.bound() as f64;
    if q <= l + 1e-12 {
        return Ok(NoiseResistance { lambda: 1.0, violated: false, noise_value: n });
    }
    Ok(NoiseResistance { lambda: (l - n) / (q - n), violated: true, noise_value: n })
}

/// `λρ + (1 - λ) I/d²`.
pub fn with_white_noise(rho: &CMatrix, lambda: f64) -> CMatrix {
    let n = rho.nrows();
    rho * C64::new(lambda, 0.0) + CMatrix::identity(n, n) * C64::new((1.0 - lambda) / n as f64, 0.0)
}

/// Symmetric detection-efficiency threshold of a violating model.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionEfficiency {
    /// Smallest threshold over failure strategies; 1.0 when nothing violates.
    pub eta: f64,
    pub violated: bool,
    /// Failure outputs of Alice and Bob attaining `eta`.
    pub alice_strategy: Vec<usize>,
    pub bob_strategy: Vec<usize>,
}

/// Pieces of `I(η) = η² Q + η(1-η)(M_A + M_B) + (1-η)² Z` for one pair of
/// failure strategies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyTerms {
    pub q: f64,
    /// Alice detects, Bob outputs his failure value.
    pub m_a: f64,
    /// Bob detects, Alice outputs her failure value.
    pub m_b: f64,
    pub z: f64,
}

impl EfficiencyTerms {
    pub fn value(&self, eta: f64) -> f64 {
        eta * eta * self.q + eta * (1.0 - eta) * (self.m_a + self.m_b) + (1.0 - eta) * (1.0 - eta) * self.z
    }

    /// Largest `η` in `(0, 1]` with `I(η) = L`, or 0 when `I(η) > L` on all of `(0, 1]`.
    pub fn threshold(&self, l: f64) -> Option<f64> {
        let m = self.m_a + self.m_b;
        let qa = self.q - m + self.z;
        let qb = m - 2.0 * self.z;
        let qc = self.z - l;
        let scale = 1.0 + self.q.abs() + m.abs() + self.z.abs();
        let mut roots = Vec::new();
        if qa.abs() <= 1e-12 * scale {
            if qb.abs() > 1e-15 {
                roots.push(-qc / qb);
            }
        } else {
            let disc = qb * qb - 4.0 * qa * qc;
            if disc >= 0.0 {
                let sq = libm::sqrt(disc);
                roots.push((-qb + sq) / (2.0 * qa));
                roots.push((-qb - sq) / (2.0 * qa));
            }
        }
        let best = roots.into_iter().filter(|r| *r > 0.0 && *r <= 1.0 + 1e-12).fold(None, |m: Option<f64>, r| {
            Some(m.map_or(r, |v| v.max(r)))
        });
        if self.q <= l {
            None
        } else {
            Some(best.unwrap_or(0.0).min(1.0))
        }
    }
}

/// `I(η)` terms for failure outputs `sa` (per Alice input) and `sb`.
pub fn efficiency_terms(ineq: &Inequality, model: &QuantumModel, sa: &[usize], sb: &[usize]) -> Result<EfficiencyTerms, QuantumError> {
    let s = ineq.scenario();
    if s != model.scenario {
        return Err(QuantumError::DimensionMismatch(model.scenario));
    }
    let c = table_coefficients(ineq);
    let p = born_table(model);
    let (pa, pb) = marginals(&p);
    Ok(terms_from(&c, &p, &pa, &pb, sa, sb))
}

fn marginals(p: &JointTable<f64>) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let s = p.scenario();
    let pa = (0..s.inputs_a())
        .map(|x| (0..s.outputs_a()).map(|a| (0..s.outputs_b()).map(|b| *p.get(x, 0, a, b)).sum()).collect())
        .collect();
    let pb = (0..s.inputs_b())
        .map(|y| (0..s.outputs_b()).map(|b| (0..s.outputs_a()).map(|a| *p.get(0, y, a, b)).sum()).collect())
        .collect();
    (pa, pb)
}

fn terms_from(
    c: &JointTable<f64>,
    p: &JointTable<f64>,
    pa: &[Vec<f64>],
    pb: &[Vec<f64>],
    sa: &[usize],
    sb: &[usize],
) -> EfficiencyTerms {
    let s = c.scenario();
    let (mut q, mut m_a, mut m_b, mut z) = (0.0, 0.0, 0.0, 0.0);
    for x in 0..s.inputs_a() {
        for y in 0..s.inputs_b() {
            for a in 0..s.outputs_a() {
                for b in 0..s.outputs_b() {
                    let v = *c.get(x, y, a, b);
                    if v == 0.0 {
                        continue;
                    }
                    q += v * p.get(x, y, a, b);
                    if b == sb[y] {
                        m_a += v * pa[x][a];
                        if a == sa[x] {
                            z += v;
                        }
                    }
                    if a == sa[x] {
                        m_b += v * pb[y][b];
                    }
                }
            }
        }
    }
    EfficiencyTerms { q, m_a, m_b, z }
}

/// Minimum over all `A^X B^Y` failure-strategy pairs of the threshold
/// efficiency, with the state and measurements of `model`.
pub fn detection_efficiency(ineq: &Inequality, model: &QuantumModel) -> Result<DetectionEfficiency, QuantumError> {
    let s = ineq.scenario();
    if s != model.scenario {
        return Err(QuantumError::DimensionMismatch(model.scenario));
    }
    let c = table_coefficients(ineq);
    let p = born_table(model);
    let (pa, pb) = marginals(&p);
    let l = ineq.bound() as f64;
    let mut best: Option<(f64, Vec<usize>, Vec<usize>)> = None;
    let sas = party_strategies(s.inputs_a(), s.outputs_a());
    let sbs = party_strategies(s.inputs_b(), s.outputs_b());
    for sa in &sas {
        for sb in &sbs {
            let t = terms_from(&c, &p, &pa, &pb, sa, sb);
            if let Some(eta) = t.threshold(l) {
                if best.as_ref().is_none_or(|b| eta < b.0) {
                    best = Some((eta, sa.clone(), sb.clone()));
                }
            }
        }
    }
    Ok(match best {
        Some((eta, a, b)) => DetectionEfficiency { eta, violated: true, alice_strategy: a, bob_strategy: b },
        None => DetectionEfficiency { eta: 1.0, violated: false, alice_strategy: vec![], bob_strategy: vec![] },
    })
}

fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    for k in 0..n {
        let l = eig.eigenvalues[k].max(0.0);
        let v = eig.eigenvectors.column(k);
        out += (&v * v.adjoint()) * C64::new(libm::sqrt(l), 0.0);
    }
    out
}

/// Two-qubit concurrence `max(0, α₁ - α₂ - α₃ - α₄)`.
pub fn concurrence(rho: &CMatrix) -> Result<f64, QuantumError> {
    if rho.nrows() != 4 || rho.ncols() != 4 {
        return Err(QuantumError::NotTwoQubit);
    }
    let z = C64::new(0.0, 0.0);
    let sy = CMatrix::from_row_slice(2, 2, &[z, C64::new(0.0, -1.0), C64::new(0.0, 1.0), z]);
    let yy = kron(&sy, &sy);
    let tilde = &yy * rho.conjugate() * &yy;
    let sq = psd_sqrt(rho);
    let r = &sq * tilde * &sq;
    let mut alphas: Vec<f64> = hermitian_eigenvalues(&r).into_iter().map(|l| libm::sqrt(l.max(0.0))).collect();
    alphas.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    Ok((alphas[0] - alphas[1] - alphas[2] - alphas[3]).clamp(0.0, 1.0))
}

/// Figures of merit at one local dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct DimensionFigures {
    pub d: usize,
    pub q: f64,
    pub lambda: f64,
    pub eta: f64,
    pub violated: bool,
    /// Only for qubits.
    pub concurrence: Option<f64>,
    pub seed: u64,
}

/// One line of an analysis table.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisRow {
    pub name: String,
    pub scenario: Scenario,
    pub local_bound: i64,
    pub npa: Option<f64>,
    pub dims: Vec<DimensionFigures>,
}

/// Runs the seesaw at each dimension in increasing order, then noise
/// resistance, detection efficiency and (for d = 2) concurrence on the best
/// model found; adds the NPA bound, solved to `npa_tol`, when `level` is
/// given. Each dimension
/// also starts from the optimum of the previous one, so `Q_d` is
/// nondecreasing in `d`.
pub fn analyze(
    name: &str,
    ineq: &Inequality,
    dims: &[usize],
    opts: &SeesawOptions,
    level: Option<NpaLevel>,
    npa_tol: f64,
) -> Result<AnalysisRow, QuantumError> {
    let mut out = Vec::new();
    let mut dims = dims.to_vec();
    dims.sort_unstable();
    dims.dedup();
    let mut previous: Option<QuantumModel> = None;
    for &d in &dims {
        let seed = opts.seed.wrapping_add(d as u64);
        // the padded optimum of the smaller dimension is one of the starts
        let initial = previous.take().or_else(|| opts.initial.clone());
        let r = seesaw(ineq, d, &SeesawOptions { seed, initial, ..opts.clone() })?;
        let noise = resistance_to_noise(ineq, &r.model)?;
        let eff = detection_efficiency(ineq, &r.model)?;
        let concurrence = if d == 2 { Some(concurrence(&r.model.state)?) } else { None };
        out.push(DimensionFigures {
            d,
            q: r.value,
            lambda: noise.lambda,
            eta: eff.eta,
            violated: noise.violated,
            concurrence,
            seed,
        });
        previous = Some(r.model);
    }
    let npa = match level {
        Some(l) => Some(npa_upper_bound(ineq, l, npa_tol)?.value),
        None => None,
    };
    Ok(AnalysisRow { name: name.into(), scenario: ineq.scenario(), local_bound: ineq.bound(), npa, dims: out })
}
