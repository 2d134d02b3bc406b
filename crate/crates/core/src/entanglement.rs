//! Schmidt decomposition and entanglement invariants of pure two-qudit states.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{hermitian_eigensystem, kron, DenseMatrix, StateVector, ZERO};
use crate::yang_baxter::QuditDimension;

const NORMALIZATION_TOL: f64 = 1e-12;

/// Schmidt weights below this are treated as zero when building `local_b`.
const ZERO_SCHMIDT_WEIGHT: f64 = 1e-13;

/// Normalized pure state `Σ μ_ij |i⟩_A|j⟩_B`, amplitude `μ_ij` at index `i·d + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoQuditState {
    d: QuditDimension,
    amplitudes: StateVector,
}

impl TwoQuditState {
    pub fn new(d: QuditDimension, amplitudes: StateVector) -> Result<Self> {
        if amplitudes.dim() != d.pair() {
            return Err(Error::DimMismatch(format!(
                "state of length {} for d = {d}",
                amplitudes.dim()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { d, amplitudes })
    }

    /// Rescales to unit norm before validating.
    pub fn normalize(d: QuditDimension, amplitudes: StateVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        Self::new(d, amplitudes.normalized())
    }

    /// `|ij⟩`.
    pub fn product_basis(d: QuditDimension, i: usize, j: usize) -> Self {
        Self {
            d,
            amplitudes: StateVector::basis(d.pair(), i * d.get() + j),
        }
    }

    /// `Σ_j κ_j |jj⟩` for real coefficients.
    pub fn from_schmidt(d: QuditDimension, kappa: &[f64]) -> Result<Self> {
        if kappa.len() != d.get() {
            return Err(Error::DimMismatch(format!(
                "{} Schmidt coefficients for d = {d}",
                kappa.len()
            )));
        }
        let n = d.get();
        let mut amps = vec![ZERO; n * n];
        for (j, &k) in kappa.iter().enumerate() {
            amps[j * n + j] = Complex64::new(k, 0.0);
        }
        Self::new(d, StateVector::new(amps)?)
    }

    pub fn d(&self) -> QuditDimension {
        self.d
    }

    pub fn vector(&self) -> &StateVector {
        &self.amplitudes
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        self.amplitudes.amplitudes()
    }

    pub fn amplitude(&self, i: usize, j: usize) -> Complex64 {
        self.amplitudes()[i * self.d.get() + j]
    }

    /// Applies a `d²×d²` operator. The result must still be normalized.
    pub fn evolve(&self, u: &DenseMatrix) -> Result<Self> {
        Self::new(self.d, u.apply(&self.amplitudes)?)
    }

    /// Applies `a ⊗ b`.
    pub fn apply_local(&self, a: &DenseMatrix, b: &DenseMatrix) -> Result<Self> {
        self.evolve(&kron(a, b))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// Reduced density matrix of one party.
pub fn reduced_density(state: &TwoQuditState, side: Side) -> DenseMatrix {
    let n = state.d.get();
    let mu = |i: usize, j: usize| state.amplitude(i, j);
    match side {
        Side::A => DenseMatrix::from_fn(n, n, |i, ip| {
            (0..n).map(|j| mu(i, j) * mu(ip, j).conj()).sum()
        }),
        Side::B => DenseMatrix::from_fn(n, n, |j, jp| {
            (0..n).map(|i| mu(i, j) * mu(i, jp).conj()).sum()
        }),
    }
}

/// `Tr[ρ^k]` computed by repeated multiplication.
pub fn trace_power(rho: &DenseMatrix, k: u32) -> f64 {
    assert!(k >= 1);
    let mut acc = rho.clone();
    for _ in 1..k {
        acc = acc.matmul(rho).expect("square");
    }
    acc.trace().re
}

/// `ψ = (local_a ⊗ local_b) Σ_j κ_j |jj⟩` with `κ` real, non-negative, descending.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    pub kappa: Vec<f64>,
    /// Columns are the Schmidt vectors of party A.
    pub local_a: DenseMatrix,
    /// Columns are the Schmidt vectors of party B (phases absorbed here).
    pub local_b: DenseMatrix,
}

impl SchmidtDecomposition {
    pub fn d(&self) -> usize {
        self.kappa.len()
    }

    pub fn reassemble(&self) -> StateVector {
        let n = self.d();
        let mut amps = vec![ZERO; n * n];
        for (k, &kappa) in self.kappa.iter().enumerate() {
            for i in 0..n {
                let a = self.local_a[(i, k)] * kappa;
                for j in 0..n {
                    amps[i * n + j] += a * self.local_b[(j, k)];
                }
            }
        }
        StateVector::new(amps).expect("finite amplitudes")
    }

    /// Max deviation between the reassembled state and `state` after aligning
    /// global phase on the largest-magnitude amplitude of `state`.
    pub fn reassembly_error(&self, state: &TwoQuditState) -> f64 {
        let rebuilt = self.reassemble();
        let target = state.amplitudes();
        let (pivot, _) = target
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("non-empty state");
        let r = rebuilt.amplitudes()[pivot];
        let phase = if r.norm() > 0.0 {
            (target[pivot] / r) / (target[pivot] / r).norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        rebuilt
            .amplitudes()
            .iter()
            .zip(target)
            .map(|(a, b)| (a * phase - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Schmidt decomposition via the eigenvectors of `ρ_A`.
///
/// `κ_k` is taken as the norm of `(⟨u_k| ⊗ I)|ψ⟩`, which equals the square root
/// of the `k`-th eigenvalue of `ρ_A` but keeps full accuracy for tiny weights.
pub fn schmidt_decompose(state: &TwoQuditState) -> SchmidtDecomposition {
    let n = state.d.get();
    let rho = reduced_density(state, Side::A);
    let eig = hermitian_eigensystem(&rho).expect("reduced density matrix is Hermitian");
    let u = eig.vectors;

    // w_k[j] = Σ_i conj(u_ik) μ_ij
    let mut pairs: Vec<(f64, usize, Vec<Complex64>)> = (0..n)
        .map(|k| {
            let w: Vec<Complex64> = (0..n)
                .map(|j| {
                    (0..n)
                        .map(|i| u[(i, k)].conj() * state.amplitude(i, j))
                        .sum()
                })
                .collect();
            let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            (norm, k, w)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));

    let kappa: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let local_a = DenseMatrix::from_fn(n, n, |i, c| u[(i, pairs[c].1)]);

    let mut columns: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    for (norm, _, w) in &pairs {
        if *norm > ZERO_SCHMIDT_WEIGHT {
            let v: Vec<Complex64> = w.iter().map(|z| z / *norm).collect();
            columns.push(orthonormalize_against(&v, &columns).unwrap_or(v));
        } else {
            columns.push(complete_basis(n, &columns));
        }
    }
    let local_b = DenseMatrix::from_fn(n, n, |j, c| columns[c][j]);

    SchmidtDecomposition {
        kappa,
        local_a,
        local_b,
    }
}

fn orthonormalize_against(v: &[Complex64], basis: &[Vec<Complex64>]) -> Option<Vec<Complex64>> {
    let mut out = v.to_vec();
    for b in basis {
        let overlap: Complex64 = b.iter().zip(&out).map(|(x, y)| x.conj() * y).sum();
        for (o, x) in out.iter_mut().zip(b) {
            *o -= overlap * x;
        }
    }
    let norm = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    (norm > 1e-8).then(|| out.into_iter().map(|z| z / norm).collect())
}

/// A unit vector orthogonal to `basis`, obtained from the computational basis
/// vector with the largest orthogonal remainder.
fn complete_basis(n: usize, basis: &[Vec<Complex64>]) -> Vec<Complex64> {
    (0..n)
        .filter_map(|e| {
            let mut v = vec![ZERO; n];
            v[e] = Complex64::new(1.0, 0.0);
            let mut r = v.clone();
            for b in basis {
                let overlap = b[e].conj();
                for (o, x) in r.iter_mut().zip(b) {
                    *o -= overlap * x;
                }
            }
            let norm = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            (norm > 1e-8).then_some((norm, v))
        })
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .and_then(|(_, v)| orthonormalize_against(&v, basis))
        .expect("a proper subset of an orthonormal basis can be extended")
}

/// Invariants `I_j = Tr[ρ_A^{j+1}]`, their normalized forms, and the generalized
/// concurrence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantVector {
    #[serde(skip)]
    pub d: usize,
    /// `I_j` for `j = 1..d−1`.
    #[serde(rename = "I")]
    pub i: Vec<f64>,
    /// `I′_j = d^j/(d^j − 1)·(1 − I_j)`.
    #[serde(rename = "Iprime")]
    pub iprime: Vec<f64>,
    #[serde(rename = "C")]
    pub concurrence: f64,
    /// `1 − I_1 = 1 − Tr[ρ_A²]`, the raw linear entropy.
    #[serde(skip)]
    pub linear_entropy: f64,
}

/// Invariants from Schmidt coefficients (renormalized internally).
///
/// `1 − I_j` is evaluated as `Σ_r p_r (1 − p_r)(1 + p_r + … + p_r^{j−1})`
/// with `1 − p_r` summed from the other weights, so near-separable states keep
/// full relative accuracy.
pub fn invariants_from_kappa(kappa: &[f64]) -> InvariantVector {
    let d = kappa.len();
    assert!(d >= 2, "need at least two Schmidt coefficients");
    let total: f64 = kappa.iter().map(|k| k * k).sum();
    let p: Vec<f64> = kappa.iter().map(|k| k * k / total).collect();
    let complement: Vec<f64> = (0..d)
        .map(|r| {
            p.iter()
                .enumerate()
                .filter(|&(s, _)| s != r)
                .map(|(_, x)| x)
                .sum()
        })
        .collect();

    let mut i = Vec::with_capacity(d - 1);
    let mut iprime = Vec::with_capacity(d - 1);
    let mut linear_entropy = 0.0;
    for j in 1..d {
        let one_minus: f64 = p
            .iter()
            .zip(&complement)
            .map(|(&pr, &cr)| {
                let geometric: f64 = (0..j).map(|m| pr.powi(m as i32)).sum();
                pr * cr * geometric
            })
            .sum();
        let dj = (d as f64).powi(j as i32);
        i.push(p.iter().map(|x| x.powi(j as i32 + 1)).sum());
        iprime.push(dj / (dj - 1.0) * one_minus);
        if j == 1 {
            linear_entropy = one_minus;
        }
    }
    let concurrence = ((d as f64) / (d as f64 - 1.0) * linear_entropy)
        .max(0.0)
        .sqrt();
    InvariantVector {
        d,
        i,
        iprime,
        concurrence,
        linear_entropy,
    }
}

pub fn invariants(state: &TwoQuditState) -> InvariantVector {
    invariants_from_kappa(&schmidt_decompose(state).kappa)
}

/// `|sin 2θ|`, the concurrence of `R̆(θ)|00⟩` for two qubits.
pub fn concurrence_closed_d2(theta: f64) -> f64 {
    (2.0 * theta).sin().abs()
}

/// Smallest `θ ∈ (0, π]` with `cos 2θ = 1 − d/2`; absent for `d ≥ 5`.
pub fn max_entanglement_angle(d: QuditDimension) -> Option<f64> {
    let c = 1.0 - d.as_f64() / 2.0;
    (c.abs() <= 1.0).then(|| c.acos() / 2.0)
}
