//! Entangling power of two-qudit unitaries.
//!
//! `e_p(U)` is the mean linear entropy `1 − Tr[ρ_A²]` of `U|Φ_A⟩⊗|Φ_B⟩` over
//! Haar-random product inputs. It has the closed form
//! `(d/(d+1))²·[E(U) + E(U𝒮) − E(𝒮)]` in terms of the operator linear entropy
//! `E` and the swap `𝒮|ij⟩ = |ji⟩`. The higher-order powers `e^j_p` average the
//! normalized invariants `I′_j` instead and are only estimated by sampling.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::entanglement::{invariants, TwoQuditState};
use crate::error::{Error, Result};
use crate::parallel::{sample_chunks, stream};
use crate::tensor::{DenseMatrix, StateVector};
use crate::yang_baxter::QuditDimension;

const UNITARITY_TOL: f64 = 1e-10;

/// Monte-Carlo estimate of `e^j_p`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntanglingPowerEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub j: usize,
}

/// Haar-random unit vector in `C^d` (normalized standard complex Gaussian).
pub fn haar_state(d: usize, rng: &mut impl Rng) -> StateVector {
    let raw: Vec<Complex64> = (0..d)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    StateVector::new(raw)
        .expect("finite Gaussian draws")
        .normalized()
}

/// `|Φ_A⟩ ⊗ |Φ_B⟩` with independent Haar-random factors.
pub fn haar_product_state(d: QuditDimension, rng: &mut impl Rng) -> TwoQuditState {
    let a = haar_state(d.get(), rng);
    let b = haar_state(d.get(), rng);
    TwoQuditState::normalize(d, a.kron(&b)).expect("product of unit vectors")
}

/// Swap `𝒮 = Σ_{ij} |ji⟩⟨ij|`.
pub fn swap_matrix(d: QuditDimension) -> DenseMatrix {
    let n = d.get();
    let mut s = DenseMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            s[(j * n + i, i * n + j)] = Complex64::new(1.0, 0.0);
        }
    }
    s
}

/// Recovers `d` from a `d²×d²` operator.
fn qudit_dimension_of(u: &DenseMatrix) -> Result<QuditDimension> {
    let n = u.rows();
    let d = (n as f64).sqrt().round() as usize;
    if !u.is_square() || d * d != n {
        return Err(Error::DimMismatch(format!(
            "expected a d^2 x d^2 operator, got {}x{}",
            u.rows(),
            u.cols()
        )));
    }
    QuditDimension::new(d)
}

fn check_unitary(u: &DenseMatrix) -> Result<()> {
    let r = u.unitarity_residual();
    if r > UNITARITY_TOL {
        return Err(Error::NotUnitary(r));
    }
    Ok(())
}

/// Monte-Carlo `e^j_p(U)` over `n` Haar product states.
///
/// `j = 1` averages the raw linear entropy `1 − Tr[ρ_A²]`; `j ≥ 2` averages `I′_j`.
pub fn entangling_power_mc(
    u: &DenseMatrix,
    j: usize,
    n: usize,
    seed: u64,
) -> Result<EntanglingPowerEstimate> {
    let d = qudit_dimension_of(u)?;
    check_unitary(u)?;
    if j == 0 || j >= d.get() {
        return Err(Error::InvalidArgument(format!(
            "invariant order {j} outside 1..={}",
            d.get() - 1
        )));
    }
    if n == 0 {
        return Err(Error::EmptyEnsemble(
            "entangling power needs at least one sample",
        ));
    }
    let values = sample_chunks(n, seed, stream::ENTANGLING_POWER, |rng| {
        let input = haar_product_state(d, rng);
        let out = TwoQuditState::normalize(d, u.apply(input.vector()).expect("dimensions checked"))
            .expect("unitary image");
        let inv = invariants(&out);
        if j == 1 {
            inv.linear_entropy
        } else {
            inv.iprime[j - 1]
        }
    });
    let count = values.len() as f64;
    let mean = values.iter().sum::<f64>() / count;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0)
    } else {
        0.0
    };
    Ok(EntanglingPowerEstimate {
        mean,
        std_error: (var / count).sqrt(),
        n_samples: values.len(),
        j,
    })
}

/// Operator linear entropy `1 − Tr[(WW†)²]/d⁴` with the regrouping
/// `W_{(i,k),(j,l)} = U_{(i·d+j),(k·d+l)}`.
pub fn operator_linear_entropy(u: &DenseMatrix) -> Result<f64> {
    let d = qudit_dimension_of(u)?.get();
    let n = d * d;
    let mut w = DenseMatrix::zeros(n, n);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    w[(i * d + k, j * d + l)] = u[(i * d + j, k * d + l)];
                }
            }
        }
    }
    let wwd = w.matmul(&w.adjoint())?;
    let purity: f64 = wwd.entries().iter().map(|z| z.norm_sqr()).sum();
    Ok(1.0 - purity / (n * n) as f64)
}

/// `(d/(d+1))²·[E(U) + E(U𝒮) − E(𝒮)]`.
pub fn entangling_power_closed(u: &DenseMatrix) -> Result<f64> {
    let d = qudit_dimension_of(u)?;
    check_unitary(u)?;
    let swap = swap_matrix(d);
    let e_u = operator_linear_entropy(u)?;
    let e_us = operator_linear_entropy(&u.matmul(&swap)?)?;
    let e_s = operator_linear_entropy(&swap)?;
    let prefactor = (d.as_f64() / (d.as_f64() + 1.0)).powi(2);
    Ok(prefactor * (e_u + e_us - e_s))
}

/// A Haar-random unitary on `C^n` (QR of a complex Gaussian matrix with the
/// phase fix on the diagonal of R).
pub fn haar_unitary(n: usize, rng: &mut impl Rng) -> DenseMatrix {
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect()
        })
        .collect();
    // Modified Gram–Schmidt; dividing by the (positive) norm fixes the phases.
    for c in 0..n {
        for p in 0..c {
            let (done, rest) = cols.split_at_mut(c);
            let overlap: Complex64 = done[p]
                .iter()
                .zip(&rest[0])
                .map(|(a, b)| a.conj() * b)
                .sum();
            for (x, y) in rest[0].iter_mut().zip(&done[p]) {
                *x -= overlap * y;
            }
        }
        let norm = cols[c].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in cols[c].iter_mut() {
            *x /= norm;
        }
    }
    let mut u = DenseMatrix::zeros(n, n);
    for (c, col) in cols.iter().enumerate() {
        for (r, &z) in col.iter().enumerate() {
            u[(r, c)] = z;
        }
    }
    u
}
