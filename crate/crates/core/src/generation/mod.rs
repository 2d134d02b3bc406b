//! Generating two-qudit states as `[V_A ⊗ V_B] R̆(x) [U_A ⊗ U_B] |00⟩`.
//!
//! With `U_A = I` the input is `|0⟩_A ⊗ |Φ⟩_B`, where `|Φ⟩_B` is a real unit
//! vector on `|0⟩..|d−2⟩` parameterized by hyperspherical angles `φ_1..φ_{d−2}`.
//! `V_A ⊗ V_B` only rotates the output into Schmidt form and leaves every
//! invariant unchanged, so the region experiments never build it.

mod region;
mod solver;

pub use region::{
    contour_curve, coverage_report, qutrit_region_bounds, qutrit_region_contains,
    region_csv_header, region_point, sample_region, write_contour_csv, write_region_csv,
    ContourCurve, ContourPoint, CoverageReport, Ensemble, RegionSample, SampleSource,
    CONTOUR_CSV_HEADER,
};
pub use solver::{solve_parameters, solve_parameters_with, NelderMead, Solution, SolverBudget};

use std::f64::consts::{FRAC_PI_3, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::entanglement::TwoQuditState;
use crate::error::{Error, Result};
use crate::tensor::{DenseMatrix, StateVector, ZERO};
use crate::yang_baxter::{canonical_angle, r_coefficients, r_matrix, QuditDimension};

const ANGLE_SLACK: f64 = 1e-12;

/// Phase angle `θ` (`x = e^{iθ}`) and product-state angles `φ_1..φ_{d−2}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenerationParams {
    #[serde(serialize_with = "serialize_dim")]
    d: QuditDimension,
    theta: f64,
    phi: Vec<f64>,
}

fn serialize_dim<S: serde::Serializer>(
    d: &QuditDimension,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u64(d.get() as u64)
}

impl GenerationParams {
    /// `θ` is reduced to `[0, 2π)`; each `φ_k` must lie in `[0, π]`.
    pub fn new(d: QuditDimension, theta: f64, phi: Vec<f64>) -> Result<Self> {
        let expected = d.get() - 2;
        if phi.len() != expected {
            return Err(Error::WrongAngleCount {
                expected,
                got: phi.len(),
            });
        }
        if !theta.is_finite() || phi.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("generation angle"));
        }
        if let Some(&bad) = phi
            .iter()
            .find(|&&p| !(-ANGLE_SLACK..=PI + ANGLE_SLACK).contains(&p))
        {
            return Err(Error::AngleOutOfRange(bad));
        }
        let phi = phi.into_iter().map(|p| p.clamp(0.0, PI)).collect();
        Ok(Self {
            d,
            theta: canonical_angle(theta),
            phi,
        })
    }

    /// `φ = 0`: the input is `|00⟩`.
    pub fn direct(d: QuditDimension, theta: f64) -> Self {
        Self::new(d, theta, vec![0.0; d.get() - 2]).expect("zero angles are valid")
    }

    pub fn d(&self) -> QuditDimension {
        self.d
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }
}

/// Real coefficients `cos φ_1, sin φ_1 cos φ_2, …, sin φ_1⋯sin φ_{d−2}, 0`.
fn product_coefficients(d: usize, phi: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; d];
    let mut sin_prod = 1.0;
    for (k, &p) in phi.iter().enumerate() {
        c[k] = sin_prod * p.cos();
        sin_prod *= p.sin();
    }
    c[phi.len()] = sin_prod;
    c
}

/// `|Φ⟩_B = U_B|0⟩`, supported on `|0⟩..|d−2⟩`.
pub fn product_state(d: QuditDimension, phi: &[f64]) -> Result<StateVector> {
    let expected = d.get() - 2;
    if phi.len() != expected {
        return Err(Error::WrongAngleCount {
            expected,
            got: phi.len(),
        });
    }
    StateVector::from_real(&product_coefficients(d.get(), phi))
}

/// A real reflection `U_B` with `U_B|0⟩ = |Φ⟩_B`.
///
/// For `d = 3` this is `cos φ(|0⟩⟨0| − |1⟩⟨1|) + sin φ(|0⟩⟨1| + |1⟩⟨0|) + |2⟩⟨2|`.
/// At `φ = 0` the reflection degenerates and the identity is returned.
pub fn local_unitary_b(d: QuditDimension, phi: &[f64]) -> Result<DenseMatrix> {
    let target = product_state(d, phi)?;
    let n = d.get();
    // Householder vector w = |0⟩ − |Φ⟩.
    let w: Vec<f64> = target
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| if i == 0 { 1.0 - a.re } else { -a.re })
        .collect();
    let w2: f64 = w.iter().map(|x| x * x).sum();
    if w2 < 1e-30 {
        return Ok(DenseMatrix::identity(n));
    }
    Ok(DenseMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        Complex64::new(delta - 2.0 * w[i] * w[j] / w2, 0.0)
    }))
}

/// `R̆(θ)·v`, using `R̆ = a·I + b·M` and `(Mv)_{ij} = Σ_{r≥1} v_{(i+r)(j+r)}`.
pub(crate) fn apply_r(d: QuditDimension, theta: f64, v: &[Complex64]) -> Vec<Complex64> {
    let n = d.get();
    let (a, b) = r_coefficients(d, theta);
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut shifted = ZERO;
            for r in 1..n {
                shifted += v[((i + r) % n) * n + (j + r) % n];
            }
            out.push(a * v[i * n + j] + b * shifted);
        }
    }
    out
}

/// `R̆(x)·(|0⟩_A ⊗ |Φ⟩_B)`.
pub fn generate(params: &GenerationParams) -> TwoQuditState {
    let n = params.d.get();
    let coeffs = product_coefficients(n, &params.phi);
    let mut input = vec![ZERO; n * n];
    for (j, &c) in coeffs.iter().enumerate() {
        input[j] = Complex64::new(c, 0.0);
    }
    let out = apply_r(params.d, params.theta, &input);
    TwoQuditState::normalize(params.d, StateVector::new(out).expect("finite amplitudes"))
        .expect("unitary image of a unit vector")
}

/// The full pipeline with explicit local unitaries:
/// `[V_A ⊗ V_B] R̆(θ) [U_A ⊗ U_B] |00⟩`.
pub fn generate_with_locals(
    d: QuditDimension,
    theta: f64,
    u: (&DenseMatrix, &DenseMatrix),
    v: (&DenseMatrix, &DenseMatrix),
) -> Result<TwoQuditState> {
    let start = TwoQuditState::product_basis(d, 0, 0);
    let r = r_matrix(d, theta);
    start
        .apply_local(u.0, u.1)?
        .evolve(r.matrix())?
        .apply_local(v.0, v.1)
}

/// `(1/d){[(d−1)x + x⁻¹]|00⟩ − (x − x⁻¹) Σ_{j≥1} |jj⟩}` evaluated directly.
pub fn closed_form_direct(d: QuditDimension, theta: f64) -> TwoQuditState {
    let n = d.get();
    let t = canonical_angle(theta);
    let x = Complex64::new(t.cos(), t.sin());
    let x_inv = x.conj();
    let mut amps = vec![ZERO; n * n];
    amps[0] = (x * (n as f64 - 1.0) + x_inv) / n as f64;
    let rest = -(x - x_inv) / n as f64;
    for j in 1..n {
        amps[j * n + j] = rest;
    }
    TwoQuditState::new(d, StateVector::new(amps).expect("finite")).expect("unit norm")
}

/// The nine states `R̆(3, π/3)|ij⟩`, in the order `|00⟩, |01⟩, …, |22⟩`.
pub fn maximally_entangled_basis() -> Vec<TwoQuditState> {
    let d = QuditDimension::new(3).expect("3 is a valid dimension");
    let r = r_matrix(d, FRAC_PI_3);
    (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .map(|(i, j)| {
            TwoQuditState::product_basis(d, i, j)
                .evolve(r.matrix())
                .expect("R is unitary")
        })
        .collect()
}

/// Gram matrix `⟨ψ_a|ψ_b⟩` of a list of states.
pub fn gram_matrix(states: &[TwoQuditState]) -> DenseMatrix {
    let n = states.len();
    DenseMatrix::from_fn(n, n, |a, b| states[a].vector().inner(states[b].vector()))
}
