//! The unitary braid matrix `R̆(x)` for two qudits and its algebraic checks.
//!
//! `R̆(x) = (1/d)·{[(d−1)x + x⁻¹]·I − (x − x⁻¹)·M}` with `x = e^{iθ}` and
//! `M = Σ_{r=1}^{d−1} P_r ⊗ P_r`, where `P_r` is the cyclic shift
//! `Σ_i |i⟩⟨(i+r) mod d|`. `M` obeys the Hecke relations with
//! `α = d−2`, `β = g = d−1`, which is what makes `R̆` solve the braided
//! Yang–Baxter equation with multiplicative spectral parameter.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{kron, max_norm_distance, DenseMatrix, IntMatrix, StateVector};

pub const MIN_DIMENSION: usize = 2;
pub const MAX_DIMENSION: usize = 8;

/// Local dimension `d` of each qudit, `2 ≤ d ≤ 8`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct QuditDimension(usize);

impl QuditDimension {
    pub fn new(d: usize) -> Result<Self> {
        if (MIN_DIMENSION..=MAX_DIMENSION).contains(&d) {
            Ok(Self(d))
        } else {
            Err(Error::InvalidDimension(d))
        }
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }

    /// `d²`, the two-qudit Hilbert space dimension.
    pub fn pair(self) -> usize {
        self.0 * self.0
    }

    pub fn all() -> impl Iterator<Item = QuditDimension> {
        (MIN_DIMENSION..=MAX_DIMENSION).map(QuditDimension)
    }
}

impl TryFrom<usize> for QuditDimension {
    type Error = Error;

    fn try_from(d: usize) -> Result<Self> {
        Self::new(d)
    }
}

impl From<QuditDimension> for usize {
    fn from(d: QuditDimension) -> usize {
        d.0
    }
}

impl fmt::Display for QuditDimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Hecke constants `α = d−2`, `β = g = d−1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeckeConstants {
    pub alpha: f64,
    pub beta: f64,
    pub g: f64,
}

impl HeckeConstants {
    pub fn for_dimension(d: QuditDimension) -> Self {
        let d = d.as_f64();
        Self {
            alpha: d - 2.0,
            beta: d - 1.0,
            g: d - 1.0,
        }
    }
}

/// Maps any angle into `[0, 2π)`.
pub fn canonical_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative input.
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// `x = e^{iθ}` on the unit circle.
pub fn spectral_parameter(theta: f64) -> Complex64 {
    let t = canonical_angle(theta);
    Complex64::new(t.cos(), t.sin())
}

/// `P_r = Σ_i |i⟩⟨(i+r) mod d|` as an exact 0/1 matrix.
pub fn circulation_int(d: QuditDimension, r: usize) -> Result<IntMatrix> {
    let n = d.get();
    if r >= n {
        return Err(Error::IndexOutOfRange { index: r, dim: n });
    }
    let mut p = IntMatrix::zeros(n, n);
    for i in 0..n {
        p[(i, (i + r) % n)] = 1;
    }
    Ok(p)
}

pub fn circulation_matrix(d: QuditDimension, r: usize) -> Result<DenseMatrix> {
    circulation_int(d, r).map(|p| p.to_complex())
}

/// Adjacent transposition `ℙ_{k,k+1}` on a single qudit.
pub fn adjacent_transposition(d: QuditDimension, k: usize) -> Result<IntMatrix> {
    let n = d.get();
    if k + 1 >= n {
        return Err(Error::IndexOutOfRange {
            index: k + 1,
            dim: n,
        });
    }
    let mut t = IntMatrix::identity(n);
    t[(k, k)] = 0;
    t[(k + 1, k + 1)] = 0;
    t[(k, k + 1)] = 1;
    t[(k + 1, k)] = 1;
    Ok(t)
}

/// Factors `P_1` into adjacent transpositions.
///
/// Returns `[ℙ_{d−2,d−1}, …, ℙ_{1,2}, ℙ_{0,1}]`; their left-to-right product is
/// exactly `P_1`. The trailing `ℙ_{0,1}` is required: without it the product
/// fixes `|0⟩`.
pub fn adjacent_transposition_product(d: QuditDimension) -> Vec<IntMatrix> {
    (0..d.get() - 1)
        .rev()
        .map(|k| adjacent_transposition(d, k).expect("k + 1 < d"))
        .collect()
}

/// `M = Σ_{r=1}^{d−1} P_r ⊗ P_r` as an exact integer matrix.
pub fn m_int(d: QuditDimension) -> IntMatrix {
    let n = d.get();
    let mut m = IntMatrix::zeros(n * n, n * n);
    for r in 1..n {
        let p = circulation_int(d, r).expect("r < d");
        m = m.combine(1, &p.kron(&p), 1);
    }
    m
}

pub fn m_matrix(d: QuditDimension) -> DenseMatrix {
    m_int(d).to_complex()
}

/// `M² − (d−2)M − (d−1)I`, exact.
pub fn hecke_quadratic_defect(d: QuditDimension) -> IntMatrix {
    let n = d.get() as i64;
    let m = m_int(d);
    let m2 = m.matmul(&m);
    let lhs = m2.combine(1, &m, -(n - 2));
    lhs.combine(1, &IntMatrix::identity(m.rows()), -(n - 1))
}

/// `‖M₁M₂M₁ − M₂M₁M₂ + (d−1)(M₁ − M₂)‖_max` on three qudits, in exact integer
/// arithmetic, with `M₁ = M ⊗ I` and `M₂ = I ⊗ M`.
pub fn braid_hecke_residual(d: QuditDimension) -> f64 {
    let g = d.get() as i64 - 1;
    let m = m_int(d);
    let id = IntMatrix::identity(d.get());
    let m1 = m.kron(&id);
    let m2 = id.kron(&m);
    let lhs = m1.matmul(&m2).matmul(&m1);
    let rhs = m2.matmul(&m1).matmul(&m2);
    let braid = lhs.combine(1, &rhs, -1);
    let linear = m1.combine(g, &m2, -g);
    braid.combine(1, &linear, 1).max_abs() as f64
}

/// `F(x)` and `G(x)` of the ansatz `R̆(x) = F(x)[I + G(x) M]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightPair {
    pub f: Complex64,
    /// `None` when `(d−1)x + x⁻¹` vanishes and `G` has a pole.
    pub g: Option<Complex64>,
}

impl WeightPair {
    pub fn singular(&self) -> bool {
        self.g.is_none()
    }
}

const SINGULAR_DENOMINATOR: f64 = 1e-12;

/// `F = ((d−1)x + x⁻¹)/d`, `G = −(x − x⁻¹)/((d−1)x + x⁻¹)`.
pub fn weight_functions(d: QuditDimension, theta: f64) -> WeightPair {
    let x = spectral_parameter(theta);
    let x_inv = x.conj();
    let denom = x * (d.as_f64() - 1.0) + x_inv;
    let f = denom / d.as_f64();
    let g = if denom.norm() < SINGULAR_DENOMINATOR {
        None
    } else {
        Some(-(x - x_inv) / denom)
    };
    WeightPair { f, g }
}

/// Coefficients `(a, b)` with `R̆(θ) = a·I + b·M`.
pub fn r_coefficients(d: QuditDimension, theta: f64) -> (Complex64, Complex64) {
    let x = spectral_parameter(theta);
    let x_inv = x.conj();
    let n = d.as_f64();
    ((x * (n - 1.0) + x_inv) / n, -(x - x_inv) / n)
}

/// `R̆(x)` together with its dimension and canonical angle.
#[derive(Clone, Debug)]
pub struct YangBaxterGate {
    d: QuditDimension,
    theta: f64,
    matrix: DenseMatrix,
}

impl YangBaxterGate {
    pub fn d(&self) -> QuditDimension {
        self.d
    }

    /// Angle in `[0, 2π)`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.matrix
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        self.matrix.apply(v)
    }
}

/// Builds `R̆(θ)` from its expanded form, finite for every `θ`.
pub fn r_matrix(d: QuditDimension, theta: f64) -> YangBaxterGate {
    let theta = canonical_angle(theta);
    let (a, b) = r_coefficients(d, theta);
    let m = m_int(d);
    let n = d.pair();
    let matrix = DenseMatrix::from_fn(n, n, |i, j| {
        let diag = if i == j { a } else { Complex64::new(0.0, 0.0) };
        diag + b * m[(i, j)] as f64
    });
    YangBaxterGate { d, theta, matrix }
}

/// `R̆` built through `F·(I + G·M)`; `None` at the pole of `G`.
pub fn r_matrix_from_weights(d: QuditDimension, theta: f64) -> Option<DenseMatrix> {
    let w = weight_functions(d, theta);
    let g = w.g?;
    let m = m_matrix(d);
    let inner = DenseMatrix::identity(d.pair())
        .add(&m.scale(g))
        .expect("same dimensions");
    Some(inner.scale(w.f))
}

/// `‖R̆₁(x)R̆₂(xy)R̆₁(y) − R̆₂(y)R̆₁(xy)R̆₂(x)‖_max` with `x = e^{iθ₁}`,
/// `y = e^{iθ₂}`, `R̆₁ = R̆ ⊗ I` and `R̆₂ = I ⊗ R̆`.
pub fn ybe_residual(d: QuditDimension, theta1: f64, theta2: f64) -> f64 {
    let id = DenseMatrix::identity(d.get());
    let site1 = |theta: f64| kron(r_matrix(d, theta).matrix(), &id);
    let site2 = |theta: f64| kron(&id, r_matrix(d, theta).matrix());
    let product = |a: &DenseMatrix, b: &DenseMatrix, c: &DenseMatrix| {
        a.matmul(b)
            .and_then(|ab| ab.matmul(c))
            .expect("square operators of equal size")
    };
    let lhs = product(&site1(theta1), &site2(theta1 + theta2), &site1(theta2));
    let rhs = product(&site2(theta2), &site1(theta1 + theta2), &site2(theta1));
    max_norm_distance(&lhs, &rhs).expect("same dimensions")
}

/// `(‖R̆R̆† − I‖_max, ‖R̆(x)† − R̆(x⁻¹)‖_max)`; `x⁻¹` is realized as `θ → −θ`.
pub fn unitarity_residuals(d: QuditDimension, theta: f64) -> (f64, f64) {
    let r = r_matrix(d, theta);
    let unit = r.matrix().unitarity_residual();
    let inverse = max_norm_distance(&r.matrix().adjoint(), r_matrix(d, -theta).matrix())
        .expect("same dimensions");
    (unit, inverse)
}

/// Left side minus right side of the spectral functional equation
/// `G(x)+G(y)+αG(x)G(y) = [1+gG(x)G(y)]G(xy)`; `None` if any `G` is singular.
pub fn functional_equation_defect(d: QuditDimension, theta1: f64, theta2: f64) -> Option<f64> {
    let h = HeckeConstants::for_dimension(d);
    let gx = weight_functions(d, theta1).g?;
    let gy = weight_functions(d, theta2).g?;
    let gxy = weight_functions(d, theta1 + theta2).g?;
    let lhs = gx + gy + gx * gy * h.alpha;
    let rhs = (gx * gy * h.g + 1.0) * gxy;
    Some((lhs - rhs).norm())
}

/// Defects of the two unitarity constraints on the weights:
/// `|G(x)+G(x⁻¹)+αG(x)G(x⁻¹)|` and `|F(x)F(x⁻¹)[1+βG(x)G(x⁻¹)] − 1|`.
pub fn weight_unitarity_defects(d: QuditDimension, theta: f64) -> Option<(f64, f64)> {
    let h = HeckeConstants::for_dimension(d);
    let w = weight_functions(d, theta);
    let w_inv = weight_functions(d, -theta);
    let (g, g_inv) = (w.g?, w_inv.g?);
    let additive = (g + g_inv + g * g_inv * h.alpha).norm();
    let multiplicative = (w.f * w_inv.f * (g * g_inv * h.beta + 1.0) - 1.0).norm();
    Some((additive, multiplicative))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

    fn dim(d: usize) -> QuditDimension {
        QuditDimension::new(d).unwrap()
    }

    fn int(rows: &[&[i64]]) -> IntMatrix {
        let mut m = IntMatrix::zeros(rows.len(), rows[0].len());
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    #[test]
    fn dimension_bounds() {
        assert!(QuditDimension::new(1).is_err());
        assert!(QuditDimension::new(9).is_err());
        assert_eq!(QuditDimension::all().count(), 7);
        let h = HeckeConstants::for_dimension(dim(5));
        assert_eq!((h.alpha, h.beta, h.g), (3.0, 4.0, 4.0));
    }

    #[test]
    fn qutrit_circulation_matrices() {
        let d = dim(3);
        assert_eq!(circulation_int(d, 0).unwrap(), IntMatrix::identity(3));
        let p1 = circulation_int(d, 1).unwrap();
        assert_eq!(p1, int(&[&[0, 1, 0], &[0, 0, 1], &[1, 0, 0]]));
        let p2 = circulation_int(d, 2).unwrap();
        assert_eq!(p2, int(&[&[0, 0, 1], &[1, 0, 0], &[0, 1, 0]]));
        assert_eq!(p2, p1.matmul(&p1));
        assert!(matches!(
            circulation_int(d, 3),
            Err(Error::IndexOutOfRange { index: 3, dim: 3 })
        ));
    }

    #[test]
    fn circulation_group_law_and_traces() {
        for d in QuditDimension::all() {
            let n = d.get();
            let p: Vec<_> = (0..n).map(|r| circulation_int(d, r).unwrap()).collect();
            for m in 0..n {
                for k in 0..n {
                    let mk = p[m].matmul(&p[k]);
                    assert_eq!(mk, p[k].matmul(&p[m]));
                    assert_eq!(mk, p[(m + k) % n]);
                }
                if m > 0 {
                    assert_eq!(p[m].trace(), 0);
                }
                let mut power = IntMatrix::identity(n);
                for _ in 0..m {
                    power = power.matmul(&p[1]);
                }
                assert_eq!(power, p[m]);
            }
            assert!(circulation_matrix(d, 1).unwrap().unitarity_residual() == 0.0);
        }
    }

    #[test]
    fn transpositions_factor_p1() {
        for d in QuditDimension::all() {
            let factors = adjacent_transposition_product(d);
            assert_eq!(factors.len(), d.get() - 1);
            let product = factors
                .iter()
                .fold(IntMatrix::identity(d.get()), |acc, t| acc.matmul(t));
            assert_eq!(product, circulation_int(d, 1).unwrap(), "d = {d}");
        }
        // d = 3: [ℙ_{1,2}, ℙ_{0,1}].
        let f = adjacent_transposition_product(dim(3));
        assert_eq!(f[0], adjacent_transposition(dim(3), 1).unwrap());
        assert_eq!(f[1], adjacent_transposition(dim(3), 0).unwrap());
        // Dropping ℙ_{0,1} does not give P₁.
        assert_ne!(f[0], circulation_int(dim(3), 1).unwrap());
    }

    #[test]
    fn m_matrix_properties() {
        let m2 = m_int(dim(2));
        let p1 = circulation_int(dim(2), 1).unwrap();
        assert_eq!(m2, p1.kron(&p1));
        for d in QuditDimension::all() {
            let m = m_int(d);
            assert_eq!(m, m.transpose(), "Hermitian, d = {d}");
            assert_eq!(m.trace(), 0);
            assert_eq!(hecke_quadratic_defect(d).max_abs(), 0, "d = {d}");
        }
    }

    #[test]
    fn braid_relation_exact() {
        for n in [2, 3, 4, 6] {
            assert_eq!(braid_hecke_residual(dim(n)), 0.0, "d = {n}");
        }
    }

    #[test]
    fn weights_at_identity_and_pole() {
        let w = weight_functions(dim(3), 0.0);
        assert_eq!(w.f, Complex64::new(1.0, 0.0));
        assert_eq!(w.g, Some(Complex64::new(0.0, 0.0)));

        let w = weight_functions(dim(2), FRAC_PI_2);
        assert!(w.singular());
        assert!(w.f.norm() < 1e-15);
        assert!(r_matrix_from_weights(dim(2), FRAC_PI_2).is_none());
    }

    #[test]
    fn weight_equations_hold() {
        let angles = [0.1, 0.37, 1.2, 2.5, 3.9, 5.0];
        for d in QuditDimension::all() {
            for &a in &angles {
                for &b in &angles {
                    if let Some(defect) = functional_equation_defect(d, a, b) {
                        assert!(defect <= 1e-12, "d={d} a={a} b={b}: {defect}");
                    }
                }
                let (add, mul) = weight_unitarity_defects(d, a).unwrap();
                assert!(add <= 1e-12 && mul <= 1e-12, "d={d} a={a}: {add} {mul}");
            }
        }
    }

    #[test]
    fn r_matrix_identity_at_zero() {
        for d in QuditDimension::all() {
            let r = r_matrix(d, 0.0);
            assert_eq!(r.matrix(), &DenseMatrix::identity(d.pair()));
            assert_eq!(unitarity_residuals(d, 0.0), (0.0, 0.0));
        }
    }

    #[test]
    fn bell_state_at_quarter_pi() {
        let d = dim(2);
        let out = r_matrix(d, FRAC_PI_4)
            .apply(&StateVector::basis(4, 0))
            .unwrap();
        let a = out.amplitudes();
        assert!((a[0] - Complex64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-12);
        assert!((a[3] - Complex64::new(0.0, -FRAC_1_SQRT_2)).norm() < 1e-12);
        assert!(a[1].norm() < 1e-15 && a[2].norm() < 1e-15);
    }

    #[test]
    fn qutrit_maximally_entangled_image() {
        let out = r_matrix(dim(3), FRAC_PI_3)
            .apply(&StateVector::basis(9, 0))
            .unwrap();
        let s = 1.0 / 3f64.sqrt();
        let mut expected = vec![Complex64::new(0.0, 0.0); 9];
        expected[0] = Complex64::from_polar(s, std::f64::consts::PI / 6.0);
        expected[4] = Complex64::new(0.0, -s);
        expected[8] = Complex64::new(0.0, -s);
        for (got, want) in out.amplitudes().iter().zip(&expected) {
            assert!((got - want).norm() < 1e-12);
        }
        // Same thing written as -i/√3·(ω|00⟩ + |11⟩ + |22⟩), ω = e^{2πi/3}.
        let omega = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        let first = Complex64::new(0.0, -s) * omega;
        assert!((out.amplitudes()[0] - first).norm() < 1e-12);
    }

    #[test]
    fn expanded_and_factored_forms_agree() {
        for d in QuditDimension::all() {
            for theta in [0.05, 0.7, 1.3, 2.2, 4.0, 5.9] {
                if let Some(factored) = r_matrix_from_weights(d, theta) {
                    let direct = r_matrix(d, theta);
                    assert!(max_norm_distance(direct.matrix(), &factored).unwrap() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn ybe_small_cases() {
        assert_eq!(ybe_residual(dim(2), 0.0, 0.0), 0.0);
        assert!(ybe_residual(dim(3), 0.7, 1.3) <= 1e-12);
        assert!(ybe_residual(dim(5), 2.1, 0.4) <= 1e-12);
    }

    #[test]
    fn unitarity_examples() {
        for (n, theta) in [(4, 1.234), (3, FRAC_PI_3)] {
            let (u, inv) = unitarity_residuals(dim(n), theta);
            assert!(u <= 1e-12 && inv <= 1e-12);
        }
    }

    #[test]
    fn inverse_angle_gives_inverse_matrix() {
        for d in QuditDimension::all() {
            let theta = 0.83;
            let prod = r_matrix(d, theta)
                .matrix()
                .matmul(r_matrix(d, -theta).matrix())
                .unwrap();
            assert!(max_norm_distance(&prod, &DenseMatrix::identity(d.pair())).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn rebuild_is_deterministic() {
        let a = r_matrix(dim(3), 0.3);
        let b = r_matrix(dim(3), 0.3);
        assert!(max_norm_distance(a.matrix(), b.matrix()).unwrap() <= 1e-15);
    }

    #[test]
    fn angle_canonicalization() {
        assert_eq!(canonical_angle(0.0), 0.0);
        assert!((canonical_angle(-0.5) - (TAU - 0.5)).abs() < 1e-15);
        assert!(canonical_angle(-1e-300) < TAU);
        assert!((canonical_angle(7.0) - (7.0 - TAU)).abs() < 1e-15);
    }
}
