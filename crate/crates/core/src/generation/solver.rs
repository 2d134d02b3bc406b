//! Inverse problem: find `(θ, φ)` whose generated state has a given Schmidt
//! spectrum.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{generate, GenerationParams};
use crate::entanglement::schmidt_decompose;
use crate::error::{Error, Result};
use crate::parallel::{chunk_rng, stream};
use crate::yang_baxter::QuditDimension;

/// Derivative-free simplex minimizer (reflection 1, expansion 2, contraction
/// 1/2, shrink 1/2).
#[derive(Clone, Debug)]
pub struct NelderMead {
    pub max_iterations: usize,
    /// Stop once the spread of objective values across the simplex falls below this.
    pub f_spread_tol: f64,
    /// Stop once the best value falls below this.
    pub f_target: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            f_spread_tol: 1e-30,
            f_target: 0.0,
        }
    }
}

impl NelderMead {
    /// Minimizes `f` from `x0`, with initial simplex vertices `x0 + step_k e_k`.
    /// Returns the best point and its value.
    pub fn minimize(&self, f: impl Fn(&[f64]) -> f64, x0: &[f64], step: &[f64]) -> (Vec<f64>, f64) {
        let n = x0.len();
        assert_eq!(step.len(), n);
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((x0.to_vec(), f(x0)));
        for k in 0..n {
            let mut x = x0.to_vec();
            x[k] += step[k];
            let fx = f(&x);
            simplex.push((x, fx));
        }

        let along = |from: &[f64], to: &[f64], t: f64| -> Vec<f64> {
            from.iter().zip(to).map(|(a, b)| a + t * (b - a)).collect()
        };

        for _ in 0..self.max_iterations {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let best = simplex[0].1;
            let worst = simplex[n].1;
            if best <= self.f_target || worst - best <= self.f_spread_tol {
                break;
            }
            let centroid: Vec<f64> = (0..n)
                .map(|k| simplex[..n].iter().map(|v| v.0[k]).sum::<f64>() / n as f64)
                .collect();
            let worst_x = simplex[n].0.clone();

            let reflected = along(&worst_x, &centroid, 2.0);
            let f_r = f(&reflected);
            if f_r < best {
                let expanded = along(&worst_x, &centroid, 3.0);
                let f_e = f(&expanded);
                simplex[n] = if f_e < f_r {
                    (expanded, f_e)
                } else {
                    (reflected, f_r)
                };
                continue;
            }
            if f_r < simplex[n - 1].1 {
                simplex[n] = (reflected, f_r);
                continue;
            }
            let contracted = if f_r < worst {
                along(&worst_x, &centroid, 1.5)
            } else {
                along(&worst_x, &centroid, 0.5)
            };
            let f_c = f(&contracted);
            if f_c < worst.min(f_r) {
                simplex[n] = (contracted, f_c);
                continue;
            }
            let anchor = simplex[0].0.clone();
            for v in simplex.iter_mut().skip(1) {
                let x = along(&anchor, &v.0, 0.5);
                let fx = f(&x);
                *v = (x, fx);
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        simplex.swap_remove(0)
    }
}

/// Search budget for [`solve_parameters`].
#[derive(Clone, Debug)]
pub struct SolverBudget {
    /// Grid points per parameter axis.
    pub grid_per_axis: usize,
    /// Above this many grid points, the grid is replaced by this many seeded
    /// random points.
    pub max_grid_points: usize,
    /// Simplex refinements, started from the best local minima of the grid.
    pub restarts: usize,
    pub simplex_iterations: usize,
}

impl Default for SolverBudget {
    fn default() -> Self {
        Self {
            grid_per_axis: 64,
            max_grid_points: 64 * 64 * 64,
            restarts: 24,
            simplex_iterations: 500,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Solution {
    pub params: GenerationParams,
    /// Sorted Schmidt spectrum of the generated state.
    pub kappa: Vec<f64>,
    /// `max_k |κ_k − target_k|`.
    pub residual: f64,
}

/// Simplex restarts from the point where a refinement stalled.
const POLISH_ROUNDS: usize = 2;

/// Targets whose sum of squares is within this of 1 are renormalized, so
/// coefficients printed to a few digits are accepted.
const TARGET_NORM_SLACK: f64 = 1e-4;

/// Checks the target and returns it normalized.
fn validate_target(d: QuditDimension, target: &[f64]) -> Result<Vec<f64>> {
    if target.len() != d.get() {
        return Err(Error::InvalidTarget(format!(
            "{} coefficients for d = {d}",
            target.len()
        )));
    }
    if target.iter().any(|&k| !k.is_finite() || k < -1e-12) {
        return Err(Error::InvalidTarget(
            "coefficients must be non-negative".into(),
        ));
    }
    if target.windows(2).any(|w| w[1] > w[0] + 1e-12) {
        return Err(Error::InvalidTarget(
            "coefficients must be descending".into(),
        ));
    }
    let norm2: f64 = target.iter().map(|k| k * k).sum();
    if (norm2 - 1.0).abs() > TARGET_NORM_SLACK {
        return Err(Error::InvalidTarget(format!(
            "sum of squares is {norm2}, not 1"
        )));
    }
    let norm = norm2.sqrt();
    Ok(target.iter().map(|k| k.max(0.0) / norm).collect())
}

/// Maps an unconstrained search point onto valid parameters: `θ` wraps, each
/// `φ_k` is clamped into `[0, π]`, missing `φ_k` are zero.
fn to_params(d: QuditDimension, x: &[f64]) -> GenerationParams {
    let mut phi: Vec<f64> = x[1..].iter().map(|p| p.clamp(0.0, PI)).collect();
    phi.resize(d.get() - 2, 0.0);
    GenerationParams::new(d, x[0], phi).expect("projected angles are valid")
}

fn spectrum(params: &GenerationParams) -> Vec<f64> {
    schmidt_decompose(&generate(params)).kappa
}

fn squared_error(kappa: &[f64], target: &[f64]) -> f64 {
    kappa
        .iter()
        .zip(target)
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// Search points, and whether they form the regular grid (`g` points per
/// axis including both ends, axis 0 fastest).
fn grid_points(d: QuditDimension, axes: usize, budget: &SolverBudget) -> (Vec<Vec<f64>>, bool) {
    let g = budget.grid_per_axis.max(2);
    let total = (g as u128).checked_pow(axes as u32).unwrap_or(u128::MAX);
    if total <= budget.max_grid_points as u128 {
        let points = (0..total as usize)
            .map(|mut idx| {
                let mut x = Vec::with_capacity(axes);
                for k in 0..axes {
                    let span = if k == 0 { FRAC_PI_2 } else { PI };
                    x.push(span * (idx % g) as f64 / (g - 1) as f64);
                    idx /= g;
                }
                x
            })
            .collect();
        (points, true)
    } else {
        let mut rng = chunk_rng(0, d.get() as u64, stream::SOLVER);
        let points = (0..budget.max_grid_points)
            .map(|_| {
                let mut x = vec![rng.random_range(0.0..=FRAC_PI_2)];
                x.extend((1..axes).map(|_| rng.random_range(0.0..=PI)));
                x
            })
            .collect();
        (points, false)
    }
}

/// Whether grid point `idx` is no worse than all its neighbours (ties broken by index).
fn is_grid_local_min(idx: usize, values: &[f64], g: usize, axes: usize) -> bool {
    let coords: Vec<usize> = (0..axes).map(|k| (idx / g.pow(k as u32)) % g).collect();
    let key = |i: usize| (values[i], i);
    let here = key(idx);
    for offset in 0..3usize.pow(axes as u32) {
        if offset == (3usize.pow(axes as u32) - 1) / 2 {
            continue;
        }
        let mut neighbour = 0;
        let mut valid = true;
        for (k, &c) in coords.iter().enumerate() {
            let delta = (offset / 3usize.pow(k as u32)) % 3;
            let c = c as isize + delta as isize - 1;
            if !(0..g as isize).contains(&c) {
                valid = false;
                break;
            }
            neighbour += c as usize * g.pow(k as u32);
        }
        if valid
            && key(neighbour)
                .0
                .total_cmp(&here.0)
                .then(neighbour.cmp(&idx))
                .is_lt()
        {
            return false;
        }
    }
    true
}

/// Restart points: grid local minima by increasing objective, topped up with
/// the best remaining points.
fn restart_points(
    values: &[f64],
    regular: bool,
    g: usize,
    axes: usize,
    count: usize,
) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut starts: Vec<usize> = if regular {
        order
            .iter()
            .copied()
            .filter(|&i| is_grid_local_min(i, values, g, axes))
            .take(count)
            .collect()
    } else {
        Vec::new()
    };
    for &i in &order {
        if starts.len() >= count {
            break;
        }
        if !starts.contains(&i) {
            starts.push(i);
        }
    }
    starts
}

/// Finds `(θ, φ)` such that the sorted Schmidt spectrum of the generated state
/// matches `target_kappa` to within `tol` in every component.
///
/// A coarse grid over `θ ∈ [0, π/2]` and `φ_k ∈ [0, π]` seeds simplex
/// refinements of `Σ(κ_sorted − target)²`. The rest of the `θ` circle adds
/// nothing: `R̆(θ + π) = −R̆(θ)` and `R̆(π − θ) = −R̆(θ)*`, and a real input
/// vector makes the conjugate give the same spectrum. The direct family
/// (`|00⟩` input, all `φ_k = 0`) is searched first and kept if it reaches `tol`.
pub fn solve_parameters(d: QuditDimension, target_kappa: &[f64], tol: f64) -> Result<Solution> {
    solve_parameters_with(d, target_kappa, tol, &SolverBudget::default())
}

pub fn solve_parameters_with(
    d: QuditDimension,
    target_kappa: &[f64],
    tol: f64,
    budget: &SolverBudget,
) -> Result<Solution> {
    let target_kappa = &validate_target(d, target_kappa)?[..];
    let mut best = search(d, target_kappa, tol, budget, 1);
    if best.1 > tol && d.get() > 2 {
        let full = search(d, target_kappa, tol, budget, d.get() - 1);
        if full.1 < best.1 {
            best = full;
        }
    }
    let (params, residual) = best;
    if residual <= tol {
        Ok(Solution {
            kappa: spectrum(&params),
            params,
            residual,
        })
    } else {
        Err(Error::NoSolutionFound {
            tol,
            residual,
            theta: params.theta(),
            phi: params.phi().to_vec(),
        })
    }
}

/// Grid plus simplex search over `θ` and the first `axes − 1` angles `φ_k`.
fn search(
    d: QuditDimension,
    target_kappa: &[f64],
    tol: f64,
    budget: &SolverBudget,
    axes: usize,
) -> (GenerationParams, f64) {
    let objective = |x: &[f64]| squared_error(&spectrum(&to_params(d, x)), target_kappa);
    let residual = |x: &[f64]| max_deviation(&spectrum(&to_params(d, x)), target_kappa);

    let (grid, regular) = grid_points(d, axes, budget);
    let values: Vec<f64> = grid.par_iter().map(|x| objective(x)).collect();
    let g = budget.grid_per_axis.max(2);
    let starts = restart_points(&values, regular, g, axes, budget.restarts.max(1));

    let g = g as f64;
    let mut step = vec![FRAC_PI_2 / (g - 1.0)];
    step.extend((1..axes).map(|_| PI / (g - 1.0)));
    let nm = NelderMead {
        max_iterations: budget.simplex_iterations,
        f_target: (tol * 1e-3).powi(2),
        ..NelderMead::default()
    };

    let mut best: Option<(Vec<f64>, f64)> = None;
    for start in starts {
        let (mut x, mut fx) = nm.minimize(objective, &grid[start], &step);
        for _ in 0..POLISH_ROUNDS {
            if fx <= nm.f_target {
                break;
            }
            (x, fx) = nm.minimize(
                objective,
                &x,
                &step.iter().map(|s| s * 0.1).collect::<Vec<_>>(),
            );
        }
        if best.as_ref().is_none_or(|b| fx < b.1) {
            best = Some((x, fx));
        }
        let (bx, _) = best.as_ref().expect("set above");
        if residual(bx) <= tol * 1e-3 {
            break;
        }
    }
    let (x, _) = best.expect("at least one restart");
    let r = residual(&x);
    (to_params(d, &x), r)
}

fn max_deviation(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
