//! Monte-Carlo region experiments in the space of normalized invariants.
//!
//! Two ensembles are compared: random Schmidt spectra (the full region of pure
//! two-qudit states) and states produced by the generation pipeline with random
//! `(θ, φ)`. Coverage counts how many grid bins reached by the first ensemble are
//! also reached by the second.

use std::collections::HashSet;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::{generate, GenerationParams};
use crate::entanglement::{invariants, invariants_from_kappa};
use crate::error::{Error, Result};
use crate::format::fmt_sig;
use crate::parallel::{sample_chunks, stream};
use crate::yang_baxter::QuditDimension;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ensemble {
    /// Random Schmidt coefficients.
    Schmidt,
    /// Random `(θ, φ)` through the generation pipeline.
    YangBaxter,
}

impl Ensemble {
    pub fn label(self) -> &'static str {
        match self {
            Ensemble::Schmidt => "schmidt",
            Ensemble::YangBaxter => "yb",
        }
    }
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SampleSource {
    Schmidt { kappa: Vec<f64> },
    YangBaxter(GenerationParams),
}

/// A point `(I′_1, …, I′_{d−1})` and where it came from.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionSample {
    pub source: SampleSource,
    pub iprime: Vec<f64>,
}

impl RegionSample {
    pub fn ensemble(&self) -> Ensemble {
        match self.source {
            SampleSource::Schmidt { .. } => Ensemble::Schmidt,
            SampleSource::YangBaxter(_) => Ensemble::YangBaxter,
        }
    }
}

/// Invariant point of `generate(params)`.
pub fn region_point(params: &GenerationParams) -> RegionSample {
    let iprime = invariants(&generate(params)).iprime;
    RegionSample {
        source: SampleSource::YangBaxter(params.clone()),
        iprime,
    }
}

fn schmidt_point(mut kappa: Vec<f64>) -> RegionSample {
    kappa.sort_by(|a, b| b.total_cmp(a));
    let iprime = invariants_from_kappa(&kappa).iprime;
    RegionSample {
        source: SampleSource::Schmidt { kappa },
        iprime,
    }
}

/// Draws `n` region samples, reproducibly for a given `seed`.
///
/// Schmidt ensemble: `κ_k ∝ |z_k|` with `z_k` standard complex Gaussian.
/// Pipeline ensemble: `θ` uniform on `[0, 2π)`, each `φ_k` uniform on `[0, π]`.
pub fn sample_region(
    d: QuditDimension,
    n: usize,
    seed: u64,
    ensemble: Ensemble,
) -> Vec<RegionSample> {
    let dn = d.get();
    match ensemble {
        Ensemble::Schmidt => sample_chunks(n, seed, stream::SCHMIDT, |rng| {
            let raw: Vec<f64> = (0..dn)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    re.hypot(im)
                })
                .collect();
            let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
            schmidt_point(raw.into_iter().map(|x| x / norm).collect())
        }),
        Ensemble::YangBaxter => sample_chunks(n, seed, stream::YANG_BAXTER, |rng| {
            let theta = rng.random_range(0.0..TAU);
            let phi = (0..dn - 2).map(|_| rng.random_range(0.0..=PI)).collect();
            region_point(&GenerationParams::new(d, theta, phi).expect("angles in range"))
        }),
    }
}

/// Boundary curves of the two-qutrit region.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContourCurve {
    /// `cos ξ|00⟩ + sin ξ|11⟩`, `ξ ∈ [0, π/4]`.
    OB,
    /// `cos ξ|00⟩ + sin ξ(|11⟩+|22⟩)/√2`, `ξ ∈ [0, ξ_G]`.
    OG,
    /// Same family, `ξ ∈ [ξ_G, π/2]`.
    GB,
}

impl ContourCurve {
    pub const ALL: [ContourCurve; 3] = [ContourCurve::OB, ContourCurve::OG, ContourCurve::GB];

    /// `ξ_G = arccos(1/√3)`, where the second family is maximally entangled.
    pub fn xi_g() -> f64 {
        (1.0 / 3f64.sqrt()).acos()
    }

    pub fn xi_range(self) -> (f64, f64) {
        match self {
            ContourCurve::OB => (0.0, FRAC_PI_4),
            ContourCurve::OG => (0.0, Self::xi_g()),
            ContourCurve::GB => (Self::xi_g(), FRAC_PI_2),
        }
    }

    pub fn kappa(self, xi: f64) -> [f64; 3] {
        let (c, s) = (xi.cos(), xi.sin());
        match self {
            ContourCurve::OB => [c, s, 0.0],
            ContourCurve::OG | ContourCurve::GB => {
                let t = s / 2f64.sqrt();
                [c, t, t]
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ContourCurve::OB => "OB",
            ContourCurve::OG => "OG",
            ContourCurve::GB => "GB",
        }
    }
}

impl FromStr for ContourCurve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "OB" => Ok(ContourCurve::OB),
            "OG" => Ok(ContourCurve::OG),
            "GB" => Ok(ContourCurve::GB),
            _ => Err(Error::UnknownCurve(s.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContourPoint {
    pub curve: &'static str,
    pub xi: f64,
    pub iprime: [f64; 2],
}

/// Evenly spaced points along one boundary curve, endpoints included.
pub fn contour_curve(curve: ContourCurve, steps: usize) -> Result<Vec<ContourPoint>> {
    if steps < 2 {
        return Err(Error::InvalidArgument(format!(
            "contour needs at least 2 steps, got {steps}"
        )));
    }
    let (lo, hi) = curve.xi_range();
    Ok((0..steps)
        .map(|k| {
            let xi = lo + (hi - lo) * k as f64 / (steps - 1) as f64;
            let inv = invariants_from_kappa(&curve.kappa(xi));
            ContourPoint {
                curve: curve.name(),
                xi,
                iprime: [inv.iprime[0], inv.iprime[1]],
            }
        })
        .collect())
}

fn qutrit_point(kappa: [f64; 3]) -> (f64, f64) {
    let inv = invariants_from_kappa(&kappa);
    (inv.iprime[0], inv.iprime[1])
}

/// Solves `I′_1(curve(t)) = target` for `t ∈ [lo, hi]` by bisection, where
/// `I′_1` is monotone along the curve, and returns `I′_2` there.
fn boundary_value(curve: impl Fn(f64) -> [f64; 3], lo: f64, hi: f64, target: f64) -> f64 {
    let at = |t: f64| qutrit_point(curve(t));
    let increasing = at(hi).0 >= at(lo).0;
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if (at(mid).0 < target) == increasing {
            a = mid;
        } else {
            b = mid;
        }
    }
    at(0.5 * (a + b)).1
}

/// Lower and upper `I′_2` of the two-qutrit region at a given `I′_1 ∈ [0, 1]`.
///
/// The region is the curved triangle O B G: for `I′_1 ≤ 3/4` it lies between
/// curves OB and OG, above that between GB and OG.
pub fn qutrit_region_bounds(i1p: f64) -> Option<(f64, f64)> {
    if !(0.0..=1.0).contains(&i1p) {
        return None;
    }
    // Parameterize by Schmidt weights: OB = (1−t, t, 0); OG/GB = (q, (1−q)/2, (1−q)/2).
    let ob = |t: f64| [(1.0 - t).sqrt(), t.sqrt(), 0.0];
    let pair = |q: f64| {
        let r = ((1.0 - q) / 2.0).sqrt();
        [q.sqrt(), r, r]
    };
    let og = boundary_value(pair, 1.0 / 3.0, 1.0, i1p);
    let other = if i1p <= 0.75 {
        boundary_value(ob, 0.0, 0.5, i1p)
    } else {
        boundary_value(pair, 0.0, 1.0 / 3.0, i1p)
    };
    Some((og.min(other), og.max(other)))
}

/// Whether a two-qutrit invariant point lies in the region, up to `slack`.
pub fn qutrit_region_contains(point: &[f64], slack: f64) -> bool {
    let [a, b] = point else {
        return false;
    };
    if *a < -slack || *a > 1.0 + slack {
        return false;
    }
    let (lo, hi) = qutrit_region_bounds(a.clamp(0.0, 1.0)).expect("clamped into range");
    *b >= lo - slack && *b <= hi + slack
}

/// Bins of `[0,1]^{d−1}` reached by a target ensemble and by a generated one.
#[derive(Clone, Debug, Serialize)]
pub struct CoverageReport {
    pub d: usize,
    pub grid_resolution: usize,
    pub bins_target: usize,
    pub bins_generated: usize,
    pub bins_covered: usize,
    pub coverage: f64,
    /// `(target, generated)` sample counts.
    pub sample_counts: (usize, usize),
    /// Target bins missed by the generated ensemble (at most 256 listed).
    pub uncovered: Vec<Vec<usize>>,
    pub uncovered_total: usize,
}

const UNCOVERED_LISTED: usize = 256;

fn bin_of(iprime: &[f64], grid: usize) -> Vec<usize> {
    iprime
        .iter()
        .map(|&v| ((v * grid as f64).floor().max(0.0) as usize).min(grid - 1))
        .collect()
}

pub fn coverage_report(
    target: &[RegionSample],
    generated: &[RegionSample],
    grid_resolution: usize,
) -> Result<CoverageReport> {
    if target.is_empty() {
        return Err(Error::EmptyEnsemble("target"));
    }
    if generated.is_empty() {
        return Err(Error::EmptyEnsemble("generated"));
    }
    if grid_resolution == 0 {
        return Err(Error::InvalidArgument(
            "grid resolution must be positive".into(),
        ));
    }
    let axes = target[0].iprime.len();
    if target
        .iter()
        .chain(generated)
        .any(|s| s.iprime.len() != axes)
    {
        return Err(Error::DimMismatch(
            "samples of different dimensions in one coverage report".into(),
        ));
    }
    let bins = |samples: &[RegionSample]| -> HashSet<Vec<usize>> {
        samples
            .iter()
            .map(|s| bin_of(&s.iprime, grid_resolution))
            .collect()
    };
    let target_bins = bins(target);
    let generated_bins = bins(generated);
    let mut uncovered: Vec<Vec<usize>> = target_bins.difference(&generated_bins).cloned().collect();
    uncovered.sort();
    let uncovered_total = uncovered.len();
    uncovered.truncate(UNCOVERED_LISTED);
    let bins_covered = target_bins.len() - uncovered_total;
    Ok(CoverageReport {
        d: axes + 1,
        grid_resolution,
        bins_target: target_bins.len(),
        bins_generated: generated_bins.len(),
        bins_covered,
        coverage: bins_covered as f64 / target_bins.len() as f64,
        sample_counts: (target.len(), generated.len()),
        uncovered,
        uncovered_total,
    })
}

/// Header of the region CSV, e.g. `ensemble,theta,phi1,i1p,i2p` for `d = 3`.
pub fn region_csv_header(d: QuditDimension) -> String {
    let mut cols = vec!["ensemble".to_string(), "theta".to_string()];
    cols.extend((1..=d.get() - 2).map(|k| format!("phi{k}")));
    cols.extend((1..d.get()).map(|j| format!("i{j}p")));
    cols.join(",")
}

/// Writes samples as CSV; parameter columns are empty for Schmidt samples.
pub fn write_region_csv<W: Write>(
    mut out: W,
    d: QuditDimension,
    samples: &[RegionSample],
) -> io::Result<()> {
    writeln!(out, "{}", region_csv_header(d))?;
    let n_params = d.get() - 1;
    for s in samples {
        let mut fields = vec![s.ensemble().label().to_string()];
        match &s.source {
            SampleSource::Schmidt { .. } => fields.extend((0..n_params).map(|_| String::new())),
            SampleSource::YangBaxter(p) => {
                fields.push(fmt_sig(p.theta()));
                fields.extend(p.phi().iter().map(|&x| fmt_sig(x)));
            }
        }
        fields.extend(s.iprime.iter().map(|&x| fmt_sig(x)));
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

pub const CONTOUR_CSV_HEADER: &str = "curve,xi,i1p,i2p";

pub fn write_contour_csv<W: Write>(mut out: W, points: &[ContourPoint]) -> io::Result<()> {
    writeln!(out, "{CONTOUR_CSV_HEADER}")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{}",
            p.curve,
            fmt_sig(p.xi),
            fmt_sig(p.iprime[0]),
            fmt_sig(p.iprime[1])
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(d: usize) -> QuditDimension {
        QuditDimension::new(d).unwrap()
    }

    fn point(iprime: Vec<f64>) -> RegionSample {
        RegionSample {
            source: SampleSource::Schmidt { kappa: vec![] },
            iprime,
        }
    }

    #[test]
    fn forced_identity_sample_is_origin() {
        let s = region_point(&GenerationParams::new(dim(3), 0.0, vec![1.1]).unwrap());
        assert!(s.iprime.iter().all(|x| x.abs() < 1e-15));
    }

    #[test]
    fn sampling_is_deterministic() {
        for e in [Ensemble::Schmidt, Ensemble::YangBaxter] {
            let a = sample_region(dim(4), 5000, 17, e);
            let b = sample_region(dim(4), 5000, 17, e);
            assert_eq!(a, b);
            assert_eq!(a.len(), 5000);
            assert!(a.iter().all(|s| s.ensemble() == e));
            assert_ne!(a, sample_region(dim(4), 5000, 18, e));
        }
    }

    #[test]
    fn samples_lie_in_unit_cube() {
        for e in [Ensemble::Schmidt, Ensemble::YangBaxter] {
            for s in sample_region(dim(5), 2000, 3, e) {
                assert!(s
                    .iprime
                    .iter()
                    .all(|&x| (-1e-10..=1.0 + 1e-10).contains(&x)));
            }
        }
    }

    #[test]
    fn contour_endpoints() {
        let b = (0.75, 27.0 / 32.0);
        let close =
            |p: [f64; 2], q: (f64, f64)| (p[0] - q.0).abs() < 1e-10 && (p[1] - q.1).abs() < 1e-10;
        let ob = contour_curve(ContourCurve::OB, 11).unwrap();
        assert!(close(ob[0].iprime, (0.0, 0.0)));
        assert!(close(ob[10].iprime, b));
        let og = contour_curve(ContourCurve::OG, 11).unwrap();
        assert!(close(og[0].iprime, (0.0, 0.0)));
        assert!(close(og[10].iprime, (1.0, 1.0)));
        let gb = contour_curve(ContourCurve::GB, 11).unwrap();
        assert!(close(gb[0].iprime, (1.0, 1.0)));
        assert!(close(gb[10].iprime, b));
        assert!(contour_curve(ContourCurve::OB, 1).is_err());
        assert!(matches!(
            "XY".parse::<ContourCurve>(),
            Err(Error::UnknownCurve(_))
        ));
        assert_eq!("og".parse::<ContourCurve>().unwrap(), ContourCurve::OG);
    }

    #[test]
    fn literal_pi_over_three_misses_g() {
        // ξ = π/3 on the second family is not the maximally entangled point.
        let inv = invariants_from_kappa(&ContourCurve::OG.kappa(std::f64::consts::FRAC_PI_3));
        assert!((inv.iprime[0] - 63.0 / 64.0).abs() < 1e-12);
    }

    #[test]
    fn region_bounds_at_vertices() {
        let (lo, hi) = qutrit_region_bounds(0.0).unwrap();
        assert!(lo.abs() < 1e-12 && hi.abs() < 1e-12);
        let (lo, hi) = qutrit_region_bounds(0.75).unwrap();
        // OG passes below B: p = (2/3, 1/6, 1/6) gives I′_2 = 25/32.
        assert!((hi - 27.0 / 32.0).abs() < 1e-9);
        assert!((lo - 25.0 / 32.0).abs() < 1e-9);
        let (lo, hi) = qutrit_region_bounds(1.0).unwrap();
        assert!((lo - 1.0).abs() < 1e-9 && (hi - 1.0).abs() < 1e-9);
        assert!(qutrit_region_bounds(1.5).is_none());
    }

    #[test]
    fn region_membership() {
        // (0.5, 0.3, 0.2) is an interior spectrum.
        let kappa = [0.5f64.sqrt(), 0.3f64.sqrt(), 0.2f64.sqrt()];
        let inv = invariants_from_kappa(&kappa);
        assert!(qutrit_region_contains(&inv.iprime, 0.0));
        assert!(!qutrit_region_contains(&[0.2, 0.9], 1e-8));
        assert!(!qutrit_region_contains(&[0.2], 1e-8));
    }

    #[test]
    fn coverage_definitions() {
        let a = vec![point(vec![0.1, 0.1]), point(vec![0.9, 0.9])];
        let report = coverage_report(&a, &a, 10).unwrap();
        assert_eq!(report.coverage, 1.0);

        let g = vec![point(vec![0.15, 0.12])];
        let report = coverage_report(&a, &g, 10).unwrap();
        assert_eq!(report.bins_target, 2);
        assert_eq!(report.bins_covered, 1);
        assert_eq!(report.coverage, 0.5);
        assert_eq!(report.uncovered, vec![vec![9, 9]]);

        assert!(matches!(
            coverage_report(&[], &g, 10),
            Err(Error::EmptyEnsemble(_))
        ));
        assert!(matches!(
            coverage_report(&a, &[], 10),
            Err(Error::EmptyEnsemble(_))
        ));
        // Values at 1.0 and tiny negatives fall in the edge bins.
        assert_eq!(bin_of(&[1.0, -1e-12], 50), vec![49, 0]);
    }

    #[test]
    fn csv_layout() {
        assert_eq!(region_csv_header(dim(3)), "ensemble,theta,phi1,i1p,i2p");
        assert_eq!(
            region_csv_header(dim(4)),
            "ensemble,theta,phi1,phi2,i1p,i2p,i3p"
        );
        let samples = vec![
            region_point(&GenerationParams::new(dim(3), 0.5, vec![0.25]).unwrap()),
            schmidt_point(vec![1.0, 0.0, 0.0]),
        ];
        let mut buf = Vec::new();
        write_region_csv(&mut buf, dim(3), &samples).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("yb,0.5,0.25,"));
        assert_eq!(lines[2], "schmidt,,,0,0");
    }
}
