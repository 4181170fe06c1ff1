use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::guidance::{GuidanceLaw, GuidanceParams};

use super::eigen::{eigenpair_residual, eigenvalues, sort_canonical};
use super::jacobian::{assemble_symbolic, compare_jacobians, jacobian_fd, BlockComparison};
use super::{alpha, equilibrium_state, rhs_slice, ControlInput, RelativeState};

/// Relative tolerance used when comparing the printed blocks to the
/// finite-difference Jacobian.
pub const BLOCK_TOLERANCE: f64 = 1e-5;

/// Absolute tolerance for matching numeric and closed-form eigenvalues.
pub const SPECTRUM_TOLERANCE: f64 = 1e-3;

/// Eigenvalues closer than this fraction of the spectral radius are
/// treated as one repeated eigenvalue.
pub const CLUSTER_FRACTION: f64 = 0.05;

/// Imaginary parts below this are treated as zero when deciding whether a
/// cluster is real.
const REAL_TOLERANCE: f64 = 1e-6;

/// A group of numerically split copies of one repeated eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cluster {
    /// Mean of the members.
    pub value: Complex64,
    pub multiplicity: usize,
    /// Largest distance of a member from the mean.
    pub spread: f64,
}

/// Groups eigenvalues by single linkage at distance `tol`, sorted canonically.
pub fn distinct_eigenvalues(values: &[Complex64], tol: f64) -> Vec<Cluster> {
    let m = values.len();
    let mut parent: Vec<usize> = (0..m).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..m {
        for j in i + 1..m {
            if (values[i] - values[j]).norm() <= tol {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    let mut index = vec![usize::MAX; m];
    for (i, &z) in values.iter().enumerate() {
        let r = root(&mut parent, i);
        if index[r] == usize::MAX {
            index[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[index[r]].push(z);
    }
    let mut clusters: Vec<Cluster> = groups
        .into_iter()
        .map(|g| {
            let mean = g.iter().sum::<Complex64>() / g.len() as f64;
            let spread = g.iter().map(|z| (z - mean).norm()).fold(0.0, f64::max);
            Cluster {
                value: mean,
                multiplicity: g.len(),
                spread,
            }
        })
        .collect();
    clusters.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
    });
    clusters
}

/// Clustering distance for a pair of spectra.
pub fn cluster_tolerance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let radius = a.iter().chain(b).map(|z| z.norm()).fold(0.0, f64::max);
    CLUSTER_FRACTION * radius.max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterPair {
    pub closed_form: Cluster,
    pub numeric: Option<Cluster>,
    /// Distance between the cluster means, infinite when unpaired.
    pub deviation: f64,
    pub matched: bool,
}

/// Multiset comparison of a numeric spectrum against the closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumMatch {
    pub tolerance: f64,
    pub cluster_tolerance: f64,
    pub pairs: Vec<ClusterPair>,
    /// Numeric clusters left without a closed-form counterpart.
    pub unmatched_numeric: Vec<Cluster>,
    pub numeric_count: usize,
    pub closed_form_count: usize,
}

impl SpectrumMatch {
    pub fn matched(&self) -> bool {
        self.numeric_count == self.closed_form_count
            && self.unmatched_numeric.is_empty()
            && self.pairs.iter().all(|p| p.matched)
    }

    pub fn max_deviation(&self) -> f64 {
        self.pairs.iter().map(|p| p.deviation).fold(0.0, f64::max)
    }
}

/// Matches repeated eigenvalues by cluster mean and multiplicity, since the
/// individual copies of a defective eigenvalue split apart numerically.
pub fn match_clustered(numeric: &[Complex64], closed_form: &[Complex64], tol: f64) -> SpectrumMatch {
    let ctol = cluster_tolerance(numeric, closed_form);
    let num = distinct_eigenvalues(numeric, ctol);
    let cf = distinct_eigenvalues(closed_form, ctol);
    let mut used = vec![false; num.len()];
    let pairs = cf
        .iter()
        .map(|c| {
            let best = (0..num.len())
                .filter(|&k| !used[k])
                .min_by(|&a, &b| {
                    (num[a].value - c.value)
                        .norm()
                        .total_cmp(&(num[b].value - c.value).norm())
                });
            match best {
                Some(k) => {
                    used[k] = true;
                    let deviation = (num[k].value - c.value).norm();
                    ClusterPair {
                        closed_form: *c,
                        numeric: Some(num[k]),
                        deviation,
                        matched: deviation <= tol && num[k].multiplicity == c.multiplicity,
                    }
                }
                None => ClusterPair {
                    closed_form: *c,
                    numeric: None,
                    deviation: f64::INFINITY,
                    matched: false,
                },
            }
        })
        .collect();
    let unmatched_numeric = num
        .iter()
        .zip(&used)
        .filter(|(_, u)| !**u)
        .map(|(c, _)| *c)
        .collect();
    SpectrumMatch {
        tolerance: tol,
        cluster_tolerance: ctol,
        pairs,
        unmatched_numeric,
        numeric_count: numeric.len(),
        closed_form_count: closed_form.len(),
    }
}

/// Eigenvalue families that do not involve β: `-k_v`, `-V_c α/d*` and the
/// lateral pair `-2V_c α/d* ± j V_c sqrt(2(α²/d*² + 1/(4R²)))`.
fn fixed_families(params: &GuidanceParams, radius: f64, a: f64) -> (Complex64, Complex64, Complex64) {
    let (vc, ds) = (params.v_c, params.d_star);
    let im = vc * (2.0 * (a * a / (ds * ds) + 1.0 / (4.0 * radius * radius))).sqrt();
    (
        Complex64::new(-params.k_v, 0.0),
        Complex64::new(-vc * a / ds, 0.0),
        Complex64::new(-2.0 * vc * a / ds, im),
    )
}

fn remove_nearest(pool: &mut Vec<Complex64>, target: Complex64, count: usize) {
    for _ in 0..count {
        if let Some(k) = (0..pool.len())
            .min_by(|&a, &b| (pool[a] - target).norm().total_cmp(&(pool[b] - target).norm()))
        {
            pool.swap_remove(k);
        }
    }
}

/// Recovers β from the two real longitudinal clusters `-β k_v` and
/// `-(1-β) k_v` of a numeric spectrum of `4n` values.
pub fn extract_beta(
    numeric: &[Complex64],
    n: usize,
    params: &GuidanceParams,
    radius: f64,
) -> Result<f64> {
    if n < 2 {
        return Err(Error::BetaExtraction(
            "a single vehicle has no longitudinal coupling modes".into(),
        ));
    }
    if numeric.len() != 4 * n {
        return Err(Error::BetaExtraction(format!(
            "expected {} eigenvalues, got {}",
            4 * n,
            numeric.len()
        )));
    }
    let a = alpha(params, radius)?;
    let (kv, heading, lateral) = fixed_families(params, radius, a);
    let mut pool = numeric.to_vec();
    remove_nearest(&mut pool, kv, 1);
    remove_nearest(&mut pool, heading, 1);
    remove_nearest(&mut pool, lateral, n);
    remove_nearest(&mut pool, lateral.conj(), n);

    let scale = numeric.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let clusters = distinct_eigenvalues(&pool, CLUSTER_FRACTION * scale);
    if let Some(c) = clusters
        .iter()
        .find(|c| c.value.im.abs() > REAL_TOLERANCE * scale.max(1.0))
    {
        return Err(Error::BetaExtraction(format!(
            "remaining eigenvalues are complex (e.g. {:.6}{:+.6}j, multiplicity {}); \
             no real pair -beta*k_v, -(1-beta)*k_v exists",
            c.value.re, c.value.im, c.multiplicity
        )));
    }
    let mut re: Vec<f64> = pool.iter().map(|z| z.re).collect();
    re.sort_by(f64::total_cmp);
    let half = n - 1;
    let fast = re[..half].iter().sum::<f64>() / half as f64;
    let slow = re[half..].iter().sum::<f64>() / half as f64;
    if (fast + slow + params.k_v).abs() > SPECTRUM_TOLERANCE * params.k_v.max(1.0) {
        return Err(Error::BetaExtraction(format!(
            "real clusters {fast:.6} and {slow:.6} do not sum to -k_v = {:.6}",
            -params.k_v
        )));
    }
    Ok(-fast / params.k_v)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormSpectrum {
    /// Canonically sorted; `4n` values when β is known, otherwise the
    /// `2n + 2` values that do not depend on it.
    pub values: Vec<Complex64>,
    pub alpha: f64,
    pub beta: Option<f64>,
    /// Why β could not be extracted, when it could not.
    pub beta_diagnostic: Option<String>,
}

/// Closed-form spectrum at the sine-law circular equilibrium, with β taken
/// from `numeric`, the spectrum of the finite-difference Jacobian.
pub fn closed_form_spectrum(
    n: usize,
    params: &GuidanceParams,
    radius: f64,
    numeric: &[Complex64],
) -> Result<ClosedFormSpectrum> {
    if n == 0 {
        return Err(Error::Domain("platoon must contain at least one vehicle".into()));
    }
    let a = alpha(params, radius)?;
    let (kv, heading, lateral) = fixed_families(params, radius, a);
    let mut values = vec![kv, heading];
    for _ in 0..n {
        values.push(lateral);
        values.push(lateral.conj());
    }
    let (beta, beta_diagnostic) = if n == 1 {
        (None, None)
    } else {
        match extract_beta(numeric, n, params, radius) {
            Ok(b) => {
                for _ in 0..n - 1 {
                    values.push(Complex64::new(-(1.0 - b) * params.k_v, 0.0));
                    values.push(Complex64::new(-b * params.k_v, 0.0));
                }
                (Some(b), None)
            }
            Err(e) => (None, Some(e.to_string())),
        }
    };
    sort_canonical(&mut values);
    Ok(ClosedFormSpectrum {
        values,
        alpha: a,
        beta,
        beta_diagnostic,
    })
}

fn rows<S: Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    let v: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
    v.serialize(s)
}

fn state<S: Serializer>(x: &RelativeState, s: S) -> std::result::Result<S::Ok, S::Error> {
    x.as_slice().serialize(s)
}

/// Linearization of the sine-law platoon about its circular equilibrium.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearizationReport {
    pub n: usize,
    pub d_star: f64,
    #[serde(rename = "R")]
    pub radius: f64,
    #[serde(rename = "V_c")]
    pub v_c: f64,
    pub k_v: f64,
    pub alpha: f64,
    pub beta: Option<f64>,
    #[serde(serialize_with = "state")]
    pub equilibrium: RelativeState,
    /// Infinity norm of the rhs at the equilibrium.
    pub equilibrium_residual: f64,
    pub eigenvalues_numeric: Vec<Complex64>,
    pub eigenvalues_closed_form: Vec<Complex64>,
    pub max_block_discrepancy: f64,
    pub block_comparison: BlockComparison,
    /// Largest `‖Av - λv‖ / ‖A‖` over the numeric eigenpairs.
    pub max_relative_residual: f64,
    pub all_stable: bool,
    pub spectrum_match: SpectrumMatch,
    pub spectrum_matches: bool,
    pub diagnostics: Vec<String>,
    #[serde(rename = "A_symbolic", serialize_with = "rows")]
    pub a_symbolic: DMatrix<f64>,
    #[serde(rename = "A_fd", serialize_with = "rows")]
    pub a_fd: DMatrix<f64>,
}

/// Finite-difference Jacobian of the relative dynamics at `x0`.
pub fn relative_jacobian(
    x0: &RelativeState,
    u: &ControlInput,
    law: GuidanceLaw,
    params: &GuidanceParams,
) -> Result<DMatrix<f64>> {
    jacobian_fd(|x| rhs_slice(x, u, law, params), x0.as_slice())
}

pub fn linearize(n: usize, params: &GuidanceParams, radius: f64) -> Result<LinearizationReport> {
    params.validate()?;
    params.validate_for_radius(radius)?;
    let u = ControlInput::circle(radius, params.v_c)?;
    let x0 = equilibrium_state(n, params, u.curvature)?;
    let law = GuidanceLaw::Sine;
    let equilibrium_residual = rhs_slice(x0.as_slice(), &u, law, params)
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));

    let a_fd = relative_jacobian(&x0, &u, law, params)?;
    let a_symbolic = assemble_symbolic(n, params, radius)?;
    let block_comparison = compare_jacobians(&a_symbolic, &a_fd, BLOCK_TOLERANCE);

    let numeric = eigenvalues(&a_fd)?;
    let norm = a_fd.norm().max(f64::MIN_POSITIVE);
    let max_relative_residual = numeric
        .iter()
        .map(|l| eigenpair_residual(&a_fd, *l) / norm)
        .fold(0.0, f64::max);
    let closed = closed_form_spectrum(n, params, radius, &numeric)?;
    let spectrum_match = match_clustered(&numeric, &closed.values, SPECTRUM_TOLERANCE);

    let mut diagnostics = Vec::new();
    for e in &block_comparison.mismatches {
        diagnostics.push(format!(
            "printed block entry ({}, {}) = {:.9} differs from finite difference {:.9}",
            e.row, e.col, e.symbolic, e.numeric
        ));
    }
    if let Some(d) = &closed.beta_diagnostic {
        diagnostics.push(format!("beta extraction: {d}"));
    }
    for p in spectrum_match.pairs.iter().filter(|p| !p.matched) {
        let c = p.closed_form;
        match p.numeric {
            Some(m) => diagnostics.push(format!(
                "closed-form {:.6}{:+.6}j (x{}) nearest numeric {:.6}{:+.6}j (x{}), |delta| = {:.3e}",
                c.value.re, c.value.im, c.multiplicity, m.value.re, m.value.im, m.multiplicity, p.deviation
            )),
            None => diagnostics.push(format!(
                "closed-form {:.6}{:+.6}j (x{}) has no numeric counterpart",
                c.value.re, c.value.im, c.multiplicity
            )),
        }
    }
    for c in &spectrum_match.unmatched_numeric {
        diagnostics.push(format!(
            "numeric {:.6}{:+.6}j (x{}) has no closed-form counterpart",
            c.value.re, c.value.im, c.multiplicity
        ));
    }
    let all_stable = numeric.iter().all(|z| z.re < 0.0);
    if !all_stable {
        diagnostics.push("at least one eigenvalue has a non-negative real part".into());
    }

    Ok(LinearizationReport {
        n,
        d_star: params.d_star,
        radius,
        v_c: params.v_c,
        k_v: params.k_v,
        alpha: closed.alpha,
        beta: closed.beta,
        equilibrium: x0,
        equilibrium_residual,
        eigenvalues_numeric: numeric,
        eigenvalues_closed_form: closed.values,
        max_block_discrepancy: block_comparison.max_abs_difference,
        spectrum_matches: spectrum_match.matched(),
        block_comparison,
        max_relative_residual,
        all_stable,
        spectrum_match,
        diagnostics,
        a_symbolic,
        a_fd,
    })
}
