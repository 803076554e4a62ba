//! Lamé systems `μΔu + (λ+μ)∇div u`: tensor representatives, closed-form
//! p-ellipticity constants, admissibility and oscillation checks.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math;
use crate::range::PRange;
use crate::tensor::CoefficientTensor;

/// Lamé moduli at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LameParams {
    pub lambda: f64,
    pub mu: f64,
    pub n: usize,
}

impl LameParams {
    pub fn new(lambda: f64, mu: f64, n: usize) -> Result<Self> {
        check(lambda, mu, n)?;
        Ok(Self { lambda, mu, n })
    }

    pub fn tensor(&self, r: f64) -> Result<CoefficientTensor> {
        lame_tensor(self.lambda, self.mu, r, self.n)
    }

    pub fn sufficiency(&self) -> Result<LameSufficiency> {
        sufficient_constant(self.n, self.lambda, self.mu)
    }
}

fn check(lambda: f64, mu: f64, n: usize) -> Result<()> {
    if !lambda.is_finite() || !mu.is_finite() {
        return Err(Error::NonFinite("Lamé moduli"));
    }
    if n < 2 {
        return Err(Error::invalid("Lamé systems need n >= 2"));
    }
    if !(mu > 0.0) {
        return Err(Error::invalid("Lamé moduli need mu > 0"));
    }
    if !(lambda + 2.0 * mu > 0.0) {
        return Err(Error::invalid("Lamé moduli need lambda + 2 mu > 0"));
    }
    Ok(())
}

/// `A^{hk}_{αβ} = μδ^{hk}δ_{αβ} + (λ+r)δ^h_α δ^k_β + (μ-r)δ^h_β δ^k_α`, `m = n`.
pub fn lame_tensor(lambda: f64, mu: f64, r: f64, n: usize) -> Result<CoefficientTensor> {
    check(lambda, mu, n)?;
    if !r.is_finite() {
        return Err(Error::NonFinite("r"));
    }
    let d = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    CoefficientTensor::from_fn(n, n, |h, k, a, b| {
        Complex64::new(
            mu * d(h, k) * d(a, b) + (lambda + r) * d(h, a) * d(k, b) + (mu - r) * d(h, b) * d(k, a),
            0.0,
        )
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LameBranch {
    /// Plane case, where the sufficient and necessary constants agree.
    N2,
    Cubic,
    DimIndependent,
    /// `λ + μ < 0` with `γ = λ + μ`.
    Case1,
}

impl LameBranch {
    pub fn as_str(self) -> &'static str {
        match self {
            LameBranch::N2 => "n2",
            LameBranch::Cubic => "cubic",
            LameBranch::DimIndependent => "dim-independent",
            LameBranch::Case1 => "case1",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LameSufficiency {
    /// Sufficient: `(1-2/p)² < c_lower` implies p-ellipticity.
    pub c_lower: f64,
    /// Necessary: p-ellipticity implies `(1-2/p)² < c_upper`.
    pub c_upper: f64,
    pub gamma_star: f64,
    /// `r* = μ - γ*`, the representative achieving `c_lower`.
    pub r_star: f64,
    pub branch: LameBranch,
    pub p_interval: PRange,
}

/// `1 - ((λ+μ)/(λ+3μ))²`, valid in every dimension.
pub fn necessary_constant(n: usize, lambda: f64, mu: f64) -> Result<f64> {
    check(lambda, mu, n)?;
    let s = (lambda + mu) / (lambda + 3.0 * mu);
    Ok(1.0 - s * s)
}

/// `1 - (λ+μ-γ)² / ((λ+2μ)(λ+μ-γ + (μ+γ)/(n-1)))`, or `None` where the
/// denominator is not positive.
fn trace_term(n: usize, lambda: f64, mu: f64, gamma: f64) -> Option<f64> {
    let s = lambda + mu - gamma;
    let d = s + (mu + gamma) / (n as f64 - 1.0);
    if !(d > 0.0) {
        return None;
    }
    Some(1.0 - s * s / ((lambda + 2.0 * mu) * d))
}

pub fn sufficient_constant(n: usize, lambda: f64, mu: f64) -> Result<LameSufficiency> {
    let c_upper = necessary_constant(n, lambda, mu)?;
    let s = lambda + mu;
    let (c_lower, gamma, branch) = if n == 2 {
        (c_upper, mu * s / (lambda + 3.0 * mu), LameBranch::N2)
    } else {
        let mut best = if s >= 0.0 {
            let q = s / (lambda + 2.0 * mu);
            (1.0 - q * q, mu - mu * mu / (lambda + 2.0 * mu), LameBranch::DimIndependent)
        } else {
            let q = s / mu;
            (1.0 - q * q, s, LameBranch::Case1)
        };
        let [_, x_minus, x_plus] = lame_cubic_roots(n, lambda, mu)?;
        for x in [x_minus, x_plus] {
            if !(x.abs() < 1.0) {
                continue;
            }
            let gamma = x * mu;
            if let Some(tr) = trace_term(n, lambda, mu, gamma) {
                let v = (1.0 - x * x).min(tr);
                if v > best.0 {
                    best = (v, gamma, LameBranch::Cubic);
                }
            }
        }
        best
    };
    Ok(LameSufficiency {
        c_lower,
        c_upper,
        gamma_star: gamma,
        r_star: mu - gamma,
        branch,
        p_interval: PRange::from_t_squared_bound(c_lower),
    })
}

/// Roots `[-1, x₋, x₊]` (with `x = γ/μ`) of
/// `((n-2)/(n-1))x³ + (1/(a+2) - a - n/(n-1))x² - (2(a+1)/(a+2))x + (a+1)²/(a+2)`.
pub fn lame_cubic_roots(n: usize, lambda: f64, mu: f64) -> Result<[f64; 3]> {
    check(lambda, mu, n)?;
    if n < 3 {
        return Err(Error::invalid("the cubic needs n >= 3"));
    }
    let nf = n as f64;
    let s = lambda + mu;
    let pref = (nf - 1.0) / (2.0 * (nf - 2.0)) * s / (mu * (lambda + 2.0 * mu));
    let disc = s * s + 4.0 * mu * (lambda + 2.0 * mu) / (nf - 1.0);
    let root = math::sqrt(disc);
    Ok([
        -1.0,
        pref * ((lambda + 3.0 * mu) - root),
        pref * ((lambda + 3.0 * mu) + root),
    ])
}

/// Value of the cubic at `x` for `a = λ/μ`.
pub fn cubic_residual(n: usize, a: f64, x: f64) -> f64 {
    let nf = n as f64;
    let c3 = (nf - 2.0) / (nf - 1.0);
    let c2 = 1.0 / (a + 2.0) - a - nf / (nf - 1.0);
    let c1 = -2.0 * (a + 1.0) / (a + 2.0);
    let c0 = (a + 1.0) * (a + 1.0) / (a + 2.0);
    ((c3 * x + c2) * x + c1) * x + c0
}

#[derive(Debug, Clone, PartialEq)]
pub struct Admissibility {
    /// `ess inf (√8-1)μ + λ`.
    pub lower_margin: f64,
    /// `ess inf (√8+1)μ - λ`.
    pub upper_margin: f64,
    pub admissible: bool,
    /// Largest Poisson ratio `λ/(2(λ+μ))` over samples where it is defined.
    pub poisson_max: Option<f64>,
    /// Samples with `λ + μ = 0`.
    pub poisson_undefined: usize,
    pub poisson_below_0396: bool,
}

/// Poisson ratio, `None` when `λ + μ = 0`.
pub fn poisson_ratio(lambda: f64, mu: f64) -> Option<f64> {
    let s = lambda + mu;
    if s == 0.0 {
        None
    } else {
        Some(lambda / (2.0 * s))
    }
}

pub fn admissibility(lambda: f64, mu: f64, mu0: f64) -> Result<Admissibility> {
    field_admissibility(&[lambda], &[mu], mu0)
}

pub fn field_admissibility(lambda: &[f64], mu: &[f64], mu0: f64) -> Result<Admissibility> {
    if !(mu0 > 0.0) || !mu0.is_finite() {
        return Err(Error::invalid("mu0 must be positive"));
    }
    if lambda.len() != mu.len() || lambda.is_empty() {
        return Err(Error::Dimension {
            what: "Lamé sample count",
            expected: lambda.len(),
            found: mu.len(),
        });
    }
    if lambda.iter().chain(mu).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("Lamé moduli"));
    }
    let r8 = math::sqrt(8.0);
    let mut lower = f64::INFINITY;
    let mut upper = f64::INFINITY;
    let mut pmax: Option<f64> = None;
    let mut undefined = 0;
    for (&l, &m) in lambda.iter().zip(mu) {
        lower = lower.min((r8 - 1.0) * m + l);
        upper = upper.min((r8 + 1.0) * m - l);
        match poisson_ratio(l, m) {
            Some(nu) => pmax = Some(pmax.map_or(nu, |p| p.max(nu))),
            None => undefined += 1,
        }
    }
    Ok(Admissibility {
        lower_margin: lower,
        upper_margin: upper,
        admissible: lower >= mu0 && upper >= mu0,
        poisson_max: pmax,
        poisson_undefined: undefined,
        poisson_below_0396: undefined == 0 && pmax.map_or(false, |p| p < 0.396),
    })
}

/// Worst-case constants over sampled moduli (`C` is an essential infimum).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSufficiency {
    pub c_lower: f64,
    pub c_upper: f64,
    /// Sample attaining `c_lower`.
    pub worst_index: usize,
    pub p_interval: PRange,
}

pub fn field_sufficiency(n: usize, lambda: &[f64], mu: &[f64]) -> Result<FieldSufficiency> {
    if lambda.len() != mu.len() || lambda.is_empty() {
        return Err(Error::Dimension {
            what: "Lamé sample count",
            expected: lambda.len(),
            found: mu.len(),
        });
    }
    let mut out: Option<FieldSufficiency> = None;
    for (i, (&l, &m)) in lambda.iter().zip(mu).enumerate() {
        let s = sufficient_constant(n, l, m).map_err(|e| e.at_sample(i))?;
        out = Some(match out {
            None => FieldSufficiency {
                c_lower: s.c_lower,
                c_upper: s.c_upper,
                worst_index: i,
                p_interval: s.p_interval,
            },
            Some(mut o) => {
                if s.c_lower < o.c_lower {
                    o.c_lower = s.c_lower;
                    o.worst_index = i;
                    o.p_interval = s.p_interval;
                }
                o.c_upper = o.c_upper.min(s.c_upper);
                o
            }
        });
    }
    Ok(out.expect("non-empty samples"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscillationReport {
    /// `osc λ + osc μ` over `B(x, δ(x)/2)` at each point.
    pub sums: Vec<f64>,
    pub max_sum: f64,
    pub argmax: usize,
    pub passes: bool,
    /// Points whose ball holds no other lattice point.
    pub isolated: Vec<usize>,
}

/// Lattice approximation of `osc_{B(x,δ(x)/2)} λ + osc_{B(x,δ(x)/2)} μ ≤ K`.
pub fn oscillation_scan(
    points: &[Vec<f64>],
    lambda: &[f64],
    mu: &[f64],
    delta: &[f64],
    k: f64,
) -> Result<OscillationReport> {
    let count = points.len();
    for (what, len) in [("λ samples", lambda.len()), ("μ samples", mu.len()), ("δ samples", delta.len())] {
        if len != count {
            return Err(Error::Dimension {
                what,
                expected: count,
                found: len,
            });
        }
    }
    if count == 0 {
        return Err(Error::invalid("oscillation scan needs at least one point"));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::invalid("lattice points must share a dimension"));
    }
    if delta.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
        return Err(Error::invalid("δ(x) must be positive"));
    }
    if lambda.iter().chain(mu).any(|v| !v.is_finite()) || !k.is_finite() && k != f64::INFINITY {
        return Err(Error::NonFinite("oscillation inputs"));
    }
    let per_point = crate::par::map_indexed(count, |i| {
        let x = &points[i];
        let radius = delta[i] / 2.0;
        let (mut lmin, mut lmax) = (lambda[i], lambda[i]);
        let (mut mmin, mut mmax) = (mu[i], mu[i]);
        let mut neighbours = 0;
        for (j, y) in points.iter().enumerate() {
            if j == i {
                continue;
            }
            let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            if math::sqrt(d2) <= radius + 1e-12 {
                neighbours += 1;
                lmin = lmin.min(lambda[j]);
                lmax = lmax.max(lambda[j]);
                mmin = mmin.min(mu[j]);
                mmax = mmax.max(mu[j]);
            }
        }
        ((lmax - lmin) + (mmax - mmin), neighbours == 0)
    });
    let mut sums = vec![0.0; count];
    let mut isolated = Vec::new();
    let (mut max_sum, mut argmax) = (f64::NEG_INFINITY, 0);
    for (i, (s, iso)) in per_point.into_iter().enumerate() {
        sums[i] = s;
        if iso {
            isolated.push(i);
        }
        if s > max_sum {
            max_sum = s;
            argmax = i;
        }
    }
    Ok(OscillationReport {
        sums,
        max_sum,
        argmax,
        passes: max_sum <= k,
        isolated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_entries() {
        let a = lame_tensor(1.0, 1.0, 0.0, 2).unwrap();
        let re = |h, k, al, be| a.get(h, k, al, be).re;
        assert_eq!(re(0, 0, 0, 0), 3.0);
        assert_eq!(re(0, 1, 0, 1), 1.0);
        assert_eq!(re(0, 1, 1, 0), 1.0);
        assert_eq!(re(0, 0, 1, 1), 1.0);
        assert!(a.is_real());
    }

    #[test]
    fn tensor_symmetry_and_r_equal_mu() {
        for &(l, m, r, n) in &[(0.3, 1.7, -0.4, 3), (2.0, 0.5, 1.1, 2), (-1.2, 1.0, 0.25, 4)] {
            let a = lame_tensor(l, m, r, n).unwrap();
            for h in 0..n {
                for k in 0..n {
                    for al in 0..n {
                        for be in 0..n {
                            assert_eq!(a.get(h, k, al, be), a.get(k, h, be, al));
                        }
                    }
                }
            }
        }
        let a = lame_tensor(1.0, 2.0, 2.0, 2).unwrap();
        assert_eq!(a.get(0, 1, 1, 0).re, 0.0);
        assert!(lame_tensor(1.0, 0.0, 0.0, 2).is_err());
        assert!(lame_tensor(-3.0, 1.0, 0.0, 2).is_err());
    }

    #[test]
    fn plane_constant() {
        let s = sufficient_constant(2, 1.0, 1.0).unwrap();
        assert_eq!(s.branch, LameBranch::N2);
        assert!((s.c_lower - 0.75).abs() < 1e-15 && s.c_lower == s.c_upper);
        assert!((s.r_star - 0.5).abs() < 1e-15);
        assert!((s.p_interval.p_hi() - 2.0 / (1.0 - 0.75f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn zero_compression_coupling() {
        for n in 2..6 {
            let s = sufficient_constant(n, -1.0, 1.0).unwrap();
            assert_eq!(s.c_lower, 1.0);
            assert_eq!(s.c_upper, 1.0);
            assert_eq!(s.p_interval, PRange::full());
        }
    }

    #[test]
    fn three_dimensional_unit_moduli() {
        let s = sufficient_constant(3, 1.0, 1.0).unwrap();
        assert_eq!(s.branch, LameBranch::Cubic);
        assert!((s.c_lower - 0.688_098_3).abs() < 1e-6, "{}", s.c_lower);
        assert!(s.c_lower > 5.0 / 9.0 && s.c_lower < s.c_upper);
        let [m1, xm, xp] = lame_cubic_roots(3, 1.0, 1.0).unwrap();
        assert_eq!(m1, -1.0);
        let r10 = 10f64.sqrt();
        assert!((xm - 2.0 / 3.0 * (4.0 - r10)).abs() < 1e-14);
        assert!((xp - 2.0 / 3.0 * (4.0 + r10)).abs() < 1e-14);
        assert!((1.0 - xm * xm - s.c_lower).abs() < 1e-10);
        for x in [m1, xm, xp] {
            assert!(cubic_residual(3, 1.0, x).abs() < 1e-12);
        }
    }

    #[test]
    fn gamma_constraints() {
        for n in 3..7 {
            for i in 0..40 {
                let a = -1.9 + 0.3 * i as f64;
                let s = sufficient_constant(n, a, 1.0).unwrap();
                assert!(s.gamma_star.abs() < 1.0, "n={n} a={a} {:?}", s);
                let nf = n as f64;
                assert!(s.gamma_star < ((nf - 1.0) * a + nf) / (nf - 2.0));
                assert!(s.c_lower <= s.c_upper + 1e-15);
                assert!(s.c_lower > 0.0);
            }
        }
    }

    #[test]
    fn admissibility_examples() {
        let r = admissibility(1.0, 1.0, 1.0).unwrap();
        assert!(r.admissible && r.poisson_below_0396);
        assert_eq!(r.poisson_max, Some(0.25));
        let r = admissibility(1.0 + 8f64.sqrt(), 1.0, 1.0).unwrap();
        assert!(!r.admissible);
        assert!(r.upper_margin.abs() < 1e-15);
        let r = admissibility(-1.0, 1.0, 0.5).unwrap();
        assert_eq!(r.poisson_undefined, 1);
        assert_eq!(poisson_ratio(-1.0, 1.0), None);
        assert!(!r.poisson_below_0396);
    }

    #[test]
    fn oscillation_examples() {
        let pts: Vec<Vec<f64>> = (1..8).map(|i| vec![i as f64 / 8.0]).collect();
        let delta: Vec<f64> = pts.iter().map(|p| p[0].min(1.0 - p[0])).collect();
        let ones = vec![1.0; pts.len()];
        let r = oscillation_scan(&pts, &ones, &ones, &delta, 1e-9).unwrap();
        assert_eq!(r.max_sum, 0.0);
        assert!(r.passes);
        let lam: Vec<f64> = pts.iter().map(|p| p[0]).collect();
        let r = oscillation_scan(&pts, &lam, &ones, &delta, 1.0).unwrap();
        assert!((r.max_sum - 0.5).abs() < 1e-15);
        assert_eq!(r.argmax, 3);
        // δ/2 = 1/16 at the outermost points: no neighbours within reach
        assert_eq!(r.isolated, vec![0, 6]);
        let step: Vec<f64> = pts.iter().map(|p| if p[0] < 0.5 { 1.0 } else { 3.0 }).collect();
        let r = oscillation_scan(&pts, &ones, &step, &delta, 1.5).unwrap();
        assert!(!r.passes && (r.max_sum - 2.0).abs() < 1e-15);
    }

    #[test]
    fn field_constants_take_worst_sample() {
        let f = field_sufficiency(2, &[1.0, 4.0, 0.0], &[1.0, 1.0, 1.0]).unwrap();
        let worst = sufficient_constant(2, 4.0, 1.0).unwrap();
        assert_eq!(f.worst_index, 1);
        assert_eq!(f.c_lower, worst.c_lower);
        assert!(field_sufficiency(2, &[1.0, -5.0], &[1.0, 1.0]).is_err());
    }
}
