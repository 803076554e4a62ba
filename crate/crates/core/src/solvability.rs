//! Exponent ranges for Dirichlet-problem solvability: extrapolation from a
//! known exponent, periodic homogenization, and the Lamé endpoint chain.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::lame;
use crate::math;

/// An interval of exponents `p`; `hi` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PInterval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl PInterval {
    pub fn open(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_closed: false,
            hi_closed: false,
        }
    }

    pub fn closed_open(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            lo_closed: true,
            hi_closed: false,
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi || (self.lo == self.hi && self.lo_closed && self.hi_closed))
    }

    pub fn contains(&self, p: f64) -> bool {
        let above = if self.lo_closed { p >= self.lo } else { p > self.lo };
        let below = if self.hi_closed { p <= self.hi } else { p < self.hi };
        above && below
    }
}

impl core::fmt::Display for PInterval {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let l = if self.lo_closed { '[' } else { '(' };
        let r = if self.hi_closed { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Theorem {
    Extrapolation,
    Homogenization,
    LameCorollary,
}

impl Theorem {
    pub fn as_str(self) -> &'static str {
        match self {
            Theorem::Extrapolation => "extrapolation",
            Theorem::Homogenization => "homogenization",
            Theorem::LameCorollary => "lame-corollary",
        }
    }
}

impl core::str::FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "extrapolation" => Ok(Theorem::Extrapolation),
            "homogenization" => Ok(Theorem::Homogenization),
            "lame-corollary" => Ok(Theorem::LameCorollary),
            _ => Err(Error::invalid(
                "theorem must be extrapolation, homogenization or lame-corollary",
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolvabilityQuery {
    pub n: usize,
    /// Exponent for which solvability is already known.
    pub q: f64,
    /// Supremum of the p-ellipticity exponents; may be infinite.
    pub p0: f64,
    /// Smallness of first-order terms; recorded, not used.
    pub drift_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolvabilityReport {
    pub range: PInterval,
    pub theorem: Theorem,
    /// Range that holds independently of the computed one, when known.
    pub baseline: Option<PInterval>,
    /// `range ∪ baseline` when both are present and overlap.
    pub union: Option<PInterval>,
    pub notes: Vec<String>,
}

/// `(n-1)/(n-2)`, infinite for `n = 2`.
fn dim_factor(n: usize) -> f64 {
    if n <= 2 {
        f64::INFINITY
    } else {
        (n as f64 - 1.0) / (n as f64 - 2.0)
    }
}

/// `[q, p₀(n-1)/(n-2))`, or `[q, ∞)` when `n = 2` or `p₀ = ∞`.
pub fn extrapolation_range(query: &SolvabilityQuery) -> Result<SolvabilityReport> {
    let SolvabilityQuery { n, q, p0, drift_bound } = *query;
    if n < 2 {
        return Err(Error::invalid("extrapolation needs n >= 2"));
    }
    if !(q > 1.0) || !q.is_finite() {
        return Err(Error::invalid("q must be a finite exponent > 1"));
    }
    if !(p0 > 1.0) {
        return Err(Error::invalid("p0 must be in (1, inf]"));
    }
    if let Some(k) = drift_bound {
        if !(k >= 0.0) || !k.is_finite() {
            return Err(Error::invalid("drift bound must be a finite value >= 0"));
        }
    }
    let mut notes = vec![String::from("upper endpoint is open")];
    let hi = if n == 2 || p0.is_infinite() {
        f64::INFINITY
    } else {
        p0 * dim_factor(n)
    };
    if !(q < hi) {
        return Err(Error::invalid(format!(
            "q = {q} must satisfy q < p0 (n-1)/(n-2) = {hi}"
        )));
    }
    if let Some(k) = drift_bound {
        notes.push(format!("first-order terms assumed small: K = {k}"));
    }
    Ok(SolvabilityReport {
        range: PInterval::closed_open(q, hi),
        theorem: Theorem::Extrapolation,
        baseline: None,
        union: None,
        notes,
    })
}

/// Improvement `(2, q(n-1)/(n-2))` together with the unconditional
/// baseline range; `δ` in the baseline is left symbolic (numeric endpoints
/// drop it).
pub fn homogenization_range(n: usize, m: usize, q_strong: f64) -> Result<SolvabilityReport> {
    if n < 2 {
        return Err(Error::invalid("homogenization needs n >= 2"));
    }
    if m < 1 {
        return Err(Error::invalid("m must be at least 1"));
    }
    if !(q_strong > 1.0) {
        return Err(Error::invalid("q_strong must be an exponent > 1"));
    }
    let mut notes = Vec::new();
    let range = if q_strong > 2.0 {
        PInterval::open(2.0, q_strong * dim_factor(n))
    } else {
        notes.push(String::from("q_strong <= 2: no improvement interval"));
        PInterval::open(2.0, 2.0)
    };
    let baseline = if m == 1 || n <= 3 {
        notes.push(String::from("baseline (2 - δ, inf) for some unspecified δ > 0"));
        PInterval::open(2.0, f64::INFINITY)
    } else {
        let hi = 2.0 * (n as f64 - 1.0) / (n as f64 - 3.0);
        notes.push(format!("baseline (2 - δ, {hi} + δ) for some unspecified δ > 0"));
        PInterval::open(2.0, hi)
    };
    if !range.is_empty() && range.hi <= baseline.hi {
        notes.push(String::from("improvement interval subsumed by the baseline"));
    }
    let union = if range.is_empty() {
        baseline
    } else {
        PInterval::open(2.0, range.hi.max(baseline.hi))
    };
    Ok(SolvabilityReport {
        range,
        theorem: Theorem::Homogenization,
        baseline: Some(baseline),
        union: Some(union),
        notes,
    })
}

/// `p₀ = 2/(1 - √C)` with `C` the sufficient Lamé constant, then
/// `p₀(n-1)/(n-2)`; infinite for `n = 2` or `C = 1`.
pub fn lame_dirichlet_upper(n: usize, lambda: f64, mu: f64) -> Result<f64> {
    let c = lame::sufficient_constant(n, lambda, mu)?.c_lower;
    if n == 2 || c >= 1.0 {
        return Ok(f64::INFINITY);
    }
    let p0 = 2.0 / (1.0 - math::sqrt(c.max(0.0)));
    Ok(p0 * dim_factor(n))
}

pub fn lame_corollary_report(n: usize, lambda: f64, mu: f64) -> Result<SolvabilityReport> {
    let up = lame_dirichlet_upper(n, lambda, mu)?;
    let c = lame::sufficient_constant(n, lambda, mu)?.c_lower;
    let mut notes = vec![
        String::from("range (2 - ε, p_up) for some unspecified ε > 0; numeric lower endpoint is 2"),
        String::from("p_up = p0 (n-1)/(n-2) with p0 = 2/(1 - sqrt(C))"),
    ];
    if n > 2 && c < 1.0 {
        let alt = 2.0 * dim_factor(n) / math::sqrt(1.0 - c);
        notes.push(format!(
            "the closed form 2(n-1)/((n-2) sqrt(1-C)) would give {alt} instead"
        ));
    }
    Ok(SolvabilityReport {
        range: PInterval::open(2.0, up),
        theorem: Theorem::LameCorollary,
        baseline: None,
        union: None,
        notes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorstCase {
    /// Minimizing ratio `a = λ/μ`.
    pub a_star: f64,
    pub c_star: f64,
    pub p_up_star: f64,
    /// `2/(1 - √(8√2 - 11))`.
    pub asymptotic_constant: f64,
    /// `asymptotic_constant · (n-1)/(n-2)`.
    pub asymptotic_endpoint: f64,
}

pub fn asymptotic_constant() -> f64 {
    2.0 / (1.0 - math::sqrt(8.0 * math::sqrt(2.0) - 11.0))
}

/// Minimizes [`lame_dirichlet_upper`] over `a = λ/μ` on the interior grid
/// `a_lo + i (a_hi - a_lo)/(N+1)`, `i = 1..=N`; ties go to the smaller `a`.
pub fn worst_case_over_ratio(n: usize, a_lo: f64, a_hi: f64, grid_points: usize) -> Result<WorstCase> {
    if grid_points < 100 {
        return Err(Error::invalid("worst-case scan needs at least 100 grid points"));
    }
    if !(a_lo < a_hi) || !a_lo.is_finite() || !a_hi.is_finite() {
        return Err(Error::invalid("ratio interval must satisfy a_lo < a_hi"));
    }
    let h = (a_hi - a_lo) / (grid_points as f64 + 1.0);
    let values = crate::par::map_indexed(grid_points, |i| {
        let a = a_lo + (i as f64 + 1.0) * h;
        lame_dirichlet_upper(n, a, 1.0).map(|p| (a, p))
    });
    let mut best: Option<(f64, f64)> = None;
    for v in values {
        let (a, p) = v?;
        if best.map_or(true, |(_, bp)| p < bp) {
            best = Some((a, p));
        }
    }
    let (a_star, p_up_star) = best.expect("grid is non-empty");
    let k = asymptotic_constant();
    Ok(WorstCase {
        a_star,
        c_star: lame::sufficient_constant(n, a_star, 1.0)?.c_lower,
        p_up_star,
        asymptotic_constant: k,
        asymptotic_endpoint: k * dim_factor(n),
    })
}

/// `(1 - √8, 1 + √8)`, the ratio interval allowed by the admissibility condition.
pub fn admissible_ratio_interval() -> (f64, f64) {
    let r8 = math::sqrt(8.0);
    (1.0 - r8, 1.0 + r8)
}
