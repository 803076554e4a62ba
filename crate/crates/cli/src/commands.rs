use pell_core::integral::{falsify_integral_with, Counterexample, FalsifyConfig};
use pell_core::lame::{field_admissibility, field_sufficiency, poisson_ratio, sufficient_constant, Admissibility};
use pell_core::pointwise::{lh_margin, scalar_p_margin, strong_margin};
use pell_core::range::{field_range, t_of_p};
use pell_core::solvability::{
    admissible_ratio_interval, extrapolation_range, homogenization_range, lame_corollary_report,
    worst_case_over_ratio, PInterval, SolvabilityQuery, SolvabilityReport, Theorem,
};
use pell_core::{ConditionKind, MarginResult, PRange, SearchConfig, TensorField, Witness};
use serde_json::{json, Value};

use crate::schema::{self, complexes, num};
use crate::{CheckArgs, FalsifyArgs, Failure, LameArgs, Outcome, RangeArgs, SearchArgs, SolvabilityArgs};

/// Margins within this distance of zero are reported as inconclusive.
const MARGIN_EPS: f64 = 1e-9;

fn search_config(s: &SearchArgs, t: f64) -> SearchConfig {
    SearchConfig {
        t,
        outer_starts: s.starts,
        seed: s.seed,
        ..SearchConfig::default()
    }
}

fn witness_json(w: &Witness) -> Value {
    match w {
        Witness::Strong { xi, omega } => {
            let rows: Vec<Value> = (0..xi.n())
                .map(|h| complexes(&xi.comps()[h * xi.m()..(h + 1) * xi.m()]))
                .collect();
            json!({"xi": rows, "omega": complexes(omega.comps())})
        }
        Witness::LegendreHadamard { eta, omega, q } => json!({
            "eta": complexes(eta),
            "omega": complexes(omega.comps()),
            "q": q.iter().map(|&x| num(x)).collect::<Vec<_>>(),
        }),
    }
}

fn margin_json(r: &MarginResult, sample: Option<usize>) -> Value {
    let mut v = json!({
        "margin": num(r.value),
        "witness": witness_json(&r.witness),
        "evaluations": r.evaluations,
        "certified": r.certified,
    });
    if let Some(i) = sample {
        v["sample"] = json!(i);
    }
    v
}

fn range_json(r: &PRange) -> Value {
    if r.is_empty() {
        return json!({"empty": true});
    }
    json!({
        "empty": false,
        "t_lo": num(r.t_lo()),
        "t_hi": num(r.t_hi()),
        "p_lo": num(r.p_lo()),
        "p_hi": num(r.p_hi()),
    })
}

fn interval_json(i: &PInterval) -> Value {
    json!({
        "lo": num(i.lo),
        "hi": num(i.hi),
        "lo_closed": i.lo_closed,
        "hi_closed": i.hi_closed,
        "empty": i.is_empty(),
        "text": i.to_string().replace("inf", "∞"),
    })
}

fn kinds(raw: &str) -> Result<Vec<ConditionKind>, Failure> {
    if raw == "all" {
        return Ok(vec![ConditionKind::Strong, ConditionKind::LegendreHadamard]);
    }
    Ok(vec![raw.parse::<ConditionKind>()?])
}

/// Smallest margin over the field's samples, with the sample index for
/// sampled fields.
fn worst_margin<F>(field: &TensorField, mut f: F) -> Result<(MarginResult, Option<usize>), Failure>
where
    F: FnMut(&pell_core::CoefficientTensor) -> pell_core::Result<MarginResult>,
{
    let mut best: Option<(MarginResult, usize)> = None;
    for (i, a) in field.tensors().iter().enumerate() {
        let r = f(a).map_err(|e| e.at_sample(i))?;
        if best.as_ref().map_or(true, |(b, _)| r.value < b.value) {
            best = Some((r, i));
        }
    }
    let (r, i) = best.expect("fields have at least one sample");
    let sample = matches!(field, TensorField::Sampled(_)).then_some(i);
    Ok((r, sample))
}

fn classify(kind: ConditionKind, margin: f64) -> &'static str {
    if margin > MARGIN_EPS {
        match kind {
            ConditionKind::Strong => "strong-p-elliptic",
            ConditionKind::LegendreHadamard => "legendre-hadamard-p-elliptic",
        }
    } else if margin < -MARGIN_EPS {
        "refuted"
    } else {
        "inconclusive"
    }
}

pub fn check(a: &CheckArgs) -> Result<Outcome, Failure> {
    let field = schema::read_field(&a.input)?;
    let t = t_of_p(a.p)?;
    let cfg = search_config(&a.search, t);
    cfg.validate()?;
    let wanted = kinds(&a.kind)?;
    let mut result = json!({
        "p": num(a.p),
        "t": num(t),
        "n": field.n(),
        "m": field.m(),
    });
    let mut negative = false;
    for kind in &wanted {
        let (r, sample) = match kind {
            ConditionKind::Strong => worst_margin(&field, |x| strong_margin(x, &cfg))?,
            ConditionKind::LegendreHadamard => worst_margin(&field, |x| lh_margin(x, &cfg))?,
        };
        let class = classify(*kind, r.value);
        negative |= class == "refuted";
        let key = match kind {
            ConditionKind::Strong => "strong",
            ConditionKind::LegendreHadamard => "legendre_hadamard",
        };
        let mut entry = margin_json(&r, sample);
        entry["classification"] = json!(class);
        result[key] = entry;
    }
    if field.m() == 1 {
        let mut worst = f64::INFINITY;
        for (i, x) in field.tensors().iter().enumerate() {
            worst = worst.min(scalar_p_margin(x, a.p).map_err(|e| e.at_sample(i))?);
        }
        result["scalar"] = json!({"margin": num(worst)});
    }
    let primary = if wanted.contains(&ConditionKind::Strong) { "strong" } else { "legendre_hadamard" };
    result["classification"] = result[primary]["classification"].clone();
    Ok(Outcome {
        config: json!({
            "input": a.input,
            "p": num(a.p),
            "kind": a.kind,
            "starts": a.search.starts,
        }),
        seed: Some(a.search.seed),
        result,
        negative,
    })
}

pub fn range(a: &RangeArgs) -> Result<Outcome, Failure> {
    let field = schema::read_field(&a.input)?;
    let kind: ConditionKind = a.kind.parse()?;
    let cfg = search_config(&a.search, 0.0);
    let r = field_range(&field, kind, &cfg)?;
    let mut result = range_json(&r);
    result["kind"] = json!(kind.as_str());
    Ok(Outcome {
        config: json!({"input": a.input, "kind": kind.as_str(), "starts": a.search.starts}),
        seed: Some(a.search.seed),
        result,
        negative: r.is_empty(),
    })
}

fn admissibility_json(a: &Admissibility) -> Value {
    json!({
        "lower_margin": num(a.lower_margin),
        "upper_margin": num(a.upper_margin),
        "admissible": a.admissible,
        "poisson_max": a.poisson_max.map(num),
        "poisson_undefined": a.poisson_undefined,
        "poisson_below_0396": a.poisson_below_0396,
    })
}

pub fn lame(a: &LameArgs) -> Result<Outcome, Failure> {
    let mu0 = a.mu0.unwrap_or(f64::MIN_POSITIVE);
    let config = json!({
        "n": a.n,
        "lambda": a.lambda.map(num),
        "mu": a.mu.map(num),
        "moduli": a.moduli,
        "mu0": a.mu0.map(num),
    });
    let result = match (&a.moduli, a.lambda, a.mu) {
        (Some(path), None, None) => {
            let (lambda, mu) = schema::read_moduli(path)?;
            let s = field_sufficiency(a.n, &lambda, &mu)?;
            json!({
                "samples": lambda.len(),
                "c_lower": num(s.c_lower),
                "c_upper": num(s.c_upper),
                "worst_sample": s.worst_index,
                "p_interval": range_json(&s.p_interval),
                "admissibility": admissibility_json(&field_admissibility(&lambda, &mu, mu0)?),
            })
        }
        (None, Some(lambda), Some(mu)) => {
            let s = sufficient_constant(a.n, lambda, mu)?;
            json!({
                "c_lower": num(s.c_lower),
                "c_upper": num(s.c_upper),
                "gamma_star": num(s.gamma_star),
                "r_star": num(s.r_star),
                "branch": s.branch.as_str(),
                "p_interval": range_json(&s.p_interval),
                "poisson_ratio": poisson_ratio(lambda, mu).map(num),
                "admissibility": admissibility_json(&field_admissibility(&[lambda], &[mu], mu0)?),
            })
        }
        _ => {
            return Err(Failure::Input(
                "give either --lambda and --mu, or --moduli FILE".into(),
            ))
        }
    };
    Ok(Outcome {
        config,
        seed: None,
        result,
        negative: false,
    })
}

fn report_json(r: &SolvabilityReport) -> Value {
    json!({
        "theorem": r.theorem.as_str(),
        "range": interval_json(&r.range),
        "baseline": r.baseline.as_ref().map(interval_json),
        "union": r.union.as_ref().map(interval_json),
        "notes": r.notes,
    })
}

fn need(v: Option<f64>, flag: &str, theorem: Theorem) -> Result<f64, Failure> {
    v.ok_or_else(|| Failure::Input(format!("--theorem {} needs --{flag}", theorem.as_str())))
}

pub fn solvability(a: &SolvabilityArgs) -> Result<Outcome, Failure> {
    let theorem: Theorem = a.theorem.parse()?;
    let mut config = json!({"theorem": theorem.as_str(), "n": a.n});
    let result = match theorem {
        Theorem::Extrapolation => {
            let q = need(a.q, "q", theorem)?;
            let p0 = need(a.p0, "p0", theorem)?;
            config["q"] = num(q);
            config["p0"] = num(p0);
            config["drift_bound"] = json!(a.drift_bound.map(num));
            report_json(&extrapolation_range(&SolvabilityQuery {
                n: a.n,
                q,
                p0,
                drift_bound: a.drift_bound,
            })?)
        }
        Theorem::Homogenization => {
            let q = need(a.q_strong, "q-strong", theorem)?;
            config["m"] = json!(a.m);
            config["q_strong"] = num(q);
            report_json(&homogenization_range(a.n, a.m, q)?)
        }
        Theorem::LameCorollary => {
            if a.worst_case {
                let (lo, hi) = admissible_ratio_interval();
                config["worst_case"] = json!(true);
                config["grid_points"] = json!(a.grid_points);
                let w = worst_case_over_ratio(a.n, lo, hi, a.grid_points)?;
                let mut r = report_json(&lame_corollary_report(a.n, w.a_star, 1.0)?);
                r["worst_case"] = json!({
                    "a_star": num(w.a_star),
                    "c_star": num(w.c_star),
                    "p_up_star": num(w.p_up_star),
                    "asymptotic_constant": num(w.asymptotic_constant),
                    "asymptotic_endpoint": num(w.asymptotic_endpoint),
                });
                r["p_up"] = num(w.p_up_star);
                r
            } else {
                let lambda = need(a.lambda, "lambda", theorem)?;
                let mu = need(a.mu, "mu", theorem)?;
                config["lambda"] = num(lambda);
                config["mu"] = num(mu);
                let rep = lame_corollary_report(a.n, lambda, mu)?;
                let mut r = report_json(&rep);
                r["p_up"] = num(rep.range.hi);
                r
            }
        }
    };
    Ok(Outcome {
        config,
        seed: None,
        result,
        negative: false,
    })
}

fn counterexample_json(c: &Counterexample) -> Value {
    let g = &c.grid;
    let points = g.values().len() / g.m();
    let values: Vec<Value> = (0..points).map(|i| complexes(g.value(i))).collect();
    json!({
        "quotient": num(c.quotient),
        "p": num(c.p),
        "seed": c.seed,
        "trial": c.trial,
        "grid": {"n": g.n(), "m": g.m(), "size": g.size(), "values": values},
    })
}

pub fn falsify(a: &FalsifyArgs) -> Result<Outcome, Failure> {
    let field = schema::read_field(&a.input)?;
    let cfg = FalsifyConfig {
        trials: a.trials,
        seed: a.seed,
        size: a.size,
        scalars: None,
    };
    let found = falsify_integral_with(&field, a.p, &cfg)?;
    Ok(Outcome {
        config: json!({"input": a.input, "p": num(a.p), "trials": a.trials, "size": a.size}),
        seed: Some(a.seed),
        negative: found.is_some(),
        result: json!({"counterexample": found.as_ref().map(counterexample_json)}),
    })
}
