use num_rational::BigRational;
use num_traits::Signed;
use serde_json::{json, Value};

use potts_ghs::alpha::{alpha_table, compare_paper, sign_report, triple_key, Verdict};
use potts_ghs::derivatives::{
    fd_agrees, ghs_i, model_digest, second_derivative_analytic, second_derivative_exact,
    second_derivative_float, weights_digest, Method,
};
use potts_ghs::expansion::{expand_full, expand_partial, x_assignment};
use potts_ghs::model::{format_rational, partition_function, pair_count, GhostMode, GhostWeightVector, ModelSpec};
use potts_ghs::model_file::{load_model, LoadedModel};
use potts_ghs::sampling::{random_physical_model, random_weights, trial_rng};
use potts_ghs::separation::{separation_check, CheckMode};
use potts_ghs::xpoly::xpoly_eval;
use potts_ghs::GhsError;

use crate::report::Check;
use crate::{Command, Common, Failure, Mode, SeparationMode};

type Outcome = Result<(Vec<Check>, Value), Failure>;

/// Threshold below which a float second derivative counts as non-positive.
const FLOAT_SIGN_SLACK: f64 = 1e-12;

pub fn run(command: &Command, common: &Common) -> Outcome {
    match command {
        Command::VerifyGhs => verify_ghs(common),
        Command::Derivative { sites, h } => derivative(common, parse_sites(sites)?, *h),
        Command::Expand { window } => expand(common, *window),
        Command::SeparationCheck { check_mode } => separation(common, *check_mode),
        Command::AlphaTable { compare_paper } => alpha(common, *compare_paper),
        Command::Sweep => sweep(common),
    }
}

/// `--r-range` wins over `--r`; both absent gives `default`.
pub fn r_values(common: &Common, default: &[u32]) -> Result<Vec<u32>, Failure> {
    let values = match (&common.r_range, common.r) {
        (Some(text), _) => parse_r_range(text)?,
        (None, Some(r)) => vec![r],
        (None, None) => default.to_vec(),
    };
    if let Some(&r) = values.iter().find(|&&r| r < 2) {
        return Err(GhsError::InvalidR(r).into());
    }
    Ok(values)
}

fn parse_r_range(text: &str) -> Result<Vec<u32>, Failure> {
    let bad = || Failure::Usage(format!("bad r range \"{text}\" (expected \"lo..hi\" or \"a,b,c\")"));
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        Ok((lo..=hi).collect())
    } else {
        text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
    }
}

fn parse_sites(text: &str) -> Result<(usize, usize, usize), Failure> {
    let parts: Vec<usize> = text
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("bad site triple \"{text}\"")))?;
    match parts[..] {
        [i, j, k] => Ok((i, j, k)),
        _ => Err(Failure::Usage(format!("site triple needs three entries, got \"{text}\""))),
    }
}

/// Instances a command runs on: the model file if given, else seeded
/// random draws, one per trial.
enum Instances {
    Exact(Vec<(Option<u64>, GhostWeightVector)>),
    Float(Vec<(Option<u64>, ModelSpec)>),
}

fn load_input(common: &Common) -> Result<Option<LoadedModel>, Failure> {
    let Some(path) = &common.input else { return Ok(None) };
    let model = load_model(path)?;
    if common.mode == Mode::Exact {
        if let LoadedModel::Physical(_) = model {
            return Err(GhsError::ModeMismatch("exact mode needs an exact-weights model file".into()).into());
        }
    }
    Ok(Some(model))
}

fn instances(common: &Common, n: usize, r: u32) -> Result<Instances, Failure> {
    match (load_input(common)?, common.mode) {
        (Some(LoadedModel::Exact(w)), Mode::Exact) => Ok(Instances::Exact(vec![(None, w)])),
        (Some(LoadedModel::Exact(w)), Mode::Float) => {
            let spec = exact_to_physical(&w)?;
            Ok(Instances::Float(vec![(None, spec)]))
        }
        (Some(LoadedModel::Physical(m)), _) => Ok(Instances::Float(vec![(None, m)])),
        (None, Mode::Exact) => Ok(Instances::Exact(
            (0..common.trials)
                .map(|t| Ok((Some(t), random_weights(n, r, &mut trial_rng(common.seed, t))?)))
                .collect::<Result<_, GhsError>>()?,
        )),
        (None, Mode::Float) => Ok(Instances::Float(
            (0..common.trials)
                .map(|t| Ok((Some(t), random_physical_model(n, r, &mut trial_rng(common.seed, t))?)))
                .collect::<Result<_, GhsError>>()?,
        )),
    }
}

fn exact_to_physical(w: &GhostWeightVector) -> Result<ModelSpec, GhsError> {
    let n = w.n_sites();
    let log = |i: usize, j: usize| {
        use num_traits::ToPrimitive;
        w.weight_of(i, j).and_then(|t| t.to_f64()).map(f64::ln).unwrap_or(0.0)
    };
    let fields = (1..=n).map(|i| log(0, i)).collect();
    let couplings: Vec<_> = (1..=n)
        .flat_map(|i| (i + 1..=n).map(move |j| (i, j)))
        .map(|(i, j)| ((i, j), log(i, j)))
        .collect();
    ModelSpec::new(n, w.n_states(), couplings, fields)
}

fn sign_ok(r: u32, value: &BigRational) -> bool {
    if r == 2 {
        !value.is_positive()
    } else {
        !value.is_negative()
    }
}

fn float_sign_ok(r: u32, value: f64) -> bool {
    if r == 2 {
        value <= FLOAT_SIGN_SLACK
    } else {
        value >= -FLOAT_SIGN_SLACK
    }
}

fn expected(r: u32) -> &'static str {
    if r == 2 {
        "<= 0"
    } else {
        ">= 0"
    }
}

fn verify_ghs(common: &Common) -> Outcome {
    let n = common.n_sites;
    let mut checks = Vec::new();
    let input = load_input(common)?;
    let rs = match &input {
        Some(m) => vec![m.n_states()],
        None => r_values(common, &[2, 3])?,
    };
    let n = input.as_ref().map_or(n, LoadedModel::n_sites);
    if n < 3 {
        return Err(GhsError::NeedThreeSites(n).into());
    }
    for r in rs {
        let mut violations = Vec::new();
        let count;
        match instances(common, n, r)? {
            Instances::Exact(list) => {
                count = list.len();
                for (trial, w) in list {
                    let i = ghs_i(&w)?;
                    if !sign_ok(r, &i) {
                        violations.push(json!({
                            "trial": trial,
                            "digest": weights_digest(&w),
                            "weights": w.to_strings(),
                            "I": format_rational(&i),
                        }));
                    }
                }
            }
            Instances::Float(list) => {
                count = list.len();
                for (trial, m) in list {
                    let d = second_derivative_analytic(&m.float_weights(), 1, 2, 3)?;
                    if !float_sign_ok(r, d) {
                        violations.push(json!({
                            "trial": trial,
                            "digest": model_digest(&m),
                            "d2m": d,
                        }));
                    }
                }
            }
        }
        let quantity = if common.mode == Mode::Exact { "I" } else { "d2m1/dB2dB3" };
        let passed = violations.is_empty();
        checks.push(Check::new(
            format!("{quantity} {} on N={n} r={r}", expected(r)),
            passed,
            json!({
                "instances": count,
                "violations": violations.len(),
                "first_violations": violations.into_iter().take(5).collect::<Vec<_>>(),
            }),
        ));
    }
    Ok((checks, Value::Null))
}

fn derivative(common: &Common, sites: (usize, usize, usize), h: f64) -> Outcome {
    let input = load_input(common)?;
    let rs = match &input {
        Some(m) => vec![m.n_states()],
        None => r_values(common, &[2, 3])?,
    };
    let n = input.as_ref().map_or(common.n_sites, LoadedModel::n_sites);
    let mut checks = Vec::new();
    let mut results = Vec::new();
    for r in rs {
        let mut disagreements = 0;
        let count;
        match instances(common, n, r)? {
            Instances::Exact(list) => {
                count = list.len();
                for (trial, w) in list {
                    let a = second_derivative_exact(&w, sites, Method::Analytic)?;
                    let b = second_derivative_exact(&w, sites, Method::ViaI)?;
                    let agree = a.value == b.value;
                    disagreements += usize::from(!agree);
                    results.push(json!({
                        "r": r,
                        "trial": trial,
                        "digest": a.digest,
                        "analytic": a.value.to_string(),
                        "via_i": b.value.to_string(),
                        "agree": agree,
                    }));
                }
                checks.push(Check::new(
                    format!("analytic = via-I on N={n} r={r}"),
                    disagreements == 0,
                    json!({ "instances": count, "disagreements": disagreements }),
                ));
            }
            Instances::Float(list) => {
                count = list.len();
                for (trial, m) in list {
                    let a = second_derivative_float(&m, sites, Method::Analytic, h)?;
                    let f = second_derivative_float(&m, sites, Method::FiniteDifference, h)?;
                    let (av, fv) = (a.value.to_f64(), f.value.to_f64());
                    let agree = fd_agrees(fv, av);
                    disagreements += usize::from(!agree);
                    results.push(json!({
                        "r": r,
                        "trial": trial,
                        "digest": a.digest,
                        "analytic": av,
                        "finite_difference": fv,
                        "agree": agree,
                    }));
                }
                checks.push(Check::new(
                    format!("finite difference (h={h:e}) matches analytic on N={n} r={r}"),
                    disagreements == 0,
                    json!({ "instances": count, "disagreements": disagreements }),
                ));
            }
        }
    }
    Ok((checks, json!({ "sites": [sites.0, sites.1, sites.2], "results": results })))
}

fn exact_only(common: &Common, what: &str) -> Result<(), Failure> {
    if common.mode == Mode::Float {
        return Err(GhsError::ModeMismatch(format!("{what} runs in exact mode only")).into());
    }
    Ok(())
}

fn exact_instances(common: &Common, n: usize, r: u32) -> Result<Vec<(Option<u64>, GhostWeightVector)>, Failure> {
    match instances(common, n, r)? {
        Instances::Exact(list) => Ok(list),
        Instances::Float(_) => unreachable!("exact mode yields exact instances"),
    }
}

fn expand(common: &Common, window: Option<usize>) -> Outcome {
    exact_only(common, "expand")?;
    let input = load_input(common)?;
    let n = input.as_ref().map_or(common.n_sites, LoadedModel::n_sites);
    let rs = match &input {
        Some(m) => vec![m.n_states()],
        None => r_values(common, &[3])?,
    };
    let c = pair_count(n);
    let mut checks = Vec::new();
    match window {
        None => {
            let poly = expand_full(n)?;
            for r in rs {
                let mut mismatches = 0;
                let list = exact_instances(common, n, r)?;
                for (_, w) in &list {
                    let value = xpoly_eval(&poly, &x_assignment(w, 0..c), i64::from(r))?;
                    mismatches += usize::from(value != ghs_i(w)?);
                }
                checks.push(Check::new(
                    format!("full expansion evaluates to I on N={n} r={r}"),
                    mismatches == 0,
                    json!({ "instances": list.len(), "mismatches": mismatches }),
                ));
            }
            Ok((
                checks,
                json!({
                    "n_sites": n,
                    "pairs": c,
                    "term_count": poly.term_count(),
                    "terms": poly.to_records(),
                }),
            ))
        }
        Some(s) => {
            let mut expansions = Vec::new();
            for r in rs {
                let mut mismatches = 0;
                let list = exact_instances(common, n, r)?;
                for (trial, w) in &list {
                    let poly = expand_partial(w, s)?;
                    let value = xpoly_eval(&poly, &x_assignment(w, c.saturating_sub(s)..c), i64::from(r))?;
                    mismatches += usize::from(value != ghs_i(w)?);
                    expansions.push(json!({
                        "r": r,
                        "trial": trial,
                        "digest": weights_digest(w),
                        "term_count": poly.term_count(),
                        "terms": poly.to_records(),
                    }));
                }
                checks.push(Check::new(
                    format!("window-{s} expansion evaluates to I on N={n} r={r}"),
                    mismatches == 0,
                    json!({ "instances": list.len(), "mismatches": mismatches }),
                ));
            }
            Ok((checks, json!({ "n_sites": n, "window": s, "expansions": expansions })))
        }
    }
}

fn separation(common: &Common, mode: Option<SeparationMode>) -> Outcome {
    exact_only(common, "separation-check")?;
    let n = common.n_sites;
    let mode = match mode {
        Some(SeparationMode::Exhaustive) => CheckMode::Exhaustive,
        Some(SeparationMode::RandomEval) => CheckMode::RandomEval,
        None if n == 3 => CheckMode::Exhaustive,
        None => CheckMode::RandomEval,
    };
    let rs = match mode {
        CheckMode::Exhaustive => vec![0],
        CheckMode::RandomEval => r_values(common, &[3])?,
    };
    let mut checks = Vec::new();
    for r in rs {
        let report = separation_check(n, mode, common.trials, common.seed, r)?;
        let name = match mode {
            CheckMode::Exhaustive => format!("factored form equals the full expansion on N={n}"),
            CheckMode::RandomEval => format!("factored form equals I on N={n} r={r}"),
        };
        checks.push(Check::new(name, report.passed, serde_json::to_value(&report).expect("serializable")));
    }
    Ok((checks, Value::Null))
}

fn alpha(common: &Common, compare: bool) -> Outcome {
    exact_only(common, "alpha-table")?;
    let table = alpha_table(common.n_sites)?;
    let rs = r_values(common, &(2..=10).collect::<Vec<_>>())?;
    let disagreeing = table.expansion_disagreements()?;
    let signs = sign_report(&table, &rs)?;
    let mut checks = vec![Check::new(
        "every entry equals its reduced-expansion coefficient",
        disagreeing.is_empty(),
        json!({
            "entries": table.entries.len(),
            "disagreements": disagreeing.iter().map(|&t| triple_key(t)).collect::<Vec<_>>(),
        }),
    )];
    for v in &signs.verdicts {
        checks.push(Check::new(
            format!("all entries {} at r={}", v.expected_sign, v.r),
            v.passed,
            serde_json::to_value(v).expect("serializable"),
        ));
    }
    let entries: serde_json::Map<String, Value> = table
        .entries
        .iter()
        .map(|(&t, p)| (triple_key(t), Value::String(p.factored())))
        .collect();
    let classes: Vec<Vec<String>> = table
        .symmetry_classes
        .iter()
        .map(|c| c.iter().map(|&t| triple_key(t)).collect())
        .collect();
    let mut findings = json!({
        "n_sites": table.n_sites,
        "entries": entries,
        "symmetry_classes": classes,
    });
    if compare {
        let diffs = compare_paper(&table)?;
        let erratum = diffs.iter().filter(|d| d.verdict == Verdict::PossibleErratum).count();
        println!("published closed forms: {} classes, {} match, {} possible errata", diffs.len(), diffs.len() - erratum, erratum);
        findings["published_comparison"] = serde_json::to_value(&diffs).expect("serializable");
    }
    Ok((checks, findings))
}

fn sweep(common: &Common) -> Outcome {
    exact_only(common, "sweep")?;
    if common.input.is_some() {
        return Err(Failure::Usage("sweep draws its own instances and takes no model file".into()));
    }
    if common.n_sites < 3 {
        return Err(GhsError::NeedThreeSites(common.n_sites).into());
    }
    let rs = r_values(common, &[2, 3, 4, 5])?;
    let mut checks = Vec::new();
    for n in 3..=common.n_sites {
        for &r in &rs {
            let mut sign_violations = Vec::new();
            let mut bridge_failures = Vec::new();
            for t in 0..common.trials {
                let w = random_weights(n, r, &mut trial_rng(common.seed, t))?;
                let i = ghs_i(&w)?;
                if !sign_ok(r, &i) {
                    sign_violations.push(t);
                }
                let z = partition_function(&w, GhostMode::FixedAtOne);
                let rq = BigRational::from_integer(r.into());
                let bridge = num_traits::pow(rq * z, 3) * second_derivative_analytic(&w, 1, 2, 3)?;
                if bridge != i {
                    bridge_failures.push(t);
                }
            }
            checks.push(Check::new(
                format!("I {} on N={n} r={r}", expected(r)),
                sign_violations.is_empty(),
                json!({ "instances": common.trials, "violating_trials": sign_violations }),
            ));
            checks.push(Check::new(
                format!("I = (rZ)^3 d2m1/dB2dB3 on N={n} r={r}"),
                bridge_failures.is_empty(),
                json!({ "instances": common.trials, "failing_trials": bridge_failures }),
            ));
        }
    }
    Ok((checks, Value::Null))
}
