use std::io::Write;

use serde_json::{json, Map, Value};

use lp_ldp::acceptance::{run_all, Settings, CHECKS};
use lp_ldp::extreal;
use lp_ldp::mc::{
    estimate_tail_with, gc_report, max_coordinate_scaling, DirSpec, DirectionKind, DirectionSequence, Method,
};
use lp_ldp::measures::{linspace, MeasureSpec, PExponent, QuadratureRule};
use lp_ldp::rates::{r_p, rate_curve, variational_annealed, variational_objective, Family, RateCurve, RateKind, SpeedSpec};

use crate::config::{parse_n_list, parse_w_grid};
use crate::{CheckArg, DirArg, Failure, Format, KindArg, McArgs, MethodArg, RateArgs, SelftestArgs, VariationalArgs};

pub const RATE_CSV_SCHEMA: &str = "lp-ldp/rate-csv/1";
pub const RATE_JSON_SCHEMA: &str = "lp-ldp/rate-json/1";
pub const MC_SCHEMA: &str = "lp-ldp/mc-jsonl/1";
pub const VARIATIONAL_SCHEMA: &str = "lp-ldp/variational-json/1";

fn parse_p(s: &str) -> Result<PExponent, Failure> {
    Ok(s.parse::<PExponent>()?)
}

/// Shorthand measures, or the canonical JSON encoding.
pub fn parse_measure(s: &str) -> Result<MeasureSpec, Failure> {
    let s = s.trim();
    let bad = |why: &str| Failure::Validation(format!("bad measure {s:?}: {why}"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad("expected a number"));
    let m = if s.starts_with('{') {
        serde_json::from_str::<MeasureSpec>(s).map_err(|e| bad(&e.to_string()))?
    } else if s == "mu2" || s == "gaussian" {
        MeasureSpec::mu2()
    } else if s == "uniform" {
        MeasureSpec::mu_p(PExponent::Infinite)
    } else if let Some(p) = s.strip_prefix("mu:") {
        MeasureSpec::mu_p(parse_p(p)?)
    } else if let Some(ab) = s.strip_prefix("uniform:") {
        let (a, b) = ab.split_once(',').ok_or_else(|| bad("expected uniform:<a>,<b>"))?;
        MeasureSpec::UniformInterval { a: num(a)?, b: num(b)? }
    } else if let Some(x) = s.strip_prefix("dirac:") {
        MeasureSpec::Dirac { point: num(x)? }
    } else {
        return Err(bad("expected mu2, mu:<p>, uniform, uniform:<a>,<b>, dirac:<x> or JSON"));
    };
    m.validate()?;
    Ok(m)
}

fn fmt17(x: f64) -> String {
    match extreal::to_text(x) {
        Some(t) => t.to_string(),
        None => format!("{x:.16e}"),
    }
}

fn emit(output: &Option<String>, text: &str) -> Result<(), Failure> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Validation(format!("cannot write {path}: {e}"))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| Failure::Validation(format!("cannot write output: {e}")))
        }
    }
}

fn to_kind(k: KindArg, nu: &MeasureSpec, c: Option<f64>) -> Result<RateKind, Failure> {
    Ok(match k {
        KindArg::Annealed => RateKind::Annealed,
        KindArg::Quenched => RateKind::Quenched { nu: nu.clone() },
        KindArg::Cramer => RateKind::Cramer,
        KindArg::J2 => RateKind::J2,
        KindArg::QuenchedP1 => RateKind::QuenchedP1 { c: c.ok_or_else(|| Failure::Validation("quenched_p1 needs --c".into()))? },
        KindArg::E1Projection => RateKind::E1Projection,
        KindArg::AnnealedSub2 => RateKind::AnnealedSub2,
    })
}

pub fn rate(a: &RateArgs) -> Result<(), Failure> {
    let p = parse_p(&a.p)?;
    let grid = parse_w_grid(&a.w)?;
    let nu = parse_measure(&a.nu)?;
    let kinds = a.kind.iter().map(|k| to_kind(*k, &nu, a.c)).collect::<Result<Vec<_>, _>>()?;
    for k in &kinds {
        k.validate(p)?;
    }
    let speeds: Vec<SpeedSpec> = kinds.iter().map(|k| k.speed(p)).collect();
    if !a.allow_mixed_speed && speeds.windows(2).any(|s| s[0] != s[1]) {
        let list: Vec<String> = kinds.iter().zip(&speeds).map(|(k, s)| format!("{} at speed {}", k.label(), s.label())).collect();
        return Err(Failure::Validation(format!(
            "curves have different speeds ({}); pass --allow-mixed-speed to put them in one output",
            list.join(", ")
        )));
    }
    let curves = kinds.iter().map(|k| rate_curve(p, k, &grid)).collect::<Result<Vec<_>, _>>()?;
    let text = match a.format {
        Format::Csv => rate_csv(&curves),
        Format::Json => {
            let doc = json!({ "schema": RATE_JSON_SCHEMA, "curves": curves });
            serde_json::to_string_pretty(&doc).expect("curves serialize") + "\n"
        }
    };
    emit(&a.output, &text)
}

fn rate_csv(curves: &[RateCurve]) -> String {
    let mut s = format!("# schema: {RATE_CSV_SCHEMA}\nw,value,kind,p,speed\n");
    for c in curves {
        for (w, v) in c.w_grid.iter().zip(&c.values) {
            s += &format!("{},{},{},{},{}\n", fmt17(*w), fmt17(*v), c.kind.label(), c.p, c.speed.label());
        }
    }
    s
}

fn parse_speed(s: &str) -> Result<SpeedSpec, Failure> {
    match s {
        "n" | "linear_n" => Ok(SpeedSpec::LinearN),
        "n_over_sqrt_log_n" => Ok(SpeedSpec::NOverSqrtLogN),
        _ => match s.strip_prefix("power:").map(|r| r.parse::<f64>()) {
            Some(Ok(r)) if r > 0.0 && r.is_finite() => Ok(SpeedSpec::Power { r }),
            _ => Err(Failure::Validation(format!("bad speed {s:?}; use n, n_over_sqrt_log_n or power:<r>"))),
        },
    }
}

/// Random directions below p = 2 move at speed n^{r_p}; fixed directions at p = 1 at n/√log n.
fn default_speed(p: PExponent, dir: DirArg) -> SpeedSpec {
    match (p, dir) {
        (PExponent::Finite(q), DirArg::Random) if q < 2.0 => SpeedSpec::Power { r: r_p(q) },
        (PExponent::Finite(q), _) if q == 1.0 => SpeedSpec::NOverSqrtLogN,
        _ => SpeedSpec::LinearN,
    }
}

fn with_schema(v: Value, extra: &[(&str, Value)]) -> String {
    let mut m = Map::new();
    m.insert("schema".into(), Value::from(MC_SCHEMA));
    for (k, x) in extra {
        m.insert((*k).into(), x.clone());
    }
    match v {
        Value::Object(o) => m.extend(o),
        other => {
            m.insert("value".into(), other);
        }
    }
    Value::Object(m).to_string() + "\n"
}

pub fn mc(a: &McArgs) -> Result<(), Failure> {
    let p = parse_p(&a.p)?;
    let ns = parse_n_list(&a.n)?;
    let dir_seed = a.dir_seed.unwrap_or(a.seed);
    let kind = match a.dir {
        DirArg::Typical => Some(DirectionKind::Typical),
        DirArg::ColumnCoupled => Some(DirectionKind::ColumnCoupled),
        DirArg::Iota => Some(DirectionKind::Iota),
        DirArg::E1 => Some(DirectionKind::E1),
        DirArg::Random => None,
    };
    let seq = kind.map(|k| DirectionSequence::new(k, dir_seed));
    let need_seq = || seq.ok_or_else(|| Failure::Validation("this report needs a fixed direction sequence, not --dir random".into()));
    let dir_value = serde_json::to_value(seq.map(DirSpec::Fixed).unwrap_or(DirSpec::Random)).expect("dir serializes");
    let text = if a.gc {
        let r = gc_report(&need_seq()?, &ns, a.r)?;
        with_schema(json!(r), &[("report", "glivenko_cantelli".into()), ("dir", dir_value)])
    } else if a.check == Some(CheckArg::MaxScaling) {
        let v = max_coordinate_scaling(&need_seq()?, &ns)?;
        with_schema(json!({ "n_grid": ns, "values": v }), &[("report", "max_scaling".into()), ("dir", dir_value)])
    } else {
        let speed = match &a.speed {
            Some(s) => parse_speed(s)?,
            None => default_speed(p, a.dir),
        };
        let method = match a.method {
            MethodArg::Direct => Method::Direct,
            MethodArg::Tilted => Method::Tilted,
        };
        let dir = seq.map(DirSpec::Fixed).unwrap_or(DirSpec::Random);
        let est = estimate_tail_with(p, &ns, a.w, &dir, a.reps, speed, method, a.seed, !a.no_radial)?;
        let extra = [("p", Value::from(p.to_string())), ("dir", dir_value), ("seed", Value::from(a.seed))];
        est.iter().map(|e| with_schema(json!(e), &extra)).collect()
    };
    emit(&a.output, &text)
}

/// `start:stop:count`.
fn parse_support_grid(s: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Validation(format!("bad grid {s:?}; use start:stop:count"));
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, c] = parts.as_slice() else {
        return Err(bad());
    };
    let (a, b): (f64, f64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    let count: usize = c.trim().parse().map_err(|_| bad())?;
    if !(a < b && count >= 3) {
        return Err(bad());
    }
    Ok(linspace(a, b, count))
}

pub fn variational(a: &VariationalArgs) -> Result<(), Failure> {
    let grid = parse_support_grid(&a.grid)?;
    let family = match &a.gamma {
        Some(g) => Family::Gamma { gamma: parse_measure(g)? },
        None => Family::from_p(parse_p(&a.p)?)?,
    };
    let solution = variational_annealed(&family, a.w, &grid)?;
    let mut doc = json!({
        "schema": VARIATIONAL_SCHEMA,
        "family": family,
        "w": a.w,
        "grid": { "start": grid[0], "stop": grid[grid.len() - 1], "count": grid.len() },
        "solution": solution,
    });
    if let Family::Gamma { .. } = family {
        // the Gaussian candidate and the unit-variance uniform law
        let s3 = 3f64.sqrt();
        let mu = MeasureSpec::mu2().discretize(&grid)?;
        let uni = MeasureSpec::UniformInterval { a: -s3, b: s3 }.discretize(&grid)?;
        let at = |nu: &MeasureSpec| -> Result<Value, Failure> { Ok(json!(extreal::Ext(variational_objective(&family, a.w, nu)?))) };
        doc["reference_objectives"] = json!({ "mu2": at(&mu)?, "uniform_unit_variance": at(&uni)? });
    }
    emit(&a.output, &(serde_json::to_string_pretty(&doc).expect("solution serializes") + "\n"))
}

pub fn selftest(a: &SelftestArgs) -> Result<(), Failure> {
    if a.list {
        let text: String = CHECKS.iter().map(|(id, title)| format!("{id:<22} {title}\n")).collect();
        return emit(&None, &text);
    }
    let ids: Vec<&str> = if a.only.is_empty() {
        CHECKS.iter().map(|(id, _)| *id).collect()
    } else {
        let mut ids = Vec::new();
        for id in &a.only {
            let known = CHECKS.iter().find(|(c, _)| c == id).ok_or_else(|| {
                Failure::Validation(format!("unknown check {id:?}; see selftest --list"))
            })?;
            ids.push(known.0);
        }
        ids
    };
    let mut settings = Settings::default();
    if let Some(f) = a.corrupt_quadrature {
        settings.gaussian_rule = QuadratureRule::gaussian().corrupted(f);
    }
    let mut failed = Vec::new();
    for id in &ids {
        let report = run_all(&[id], &settings).remove(0);
        let line = if a.json { serde_json::to_string(&report).expect("report serializes") } else { report.line() };
        emit(&None, &(line + "\n"))?;
        if !report.passed {
            failed.push(report.id);
        }
    }
    if !a.json {
        emit(&None, &format!("{}/{} checks passed\n", ids.len() - failed.len(), ids.len()))?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Acceptance(format!("{} of {} checks failed: {}", failed.len(), ids.len(), failed.join(", "))))
    }
}
