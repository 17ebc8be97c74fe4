//! Key-value config files, merged under command-line flags, and the grid syntaxes.

use std::fs;

use crate::Failure;

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_config(path: &str) -> Result<Vec<(String, String)>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Validation(format!("cannot read config {path}: {e}")))?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Failure::Validation(format!("{path}:{}: expected key = value", i + 1)));
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(Failure::Validation(format!("{path}:{}: empty key", i + 1)));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

/// Splices config entries into `args` right after the subcommand, skipping keys the command
/// line already sets, so that flags win. `--config` itself is removed.
pub fn merge_args(args: Vec<String>, subcommands: &[&str]) -> Result<Vec<String>, Failure> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or_else(|| Failure::Validation("--config needs a path".into()))?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let given: Vec<String> = rest
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    let mut injected = Vec::new();
    for (k, v) in read_config(&path)? {
        if given.contains(&k) {
            continue;
        }
        match v.as_str() {
            "true" => injected.push(format!("--{k}")),
            "false" => {}
            _ => {
                for part in split_repeated(&k, &v) {
                    injected.push(format!("--{k}={part}"));
                }
            }
        }
    }
    let at = rest.iter().position(|a| subcommands.contains(&a.as_str())).map(|i| i + 1).unwrap_or(rest.len());
    rest.splice(at..at, injected);
    Ok(rest)
}

/// Repeatable options may list several values in one config entry.
fn split_repeated(key: &str, v: &str) -> Vec<String> {
    if key == "kind" || key == "only" {
        v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
    } else {
        vec![v.to_string()]
    }
}

/// `start:stop:step` (inclusive of `stop` up to rounding) or a comma list.
pub fn parse_w_grid(s: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Validation(format!("bad w grid {s:?}; use start:stop:step or a comma list"));
    let parts: Vec<&str> = s.split(':').collect();
    match parts.len() {
        1 => s.split(',').map(|t| parse_real(t.trim()).map_err(|_| bad())).collect(),
        3 => {
            let [a, b, h] = [parse_real(parts[0]), parse_real(parts[1]), parse_real(parts[2])];
            let (a, b, h) = (a.map_err(|_| bad())?, b.map_err(|_| bad())?, h.map_err(|_| bad())?);
            if !(h > 0.0) || b < a {
                return Err(bad());
            }
            let count = ((b - a) / h + 1e-9).floor() as usize + 1;
            if count > 1_000_000 {
                return Err(Failure::Validation(format!("w grid {s:?} has {count} points")));
            }
            // snap to 12 decimals so that 0:0.9:0.1 yields 0.3 and not 0.30000000000000004
            Ok((0..count).map(|k| ((a + k as f64 * h) * 1e12).round() / 1e12).collect())
        }
        _ => Err(bad()),
    }
}

fn parse_real(s: &str) -> Result<f64, ()> {
    let v: f64 = s.trim().parse().map_err(|_| ())?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(())
    }
}

/// A positive integer, accepting scientific notation such as `1e6`.
pub fn parse_count(s: &str) -> Result<usize, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if !(v >= 1.0 && v.fract() == 0.0 && v <= 1e15) {
        return Err(format!("expected a positive integer, got {s:?}"));
    }
    Ok(v as usize)
}

pub fn parse_n_list(s: &str) -> Result<Vec<usize>, Failure> {
    s.split(',').map(|t| parse_count(t).map_err(Failure::Validation)).collect()
}
