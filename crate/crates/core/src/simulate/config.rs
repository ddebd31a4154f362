//! Plain-text scenario files.
//!
//! One scenario per line as whitespace-separated `key=value` pairs; `#`
//! starts a comment. Keys: `family` (SP, EXP, INVQ), `c`, `alpha`
//! (default 1), `D` (2 or 3), `n`, `sigma2`, `seed`, `trials` and `methods`
//! (comma-separated, e.g. `ZA(1,1.5),GCV,minEpan,Raw`).

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::simulate::generate::SimScenario;
use crate::simulate::harness::Method;
use crate::simulate::model::{CorrelationFamily, CorrelationModel, MeanFunction};

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub scenario: SimScenario,
    pub methods: Vec<Method>,
    /// 1-based line in the source file.
    pub line: usize,
}

const KEYS: [&str; 9] = [
    "family", "c", "alpha", "D", "n", "sigma2", "seed", "trials", "methods",
];

/// Splits on commas outside parentheses.
fn split_methods(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out.into_iter().filter(|m| !m.trim().is_empty()).collect()
}

/// Parses a comma-separated method list such as `ZA(1,1.5),GCV,minEpan,Raw`.
pub fn parse_method_list(s: &str) -> Result<Vec<Method>> {
    let methods = split_methods(s)
        .into_iter()
        .map(str::parse)
        .collect::<Result<Vec<Method>>>()?;
    if methods.is_empty() {
        return Err(Error::invalid("no methods listed"));
    }
    Ok(methods)
}

fn parse_line(text: &str, line: usize) -> Result<ScenarioSpec> {
    let err = |message: String| Error::Parse { line, message };
    let mut fields: HashMap<&str, &str> = HashMap::new();
    for token in text.split_whitespace() {
        let (k, v) = token
            .split_once('=')
            .ok_or_else(|| err(format!("expected key=value, found '{token}'")))?;
        if !KEYS.contains(&k) {
            return Err(err(format!("unknown key '{k}'")));
        }
        if fields.insert(k, v).is_some() {
            return Err(err(format!("duplicate key '{k}'")));
        }
    }
    let get = |k: &str| {
        fields
            .get(k)
            .copied()
            .ok_or_else(|| err(format!("missing key '{k}'")))
    };
    fn num<T: std::str::FromStr>(v: &str, k: &str, line: usize) -> Result<T> {
        v.parse().map_err(|_| Error::Parse {
            line,
            message: format!("bad value '{v}' for '{k}'"),
        })
    }
    let family: CorrelationFamily = get("family")?
        .parse()
        .map_err(|e: Error| err(e.to_string()))?;
    let c: f64 = num(get("c")?, "c", line)?;
    let alpha: f64 = match fields.get("alpha") {
        Some(v) => num(v, "alpha", line)?,
        None => 1.0,
    };
    let dim: usize = num(get("D")?, "D", line)?;
    let n: usize = num(get("n")?, "n", line)?;
    let sigma2: f64 = num(get("sigma2")?, "sigma2", line)?;
    let seed: u64 = num(get("seed")?, "seed", line)?;
    let trials: usize = num(get("trials")?, "trials", line)?;
    let methods = parse_method_list(get("methods")?).map_err(|e| err(e.to_string()))?;
    let mean = MeanFunction::for_dim(dim).map_err(|e| err(e.to_string()))?;
    let model =
        CorrelationModel::new(family, c, alpha, dim, sigma2).map_err(|e| err(e.to_string()))?;
    let scenario =
        SimScenario::new(mean, n, model, seed, trials).map_err(|e| err(e.to_string()))?;
    Ok(ScenarioSpec {
        scenario,
        methods,
        line,
    })
}

/// Parses a scenario file; errors name the offending line.
pub fn parse_scenarios(text: &str) -> Result<Vec<ScenarioSpec>> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        out.push(parse_line(body, k + 1)?);
    }
    if out.is_empty() {
        return Err(Error::invalid("scenario file lists no scenarios"));
    }
    Ok(out)
}
