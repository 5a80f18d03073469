//! Compact text forms for nonlinearities, radial profiles and number lists.

use std::fs;

use kolab::verify::RadialProfile;
use kolab::Nonlinearity;

use crate::CliError;

/// `const:<g0>`, `pow:<d>`, `exp:<c>` or `table:<path>`.
pub fn parse_nonlinearity(s: &str) -> Result<Nonlinearity, CliError> {
    let (kind, arg) = s
        .split_once(':')
        .ok_or_else(|| CliError::config(format!("nonlinearity `{s}` should look like pow:<d>")))?;
    let num = || {
        arg.trim()
            .parse::<f64>()
            .map_err(|_| CliError::config(format!("`{arg}` in `{s}` is not a number")))
    };
    let g = match kind {
        "const" => Nonlinearity::constant(num()?),
        "pow" => Nonlinearity::power(num()?),
        "exp" => Nonlinearity::exponential(num()?),
        "table" => {
            let text = fs::read_to_string(arg)
                .map_err(|e| CliError::config(format!("cannot read table {arg}: {e}")))?;
            Nonlinearity::tabulated(parse_knots(&text)?)?
        }
        _ => return Err(CliError::config(format!("unknown nonlinearity kind `{kind}` (const, pow, exp, table)"))),
    };
    g.validate()?;
    Ok(g)
}

/// Two numeric columns, comma or whitespace separated; `#` comments and a header line are skipped.
fn parse_knots(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let mut knots = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|c| !c.is_empty()).collect();
        let parsed: Option<Vec<f64>> = cols.iter().map(|c| c.parse().ok()).collect();
        match parsed {
            Some(v) if v.len() == 2 => knots.push((v[0], v[1])),
            None if knots.is_empty() && lineno == 0 => continue,
            _ => return Err(CliError::config(format!("table line {}: expected two numbers", lineno + 1))),
        }
    }
    Ok(knots)
}

/// `quadratic:<a>[:<j>]`, `quartic:<a>[:<j>]`, `three-halves:<a>[:<j>]` or `expq:<A>`.
pub fn parse_profile(s: &str) -> Result<RadialProfile, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums: Result<Vec<f64>, _> = parts[1..].iter().map(|x| x.trim().parse::<f64>()).collect();
    let nums = nums.map_err(|_| CliError::config(format!("profile `{s}` has a non-numeric field")))?;
    let aj = || match nums.as_slice() {
        [a] => Ok((*a, 0.0)),
        [a, j] => Ok((*a, *j)),
        _ => Err(CliError::config(format!("profile `{s}` expects <a>[:<j>]"))),
    };
    let prof = match parts[0] {
        "quadratic" => {
            let (a, j) = aj()?;
            RadialProfile::Quadratic { a, j }
        }
        "quartic" => {
            let (a, j) = aj()?;
            RadialProfile::Quartic { a, j }
        }
        "three-halves" => {
            let (a, j) = aj()?;
            RadialProfile::PowerThreeHalves { a, j }
        }
        "expq" if nums.len() == 1 => RadialProfile::ExpQuadratic { a: nums[0] },
        _ => {
            return Err(CliError::config(format!(
                "unknown profile `{s}` (quadratic, quartic, three-halves, expq)"
            )))
        }
    };
    prof.validate()?;
    Ok(prof)
}

/// Comma-separated numbers.
pub fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| CliError::config(format!("`{x}` in list `{s}` is not a number"))))
        .collect()
}
