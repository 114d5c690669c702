//! Compact command-line spellings for spaces, regions, costs and lists.

use std::f64::consts::PI;
use std::fs;

use alexot::costs::CostSpec;
use alexot::{Region, Space};

use super::CliError;

/// A float, optionally suffixed with `pi` (`1.5pi`, `pi`).
pub fn number(s: &str) -> Result<f64, CliError> {
    let s = s.trim();
    let v = match s.strip_suffix("pi") {
        Some("") => Ok(PI),
        Some(head) => head.trim().parse::<f64>().map(|x| x * PI),
        None => s.parse::<f64>(),
    };
    v.map_err(|_| CliError::input(format!("not a number: {s:?}")))
}

fn numbers(s: &str, n: usize, what: &str) -> Result<Vec<f64>, CliError> {
    let v = s.split(',').map(number).collect::<Result<Vec<_>, _>>()?;
    if v.len() != n {
        return Err(CliError::input(format!("{what} needs {n} comma-separated values, got {s:?}")));
    }
    Ok(v)
}

pub fn list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(',').map(|p| p.trim().parse::<T>().map_err(|_| CliError::input(format!("bad {what} entry {p:?}")))).collect()
}

/// Inline JSON when the argument starts with `{`, otherwise a file path.
fn json_or_file<T: serde::de::DeserializeOwned>(arg: &str) -> Result<T, CliError> {
    if arg.trim_start().starts_with('{') {
        serde_json::from_str(arg).map_err(|e| CliError::json("<argument>", &e))
    } else {
        let text = fs::read_to_string(arg).map_err(|e| CliError::input(format!("{arg}: {e}")))?;
        serde_json::from_str(&text).map_err(|e| CliError::json(arg, &e))
    }
}

/// `plane`, `sphere:K`, `cone:THETA`, inline JSON or a JSON file.
pub fn space(arg: &str) -> Result<Space, CliError> {
    let (kind, rest) = arg.split_once(':').unwrap_or((arg, ""));
    match kind {
        "plane" if rest.is_empty() => Ok(Space::Plane),
        "sphere" => Ok(Space::sphere(if rest.is_empty() { 1.0 } else { number(rest)? })?),
        "cone" => Ok(Space::cone(number(rest)?)?),
        _ => json_or_file(arg),
    }
}

/// `square`, `rect:X0,X1,Y0,Y1`, `grid:NX,NY` (unit square), `annulus:R0,R1`,
/// `cap:MAX_POLAR`, inline JSON or a JSON file.
pub fn region(arg: &str) -> Result<Region, CliError> {
    let (kind, rest) = arg.split_once(':').unwrap_or((arg, ""));
    Ok(match kind {
        "square" => Region::unit_square(),
        "rect" => {
            let v = numbers(rest, 4, "rect")?;
            Region::Rect { x_min: v[0], x_max: v[1], y_min: v[2], y_max: v[3] }
        }
        "grid" => {
            let v: Vec<usize> = list(rest, "grid")?;
            let [nx, ny] = v[..] else {
                return Err(CliError::input("grid needs NX,NY"));
            };
            Region::Grid { x_min: 0.0, x_max: 1.0, y_min: 0.0, y_max: 1.0, nx, ny }
        }
        "annulus" => {
            let v = numbers(rest, 2, "annulus")?;
            Region::Annulus { r_min: v[0], r_max: v[1] }
        }
        "cap" => Region::Cap { max_polar: number(rest)? },
        _ => return json_or_file(arg),
    })
}

/// `quadratic`, `power:P` or inline JSON.
pub fn cost(arg: &str) -> Result<CostSpec, CliError> {
    match arg.split_once(':') {
        None if arg == "quadratic" => Ok(CostSpec::Quadratic),
        Some(("power", p)) => Ok(CostSpec::power(number(p)?)?),
        _ => json_or_file(arg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthands() {
        assert_eq!(number("1.5pi").unwrap(), 1.5 * PI);
        assert_eq!(number("pi").unwrap(), PI);
        assert!(number("x").is_err());
        assert_eq!(space("cone:1.5pi").unwrap(), Space::cone(1.5 * PI).unwrap());
        assert_eq!(space("sphere").unwrap(), Space::sphere(1.0).unwrap());
        assert_eq!(space(r#"{"kind":"plane"}"#).unwrap(), Space::Plane);
        assert!(space("cone:-1").is_err());
        assert_eq!(region("annulus:0.5,2").unwrap(), Region::Annulus { r_min: 0.5, r_max: 2.0 });
        assert!(matches!(region("grid:20,20").unwrap(), Region::Grid { nx: 20, ny: 20, .. }));
        assert_eq!(cost("power:3").unwrap(), CostSpec::Power { p: 3.0 });
        assert_eq!(list::<usize>("250, 500,1000", "N").unwrap(), vec![250, 500, 1000]);
    }
}
