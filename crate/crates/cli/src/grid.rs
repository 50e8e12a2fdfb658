//! Parsing of grid arguments such as `1,2,4,8` or `1..10`.

use std::str::FromStr;

/// Comma-separated reals.
pub fn parse_reals(raw: &str) -> Result<Vec<f64>, String> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| f64::from_str(s).map_err(|_| format!("not a number: {s:?}")))
        .collect::<Result<Vec<_>, _>>()
        .and_then(nonempty)
}

/// Comma-separated counts, where an item may be an inclusive range `a..b`.
pub fn parse_counts(raw: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for item in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once("..") {
            Some((a, b)) => {
                let a = parse_count(a)?;
                let b = parse_count(b.trim_start_matches('='))?;
                if a > b {
                    return Err(format!("empty range {item:?}"));
                }
                out.extend(a..=b);
            }
            None => out.push(parse_count(item)?),
        }
    }
    nonempty(out)
}

fn parse_count(s: &str) -> Result<usize, String> {
    s.trim().parse().map_err(|_| format!("not a count: {s:?}"))
}

fn nonempty<T>(v: Vec<T>) -> Result<Vec<T>, String> {
    if v.is_empty() {
        Err("empty grid".into())
    } else {
        Ok(v)
    }
}
