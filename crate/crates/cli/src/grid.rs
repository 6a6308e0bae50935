//! Parameter grids and list arguments.

use anyhow::{bail, Context, Result};

/// Parses `lo:hi:step`, `lo:hi` (step 1), a comma list, or a single value.
/// Ranges include every `lo + k step` up to `hi` plus half a step.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.len() {
        1 => parse_list(text),
        2 | 3 => {
            let num = |s: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .with_context(|| format!("bad number {s:?} in grid {text:?}"))
            };
            let lo = num(parts[0])?;
            let hi = num(parts[1])?;
            let step = if parts.len() == 3 {
                num(parts[2])?
            } else {
                1.0
            };
            if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || step <= 0.0 {
                bail!("grid {text:?} needs finite bounds and a positive step");
            }
            if hi < lo {
                bail!("grid {text:?} has hi < lo");
            }
            let count = ((hi - lo) / step + 0.5).floor() as usize + 1;
            Ok((0..count).map(|k| lo + k as f64 * step).collect())
        }
        _ => bail!("grid {text:?} must be lo:hi:step, lo:hi or a comma list"),
    }
}

pub fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .with_context(|| format!("bad number {s:?} in {text:?}"))
        })
        .collect()
}

/// Comma list of register sizes; `lo:hi` and `lo:hi:step` ranges allowed.
pub fn parse_sizes(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in text.split(',') {
        let item = item.trim();
        if item.contains(':') {
            for v in parse_grid(item)? {
                out.push(v.round() as usize);
            }
        } else {
            out.push(
                item.parse()
                    .with_context(|| format!("bad register size {item:?}"))?,
            );
        }
    }
    Ok(out)
}

/// `t` values uniform in `t^2`.
pub fn sqrt_grid(t2: &[f64]) -> Result<Vec<f64>> {
    if t2.iter().any(|v| *v < 0.0) {
        bail!("t^2 grid must be non-negative");
    }
    Ok(t2.iter().map(|v| v.sqrt()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_include_endpoints() {
        assert_eq!(parse_grid("0:5:0.25").unwrap().len(), 21);
        assert_eq!(parse_grid("0:40").unwrap().len(), 41);
        let g = parse_grid("0:3:0.1").unwrap();
        assert_eq!(g.len(), 31);
        assert!((g[30] - 3.0).abs() < 1e-12);
        // 1.04 is within half a step of 1.0 but 1.06 is not
        assert_eq!(parse_grid("0:1.04:0.1").unwrap().len(), 11);
        assert_eq!(parse_grid("0:1.06:0.1").unwrap().len(), 12);
    }

    #[test]
    fn lists_and_errors() {
        assert_eq!(parse_grid("0.5,1,2").unwrap(), vec![0.5, 1.0, 2.0]);
        assert_eq!(parse_grid("2").unwrap(), vec![2.0]);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("a:b").is_err());
        assert!(parse_grid("0:1:2:3").is_err());
        assert_eq!(parse_sizes("6,8:12:2").unwrap(), vec![6, 8, 10, 12]);
        assert!(parse_sizes("6,x").is_err());
    }

    #[test]
    fn t_squared_grid() {
        let t = sqrt_grid(&parse_grid("0:1:0.25").unwrap()).unwrap();
        assert_eq!(t, vec![0.0, 0.5, 0.5f64.sqrt(), 0.75f64.sqrt(), 1.0]);
    }
}
