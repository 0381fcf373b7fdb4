//! Initial data from a closed-form expression in `s` or a list of Fourier modes.

use npeskin::GridFunction;

use crate::CliError;

/// A mode list is `n:amplitude:phase` terms separated by commas or spaces,
/// meaning `Σ amplitude·cos(n s + phase)`. Anything else is an expression in `s`
/// with `+ - * / ^`, `sin`, `cos`, `exp` and the constants `pi`, `e`.
pub fn parse_init(text: &str, n: usize) -> Result<GridFunction, CliError> {
    let h = if text.contains(':') {
        let modes = parse_modes(text)?;
        GridFunction::from_fn(n, |s| modes.iter().map(|(k, a, p)| a * (k * s + p).cos()).sum())
    } else {
        let expr: meval::Expr = text
            .parse()
            .map_err(|e| CliError::Config(format!("cannot parse init `{text}`: {e}")))?;
        let f = expr
            .bind("s")
            .map_err(|e| CliError::Config(format!("init `{text}`: {e}")))?;
        GridFunction::from_fn(n, f)
    }
    .map_err(|e| CliError::Config(e.to_string()))?;
    if !h.is_finite() {
        return Err(CliError::Config(format!("init `{text}` is not finite on the grid")));
    }
    Ok(h)
}

fn parse_modes(text: &str) -> Result<Vec<(f64, f64, f64)>, CliError> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|term| {
            let parts: Vec<&str> = term.split(':').collect();
            let num = |p: &str| p.parse::<f64>().map_err(|_| CliError::Config(format!("bad mode term `{term}`")));
            match parts.as_slice() {
                [k, a] => Ok((num(k)?, num(a)?, 0.0)),
                [k, a, p] => Ok((num(k)?, num(a)?, num(p)?)),
                _ => Err(CliError::Config(format!("bad mode term `{term}`"))),
            }
        })
        .collect()
}
