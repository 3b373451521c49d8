//! Flat `key = value` scenario configs with dotted sections.
//!
//! Signal-valued keys use a small functional syntax over the closed primitive
//! set, e.g.
//!
//! ```text
//! n = 2
//! m = 1
//! t_end = 20
//! dt = 1e-4
//! beta = 0.2
//! grid.T = 0.25
//! grid.t_r_plus = 0
//! gains.gamma0 = 100
//! gains.gamma = 0.75
//! gains.sigma = 1e-4
//! gains.kappa = 1e-9
//! theta.0 = sum(2, sin(1, 1))
//! theta.1 = sum(3, cos(1, 0.5))
//! omega.0.0 = sin(3, 4pi)
//! omega.1.0 = piecewise(10, 2.5, sin(2.5, 4pi))
//! disturbance = uniform(-0.5, 0.5)
//! ```
//!
//! Numbers accept an optional `pi` suffix (`4pi`, `0.5pi`). `cos(a, f)` is
//! sugar for a quarter-turn phased sine; `piecewise(t, before, after)` nests
//! for more pieces. Unknown or missing keys are reported by name.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::estimator::EstimatorGains;
use crate::lift::TimeGrid;
use crate::signals::{DisturbanceSpec, Scenario, SignalExpr};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config line {line}: expected `key = value`, got `{text}`")]
    Malformed { line: usize, text: String },
    #[error("config key `{key}` given more than once")]
    DuplicateKey { key: String },
    #[error("unknown config key `{key}`")]
    UnknownKey { key: String },
    #[error("missing required config key `{key}`")]
    MissingKey { key: String },
    #[error("config key `{key}`: {message}")]
    BadValue { key: String, message: String },
}

type CfgResult<T> = std::result::Result<T, ConfigError>;

/// Parse a scenario from config text. The scenario is validated before being
/// returned.
pub fn parse_scenario(text: &str) -> CfgResult<Scenario> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Malformed {
                line: idx + 1,
                text: raw.trim().to_string(),
            });
        };
        let key = key.trim().to_string();
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(ConfigError::DuplicateKey { key });
        }
    }
    scenario_from_map(map)
}

fn scenario_from_map(mut map: BTreeMap<String, String>) -> CfgResult<Scenario> {
    let mut take = |key: &str| map.remove(key);
    let n = required_usize(&mut take, "n")?;
    let m = required_usize(&mut take, "m")?;
    let t_end = required_f64(&mut take, "t_end")?;
    let dt = required_f64(&mut take, "dt")?;
    let beta = required_f64(&mut take, "beta")?;
    let seed = optional(&mut take, "seed", 0u64, parse_int)?;
    let grid = TimeGrid::new(
        required_f64(&mut take, "grid.T")?,
        optional(&mut take, "grid.t_r_plus", 0.0, parse_number)?,
    );
    let gamma0 = required_f64(&mut take, "gains.gamma0")?;
    let sigma = required_f64(&mut take, "gains.sigma")?;
    let kappa = required_f64(&mut take, "gains.kappa")?;
    let gamma = parse_gamma(
        "gains.gamma",
        &take("gains.gamma").ok_or(ConfigError::MissingKey { key: "gains.gamma".into() })?,
        n,
    )?;

    let mut theta = Vec::with_capacity(n);
    for i in 0..n {
        let key = format!("theta.{i}");
        let value = take(&key).ok_or(ConfigError::MissingKey { key: key.clone() })?;
        theta.push(parse_signal(&key, &value)?);
    }
    let mut regressor = Vec::with_capacity(n * m);
    for r in 0..n {
        for c in 0..m {
            let key = format!("omega.{r}.{c}");
            let value = take(&key).ok_or(ConfigError::MissingKey { key: key.clone() })?;
            regressor.push(parse_signal(&key, &value)?);
        }
    }

    let disturbance = match take("disturbance") {
        None => DisturbanceSpec::None,
        Some(v) => parse_disturbance("disturbance", &v)?,
    };
    let theta_hat0 = match take("theta_hat0") {
        None => DVector::zeros(n),
        Some(v) => {
            let values = parse_number_list("theta_hat0", &v)?;
            if values.len() != n {
                return Err(ConfigError::BadValue {
                    key: "theta_hat0".into(),
                    message: format!("expected {n} comma-separated values, got {}", values.len()),
                });
            }
            DVector::from_vec(values)
        }
    };
    let fe_end = match take("fe_end") {
        None => None,
        Some(v) => Some(parse_number("fe_end", &v)?),
    };

    if let Some(key) = map.keys().next() {
        return Err(ConfigError::UnknownKey { key: key.clone() });
    }

    let scenario = Scenario {
        n,
        m,
        regressor,
        theta,
        disturbance,
        t_end,
        dt,
        seed,
        grid,
        gains: EstimatorGains { gamma0, gamma, sigma, kappa },
        beta,
        theta_hat0,
        fe_end,
    };
    scenario.validate().map_err(|e| ConfigError::BadValue {
        key: "scenario".into(),
        message: e.to_string(),
    })?;
    Ok(scenario)
}

fn required_f64(take: &mut impl FnMut(&str) -> Option<String>, key: &str) -> CfgResult<f64> {
    let v = take(key).ok_or(ConfigError::MissingKey { key: key.into() })?;
    parse_number(key, &v)
}

fn required_usize(take: &mut impl FnMut(&str) -> Option<String>, key: &str) -> CfgResult<usize> {
    let v = take(key).ok_or(ConfigError::MissingKey { key: key.into() })?;
    parse_int(key, &v).map(|x| x as usize)
}

fn optional<T>(
    take: &mut impl FnMut(&str) -> Option<String>,
    key: &str,
    default: T,
    parse: impl Fn(&str, &str) -> CfgResult<T>,
) -> CfgResult<T> {
    match take(key) {
        None => Ok(default),
        Some(v) => parse(key, &v),
    }
}

fn parse_int(key: &str, value: &str) -> CfgResult<u64> {
    value.trim().parse().map_err(|_| ConfigError::BadValue {
        key: key.into(),
        message: format!("`{value}` is not a nonnegative integer"),
    })
}

/// Number with an optional `pi` suffix.
fn parse_number(key: &str, value: &str) -> CfgResult<f64> {
    let v = value.trim();
    let bad = || ConfigError::BadValue {
        key: key.into(),
        message: format!("`{v}` is not a number"),
    };
    if let Some(mantissa) = v.strip_suffix("pi") {
        let mantissa = mantissa.trim();
        let factor = if mantissa.is_empty() || mantissa == "-" {
            if mantissa == "-" {
                -1.0
            } else {
                1.0
            }
        } else {
            mantissa.parse::<f64>().map_err(|_| bad())?
        };
        return Ok(factor * std::f64::consts::PI);
    }
    v.parse::<f64>().map_err(|_| bad())
}

fn parse_number_list(key: &str, value: &str) -> CfgResult<Vec<f64>> {
    value
        .split(',')
        .map(|part| parse_number(key, part))
        .collect()
}

fn parse_gamma(key: &str, value: &str, n: usize) -> CfgResult<DMatrix<f64>> {
    let v = value.trim();
    if let Some(inner) = v.strip_prefix("diag(").and_then(|r| r.strip_suffix(')')) {
        let values = parse_number_list(key, inner)?;
        if values.len() != n {
            return Err(ConfigError::BadValue {
                key: key.into(),
                message: format!("diag(...) needs {n} entries, got {}", values.len()),
            });
        }
        return Ok(DMatrix::from_diagonal(&DVector::from_vec(values)));
    }
    let scalar = parse_number(key, v)?;
    Ok(DMatrix::identity(n, n) * scalar)
}

fn parse_disturbance(key: &str, value: &str) -> CfgResult<DisturbanceSpec> {
    let v = value.trim();
    if v == "none" {
        return Ok(DisturbanceSpec::None);
    }
    if let Some(inner) = v.strip_prefix("uniform(").and_then(|r| r.strip_suffix(')')) {
        let values = parse_number_list(key, inner)?;
        if values.len() != 2 || values[0] >= values[1] {
            return Err(ConfigError::BadValue {
                key: key.into(),
                message: "uniform(lo, hi) needs lo < hi".into(),
            });
        }
        return Ok(DisturbanceSpec::Uniform { lo: values[0], hi: values[1] });
    }
    if let Some(inner) = v.strip_prefix("tabulated(").and_then(|r| r.strip_suffix(')')) {
        let values = parse_number_list(key, inner)?;
        if values.is_empty() {
            return Err(ConfigError::BadValue {
                key: key.into(),
                message: "tabulated(...) needs at least one value".into(),
            });
        }
        return Ok(DisturbanceSpec::Tabulated(values));
    }
    Err(ConfigError::BadValue {
        key: key.into(),
        message: format!("`{v}` is not one of none | uniform(lo, hi) | tabulated(v, ...)"),
    })
}

/// Recursive-descent parser for the signal expression syntax.
fn parse_signal(key: &str, value: &str) -> CfgResult<SignalExpr> {
    let mut parser = SignalParser {
        key,
        chars: value.char_indices().peekable(),
        text: value,
    };
    let expr = parser.expr()?;
    parser.skip_ws();
    if let Some((pos, _)) = parser.chars.peek().copied() {
        return Err(parser.fail(pos, "unexpected trailing input"));
    }
    Ok(expr)
}

struct SignalParser<'a> {
    key: &'a str,
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    text: &'a str,
}

impl<'a> SignalParser<'a> {
    fn fail(&self, pos: usize, message: &str) -> ConfigError {
        ConfigError::BadValue {
            key: self.key.into(),
            message: format!("{message} at column {} of `{}`", pos + 1, self.text),
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.chars.peek(), Some((_, c)) if c.is_whitespace()) {
            self.chars.next();
        }
    }

    fn expr(&mut self) -> CfgResult<SignalExpr> {
        self.skip_ws();
        match self.chars.peek().copied() {
            Some((_, c)) if c.is_ascii_alphabetic() => self.call_or_pi(),
            Some((_, c)) if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                Ok(SignalExpr::Constant(self.number()?))
            }
            Some((pos, _)) => Err(self.fail(pos, "expected a number or a function")),
            None => Err(self.fail(self.text.len(), "unexpected end of expression")),
        }
    }

    fn call_or_pi(&mut self) -> CfgResult<SignalExpr> {
        let start = self.chars.peek().map(|(p, _)| *p).unwrap_or(0);
        let mut name = String::new();
        while matches!(self.chars.peek(), Some((_, c)) if c.is_ascii_alphanumeric() || *c == '_') {
            name.push(self.chars.next().unwrap().1);
        }
        if name == "pi" {
            return Ok(SignalExpr::Constant(std::f64::consts::PI));
        }
        self.skip_ws();
        match self.chars.next() {
            Some((_, '(')) => {}
            _ => return Err(self.fail(start, "expected `(` after function name")),
        }
        let expr = match name.as_str() {
            "const" => SignalExpr::Constant(self.number_arg(true)?),
            "sin" | "cos" => {
                let amp = self.number_arg(false)?;
                self.expect_comma(start)?;
                let freq = self.number_arg(false)?;
                let phase = if self.peek_is_comma() {
                    self.expect_comma(start)?;
                    self.number_arg(false)?
                } else {
                    0.0
                };
                let phase = if name == "cos" {
                    phase + std::f64::consts::FRAC_PI_2
                } else {
                    phase
                };
                SignalExpr::Sine { amp, freq, phase }
            }
            "sum" => {
                let mut terms = vec![self.expr()?];
                while self.peek_is_comma() {
                    self.chars.next();
                    terms.push(self.expr()?);
                }
                SignalExpr::Sum(terms)
            }
            "piecewise" => {
                let at = self.number_arg(false)?;
                self.expect_comma(start)?;
                let before = self.expr()?;
                self.expect_comma(start)?;
                let after = self.expr()?;
                SignalExpr::switch_at(at, before, after)
            }
            other => {
                return Err(self.fail(
                    start,
                    &format!("unknown signal primitive `{other}` (const, sin, cos, sum, piecewise)"),
                ))
            }
        };
        self.skip_ws();
        match self.chars.next() {
            Some((_, ')')) => Ok(expr),
            Some((pos, _)) => Err(self.fail(pos, "expected `)`")),
            None => Err(self.fail(self.text.len(), "expected `)`")),
        }
    }

    fn peek_is_comma(&mut self) -> bool {
        self.skip_ws();
        matches!(self.chars.peek(), Some((_, ',')))
    }

    fn expect_comma(&mut self, start: usize) -> CfgResult<()> {
        self.skip_ws();
        match self.chars.next() {
            Some((_, ',')) => Ok(()),
            _ => Err(self.fail(start, "expected `,`")),
        }
    }

    fn number_arg(&mut self, _allow_sign: bool) -> CfgResult<f64> {
        self.skip_ws();
        self.number()
    }

    /// Literal number, optionally with a `pi` suffix.
    fn number(&mut self) -> CfgResult<f64> {
        self.skip_ws();
        let start = self.chars.peek().map(|(p, _)| *p).unwrap_or(self.text.len());
        let mut raw = String::new();
        while let Some((_, c)) = self.chars.peek().copied() {
            if c.is_ascii_digit() || c == '.' || c == '-' || c == '+' {
                raw.push(c);
                self.chars.next();
            } else if c == 'e' || c == 'E' {
                // exponent only if followed by digit or sign
                let mut lookahead = self.chars.clone();
                lookahead.next();
                if matches!(lookahead.peek(), Some((_, d)) if d.is_ascii_digit() || *d == '-' || *d == '+')
                {
                    raw.push(c);
                    self.chars.next();
                } else {
                    break;
                }
            } else {
                break;
            }
        }
        let mut factor = 1.0;
        if matches!(self.chars.peek(), Some((_, 'p'))) {
            let mut lookahead = self.chars.clone();
            lookahead.next();
            if matches!(lookahead.peek(), Some((_, 'i'))) {
                self.chars.next();
                self.chars.next();
                factor = std::f64::consts::PI;
                if raw.is_empty() || raw == "-" {
                    let sign = if raw == "-" { -1.0 } else { 1.0 };
                    return Ok(sign * factor);
                }
            }
        }
        raw.parse::<f64>()
            .map(|v| v * factor)
            .map_err(|_| self.fail(start, "expected a number"))
    }
}
