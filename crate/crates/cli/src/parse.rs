//! Parsers for input-law specs, SNR grids and `key=value` lists.

use immse::{InputLaw, MixtureComponent};

use crate::error::CliError;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn number(s: &str) -> Result<f64, CliError> {
    s.trim().parse::<f64>().map_err(|_| usage(format!("not a number: {s:?}")))
}

/// Input laws:
///
/// * `gaussian` or `gaussian:MEAN,VAR`
/// * `binary`
/// * `atoms:V/P,V/P,...`
/// * `mixture:W/M/V,W/M/V,...`
/// * `uniform:A,B` or `uniform:A,B,CELLS`
pub fn input_law(spec: &str) -> Result<InputLaw, CliError> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let parts: Vec<&str> = if rest.is_empty() { vec![] } else { rest.split(',').collect() };
    let law = match (kind, parts.len()) {
        ("gaussian", 0) => InputLaw::standard_gaussian(),
        ("gaussian", 2) => InputLaw::gaussian(number(parts[0])?, number(parts[1])?)?,
        ("binary", 0) => InputLaw::binary(),
        ("atoms", n) if n > 0 => {
            let mut values = Vec::with_capacity(n);
            let mut probs = Vec::with_capacity(n);
            for p in parts {
                let (v, w) = p.split_once('/').ok_or_else(|| usage(format!("atom {p:?} is not VALUE/PROB")))?;
                values.push(number(v)?);
                probs.push(number(w)?);
            }
            InputLaw::atoms(values, probs)?
        }
        ("mixture", n) if n > 0 => {
            let comps = parts
                .iter()
                .map(|p| {
                    let f: Vec<&str> = p.split('/').collect();
                    if f.len() != 3 {
                        return Err(usage(format!("component {p:?} is not W/M/V")));
                    }
                    Ok(MixtureComponent::new(number(f[0])?, number(f[1])?, number(f[2])?))
                })
                .collect::<Result<Vec<_>, _>>()?;
            InputLaw::mixture(comps)?
        }
        ("uniform", 2 | 3) => {
            let cells = match parts.get(2) {
                Some(c) => c.trim().parse::<usize>().map_err(|_| usage(format!("bad cell count {c:?}")))?,
                None => 200,
            };
            InputLaw::uniform_gridded(number(parts[0])?, number(parts[1])?, cells)?
        }
        _ => return Err(usage(format!("unrecognized input spec {spec:?}"))),
    };
    Ok(law)
}

/// `START:STOP:STEP` (inclusive), a comma list, or a single value.
pub fn grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let fields: Vec<&str> = spec.split(':').collect();
    match fields.len() {
        1 => spec.split(',').map(number).collect(),
        3 => {
            let (a, b, step) = (number(fields[0])?, number(fields[1])?, number(fields[2])?);
            if !(step > 0.0) || b < a {
                return Err(usage(format!("range {spec:?} needs STOP >= START and STEP > 0")));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            // Computing each point from its index avoids accumulated drift.
            Ok((0..=n).map(|k| a + k as f64 * step).collect())
        }
        _ => Err(usage(format!("bad grid {spec:?}; use START:STOP:STEP or a comma list"))),
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// SNR points from either a linear or a dB grid.
pub fn snr_points(linear: Option<&str>, db: Option<&str>, default: &[f64]) -> Result<Vec<f64>, CliError> {
    let points = match (linear, db) {
        (Some(_), Some(_)) => return Err(usage("give --snr or --snr-db, not both")),
        (Some(s), None) => grid(s)?,
        (None, Some(s)) => grid(s)?.into_iter().map(db_to_linear).collect(),
        (None, None) => default.to_vec(),
    };
    if points.iter().any(|s| !(*s >= 0.0) || !s.is_finite()) {
        return Err(usage("snr values must be finite and >= 0"));
    }
    Ok(points)
}

/// `k=v,k=v` pairs, checked against the allowed keys.
pub fn key_values(spec: &str, allowed: &[&str]) -> Result<Vec<(String, f64)>, CliError> {
    spec.split(',')
        .map(|kv| {
            let (k, v) = kv.split_once('=').ok_or_else(|| usage(format!("{kv:?} is not KEY=VALUE")))?;
            let k = k.trim();
            if !allowed.contains(&k) {
                return Err(usage(format!("unknown key {k:?}; expected one of {allowed:?}")));
            }
            Ok((k.to_string(), number(v)?))
        })
        .collect()
}

pub fn lookup(pairs: &[(String, f64)], key: &str, default: f64) -> f64 {
    pairs.iter().find(|p| p.0 == key).map(|p| p.1).unwrap_or(default)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(grid("0:10:0.1").unwrap().len(), 101);
        assert_eq!(grid("1,2,5").unwrap(), vec![1.0, 2.0, 5.0]);
        assert_eq!(grid("-5:20:0.5").unwrap().len(), 51);
        assert!(grid("2:1:0.1").is_err());
        assert!((db_to_linear(10.0) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn laws() {
        assert_eq!(input_law("binary").unwrap(), InputLaw::binary());
        let m = input_law("mixture:0.5/-1/0.25,0.5/1/0.25").unwrap();
        assert!((m.variance() - 1.25).abs() < 1e-14);
        assert!(input_law("atoms:-1/0.5,1/0.4").is_err());
        assert!(input_law("cauchy").is_err());
    }
}
