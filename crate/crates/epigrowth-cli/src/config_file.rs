//! Flat `key = value` config files with `#` comments.
//!
//! Keys mirror the command-line flags one to one; a flag given on the
//! command line beats the file, and the file beats the built-in defaults.

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use epigrowth::ProfileKind;

/// Everything a file or the flag set may override. `None` means "not given".
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub domain_len: Option<f64>,
    pub trunc: Option<i32>,
    pub delta: Option<f64>,
    pub sigma: Option<f64>,
    pub profile: Option<ProfileKind>,
    pub eps: Option<f64>,
    pub profile_decay: Option<f64>,
    pub dt: Option<f64>,
    pub horizon: Option<f64>,
    pub seed: Option<u64>,
    pub n_grid: Option<usize>,
    pub workers: Option<usize>,
    pub samples: Option<usize>,
    pub p: Option<f64>,
    pub t_eval: Option<f64>,
    pub epsilons: Option<Vec<f64>>,
}

impl Overrides {
    /// Later (higher-precedence) values overwrite earlier ones.
    pub fn merge(mut self, over: Overrides) -> Overrides {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if over.$field.is_some() { self.$field = over.$field; })*
            };
        }
        take!(
            domain_len, trunc, delta, sigma, profile, eps, profile_decay, dt, horizon, seed,
            n_grid, workers, samples, p, t_eval, epsilons
        );
        self
    }
}

pub fn parse_profile(s: &str) -> Result<ProfileKind> {
    ProfileKind::parse(s).with_context(|| {
        format!(
            "unknown profile \"{s}\" (expected sharp-cutoff, smooth-rational, exponential, or identity)"
        )
    })
}

/// Comma-separated positive floats, e.g. "0.25,0.125,0.0625".
pub fn parse_eps_list(s: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for piece in s.split(',') {
        let piece = piece.trim();
        if piece.is_empty() {
            bail!("empty entry in eps list \"{s}\"");
        }
        let v: f64 = piece
            .parse()
            .with_context(|| format!("bad eps value \"{piece}\" in list \"{s}\""))?;
        out.push(v);
    }
    Ok(out)
}

pub fn load(path: &Path) -> Result<Overrides> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    parse(&text).with_context(|| format!("in config {}", path.display()))
}

fn parse(text: &str) -> Result<Overrides> {
    let mut over = Overrides::default();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("line {lineno}: expected key = value, got \"{}\"", line);
        };
        let key = key.trim();
        let value = value.trim();
        set_key(&mut over, key, value)
            .with_context(|| format!("line {lineno}: key \"{key}\""))?;
    }
    Ok(over)
}

fn set_key(over: &mut Overrides, key: &str, value: &str) -> Result<()> {
    fn num<T: FromStr>(value: &str) -> Result<T>
    where
        T::Err: Display,
    {
        value
            .parse()
            .map_err(|e| anyhow::anyhow!("cannot parse \"{value}\": {e}"))
    }
    match key {
        "L" => over.domain_len = Some(num(value)?),
        "N" => over.trunc = Some(num(value)?),
        "delta" => over.delta = Some(num(value)?),
        "sigma" => over.sigma = Some(num(value)?),
        "profile" => over.profile = Some(parse_profile(value)?),
        "eps" => over.eps = Some(num(value)?),
        "profile_decay" => over.profile_decay = Some(num(value)?),
        "dt" => over.dt = Some(num(value)?),
        "T" => over.horizon = Some(num(value)?),
        "seed" => over.seed = Some(num(value)?),
        "n_grid" => over.n_grid = Some(num(value)?),
        "workers" => over.workers = Some(num(value)?),
        "samples" => over.samples = Some(num(value)?),
        "p" => over.p = Some(num(value)?),
        "t_eval" => over.t_eval = Some(num(value)?),
        "epsilons" => over.epsilons = Some(parse_eps_list(value)?),
        _ => bail!("unknown key"),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_file_round_trip() {
        let over = parse(
            "# run setup\nL = 6.5\nN = 8   # modes\ndelta = 0.5\nsigma=2\n\nprofile = exponential\neps = 0.0625\ndt = 1e-4\nT = 0.25\nseed = 42\nepsilons = 0.5, 0.25\n",
        )
        .unwrap();
        assert_eq!(over.domain_len, Some(6.5));
        assert_eq!(over.trunc, Some(8));
        assert_eq!(over.delta, Some(0.5));
        assert_eq!(over.sigma, Some(2.0));
        assert_eq!(over.profile, Some(ProfileKind::Exponential));
        assert_eq!(over.eps, Some(0.0625));
        assert_eq!(over.dt, Some(1e-4));
        assert_eq!(over.horizon, Some(0.25));
        assert_eq!(over.seed, Some(42));
        assert_eq!(over.epsilons, Some(vec![0.5, 0.25]));
    }

    #[test]
    fn unknown_key_is_named_with_line() {
        let err = parse("L = 1\nbogus = 3\n").unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("bogus"), "{msg}");
    }

    #[test]
    fn malformed_number_is_named() {
        let err = parse("delta = banana\n").unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("delta"), "{msg}");
        assert!(msg.contains("banana"), "{msg}");
    }

    #[test]
    fn missing_equals_is_rejected() {
        assert!(parse("just words\n").is_err());
    }

    #[test]
    fn merge_prefers_the_later_layer() {
        let file = parse("N = 16\ndelta = 0.5\n").unwrap();
        let flags = Overrides {
            trunc: Some(32),
            ..Overrides::default()
        };
        let merged = file.merge(flags);
        assert_eq!(merged.trunc, Some(32));
        assert_eq!(merged.delta, Some(0.5));
    }

    #[test]
    fn eps_list_rejects_garbage() {
        assert_eq!(parse_eps_list("0.25,0.125").unwrap(), vec![0.25, 0.125]);
        assert!(parse_eps_list("0.25,,0.1").is_err());
        assert!(parse_eps_list("0.25,x").is_err());
    }
}
