//! The `name:key=value,...` mini-language shared by state and criterion
//! arguments, plus the plain-text matrix file reader.
//!
//! ```text
//! isotropic:d1=2,d2=3,p=0.4
//! theorem3:a=0.5,b=1,alpha=[1,3],beta=[1,-2]
//! ```

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;

use crate::criteria::Criterion;
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;
use crate::states::{self, StateFamily};

/// Environment variable supplying the default seed of random states.
pub const SEED_ENV: &str = "SEPDETECT_SEED";

fn perr(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

/// Split on commas that are not inside `[...]`.
fn split_top_level(s: &str) -> Result<Vec<&str>> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => {
                depth -= 1;
                if depth < 0 {
                    return Err(perr(format!("unbalanced ']' in '{s}'")));
                }
            }
            ',' if depth == 0 => {
                parts.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(perr(format!("unbalanced '[' in '{s}'")));
    }
    parts.push(&s[start..]);
    Ok(parts)
}

/// A parsed `name:key=value,...` string with raw, unconverted values.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyValues {
    pub name: String,
    values: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, rest) = match spec.split_once(':') {
            Some((n, r)) => (n.trim(), Some(r)),
            None => (spec, None),
        };
        if name.is_empty() {
            return Err(perr(format!("missing name in '{spec}'")));
        }
        let mut values = BTreeMap::new();
        if let Some(rest) = rest.filter(|r| !r.trim().is_empty()) {
            for part in split_top_level(rest)? {
                let (k, v) = part
                    .split_once('=')
                    .ok_or_else(|| perr(format!("expected key=value, got '{part}'")))?;
                let k = k.trim();
                if k.is_empty() {
                    return Err(perr(format!("empty key in '{part}'")));
                }
                if values.insert(k.to_string(), v.trim().to_string()).is_some() {
                    return Err(perr(format!("duplicate key '{k}'")));
                }
            }
        }
        Ok(Self {
            name: name.to_string(),
            values,
        })
    }

    fn check_keys(&self, allowed: &[&str]) -> Result<()> {
        for k in self.values.keys() {
            if !allowed.contains(&k.as_str()) {
                return Err(perr(format!(
                    "unknown key '{k}' for '{}' (allowed: {})",
                    self.name,
                    if allowed.is_empty() { "none".to_string() } else { allowed.join(", ") }
                )));
            }
        }
        Ok(())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn raw(&self, key: &str) -> Result<&str> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| perr(format!("'{}' needs key '{key}'", self.name)))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        parse_f64(self.raw(key)?)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        if self.contains(key) {
            self.f64(key)
        } else {
            Ok(default)
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let raw = self.raw(key)?;
        raw.parse()
            .map_err(|_| perr(format!("'{key}' must be a non-negative integer, got '{raw}'")))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        if self.contains(key) {
            self.usize(key)
        } else {
            Ok(default)
        }
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        let raw = self.raw(key)?;
        raw.parse()
            .map_err(|_| perr(format!("'{key}' must be a non-negative integer, got '{raw}'")))
    }

    /// A bracketed list `[x,y,...]`; a bare number is a length-1 vector.
    pub fn vector(&self, key: &str) -> Result<Vec<f64>> {
        let raw = self.raw(key)?;
        let inner = match raw.strip_prefix('[') {
            Some(r) => r
                .strip_suffix(']')
                .ok_or_else(|| perr(format!("unterminated vector '{raw}'")))?,
            None => raw,
        };
        if inner.trim().is_empty() {
            return Err(perr(format!("empty vector for '{key}'")));
        }
        inner.split(',').map(|x| parse_f64(x.trim())).collect()
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| perr(format!("not a number: '{s}'")))?;
    if !v.is_finite() {
        return Err(perr(format!("not a finite number: '{s}'")));
    }
    Ok(v)
}

fn default_seed() -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| perr(format!("{SEED_ENV} must be an unsigned integer, got '{v}'"))),
        Err(_) => Ok(0),
    }
}

/// State kinds accepted by [`StateSpec`], with their keys.
const STATE_KINDS: &[(&str, &[&str])] = &[
    ("isotropic", &["d1", "d2", "p"]),
    ("horodecki", &["x", "q"]),
    ("bound2x4", &["d", "x"]),
    ("ex2", &["p"]),
    ("ex4", &["a1", "a2", "a3"]),
    ("mixed", &["M", "N"]),
    ("random", &["M", "N", "rank", "seed"]),
    ("separable", &["M", "N", "terms", "seed"]),
];

/// A parsed, not yet evaluated, state description.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpec {
    kv: KeyValues,
}

impl StateSpec {
    pub fn parse(spec: &str) -> Result<Self> {
        let kv = KeyValues::parse(spec)?;
        if kv.name == "file" {
            return Err(perr("file states need the matrix dimensions; use read_state_file"));
        }
        let keys = STATE_KINDS
            .iter()
            .find(|(n, _)| *n == kv.name)
            .map(|(_, k)| *k)
            .ok_or_else(|| {
                let names: Vec<&str> = STATE_KINDS.iter().map(|(n, _)| *n).collect();
                perr(format!("unknown state '{}' (known: {}, file)", kv.name, names.join(", ")))
            })?;
        kv.check_keys(keys)?;
        Ok(Self { kv })
    }

    pub fn name(&self) -> &str {
        &self.kv.name
    }

    pub fn build(&self) -> Result<DensityMatrix> {
        Self::build_from(&self.kv, None)
    }

    fn build_from(kv: &KeyValues, free: Option<(&str, f64)>) -> Result<DensityMatrix> {
        let get = |k: &str| match free {
            Some((name, v)) if name == k => Ok(v),
            _ => kv.f64(k),
        };
        match kv.name.as_str() {
            "isotropic" => states::isotropic(kv.usize("d1")?, kv.usize("d2")?, get("p")?),
            "horodecki" => states::horodecki_mixture(get("x")?, match free {
                Some(("q", v)) => v,
                _ => kv.f64_or("q", 1.0)?,
            }),
            "bound2x4" => states::bound_2x4_mixture(get("d")?, match free {
                Some(("x", v)) => v,
                _ => kv.f64_or("x", 0.0)?,
            }),
            "ex2" => states::two_qubit_ex2(get("p")?),
            "ex4" => states::two_qubit_ex4(get("a1")?, get("a2")?, get("a3")?),
            "mixed" => states::maximally_mixed(kv.usize("M")?, kv.usize("N")?),
            "random" => {
                let (m, n) = (kv.usize("M")?, kv.usize("N")?);
                let seed = if kv.contains("seed") { kv.u64("seed")? } else { default_seed()? };
                states::random_density(m, n, kv.usize_or("rank", m * n)?, seed)
            }
            "separable" => {
                let (m, n) = (kv.usize("M")?, kv.usize("N")?);
                let seed = if kv.contains("seed") { kv.u64("seed")? } else { default_seed()? };
                states::random_separable(m, n, kv.usize_or("terms", 4)?, seed)
            }
            other => Err(perr(format!("unknown state '{other}'"))),
        }
    }

    /// Turn the spec into a one-parameter family over `param`, which must be
    /// a real-valued key of this state kind and must not be fixed already.
    pub fn family(&self, param: &str) -> Result<StateFamily> {
        let domain = match (self.kv.name.as_str(), param) {
            ("isotropic", "p") | ("ex2", "p") | ("horodecki", "q") | ("bound2x4", "x") => (0.0, 1.0),
            ("horodecki", "x") | ("bound2x4", "d") => (0.0, 1.0),
            ("ex4", "a1" | "a2" | "a3") => (-1.0, 1.0),
            (kind, p) => return Err(perr(format!("'{p}' is not a scannable parameter of '{kind}'"))),
        };
        if self.kv.contains(param) {
            return Err(perr(format!(
                "'{param}' is the scan parameter; do not fix it in the state spec"
            )));
        }
        let kv = self.kv.clone();
        let param_owned = param.to_string();
        // check the fixed part once, at a point inside the domain
        let probe = 0.5 * (domain.0 + domain.1);
        if let Err(e) = Self::build_from(&kv, Some((param, probe))) {
            if matches!(e, Error::Parse(_)) {
                return Err(e);
            }
        }
        Ok(StateFamily::new(
            format!("{}[{}]", describe(&self.kv), param),
            param,
            domain,
            move |v| Self::build_from(&kv, Some((param_owned.as_str(), v))),
        ))
    }
}

fn describe(kv: &KeyValues) -> String {
    if kv.values.is_empty() {
        return kv.name.clone();
    }
    let parts: Vec<String> = kv.values.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{}:{}", kv.name, parts.join(","))
}

pub fn parse_state(spec: &str) -> Result<DensityMatrix> {
    StateSpec::parse(spec)?.build()
}

pub fn parse_criterion(spec: &str) -> Result<Criterion> {
    let kv = KeyValues::parse(spec)?;
    let c = match kv.name.as_str() {
        "devicente" => {
            kv.check_keys(&[])?;
            Criterion::DeVicente
        }
        "enhanced" => {
            kv.check_keys(&[])?;
            Criterion::EnhancedTPrime
        }
        "ppt" => {
            kv.check_keys(&[])?;
            Criterion::Ppt
        }
        "realignment" => {
            kv.check_keys(&[])?;
            Criterion::Realignment
        }
        "shen" => {
            kv.check_keys(&["m", "a", "b"])?;
            Criterion::Shen {
                m: kv.usize_or("m", 1)?,
                a: kv.f64("a")?,
                b: kv.f64("b")?,
            }
        }
        "theorem1" => {
            kv.check_keys(&["alpha", "beta"])?;
            Criterion::Theorem1 {
                alpha: kv.vector("alpha")?,
                beta: kv.vector("beta")?,
            }
        }
        "corollary2" => {
            kv.check_keys(&["a", "b"])?;
            Criterion::Corollary2 {
                a: kv.f64("a")?,
                b: kv.f64("b")?,
            }
        }
        "theorem2" => {
            kv.check_keys(&["a"])?;
            Criterion::Theorem2 { a: kv.f64("a")? }
        }
        "theorem3" => {
            kv.check_keys(&["a", "b", "alpha", "beta"])?;
            Criterion::Theorem3 {
                a: kv.f64("a")?,
                b: kv.f64("b")?,
                alpha: kv.vector("alpha")?,
                beta: kv.vector("beta")?,
            }
        }
        other => {
            return Err(perr(format!(
                "unknown criterion '{other}' (known: devicente, enhanced, shen, theorem1, \
                 corollary2, theorem2, theorem3, ppt, realignment)"
            )))
        }
    };
    Ok(c)
}

/// Parse `M,N`.
pub fn parse_dims(s: &str) -> Result<(usize, usize)> {
    let (m, n) = s
        .split_once(',')
        .ok_or_else(|| perr(format!("dims must look like 'M,N', got '{s}'")))?;
    let p = |x: &str| {
        x.trim()
            .parse::<usize>()
            .map_err(|_| perr(format!("bad dimension '{x}'")))
    };
    Ok((p(m)?, p(n)?))
}

/// Read a density matrix from text: one row per line, whitespace-separated
/// entries such as `0.5`, `0.25-0.1i`, `1e-3+2e-4i`. Blank lines and lines
/// starting with `#` are skipped.
pub fn parse_matrix_text(text: &str) -> Result<ComplexMatrix> {
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                Complex64::from_str(tok)
                    .map_err(|_| perr(format!("line {}: bad complex entry '{tok}'", lineno + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(perr("matrix file is empty"));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(perr(format!("row {} has {} entries, expected {n}", i + 1, r.len())));
    }
    Ok(ComplexMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn read_state_file(path: &Path, m: usize, n: usize) -> Result<DensityMatrix> {
    let text = std::fs::read_to_string(path)?;
    DensityMatrix::new(parse_matrix_text(&text)?, m, n)
}

/// Resolve a `--state` argument, including `file:<path>` with `dims`.
pub fn resolve_state(spec: &str, dims: Option<(usize, usize)>) -> Result<DensityMatrix> {
    if let Some(path) = spec.trim().strip_prefix("file:") {
        let (m, n) = dims.ok_or_else(|| perr("file states need --dims M,N"))?;
        return read_state_file(Path::new(path), m, n);
    }
    parse_state(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_respects_brackets() {
        assert_eq!(
            split_top_level("a=1,alpha=[1,2],b=3").unwrap(),
            vec!["a=1", "alpha=[1,2]", "b=3"]
        );
        assert!(split_top_level("alpha=[1,2").is_err());
        assert!(split_top_level("alpha=1,2]").is_err());
    }

    #[test]
    fn key_values() {
        let kv = KeyValues::parse("theorem1:alpha=[0.5, 0.5],beta=1").unwrap();
        assert_eq!(kv.name, "theorem1");
        assert_eq!(kv.vector("alpha").unwrap(), vec![0.5, 0.5]);
        assert_eq!(kv.vector("beta").unwrap(), vec![1.0]);
        assert!(KeyValues::parse("x:a=1,a=2").is_err());
        assert!(KeyValues::parse(":a=1").is_err());
        assert!(KeyValues::parse("x:a").is_err());
        assert_eq!(KeyValues::parse("ppt").unwrap().name, "ppt");
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn criteria_parse() {
        assert_eq!(parse_criterion("ppt").unwrap(), Criterion::Ppt);
        assert_eq!(parse_criterion("devicente").unwrap(), Criterion::DeVicente);
        assert_eq!(
            parse_criterion("corollary2:a=1.41421356,b=2.44948975").unwrap(),
            Criterion::Corollary2 {
                a: 1.41421356,
                b: 2.44948975
            }
        );
        assert_eq!(
            parse_criterion("theorem3:a=0.08333333,b=0.16666667,alpha=[0.125,0.125],beta=[0.125]").unwrap(),
            Criterion::Theorem3 {
                a: 0.08333333,
                b: 0.16666667,
                alpha: vec![0.125, 0.125],
                beta: vec![0.125]
            }
        );
        assert_eq!(
            parse_criterion("shen:a=1,b=2").unwrap(),
            Criterion::Shen { m: 1, a: 1.0, b: 2.0 }
        );
        assert!(parse_criterion("ppt:a=1").is_err());
        assert!(parse_criterion("theorem2:a=1,b=2").is_err());
        assert!(parse_criterion("theorem2").is_err());
        assert!(parse_criterion("corollary2:a=x,b=1").is_err());
        assert!(parse_criterion("nonsense").is_err());
        assert!(parse_criterion("theorem1:alpha=[],beta=[1]").is_err());
    }

    #[test]
    fn criteria_display_parses_back() {
        for spec in [
            "theorem1:alpha=[0.28867513,0.28867513],beta=[1,0]",
            "theorem3:a=0.4082,b=1,alpha=[1,3],beta=[1,-2]",
            "shen:m=3,a=0.5,b=0.25",
            "theorem2:a=-1.5",
            "realignment",
        ] {
            let c = parse_criterion(spec).unwrap();
            assert_eq!(parse_criterion(&c.to_string()).unwrap(), c);
        }
    }

    #[test]
    fn state_examples_parse_and_validate() {
        for spec in [
            "isotropic:d1=2,d2=3,p=0.4",
            "horodecki:x=0.9,q=0.99",
            "bound2x4:d=0.9,x=0.3",
            "ex2:p=0.7",
            "ex4:a1=0.1,a2=0.3,a3=0.2",
            "random:M=3,N=3,rank=9,seed=42",
            "separable:M=2,N=3,terms=5,seed=1",
            "mixed:M=2,N=2",
        ] {
            let rho = parse_state(spec).unwrap_or_else(|e| panic!("{spec}: {e}"));
            assert!(rho.min_eigenvalue().unwrap() > -1e-8, "{spec}");
            let again = DensityMatrix::new(rho.matrix().clone(), rho.dims().0, rho.dims().1);
            assert!(again.is_ok());
        }
    }

    #[test]
    fn state_errors() {
        assert!(parse_state("isotropic:d1=2,d2=3").is_err());
        assert!(parse_state("isotropic:d1=2,d2=3,p=0.4,z=1").is_err());
        assert!(parse_state("isotropic:d1=2.5,d2=3,p=0.4").is_err());
        assert!(parse_state("werner:p=0.1").is_err());
        assert!(parse_state("horodecki:x=1.2").is_err());
        assert!(parse_state("file:/tmp/x").is_err());
    }

    #[test]
    fn families() {
        let spec = StateSpec::parse("bound2x4:d=0.9").unwrap();
        let fam = spec.family("x").unwrap();
        assert_eq!(fam.param(), "x");
        let rho = fam.eval(0.3).unwrap();
        let direct = states::bound_2x4_mixture(0.9, 0.3).unwrap();
        assert_eq!(rho, direct);

        assert!(spec.family("p").is_err());
        assert!(StateSpec::parse("bound2x4:d=0.9,x=0.2").unwrap().family("x").is_err());
        assert!(StateSpec::parse("random:M=2,N=2").unwrap().family("M").is_err());

        let fam = StateSpec::parse("isotropic:d1=2,d2=3").unwrap().family("p").unwrap();
        assert_eq!(fam.eval(0.25).unwrap(), states::isotropic(2, 3, 0.25).unwrap());
        assert!(StateSpec::parse("isotropic:d2=3").unwrap().family("p").is_err());
    }

    #[test]
    fn matrix_text() {
        let m = parse_matrix_text("# bell\n0.5 0 0 0.5\n0 0 0 0\n0 0 0 0\n0.5 0 0 0.5\n").unwrap();
        assert_eq!(m.shape(), (4, 4));
        assert_eq!(m[(0, 3)], Complex64::new(0.5, 0.0));

        let m = parse_matrix_text("0.5 0.1-0.2i\n0.1+0.2i 0.5").unwrap();
        assert_eq!(m[(0, 1)], Complex64::new(0.1, -0.2));
        assert_eq!(m[(1, 0)], Complex64::new(0.1, 0.2));

        assert!(parse_matrix_text("1 2\n3").is_err());
        assert!(parse_matrix_text("").is_err());
        assert!(parse_matrix_text("1 abc\n0 1").is_err());
    }

    #[test]
    fn dims() {
        assert_eq!(parse_dims("2,3").unwrap(), (2, 3));
        assert!(parse_dims("2").is_err());
        assert!(parse_dims("2,x").is_err());
    }
}
