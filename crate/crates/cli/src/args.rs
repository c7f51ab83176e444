//! Parsers for flag values.

use std::f64::consts::PI;
use std::path::Path;

use anyhow::{bail, Context, Result};
use spamsep::analysis::Benchmark;
use spamsep::characterize::Protocol;
use spamsep::sim::Mode;
use spamsep::{Circuit, NoiseModel};

/// `--shots`: a positive integer or `exact`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    Exact,
    Sampled(u64),
}

impl Shots {
    pub fn mode(self, seed: u64) -> Mode {
        match self {
            Shots::Exact => Mode::Exact,
            Shots::Sampled(shots) => Mode::Shots { shots, seed },
        }
    }
}

pub fn parse_shots(s: &str) -> Result<Shots, String> {
    if s.eq_ignore_ascii_case("exact") {
        return Ok(Shots::Exact);
    }
    let n = parse_count(s)?;
    if n == 0 {
        return Err("shots must be positive".into());
    }
    Ok(Shots::Sampled(n))
}

/// Integer that may be written in scientific notation, e.g. `6e5`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let v: f64 = s.parse().map_err(|_| format!("not a count: {s}"))?;
    if v < 0.0 || v.fract() != 0.0 || v > u64::MAX as f64 {
        return Err(format!("not a count: {s}"));
    }
    Ok(v as u64)
}

/// A number, optionally a multiple or fraction of `pi`: `0.3`, `pi`,
/// `2pi/5`, `pi/10`, `-0.5*pi`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let Some(pos) = s.find("pi") else {
        return s.parse().map_err(|_| format!("not an angle: {s}"));
    };
    let head = s[..pos].trim_end_matches('*').trim();
    let tail = s[pos + 2..].trim();
    let factor = match head {
        "" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| format!("not an angle: {s}"))?,
    };
    let divisor = match tail.strip_prefix('/') {
        None if tail.is_empty() => 1.0,
        None => return Err(format!("not an angle: {s}")),
        Some(d) => d.trim().parse::<f64>().map_err(|_| format!("not an angle: {s}"))?,
    };
    Ok(factor * PI / divisor)
}

/// `--theta`: a comma-separated list of angles or `linspace:START:STOP:N`.
pub fn parse_thetas(s: &str) -> Result<Vec<f64>, String> {
    if let Some(spec) = s.strip_prefix("linspace:") {
        let parts: Vec<&str> = spec.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err("linspace needs START:STOP:N".into());
        };
        let (a, b) = (parse_angle(a)?, parse_angle(b)?);
        let n: usize = n.parse().map_err(|_| format!("bad point count: {n}"))?;
        return match n {
            0 => Err("linspace needs at least one point".into()),
            1 => Ok(vec![a]),
            _ => Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()),
        };
    }
    s.split(',').map(parse_angle).collect()
}

/// `--pairs`: `T:A` entries separated by commas. An empty string is an
/// empty plan.
pub fn parse_pairs(s: &str) -> Result<Vec<(usize, usize)>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (t, a) = p.split_once(':').ok_or_else(|| format!("pair must be T:A, got {p}"))?;
            let t = t.parse().map_err(|_| format!("bad qubit index: {t}"))?;
            let a = a.parse().map_err(|_| format!("bad qubit index: {a}"))?;
            Ok((t, a))
        })
        .collect()
}

pub fn parse_folds(s: &str) -> Result<Vec<u32>, String> {
    s.split(',')
        .map(|f| f.trim().parse().map_err(|_| format!("bad fold count: {f}")))
        .collect()
}

pub fn parse_floats<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse().map_err(|_| format!("not a number: {x}")))
        .collect::<Result<_, _>>()?;
    v.try_into().map_err(|_| format!("expected {N} comma-separated numbers"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ProtocolArg {
    Plain,
    NoisyCnot,
    Zne,
}

impl ProtocolArg {
    pub fn protocol(self, folds: Option<Vec<u32>>) -> Protocol {
        match self {
            ProtocolArg::Plain => Protocol::Plain,
            ProtocolArg::NoisyCnot => Protocol::NoisyCnot,
            ProtocolArg::Zne => match folds {
                Some(folds) => Protocol::Zne { folds },
                None => Protocol::zne_default(),
            },
        }
    }
}

/// `--circuit`: a circuit file or one of the built-in benchmarks.
#[derive(Debug, Clone, PartialEq)]
pub enum CircuitArg {
    Builtin(Benchmark),
    File(std::path::PathBuf),
}

pub fn parse_circuit(s: &str) -> Result<CircuitArg, String> {
    match s {
        "builtin:2q" => Ok(CircuitArg::Builtin(Benchmark::TwoQubit)),
        "builtin:4q" => Ok(CircuitArg::Builtin(Benchmark::FourQubit)),
        b if b.starts_with("builtin:") => Err(format!("unknown built-in circuit {b}; use builtin:2q or builtin:4q")),
        path => Ok(CircuitArg::File(path.into())),
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn load_noise(path: &Path) -> Result<NoiseModel> {
    let noise: NoiseModel = read_json(path)?;
    noise.validate().with_context(|| format!("noise model {}", path.display()))?;
    if noise.n_qubits() == 0 {
        bail!("noise model {} has no qubits", path.display());
    }
    Ok(noise)
}

pub fn load_circuit(path: &Path) -> Result<Circuit> {
    read_json(path)
}
