//! File loading: observable text in two formats, amplitude files, and the
//! named preparation states.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;
use pauliplan::{singlet_prep_circuit, NoiseModel, Observable, PauliString, QuantumState};
use serde::Serialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    /// One `<coefficient> <pauli word>` per line.
    Native,
    /// Alternating lines: a pauli word, then its coefficient.
    Legacy,
}

impl InputFormat {
    pub fn name(self) -> &'static str {
        match self {
            InputFormat::Native => "native",
            InputFormat::Legacy => "legacy",
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

pub fn load_observable(path: &Path, format: InputFormat) -> Result<Observable, CliError> {
    let text = read_text(path)?;
    let parsed = match format {
        InputFormat::Native => Observable::parse(&text).map_err(|e| e.to_string()),
        InputFormat::Legacy => parse_legacy(&text),
    };
    parsed.map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

/// Alternating-line format: a pauli word line, then a coefficient line that
/// is a bare real or a `(re,im)` pair whose imaginary part must vanish.
fn parse_legacy(text: &str) -> Result<Observable, String> {
    let mut terms: Vec<(f64, PauliString)> = Vec::new();
    let mut pending: Option<(usize, PauliString)> = None;
    let mut expected_len = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        match pending.take() {
            None => {
                let word = PauliString::from_str(content)
                    .map_err(|_| format!("line {line}: expected a pauli word, got {content:?}"))?;
                let expected = *expected_len.get_or_insert(word.len());
                if word.len() != expected {
                    return Err(format!(
                        "line {line}: pauli word has length {}, expected {expected}",
                        word.len()
                    ));
                }
                pending = Some((line, word));
            }
            Some((_, word)) => {
                let coeff = parse_legacy_coefficient(content)
                    .ok_or_else(|| format!("line {line}: invalid coefficient {content:?}"))?;
                terms.push((coeff, word));
            }
        }
    }
    if let Some((line, _)) = pending {
        return Err(format!("line {line}: pauli word has no coefficient line"));
    }
    if terms.is_empty() {
        return Err("no terms found".into());
    }
    Ok(Observable::from_terms(terms))
}

fn parse_legacy_coefficient(token: &str) -> Option<f64> {
    let (re, im): (f64, f64) = match token.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
        Some(pair) => {
            let (re, im) = pair.split_once(',')?;
            (re.trim().parse().ok()?, im.trim().parse().ok()?)
        }
        None => (token.parse().ok()?, 0.0),
    };
    (re.is_finite() && im.abs() <= 1e-10).then_some(re)
}

/// State named on the command line. The singlet runs its preparation circuit
/// under the active noise model; the other two are taken as given.
#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Singlet,
    Zeros,
    File(PathBuf),
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Singlet => f.write_str("singlet"),
            StateSpec::Zeros => f.write_str("zeros"),
            StateSpec::File(path) => write!(f, "file:{}", path.display()),
        }
    }
}

impl Serialize for StateSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub fn parse_state_spec(s: &str) -> Result<StateSpec, String> {
    match s {
        "singlet" => Ok(StateSpec::Singlet),
        "zeros" => Ok(StateSpec::Zeros),
        _ => match s.strip_prefix("file:") {
            Some(path) if !path.is_empty() => Ok(StateSpec::File(PathBuf::from(path))),
            _ => Err("expected singlet, zeros, or file:PATH".into()),
        },
    }
}

pub fn prepare_state(
    spec: &StateSpec,
    qubits: usize,
    noise: Option<&NoiseModel>,
) -> Result<QuantumState, CliError> {
    match spec {
        StateSpec::Zeros => Ok(QuantumState::zero(qubits)?),
        StateSpec::Singlet => {
            if qubits != 2 {
                return Err(CliError::Config(format!(
                    "the singlet state needs a 2-qubit observable, got {qubits} qubits"
                )));
            }
            Ok(QuantumState::zero(2)?.apply_circuit(&singlet_prep_circuit(), noise)?)
        }
        StateSpec::File(path) => {
            let text = read_text(path)?;
            let amps = parse_amplitudes(&text)
                .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
            if amps.len() != 1usize << qubits {
                return Err(CliError::Config(format!(
                    "state file {} holds {} amplitudes, observable needs {}",
                    path.display(),
                    amps.len(),
                    1usize << qubits
                )));
            }
            Ok(QuantumState::normalized(amps)?)
        }
    }
}

/// One amplitude per line as `re` or `re im`; `#` starts a comment.
fn parse_amplitudes(text: &str) -> Result<Vec<Complex64>, String> {
    let mut amps = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let amp = match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(re), None, None) => re.parse().map(|re| Complex64::new(re, 0.0)),
            (Some(re), Some(im), None) => re
                .parse()
                .and_then(|re| im.parse().map(|im| Complex64::new(re, im))),
            _ => return Err(format!("line {line}: expected `re` or `re im`")),
        };
        match amp {
            Ok(a) if a.re.is_finite() && a.im.is_finite() => amps.push(a),
            _ => return Err(format!("line {line}: invalid amplitude {content:?}")),
        }
    }
    if amps.is_empty() {
        return Err("no amplitudes found".into());
    }
    Ok(amps)
}
