//! Plain-text network snapshots.
//!
//! ```text
//! gwrnet-network 1
//! kind gwr                      # or `pgwr`
//! match_dim 2
//! weight_dim 2
//! ...                           # kind-specific header keys, then every GwrParams field
//! next_id 5
//! train_steps 123
//! neurons 3
//! n <id> <firing> <w_0> ... <w_k> [| <out_0> ... <out_m>]
//! edges 2
//! e <a> <b> <age>
//! end
//! ```
//!
//! Reals are written with the shortest decimal representation that parses
//! back to the identical `f64`, so a save/load cycle is bit exact for `f64`
//! and `f32` networks alike. Lines starting with `#` are comments.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::engine::{Edge, Engine, Neuron, NeuronId};
use crate::error::{GwrError, Result};
use crate::params::GwrParams;
use crate::scalar::Scalar;

pub const NETWORK_FORMAT: &str = "gwrnet-network";
pub const NETWORK_FORMAT_VERSION: u32 = 1;

/// Exact textual encoding of a real value.
pub fn format_real<T: Scalar>(x: T) -> String {
    format!("{:?}", x.to_f64_lossless())
}

pub fn parse_real<T: Scalar>(token: &str) -> Option<T> {
    let v: f64 = token.parse().ok()?;
    let t = T::from_f64(v)?;
    (t.is_finite() && t.to_f64_lossless() == v).then_some(t)
}

/// Line cursor that remembers line numbers for error messages and skips
/// blank and comment lines.
pub(crate) struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
            line: 0,
        }
    }

    pub(crate) fn error(&self, message: impl Into<String>) -> GwrError {
        GwrError::Parse {
            line: self.line,
            message: message.into(),
        }
    }

    pub(crate) fn next_line(&mut self) -> Result<&'a str> {
        for (i, raw) in self.inner.by_ref() {
            self.line = i + 1;
            let line = raw.trim();
            if !line.is_empty() && !line.starts_with('#') {
                return Ok(line);
            }
        }
        Err(self.error("unexpected end of input"))
    }

    pub(crate) fn peek_done(&self) -> bool {
        self.inner
            .clone()
            .all(|(_, l)| l.trim().is_empty() || l.trim().starts_with('#'))
    }

    /// Reads a `key value` line and returns the value.
    pub(crate) fn keyed(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next_line()?;
        match line.split_once(char::is_whitespace) {
            Some((k, v)) if k == key => Ok(v.trim()),
            _ if line == key => Err(self.error(format!("missing value for `{key}`"))),
            _ => Err(self.error(format!("expected `{key}`, found `{line}`"))),
        }
    }

    pub(crate) fn keyed_parse<V: std::str::FromStr>(&mut self, key: &str) -> Result<V> {
        let v = self.keyed(key)?;
        v.parse()
            .map_err(|_| self.error(format!("invalid value `{v}` for `{key}`")))
    }
}

fn write_params(out: &mut String, p: &GwrParams) {
    let reals = [
        ("activation_threshold", p.activation_threshold),
        ("firing_threshold", p.firing_threshold),
        ("learning_rate_bmu", p.learning_rate_bmu),
        ("learning_rate_neighbor", p.learning_rate_neighbor),
        ("firing_rho_bmu", p.firing_rho_bmu),
        ("firing_rho_neighbor", p.firing_rho_neighbor),
        ("firing_kappa", p.firing_kappa),
    ];
    for (k, v) in reals {
        let _ = writeln!(out, "{k} {}", format_real(v));
    }
    let _ = writeln!(out, "max_edge_age {}", p.max_edge_age);
    let _ = writeln!(out, "max_epochs {}", p.max_epochs);
    match p.max_neurons {
        Some(n) => {
            let _ = writeln!(out, "max_neurons {n}");
        }
        None => out.push_str("max_neurons none\n"),
    }
}

fn read_params(lines: &mut Lines<'_>) -> Result<GwrParams> {
    let real = |lines: &mut Lines<'_>, key: &str| -> Result<f64> {
        let v = lines.keyed(key)?;
        parse_real::<f64>(v).ok_or_else(|| lines.error(format!("invalid real `{v}` for `{key}`")))
    };
    let activation_threshold = real(lines, "activation_threshold")?;
    let firing_threshold = real(lines, "firing_threshold")?;
    let learning_rate_bmu = real(lines, "learning_rate_bmu")?;
    let learning_rate_neighbor = real(lines, "learning_rate_neighbor")?;
    let firing_rho_bmu = real(lines, "firing_rho_bmu")?;
    let firing_rho_neighbor = real(lines, "firing_rho_neighbor")?;
    let firing_kappa = real(lines, "firing_kappa")?;
    let max_edge_age = lines.keyed_parse("max_edge_age")?;
    let max_epochs = lines.keyed_parse("max_epochs")?;
    let max_neurons = match lines.keyed("max_neurons")? {
        "none" => None,
        v => Some(
            v.parse()
                .map_err(|_| lines.error(format!("invalid max_neurons `{v}`")))?,
        ),
    };
    Ok(GwrParams {
        activation_threshold,
        firing_threshold,
        learning_rate_bmu,
        learning_rate_neighbor,
        firing_rho_bmu,
        firing_rho_neighbor,
        firing_kappa,
        max_edge_age,
        max_epochs,
        max_neurons,
    })
}

/// Serializes `engine`; `extra` header keys follow the dimensions.
pub(crate) fn write_engine<T: Scalar>(
    out: &mut String,
    kind: &str,
    extra: &[(&str, String)],
    engine: &Engine<T>,
) {
    let _ = writeln!(out, "{NETWORK_FORMAT} {NETWORK_FORMAT_VERSION}");
    let _ = writeln!(out, "kind {kind}");
    let _ = writeln!(out, "match_dim {}", engine.match_dim());
    let _ = writeln!(out, "weight_dim {}", engine.weight_dim());
    for (k, v) in extra {
        let _ = writeln!(out, "{k} {v}");
    }
    write_params(out, engine.params());
    let _ = writeln!(out, "next_id {}", engine.next_id());
    let _ = writeln!(out, "train_steps {}", engine.steps());
    let _ = writeln!(out, "neurons {}", engine.neurons().len());
    let split = engine.match_dim();
    let has_output = split < engine.weight_dim();
    for n in engine.neurons() {
        let _ = write!(out, "n {} {}", n.id, format_real(n.firing));
        for (i, w) in n.weight.iter().enumerate() {
            if has_output && i == split {
                out.push_str(" |");
            }
            let _ = write!(out, " {}", format_real(*w));
        }
        out.push('\n');
    }
    let _ = writeln!(out, "edges {}", engine.edge_count());
    for e in engine.edges() {
        let _ = writeln!(out, "e {} {} {}", e.a, e.b, e.age);
    }
    out.push_str("end\n");
}

/// Parses one network block. `extra_keys` are read, in order, after the
/// dimensions and returned by name.
pub(crate) fn read_engine<T: Scalar>(
    lines: &mut Lines<'_>,
    kind: &str,
    extra_keys: &[&str],
) -> Result<(Engine<T>, BTreeMap<String, String>)> {
    let magic = lines.next_line()?;
    let expected = format!("{NETWORK_FORMAT} {NETWORK_FORMAT_VERSION}");
    if magic != expected {
        return Err(lines.error(format!("expected `{expected}`, found `{magic}`")));
    }
    let found = lines.keyed("kind")?;
    if found != kind {
        return Err(lines.error(format!("expected network kind `{kind}`, found `{found}`")));
    }
    let match_dim: usize = lines.keyed_parse("match_dim")?;
    let weight_dim: usize = lines.keyed_parse("weight_dim")?;
    let mut extra = BTreeMap::new();
    for k in extra_keys {
        extra.insert(k.to_string(), lines.keyed(k)?.to_string());
    }
    let params = read_params(lines)?;
    let next_id: NeuronId = lines.keyed_parse("next_id")?;
    let steps: u64 = lines.keyed_parse("train_steps")?;
    let count: usize = lines.keyed_parse("neurons")?;
    let mut neurons = Vec::with_capacity(count);
    for _ in 0..count {
        let line = lines.next_line()?;
        let mut tokens = line.split_whitespace();
        if tokens.next() != Some("n") {
            return Err(lines.error(format!("expected neuron record, found `{line}`")));
        }
        let id = tokens
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| lines.error("invalid neuron id"))?;
        let firing = tokens
            .next()
            .and_then(parse_real::<T>)
            .ok_or_else(|| lines.error("invalid firing value"))?;
        let mut weight = Vec::with_capacity(weight_dim);
        for (pos, t) in tokens.enumerate() {
            if t == "|" {
                if weight.len() != match_dim || pos != match_dim {
                    return Err(lines.error("output separator at the wrong position"));
                }
                continue;
            }
            weight.push(parse_real::<T>(t).ok_or_else(|| lines.error(format!("invalid weight `{t}`")))?);
        }
        if weight.len() != weight_dim {
            return Err(lines.error(format!(
                "neuron {id} has {} weights, expected {weight_dim}",
                weight.len()
            )));
        }
        neurons.push(Neuron { id, weight, firing });
    }
    let count: usize = lines.keyed_parse("edges")?;
    let mut edges = Vec::with_capacity(count);
    for _ in 0..count {
        let line = lines.next_line()?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parsed = match fields.as_slice() {
            ["e", a, b, age] => a
                .parse()
                .ok()
                .zip(b.parse().ok())
                .zip(age.parse().ok())
                .map(|((a, b), age)| Edge { a, b, age }),
            _ => None,
        };
        edges.push(parsed.ok_or_else(|| lines.error(format!("invalid edge record `{line}`")))?);
    }
    let end = lines.next_line()?;
    if end != "end" {
        return Err(lines.error(format!("expected `end`, found `{end}`")));
    }
    let line = lines.line;
    let engine = Engine::from_parts(match_dim, weight_dim, params, neurons, edges, next_id, steps)
        .map_err(|e| GwrError::Parse {
            line,
            message: e.to_string(),
        })?;
    Ok((engine, extra))
}
