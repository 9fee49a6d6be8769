//! Plain-text serialisation of a fitted model.
//!
//! ```text
//! pucell-model 1
//! kernel <gaussian|wendland> <shape>
//! policy <error|nearest>
//! radius <r>
//! nodes <n>
//! <x> <y> <f>                      (n lines)
//! subdomains <d>
//! <cx> <cy> <m> <i_1..i_m> <c_1..c_m>  (d lines; m = 0 for an empty subdomain)
//! ```
//!
//! Numbers are written with Rust's shortest round-trip formatting, so a
//! saved model reloads bit-for-bit.

use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, KernelSpec};
use crate::point::Point2;
use crate::pu_model::{FitOptions, LocalInterpolant, PuModel, UncoveredPolicy};
use crate::scalar::Scalar;

const MAGIC: &str = "pucell-model 1";

pub fn policy_name(p: UncoveredPolicy) -> &'static str {
    match p {
        UncoveredPolicy::Error => "error",
        UncoveredPolicy::NearestLocal => "nearest",
    }
}

pub fn parse_policy(s: &str) -> Result<UncoveredPolicy> {
    match s {
        "error" => Ok(UncoveredPolicy::Error),
        "nearest" => Ok(UncoveredPolicy::NearestLocal),
        other => Err(Error::invalid(format!("unknown uncovered-point policy `{other}`"))),
    }
}

pub fn write_model<T: Scalar, W: Write>(model: &PuModel<T>, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "kernel {} {}", model.kernel().family(), model.kernel().shape())?;
    writeln!(w, "policy {}", policy_name(model.options().policy))?;
    writeln!(w, "radius {}", model.radius())?;
    writeln!(w, "nodes {}", model.nodes().len())?;
    for (p, f) in model.nodes().iter().zip(model.values()) {
        writeln!(w, "{} {} {}", p.x, p.y, f)?;
    }
    writeln!(w, "subdomains {}", model.locals().len())?;
    for local in model.locals() {
        write!(w, "{} {} {}", local.center.x, local.center.y, local.size())?;
        if local.is_fitted() {
            for i in &local.node_indices {
                write!(w, " {i}")?;
            }
            for c in &local.coeffs {
                write!(w, " {c}")?;
            }
        }
        writeln!(w)?;
    }
    w.flush()
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::ModelFormat {
            line: self.line,
            message: message.into(),
        }
    }

    fn next(&mut self) -> Result<String> {
        self.line += 1;
        match self.inner.next() {
            Some(Ok(l)) => Ok(l),
            Some(Err(e)) => Err(Error::Io(e.to_string())),
            None => Err(self.err("unexpected end of file")),
        }
    }

    /// Reads a `keyword value...` line and returns the values.
    fn keyed(&mut self, keyword: &str) -> Result<Vec<String>> {
        let l = self.next()?;
        let mut it = l.split_whitespace();
        if it.next() != Some(keyword) {
            return Err(self.err(format!("expected `{keyword}`")));
        }
        Ok(it.map(str::to_owned).collect())
    }

    fn parse<V: FromStr>(&self, tok: &str) -> Result<V> {
        tok.parse().map_err(|_| self.err(format!("cannot parse `{tok}`")))
    }
}

pub fn read_model<T: Scalar, R: BufRead>(r: R) -> Result<PuModel<T>> {
    let mut lines = Lines {
        inner: r.lines(),
        line: 0,
    };
    if lines.next()?.trim() != MAGIC {
        return Err(lines.err(format!("expected header `{MAGIC}`")));
    }
    let kernel = match lines.keyed("kernel")?.as_slice() {
        [family, shape] => {
            let family: KernelFamily = family.parse().map_err(|e: Error| lines.err(e.to_string()))?;
            KernelSpec::new(family, lines.parse(shape)?).map_err(|e| lines.err(e.to_string()))?
        }
        _ => return Err(lines.err("expected `kernel <family> <shape>`")),
    };
    let policy = match lines.keyed("policy")?.as_slice() {
        [p] => parse_policy(p).map_err(|e| lines.err(e.to_string()))?,
        _ => return Err(lines.err("expected `policy <name>`")),
    };
    let radius: T = match lines.keyed("radius")?.as_slice() {
        [r] => lines.parse(r)?,
        _ => return Err(lines.err("expected `radius <r>`")),
    };
    let n: usize = match lines.keyed("nodes")?.as_slice() {
        [n] => lines.parse(n)?,
        _ => return Err(lines.err("expected `nodes <count>`")),
    };
    let mut nodes = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let l = lines.next()?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        let [x, y, f] = toks.as_slice() else {
            return Err(lines.err("expected `x y f`"));
        };
        nodes.push(Point2::new(lines.parse(x)?, lines.parse(y)?));
        values.push(lines.parse(f)?);
    }
    let d: usize = match lines.keyed("subdomains")?.as_slice() {
        [d] => lines.parse(d)?,
        _ => return Err(lines.err("expected `subdomains <count>`")),
    };
    let mut centers = Vec::with_capacity(d);
    let mut locals = Vec::with_capacity(d);
    for _ in 0..d {
        let l = lines.next()?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() < 3 {
            return Err(lines.err("expected `cx cy m ...`"));
        }
        let center = Point2::new(lines.parse(toks[0])?, lines.parse(toks[1])?);
        let m: usize = lines.parse(toks[2])?;
        if toks.len() != 3 + 2 * m {
            return Err(lines.err(format!("subdomain with {m} nodes needs {} fields", 3 + 2 * m)));
        }
        let node_indices = toks[3..3 + m]
            .iter()
            .map(|t| lines.parse(t))
            .collect::<Result<Vec<usize>>>()?;
        let coeffs = toks[3 + m..]
            .iter()
            .map(|t| lines.parse(t))
            .collect::<Result<Vec<T>>>()?;
        centers.push(center);
        locals.push(LocalInterpolant {
            center,
            radius,
            node_indices,
            coeffs,
            residual: T::zero(),
            method: None,
        });
    }
    let options = FitOptions {
        policy,
        ..FitOptions::default()
    };
    PuModel::from_parts(kernel, nodes, values, centers, locals, options).map_err(|e| lines.err(e.to_string()))
}
