//! Trace CSV: one row per iterate, then a `#`-prefixed footer.
//!
//! Floats are written with 17 significant digits, which round-trips every
//! `f64` exactly, so a trace can be replayed bit for bit.

use crate::CliError;
use datacompat::{SolverKind, TraceRow, Vector};
use std::fmt::Write as _;
use std::path::Path;

/// Certificate summary appended after the rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Footer {
    pub out_index: Option<usize>,
    pub dist_to_s: f64,
    pub f_gap: f64,
    pub l_bar: f64,
    pub gamma_star: f64,
    pub tau: f64,
    pub gamma: f64,
    pub solver: SolverKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub dim: usize,
    pub rows: Vec<TraceRow>,
    pub footer: Footer,
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn header(dim: usize) -> String {
    let mut h = String::from("k");
    for j in 0..dim {
        let _ = write!(h, ",x_{j}");
    }
    h.push_str(",f,prox,residual,alpha");
    h
}

impl Trace {
    pub fn render(&self) -> String {
        let mut out = header(self.dim);
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{}", r.k);
            for v in r.x.iter() {
                let _ = write!(out, ",{}", num(*v));
            }
            let _ = writeln!(out, ",{},{},{},{}", num(r.f), num(r.prox), num(r.residual), num(r.alpha));
        }
        let f = &self.footer;
        let k = f.out_index.map_or_else(|| "undefined".to_string(), |k| k.to_string());
        let _ = writeln!(out, "# K={k}");
        for (key, v) in [
            ("dist_to_S", f.dist_to_s),
            ("f_gap", f.f_gap),
            ("L_bar", f.l_bar),
            ("gamma_star", f.gamma_star),
            ("tau", f.tau),
            ("gamma", f.gamma),
        ] {
            let _ = writeln!(out, "# {key}={}", num(v));
        }
        let _ = writeln!(out, "# solver={}", f.solver.name());
        out
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.render())
            .map_err(|e| CliError::Io(format!("cannot write trace {}: {e}", path.display())))
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read trace {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let bad = |line: usize, msg: &str| CliError::Parse(format!("trace line {line}: {msg}"));
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, head) = lines.next().ok_or_else(|| bad(1, "empty file"))?;
        let cols: Vec<&str> = head.split(',').collect();
        if cols.len() < 6 {
            return Err(bad(1, "header has too few columns"));
        }
        let dim = cols.len() - 5;
        if head != header(dim) {
            return Err(bad(1, &format!("unexpected header '{head}'")));
        }

        let mut rows = Vec::new();
        let mut meta = Vec::new();
        for (no, line) in lines {
            if let Some(rest) = line.strip_prefix('#') {
                let (key, value) = rest
                    .trim()
                    .split_once('=')
                    .ok_or_else(|| bad(no, "footer entry must be key=value"))?;
                meta.push((no, key.to_string(), value.to_string()));
                continue;
            }
            if !meta.is_empty() {
                return Err(bad(no, "data row after footer"));
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != dim + 5 {
                return Err(bad(no, &format!("expected {} fields, found {}", dim + 5, fields.len())));
            }
            let k = fields[0].parse().map_err(|_| bad(no, "k is not an integer"))?;
            let vals = fields[1..]
                .iter()
                .map(|s| s.parse::<f64>().map_err(|_| bad(no, &format!("'{s}' is not a number"))))
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(TraceRow {
                k,
                x: Vector::from_column_slice(&vals[..dim]),
                f: vals[dim],
                prox: vals[dim + 1],
                residual: vals[dim + 2],
                alpha: vals[dim + 3],
            });
        }

        let get = |key: &str| {
            meta.iter()
                .find(|(_, k, _)| k == key)
                .map(|(no, _, v)| (*no, v.as_str()))
                .ok_or_else(|| CliError::Parse(format!("trace footer lacks '{key}'")))
        };
        let float = |key: &str| -> Result<f64, CliError> {
            let (no, v) = get(key)?;
            v.parse().map_err(|_| bad(no, &format!("{key} is not a number")))
        };
        let (no, k) = get("K")?;
        let out_index = match k {
            "undefined" => None,
            k => Some(k.parse().map_err(|_| bad(no, "K is neither an index nor 'undefined'"))?),
        };
        let (no, solver) = get("solver")?;
        let solver = solver.parse().map_err(|_| bad(no, "unknown solver"))?;
        Ok(Self {
            dim,
            rows,
            footer: Footer {
                out_index,
                dist_to_s: float("dist_to_S")?,
                f_gap: float("f_gap")?,
                l_bar: float("L_bar")?,
                gamma_star: float("gamma_star")?,
                tau: float("tau")?,
                gamma: float("gamma")?,
                solver,
            },
        })
    }
}
