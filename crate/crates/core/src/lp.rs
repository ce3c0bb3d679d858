//! LP text dialect for [`StandardForm`].
//!
//! ```text
//! \ comment
//! Maximize
//!  obj: 2.5 x_1_1 + 2.5 x_1_2 + 0 phi_1_1 ...
//! Subject To
//!  c0_2a: phi_1_1 - x_1_1 >= 0
//! Bounds
//!  soc_1 = 1
//!  soc_2 free
//! Binary
//!  x_1_1
//! End
//! ```
//!
//! The objective lists every variable, which fixes the column order on read.
//! Row names are `c<index>_<family tag>`. Numbers are written in shortest
//! round-trip form, so a write/read cycle is bit-exact.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::model::Family;
use crate::standard_form::{Row, Sense, StandardForm, VarKind};

#[derive(Debug, Error)]
pub enum LpError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

fn fmt_num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-4..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn write_terms(out: &mut String, names: &[String], terms: impl Iterator<Item = (usize, f64)>) {
    for (i, (col, coef)) in terms.enumerate() {
        let neg = coef.is_sign_negative();
        let mag = fmt_num(coef.abs());
        match (i, neg) {
            (0, false) => write!(out, "{mag} {}", names[col]),
            (0, true) => write!(out, "-{mag} {}", names[col]),
            (_, false) => write!(out, " + {mag} {}", names[col]),
            (_, true) => write!(out, " - {mag} {}", names[col]),
        }
        .expect("writing to a String cannot fail");
    }
}

/// Renders `sf` in the LP dialect.
pub fn write_lp(sf: &StandardForm) -> String {
    let mut out = String::new();
    out.push_str("\\ ONTS standard form\n");
    let _ = writeln!(out, "\\ {} variables, {} rows", sf.n_vars(), sf.n_rows());
    out.push_str("Maximize\n obj: ");
    write_terms(
        &mut out,
        &sf.var_names,
        sf.objective.iter().copied().enumerate(),
    );
    out.push_str("\nSubject To\n");
    for (i, row) in sf.rows.iter().enumerate() {
        let _ = write!(out, " c{}_{}: ", i, row.family.tag());
        write_terms(&mut out, &sf.var_names, row.coeffs.iter().copied());
        let _ = writeln!(out, " {} {}", row.sense.symbol(), fmt_num(row.rhs));
    }
    out.push_str("Bounds\n");
    for (name, kind) in sf.var_names.iter().zip(&sf.var_kinds) {
        if let VarKind::Continuous { lb, ub } = *kind {
            let line = if lb == ub {
                format!(" {name} = {}", fmt_num(lb))
            } else if lb == f64::NEG_INFINITY && ub == f64::INFINITY {
                format!(" {name} free")
            } else if ub == f64::INFINITY {
                format!(" {name} >= {}", fmt_num(lb))
            } else if lb == f64::NEG_INFINITY {
                format!(" -inf <= {name} <= {}", fmt_num(ub))
            } else {
                format!(" {} <= {name} <= {}", fmt_num(lb), fmt_num(ub))
            };
            out.push_str(&line);
            out.push('\n');
        }
    }
    out.push_str("Binary\n");
    for (name, kind) in sf.var_names.iter().zip(&sf.var_kinds) {
        if kind.is_binary() {
            let _ = writeln!(out, " {name}");
        }
    }
    out.push_str("End\n");
    out
}

pub fn export_lp(sf: &StandardForm, path: impl AsRef<Path>) -> Result<(), LpError> {
    std::fs::write(path, write_lp(sf))?;
    Ok(())
}

pub fn parse_lp(path: impl AsRef<Path>) -> Result<StandardForm, LpError> {
    let text = std::fs::read_to_string(path)?;
    parse_lp_str(&text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Start,
    Objective,
    Constraints,
    Bounds,
    Binary,
    End,
}

fn section_of(line: &str) -> Option<Section> {
    match line.to_ascii_lowercase().as_str() {
        "maximize" | "maximise" | "max" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
        "bounds" => Some(Section::Bounds),
        "binary" | "binaries" | "bin" => Some(Section::Binary),
        "end" => Some(Section::End),
        _ => None,
    }
}

struct Builder {
    names: Vec<String>,
    index: HashMap<String, usize>,
    kinds: Vec<VarKind>,
    objective: Vec<f64>,
    rows: Vec<Row>,
}

impl Builder {
    fn column(&mut self, name: &str) -> usize {
        if let Some(&c) = self.index.get(name) {
            return c;
        }
        let c = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), c);
        self.kinds.push(VarKind::Continuous {
            lb: 0.0,
            ub: f64::INFINITY,
        });
        self.objective.push(0.0);
        c
    }
}

fn parse_number(tok: &str, line: usize) -> Result<f64, LpError> {
    match tok.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => tok.parse::<f64>().map_err(|_| LpError::Parse {
            line,
            msg: format!("expected a number, found `{tok}`"),
        }),
    }
}

fn is_name(tok: &str) -> bool {
    tok.chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
}

/// Parses `[+|-] [coef] name` sequences.
fn parse_terms(text: &str, line: usize) -> Result<Vec<(String, f64)>, LpError> {
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    for tok in text.split_whitespace() {
        match tok {
            "+" => {}
            "-" => sign = -sign,
            _ if is_name(tok) => {
                terms.push((tok.to_string(), sign * coef.unwrap_or(1.0)));
                sign = 1.0;
                coef = None;
            }
            _ => {
                if coef.is_some() {
                    return Err(LpError::Parse {
                        line,
                        msg: format!("two coefficients in a row near `{tok}`"),
                    });
                }
                coef = Some(parse_number(tok, line)?);
            }
        }
    }
    if coef.is_some() {
        return Err(LpError::Parse {
            line,
            msg: "dangling coefficient without a variable".into(),
        });
    }
    Ok(terms)
}

fn split_label(text: &str) -> (Option<&str>, &str) {
    match text.split_once(':') {
        Some((label, rest)) => (Some(label.trim()), rest),
        None => (None, text),
    }
}

fn parse_sense(tok: &str) -> Option<Sense> {
    match tok {
        "<=" | "=<" | "<" => Some(Sense::Le),
        ">=" | "=>" | ">" => Some(Sense::Ge),
        "=" => Some(Sense::Eq),
        _ => None,
    }
}

fn parse_constraint(b: &mut Builder, text: &str, line: usize) -> Result<(), LpError> {
    let (label, body) = split_label(text);
    let label = label.ok_or_else(|| LpError::Parse {
        line,
        msg: "constraint without a name".into(),
    })?;
    let family = label
        .rsplit_once('_')
        .and_then(|(_, tag)| Family::from_tag(tag))
        .ok_or_else(|| LpError::Parse {
            line,
            msg: format!("row name `{label}` does not carry a known family tag"),
        })?;
    let toks: Vec<&str> = body.split_whitespace().collect();
    let pos = toks
        .iter()
        .position(|t| parse_sense(t).is_some())
        .ok_or_else(|| LpError::Parse {
            line,
            msg: "missing comparison operator".into(),
        })?;
    if pos + 2 != toks.len() {
        return Err(LpError::Parse {
            line,
            msg: "expected a single right-hand side after the operator".into(),
        });
    }
    let sense = parse_sense(toks[pos]).expect("checked above");
    let rhs = parse_number(toks[pos + 1], line)?;
    let terms = parse_terms(&toks[..pos].join(" "), line)?;
    let coeffs = terms
        .into_iter()
        .map(|(name, a)| (b.column(&name), a))
        .collect();
    b.rows.push(Row {
        coeffs,
        sense,
        rhs,
        family,
    });
    Ok(())
}

fn parse_bound(b: &mut Builder, text: &str, line: usize) -> Result<(), LpError> {
    let toks: Vec<&str> = text.split_whitespace().collect();
    let err = |msg: &str| LpError::Parse {
        line,
        msg: msg.to_string(),
    };
    let (name, lb, ub) = match toks.as_slice() {
        [name, free] if free.eq_ignore_ascii_case("free") => {
            (*name, f64::NEG_INFINITY, f64::INFINITY)
        }
        [name, op, v] if is_name(name) => {
            let v = parse_number(v, line)?;
            match parse_sense(op) {
                Some(Sense::Eq) => (*name, v, v),
                Some(Sense::Le) => (*name, 0.0, v),
                Some(Sense::Ge) => (*name, v, f64::INFINITY),
                None => return Err(err("bad bound operator")),
            }
        }
        [lo, op1, name, op2, hi] => {
            if parse_sense(op1) != Some(Sense::Le) || parse_sense(op2) != Some(Sense::Le) {
                return Err(err("double bounds must use `<=`"));
            }
            (*name, parse_number(lo, line)?, parse_number(hi, line)?)
        }
        _ => return Err(err("unrecognised bound")),
    };
    let c = b.column(name);
    b.kinds[c] = VarKind::Continuous { lb, ub };
    Ok(())
}

/// Parses the LP dialect written by [`write_lp`].
pub fn parse_lp_str(text: &str) -> Result<StandardForm, LpError> {
    let mut b = Builder {
        names: Vec::new(),
        index: HashMap::new(),
        kinds: Vec::new(),
        objective: Vec::new(),
        rows: Vec::new(),
    };
    let mut section = Section::Start;
    let mut saw_objective = false;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('\\').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(next) = section_of(content) {
            section = next;
            continue;
        }
        match section {
            Section::Start => {
                return Err(LpError::Parse {
                    line,
                    msg: format!("content before `Maximize`: `{content}`"),
                })
            }
            Section::Objective => {
                let (_, body) = split_label(content);
                for (name, coef) in parse_terms(body, line)? {
                    let c = b.column(&name);
                    b.objective[c] += coef;
                }
                saw_objective = true;
            }
            Section::Constraints => parse_constraint(&mut b, content, line)?,
            Section::Bounds => parse_bound(&mut b, content, line)?,
            Section::Binary => {
                for name in content.split_whitespace() {
                    let c = b.column(name);
                    b.kinds[c] = VarKind::Binary;
                }
            }
            Section::End => {
                return Err(LpError::Parse {
                    line,
                    msg: "content after `End`".into(),
                })
            }
        }
    }
    if !saw_objective {
        return Err(LpError::Parse {
            line: text.lines().count().max(1),
            msg: "missing objective".into(),
        });
    }
    if section != Section::End {
        return Err(LpError::Parse {
            line: text.lines().count().max(1),
            msg: "missing `End`".into(),
        });
    }
    Ok(StandardForm {
        var_names: b.names,
        var_kinds: b.kinds,
        objective: b.objective,
        rows: b.rows,
    })
}
