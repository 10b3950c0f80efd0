//! Line-oriented text dump of an [`SdpProblem`], for debugging and for
//! feeding a problem to another solver by hand.
//!
//! ```text
//! sdp v1
//! blocks 2 4
//! objective
//! 0 0 0 1e0
//! constraint 1e0
//! 1 0 3 -5e-1
//! end
//! ```
//!
//! Entries are `block row col value` over the upper triangle; anything not
//! listed is zero. Floats use the shortest exact round-trip form.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::{Constraint, SdpProblem};
use crate::error::{invalid, Result};

fn write_entries(out: &mut String, mats: &[Option<&DMatrix<f64>>]) {
    for (b, m) in mats.iter().enumerate() {
        let Some(m) = m else { continue };
        for j in 0..m.ncols() {
            for i in 0..=j {
                let v = m[(i, j)];
                if v != 0.0 {
                    let _ = writeln!(out, "{b} {i} {j} {v:e}");
                }
            }
        }
    }
}

pub fn write_dump(p: &SdpProblem) -> String {
    let mut out = String::from("sdp v1\nblocks");
    for n in &p.blocks {
        let _ = write!(out, " {n}");
    }
    out.push_str("\nobjective\n");
    let obj: Vec<Option<&DMatrix<f64>>> = p.objective.iter().map(Some).collect();
    write_entries(&mut out, &obj);
    for con in &p.constraints {
        let _ = writeln!(out, "constraint {:e}", con.rhs);
        let mats: Vec<Option<&DMatrix<f64>>> = con.matrices.iter().map(|m| m.as_ref()).collect();
        write_entries(&mut out, &mats);
    }
    out.push_str("end\n");
    out
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| invalid(format!("dump line {line}: expected a number")))
}

fn parse_usize(tok: Option<&str>, line: usize) -> Result<usize> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| invalid(format!("dump line {line}: expected an index")))
}

pub fn read_dump(text: &str) -> Result<SdpProblem> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, "sdp v1")) => {}
        _ => return Err(invalid("dump must start with 'sdp v1'")),
    }
    let blocks: Vec<usize> = match lines.next() {
        Some((ln, l)) if l.starts_with("blocks") => l
            .split_whitespace()
            .skip(1)
            .map(|t| parse_usize(Some(t), ln))
            .collect::<Result<_>>()?,
        _ => return Err(invalid("dump line 2 must list blocks")),
    };
    let zeros = || -> Vec<DMatrix<f64>> { blocks.iter().map(|&n| DMatrix::zeros(n, n)).collect() };
    let mut objective = zeros();
    let mut constraints: Vec<(Vec<Option<DMatrix<f64>>>, f64)> = Vec::new();
    let mut in_objective = false;
    let mut ended = false;
    for (ln, line) in lines {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut toks = line.split_whitespace();
        match toks.clone().next() {
            Some("objective") => in_objective = true,
            Some("constraint") => {
                toks.next();
                in_objective = false;
                constraints.push((vec![None; blocks.len()], parse_f64(toks.next(), ln)?));
            }
            Some("end") => {
                ended = true;
                break;
            }
            _ => {
                let b = parse_usize(toks.next(), ln)?;
                let i = parse_usize(toks.next(), ln)?;
                let j = parse_usize(toks.next(), ln)?;
                let v = parse_f64(toks.next(), ln)?;
                let n = *blocks.get(b).ok_or_else(|| invalid(format!("dump line {ln}: no block {b}")))?;
                if i >= n || j >= n {
                    return Err(invalid(format!("dump line {ln}: entry outside block {b}")));
                }
                let target = if in_objective {
                    &mut objective[b]
                } else {
                    let con = constraints
                        .last_mut()
                        .ok_or_else(|| invalid(format!("dump line {ln}: entry outside a section")))?;
                    con.0[b].get_or_insert_with(|| DMatrix::zeros(n, n))
                };
                target[(i, j)] = v;
                target[(j, i)] = v;
            }
        }
    }
    if !ended {
        return Err(invalid("dump is missing its 'end' line"));
    }
    let constraints = constraints
        .into_iter()
        .map(|(matrices, rhs)| Constraint { matrices, rhs })
        .collect();
    SdpProblem::new(blocks, objective, constraints)
}
