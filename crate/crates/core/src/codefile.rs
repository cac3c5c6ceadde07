//! Plain-text check matrices.
//!
//! ```text
//! # comment
//! p=2 n=4
//! 1 1 1 1 | 0 0 0 0
//! 0 0 0 0 | 1 1 1 1
//! ```
//!
//! Each row lists `n` x-exponents, a literal `|`, then `n` z-exponents.
//! Exponents must already lie in `[0, p)`.

use crate::error::{Error, Result};
use crate::gfp::{FpMatrix, Modulus};
use crate::pauli::StabilizerCode;

/// A parsed file before the commutation and independence checks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodeFile {
    pub n: usize,
    pub check: FpMatrix,
    /// Source line of each row, for error messages.
    pub lines: Vec<usize>,
}

impl CodeFile {
    pub fn parse(text: &str) -> Result<CodeFile> {
        let mut header: Option<(Modulus, usize)> = None;
        let mut rows: Vec<Vec<u8>> = Vec::new();
        let mut lines = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |message: String| Error::Parse {
                line: line_no,
                message,
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((modulus, n)) = header else {
                header = Some(parse_header(line).map_err(err)?);
                continue;
            };
            let p = modulus.get();
            let Some((xs, zs)) = line.split_once('|') else {
                return Err(err("row needs a `|` between x and z exponents".into()));
            };
            let parse_half = |half: &str, what: &str| -> Result<Vec<u8>> {
                let vals: Vec<u8> = half
                    .split_whitespace()
                    .map(|w| match w.parse::<u32>() {
                        Ok(v) if v < p as u32 => Ok(v as u8),
                        Ok(v) => Err(err(format!("exponent {v} is not in 0..{p}"))),
                        Err(_) => Err(err(format!("not an exponent: `{w}`"))),
                    })
                    .collect::<Result<_>>()?;
                if vals.len() != n {
                    return Err(err(format!(
                        "{} {what}-exponents, expected {n}",
                        vals.len()
                    )));
                }
                Ok(vals)
            };
            let mut row = parse_half(xs, "x")?;
            row.extend(parse_half(zs, "z")?);
            if rows.len() == n {
                return Err(err(format!("more than n = {n} rows")));
            }
            rows.push(row);
            lines.push(line_no);
        }
        let Some((modulus, n)) = header else {
            return Err(Error::Parse {
                line: text.lines().count().max(1),
                message: "missing header `p=<prime> n=<count>`".into(),
            });
        };
        let check = FpMatrix::from_rows(modulus, 2 * n, &rows)?;
        Ok(CodeFile { n, check, lines })
    }

    /// Validates the rows as a stabilizer. Row numbers in errors count
    /// generator rows from 1, not file lines.
    pub fn into_code(self) -> Result<StabilizerCode> {
        StabilizerCode::validate(self.check, self.n)
    }
}

fn parse_header(line: &str) -> std::result::Result<(Modulus, usize), String> {
    let mut p = None;
    let mut n = None;
    for word in line.split_whitespace() {
        match word.split_once('=') {
            Some(("p", v)) => p = Some(v.parse::<u32>().map_err(|_| format!("bad prime `{v}`"))?),
            Some(("n", v)) => n = Some(v.parse::<usize>().map_err(|_| format!("bad count `{v}`"))?),
            _ => return Err(format!("unexpected header field `{word}`")),
        }
    }
    let (Some(p), Some(n)) = (p, n) else {
        return Err("header must read `p=<prime> n=<count>`".into());
    };
    if n == 0 {
        return Err("n must be positive".into());
    }
    let modulus = Modulus::new(p).map_err(|e| e.to_string())?;
    Ok((modulus, n))
}

/// Parses and validates in one step.
pub fn parse_code(text: &str) -> Result<StabilizerCode> {
    CodeFile::parse(text)?.into_code()
}

/// The text form read by [`parse_code`].
pub fn format_code(code: &StabilizerCode) -> String {
    let n = code.n();
    let mut out = format!("p={} n={}\n", code.modulus(), n);
    let h = code.check_matrix();
    for r in 0..h.rows() {
        let row = h.row(r);
        let half = |s: &[u8]| {
            s.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        };
        out.push_str(&format!("{} | {}\n", half(&row[..n]), half(&row[n..])));
    }
    out
}
