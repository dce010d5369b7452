//! Plain-text instance format:
//!
//! ```text
//! TRIP 1
//! N M
//! alpha
//! delta
//! xi_lo xi_hi
//! <N lines of M costs>
//! <N lines of M previous controls>
//! ```
//!
//! Numbers are decimals; a value without a terminating decimal expansion is
//! written as `p/q`, which the reader also accepts.

use num_traits::Signed;

use super::TripInstance;
use crate::error::{ParseError, Result};
use crate::grid::Grid;
use crate::num::{format_rational, parse_rational, Rational};

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    /// Next non-blank line, with its 1-based number. `#` starts a comment.
    fn next(&mut self, what: &str) -> Result<(usize, Vec<&'a str>), ParseError> {
        for (k, raw) in self.inner.by_ref() {
            let content = raw.split('#').next().unwrap_or("");
            let toks: Vec<&str> = content.split_whitespace().collect();
            if !toks.is_empty() {
                return Ok((k + 1, toks));
            }
        }
        Err(ParseError::Truncated(format!("missing {what}")))
    }
}

fn number(line: usize, tok: &str) -> Result<Rational, ParseError> {
    parse_rational(tok).ok_or_else(|| ParseError::BadNumber {
        line,
        token: tok.to_string(),
    })
}

fn integer(line: usize, tok: &str) -> Result<i64, ParseError> {
    tok.parse().map_err(|_| ParseError::BadNumber {
        line,
        token: tok.to_string(),
    })
}

fn expect_count(line: usize, toks: &[&str], expected: usize) -> Result<(), ParseError> {
    if toks.len() != expected {
        return Err(ParseError::WrongCount {
            line,
            expected,
            found: toks.len(),
        });
    }
    Ok(())
}

pub fn read_instance(text: &str) -> Result<TripInstance> {
    Ok(parse(text)?)
}

fn parse(text: &str) -> Result<TripInstance, ParseError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (_, magic) = lines.next("header")?;
    if magic != ["TRIP", "1"] {
        return Err(ParseError::MalformedHeader(magic.join(" ")));
    }
    let (ln, dims) = lines.next("dimensions")?;
    if dims.len() != 2 {
        return Err(ParseError::MalformedHeader(format!(
            "line {ln}: expected 'N M'"
        )));
    }
    let n: usize = dims[0]
        .parse()
        .map_err(|_| ParseError::MalformedHeader(format!("line {ln}: bad N {:?}", dims[0])))?;
    let m: usize = dims[1]
        .parse()
        .map_err(|_| ParseError::MalformedHeader(format!("line {ln}: bad M {:?}", dims[1])))?;
    if n == 0 || m == 0 {
        return Err(ParseError::BadDimensions(n, m));
    }
    let (ln, a) = lines.next("alpha")?;
    expect_count(ln, &a, 1)?;
    let alpha = number(ln, a[0])?;
    if !alpha.is_positive() {
        return Err(ParseError::NonPositiveAlpha(a[0].to_string()));
    }
    let (ln, dl) = lines.next("delta")?;
    expect_count(ln, &dl, 1)?;
    let delta = number(ln, dl[0])?;
    if delta.is_negative() {
        return Err(ParseError::NegativeDelta(dl[0].to_string()));
    }
    let (ln, xi) = lines.next("Xi range")?;
    if xi.len() != 2 {
        return Err(ParseError::NonContiguousXi(format!(
            "line {ln}: {}",
            xi.join(" ")
        )));
    }
    let lo = integer(ln, xi[0]).map_err(|_| ParseError::NonContiguousXi(xi.join(" ")))?;
    let hi = integer(ln, xi[1]).map_err(|_| ParseError::NonContiguousXi(xi.join(" ")))?;
    if lo > hi {
        return Err(ParseError::NonContiguousXi(xi.join(" ")));
    }
    let mut cost = Vec::with_capacity(n * m);
    for _ in 0..n {
        let (ln, row) = lines.next("cost row")?;
        expect_count(ln, &row, m)?;
        for t in row {
            cost.push(number(ln, t)?);
        }
    }
    let mut prev = Vec::with_capacity(n * m);
    for i in 0..n {
        let (ln, row) = lines.next("previous-control row")?;
        expect_count(ln, &row, m)?;
        for (j, t) in row.into_iter().enumerate() {
            let v = integer(ln, t)?;
            if v < lo || v > hi {
                return Err(ParseError::PrevOutsideXi {
                    row: i,
                    col: j,
                    value: v,
                });
            }
            prev.push(v);
        }
    }
    if let Ok((ln, _)) = lines.next("") {
        return Err(ParseError::TrailingContent(ln));
    }
    let cost = Grid::from_vec(n, m, cost).expect("row counts checked");
    let prev = Grid::from_vec(n, m, prev).expect("row counts checked");
    Ok(TripInstance::new(alpha, delta, lo, hi, cost, prev)
        .expect("invariants checked during parse"))
}

pub fn write_instance(inst: &TripInstance) -> String {
    let mut out = String::new();
    let (n, m) = inst.shape();
    out.push_str("TRIP 1\n");
    out.push_str(&format!("{n} {m}\n"));
    out.push_str(&format!("{}\n", format_rational(inst.alpha())));
    out.push_str(&format!("{}\n", format_rational(inst.delta_cap())));
    out.push_str(&format!("{} {}\n", inst.xi_lo(), inst.xi_hi()));
    for i in 0..n {
        let row: Vec<String> = inst
            .cost()
            .row(i)
            .iter()
            .map(|&c| format_rational(c))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    for i in 0..n {
        let row: Vec<String> = inst.prev().row(i).iter().map(i64::to_string).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}
