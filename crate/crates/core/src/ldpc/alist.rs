//! The alist sparse-matrix text format: sizes, maximum degrees, degree
//! lists, then one-based adjacency lists for columns (variables) and rows
//! (checks), zero-padded to the maximum degree.

use std::fmt::Write as _;

use super::graph::TannerGraph;
use crate::error::{Error, Result};

/// Upper bound on either dimension accepted by the parser.
pub const MAX_ALIST_DIM: usize = 1 << 20;

pub fn write_alist(graph: &TannerGraph) -> String {
    let vd = graph.var_degrees();
    let cd = graph.check_degrees();
    let max_v = vd.iter().copied().max().unwrap_or(0);
    let max_c = cd.iter().copied().max().unwrap_or(0);
    let mut out = String::new();
    let join = |xs: &mut dyn Iterator<Item = usize>| xs.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "{} {}", graph.n_vars(), graph.n_checks());
    let _ = writeln!(out, "{max_v} {max_c}");
    let _ = writeln!(out, "{}", join(&mut vd.iter().copied()));
    let _ = writeln!(out, "{}", join(&mut cd.iter().copied()));
    for v in 0..graph.n_vars() {
        let mut cs: Vec<usize> = graph.var_checks(v).iter().map(|c| c + 1).collect();
        cs.sort_unstable();
        cs.resize(max_v, 0);
        let _ = writeln!(out, "{}", join(&mut cs.into_iter()));
    }
    for c in 0..graph.n_checks() {
        let mut vs: Vec<usize> = graph.check(c).iter().map(|v| v + 1).collect();
        vs.resize(max_c, 0);
        let _ = writeln!(out, "{}", join(&mut vs.into_iter()));
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    /// Next non-blank line as integers, with its one-based number.
    fn next_ints(&mut self, what: &str) -> Result<(usize, Vec<usize>)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let vals = t
                .split_whitespace()
                .map(|w| {
                    w.parse::<usize>().map_err(|_| Error::Parse {
                        line: i + 1,
                        msg: format!("`{w}` is not a non-negative integer"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok((i + 1, vals));
        }
        Err(Error::Parse {
            line: self.last + 1,
            msg: format!("unexpected end of input, expected {what}"),
        })
    }
}

fn expect_len(line: usize, vals: &[usize], n: usize, what: &str) -> Result<()> {
    if vals.len() != n {
        return Err(Error::Parse {
            line,
            msg: format!("expected {n} {what}, found {}", vals.len()),
        });
    }
    Ok(())
}

pub fn parse_alist(text: &str) -> Result<TannerGraph> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last: 0,
    };
    let (l, dims) = lines.next_ints("dimensions")?;
    expect_len(l, &dims, 2, "dimensions")?;
    let (n, m) = (dims[0], dims[1]);
    if n == 0 || n > MAX_ALIST_DIM || m > MAX_ALIST_DIM {
        return Err(Error::Parse {
            line: l,
            msg: format!("unsupported size {n} x {m}"),
        });
    }
    let (l, maxes) = lines.next_ints("maximum degrees")?;
    expect_len(l, &maxes, 2, "maximum degrees")?;
    let (max_v, max_c) = (maxes[0], maxes[1]);
    let (l, vd) = lines.next_ints("column degrees")?;
    expect_len(l, &vd, n, "column degrees")?;
    if vd.iter().any(|&d| d > max_v || d > m) {
        return Err(Error::Parse {
            line: l,
            msg: "column degree exceeds its bound".into(),
        });
    }
    // with no checks the row-degree line is blank
    let (l, cd) = if m == 0 { (l, Vec::new()) } else { lines.next_ints("row degrees")? };
    expect_len(l, &cd, m, "row degrees")?;
    if cd.iter().any(|&d| d > max_c || d > n) {
        return Err(Error::Parse {
            line: l,
            msg: "row degree exceeds its bound".into(),
        });
    }
    let mut col_lists = Vec::new();
    // an all-zero-degree side is written as blank lines, which are skipped
    for &d in &vd {
        if max_v == 0 {
            col_lists.push((l, Vec::new()));
            continue;
        }
        let (l, vals) = lines.next_ints("column list")?;
        col_lists.push((l, adjacency(l, &vals, d, m)?));
    }
    let mut checks = Vec::new();
    for &d in &cd {
        if max_c == 0 {
            checks.push(Vec::new());
            continue;
        }
        let (l, vals) = lines.next_ints("row list")?;
        checks.push(adjacency(l, &vals, d, n)?);
    }
    let graph = TannerGraph::from_check_lists(n, &checks).map_err(|e| Error::Parse {
        line: lines.last,
        msg: e.to_string(),
    })?;
    for (v, (l, mut cs)) in col_lists.into_iter().enumerate() {
        let mut have = graph.var_checks(v);
        have.sort_unstable();
        cs.sort_unstable();
        if have != cs {
            return Err(Error::Parse {
                line: l,
                msg: format!("column {} disagrees with the row lists", v + 1),
            });
        }
    }
    Ok(graph)
}

/// One adjacency line: `degree` one-based indices followed by optional zeros.
fn adjacency(line: usize, vals: &[usize], degree: usize, bound: usize) -> Result<Vec<usize>> {
    let (idx, pad) = vals.split_at(degree.min(vals.len()));
    if idx.len() != degree || idx.iter().any(|&x| x == 0 || x > bound) || pad.iter().any(|&x| x != 0) {
        return Err(Error::Parse {
            line,
            msg: format!("expected {degree} indices in 1..={bound} then zero padding"),
        });
    }
    Ok(idx.iter().map(|x| x - 1).collect())
}
