//! Edge-perspective degree distributions and their integer realization.

use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-9;

/// `λ(x) = Σ λ_i x^{i−1}`, `ρ(x) = Σ ρ_j x^{j−1}`, stored as `(degree, coefficient)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistributions {
    lambda: Vec<(usize, f64)>,
    rho: Vec<(usize, f64)>,
}

fn normalize_poly(name: &str, terms: &[(usize, f64)]) -> Result<Vec<(usize, f64)>> {
    let mut out: Vec<(usize, f64)> = Vec::new();
    for &(d, c) in terms {
        if d == 0 || !(c >= 0.0 && c.is_finite()) {
            return Err(Error::Domain(format!("{name}: bad term ({d}, {c})")));
        }
        if c == 0.0 {
            continue;
        }
        match out.iter_mut().find(|t| t.0 == d) {
            Some(t) => t.1 += c,
            None => out.push((d, c)),
        }
    }
    out.sort_by_key(|t| t.0);
    let total: f64 = out.iter().map(|t| t.1).sum();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::Domain(format!("{name} coefficients sum to {total}, not 1")));
    }
    Ok(out)
}

impl DegreeDistributions {
    pub fn new(lambda: &[(usize, f64)], rho: &[(usize, f64)]) -> Result<Self> {
        Ok(DegreeDistributions {
            lambda: normalize_poly("λ", lambda)?,
            rho: normalize_poly("ρ", rho)?,
        })
    }

    /// From polynomial coefficient lists: entry `k` multiplies `x^k`.
    pub fn from_coefficients(lambda: &[f64], rho: &[f64]) -> Result<Self> {
        let terms = |c: &[f64]| -> Vec<(usize, f64)> { c.iter().enumerate().map(|(k, v)| (k + 1, *v)).collect() };
        Self::new(&terms(lambda), &terms(rho))
    }

    pub fn regular(dv: usize, dc: usize) -> Result<Self> {
        Self::new(&[(dv, 1.0)], &[(dc, 1.0)])
    }

    pub fn lambda(&self) -> &[(usize, f64)] {
        &self.lambda
    }

    pub fn rho(&self) -> &[(usize, f64)] {
        &self.rho
    }

    fn integral(p: &[(usize, f64)]) -> f64 {
        p.iter().map(|(d, c)| c / *d as f64).sum()
    }

    /// `1 − ∫ρ / ∫λ`.
    pub fn design_rate(&self) -> f64 {
        1.0 - Self::integral(&self.rho) / Self::integral(&self.lambda)
    }

    pub fn check_rate(&self, r_c: f64, tol: f64) -> Result<()> {
        let r = self.design_rate();
        if (r - r_c).abs() > tol {
            return Err(Error::Domain(format!("design rate {r:.4} differs from requested {r_c}")));
        }
        Ok(())
    }

    /// Real-valued node counts `(degree, count)` for `n` variable nodes and
    /// the edge count they imply.
    fn var_targets(&self, n: usize) -> (Vec<(usize, f64)>, f64) {
        let il = Self::integral(&self.lambda);
        let edges = n as f64 / il;
        (self.lambda.iter().map(|&(d, c)| (d, edges * c / d as f64)).collect(), edges)
    }
}

/// Integer degree sequences for both node types.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DegreeSequence {
    pub var_degrees: Vec<usize>,
    pub check_degrees: Vec<usize>,
}

impl DegreeSequence {
    pub fn edges(&self) -> usize {
        self.var_degrees.iter().sum()
    }
}

/// Floor/ceil choices for every count so that the counts sum to `total`
/// (any total when `total` is `None`).
fn roundings(targets: &[(usize, f64)], total: Option<usize>) -> Vec<Vec<usize>> {
    let floors: Vec<usize> = targets.iter().map(|t| t.1.floor() as usize).collect();
    let movable: Vec<usize> = (0..targets.len()).filter(|&i| targets[i].1.fract() > 0.0).collect();
    if movable.len() > 16 {
        // too many degrees to enumerate: largest remainder only
        let mut order = movable.clone();
        order.sort_by(|&a, &b| targets[b].1.fract().total_cmp(&targets[a].1.fract()));
        let need = total.map_or(0, |t| t.saturating_sub(floors.iter().sum()));
        let mut c = floors.clone();
        for &i in order.iter().take(need) {
            c[i] += 1;
        }
        return vec![c];
    }
    let mut out = Vec::new();
    for mask in 0u32..(1 << movable.len()) {
        let mut c = floors.clone();
        for (b, &i) in movable.iter().enumerate() {
            if mask >> b & 1 == 1 {
                c[i] += 1;
            }
        }
        if total.is_none_or(|t| c.iter().sum::<usize>() == t) {
            out.push(c);
        }
    }
    out
}

/// Integer degree sequences for `n` variable nodes. Counts per degree stay
/// within one node of their real targets; an edge-count mismatch on the
/// check side is absorbed by at most one check of another degree.
pub fn realize(dd: &DegreeDistributions, n: usize) -> Result<DegreeSequence> {
    if n == 0 {
        return Err(Error::InvalidDimension("code length must be positive".into()));
    }
    let (vt, _) = dd.var_targets(n);
    let max_dc = dd.rho.iter().map(|t| t.0).max().unwrap_or(0);
    // (cost, residue distance, deviation) → sequence
    let mut best: Option<((usize, usize, f64), DegreeSequence)> = None;
    let mut conflicts = Vec::new();
    for vc in roundings(&vt, Some(n)) {
        let edges: usize = vt.iter().zip(&vc).map(|(t, c)| t.0 * c).sum();
        let ct: Vec<(usize, f64)> = dd.rho.iter().map(|&(d, c)| (d, edges as f64 * c / d as f64)).collect();
        for cc in roundings(&ct, None) {
            let placed: usize = ct.iter().zip(&cc).map(|(t, c)| t.0 * c).sum();
            let mut checks: Vec<usize> = ct.iter().zip(&cc).flat_map(|(t, &c)| std::iter::repeat_n(t.0, c)).collect();
            let (cost, extra) = if placed == edges {
                (0, 0)
            } else if placed < edges && !checks.is_empty() {
                let short = edges - placed;
                let top = checks.iter().copied().max().expect("non-empty");
                let dist = |d: usize| dd.rho.iter().map(|t| t.0.abs_diff(d)).min().unwrap_or(0);
                if short >= 2 && short <= max_dc && dist(short) <= short {
                    checks.push(short);
                    (1, short)
                } else {
                    // no sensible extra check: widen a top-degree one instead
                    let pos = checks.iter().position(|&d| d == top).expect("present");
                    checks[pos] = top + short;
                    (1, top + short)
                }
            } else if placed < edges && edges - placed >= 2 && edges - placed <= max_dc {
                checks.push(edges - placed);
                (1, edges - placed)
            } else if placed > edges && !checks.is_empty() {
                let top = checks.iter().copied().max().expect("non-empty");
                let cut = placed - edges;
                if top < cut + 2 {
                    conflicts.push(format!("{edges} edges vs {placed} check sockets"));
                    continue;
                }
                let pos = checks.iter().position(|&d| d == top).expect("present");
                checks[pos] = top - cut;
                (1, top - cut)
            } else {
                conflicts.push(format!("{edges} edges vs {placed} check sockets"));
                continue;
            };
            let max_dv = vt.iter().zip(&vc).filter(|(_, &c)| c > 0).map(|(t, _)| t.0).max().unwrap_or(0);
            if checks.iter().any(|&d| d > n) || max_dv > checks.len() {
                conflicts.push(format!("{} checks cannot host degrees up to {max_dv} without parallel edges", checks.len()));
                continue;
            }
            let resid = if cost == 0 {
                0
            } else {
                dd.rho.iter().map(|t| t.0.abs_diff(extra)).min().unwrap_or(0)
            };
            let dev: f64 = vt.iter().zip(&vc).map(|(t, &c)| (c as f64 - t.1).abs()).sum::<f64>()
                + ct.iter().zip(&cc).map(|(t, &c)| (c as f64 - t.1).abs()).sum::<f64>();
            let key = (cost, resid, dev);
            if best.as_ref().is_none_or(|(k, _)| key.0 < k.0 || (key.0 == k.0 && (key.1 < k.1 || (key.1 == k.1 && key.2 < k.2)))) {
                let var_degrees = vt.iter().zip(&vc).flat_map(|(t, &c)| std::iter::repeat_n(t.0, c)).collect();
                best = Some((
                    key,
                    DegreeSequence {
                        var_degrees,
                        check_degrees: checks,
                    },
                ));
            }
        }
    }
    match best {
        Some((_, seq)) if !seq.check_degrees.is_empty() => Ok(seq),
        _ => {
            conflicts.dedup();
            Err(Error::Unrealizable(format!(
                "N = {n}, variable targets {vt:?}: {}",
                if conflicts.is_empty() { "no check side".to_string() } else { conflicts.join("; ") }
            )))
        }
    }
}
