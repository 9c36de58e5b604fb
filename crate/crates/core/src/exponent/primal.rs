//! Brute-force primal form of the random-coding exponent,
//! `min_V D(V‖W|Q) + [I(Q,V) - R]⁺`, over a lattice of row-stochastic `V`.
//!
//! Only meant as an independent check of the dual computation on tiny
//! alphabets.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::prob::{Channel, Dist};
use crate::types::integer_compositions;

/// Largest `|X|·|Y|` accepted.
pub const MAX_CELLS: usize = 9;
/// Largest refinement product searched jointly; beyond it rows are refined one at a time.
const JOINT_REFINE_CAP: f64 = 1e6;
const SUBDIVISION: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrimalResult {
    pub value: f64,
    /// Minimizing `V`, one row per input (rows with `Q(x) = 0` are `W(·|x)`).
    pub v: Vec<Vec<f64>>,
    pub grid: usize,
    /// Value on the coarse lattice before refinement.
    pub coarse_value: f64,
    /// Lattice spacing after refinement.
    pub resolution: f64,
}

/// One candidate row with its divergence and `Σ_y V log V` precomputed.
#[derive(Clone)]
struct RowPoint {
    v: Vec<f64>,
    div: f64,
    neg_ent: f64,
}

fn row_point(v: Vec<f64>, w: &[f64]) -> Option<RowPoint> {
    let mut div = 0.0;
    let mut neg_ent = 0.0;
    for (&a, &b) in v.iter().zip(w) {
        if a > 0.0 {
            if b == 0.0 {
                return None;
            }
            div += a * (a / b).ln();
            neg_ent += a * a.ln();
        }
    }
    Some(RowPoint { v, div, neg_ent })
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

struct Problem<'a> {
    q: &'a Dist,
    w: &'a Channel,
    rate: f64,
    active: Vec<usize>,
}

impl Problem<'_> {
    fn cost(&self, rows: &[&RowPoint]) -> f64 {
        let ny = self.w.output_size();
        let mut py = vec![0.0; ny];
        let mut div = 0.0;
        let mut neg_cond = 0.0;
        for (row, &x) in rows.iter().zip(&self.active) {
            let qx = self.q[x];
            div += qx * row.div;
            neg_cond += qx * row.neg_ent;
            for (p, v) in py.iter_mut().zip(&row.v) {
                *p += qx * v;
            }
        }
        let ent_y: f64 = py.iter().filter(|&&p| p > 0.0).map(|p| -p * p.ln()).sum();
        let mi = (ent_y + neg_cond).max(0.0);
        div + (mi - self.rate).max(0.0)
    }

    /// Exhaustive minimum over the product of per-row candidate lists.
    fn search(&self, lists: &[Vec<RowPoint>]) -> (f64, Vec<usize>) {
        let first = &lists[0];
        let rest = &lists[1..];
        (0..first.len())
            .into_par_iter()
            .map(|i0| {
                let mut idx = vec![0usize; rest.len()];
                let mut best = (f64::INFINITY, Vec::new());
                let mut rows: Vec<&RowPoint> = Vec::with_capacity(lists.len());
                loop {
                    rows.clear();
                    rows.push(&first[i0]);
                    rows.extend(idx.iter().zip(rest).map(|(&i, l)| &l[i]));
                    let c = self.cost(&rows);
                    if c < best.0 {
                        let mut at = vec![i0];
                        at.extend_from_slice(&idx);
                        best = (c, at);
                    }
                    // odometer over the remaining rows
                    let mut pos = 0;
                    loop {
                        if pos == idx.len() {
                            return best;
                        }
                        idx[pos] += 1;
                        if idx[pos] < rest[pos].len() {
                            break;
                        }
                        idx[pos] = 0;
                        pos += 1;
                    }
                }
            })
            .reduce(|| (f64::INFINITY, Vec::new()), |a, b| if b.0 < a.0 { b } else { a })
    }
}

/// Lattice points at spacing `1/(grid·SUBDIVISION)` within `1/grid` (per coordinate) of `center`.
fn local_lattice(center: &[f64], grid: usize, w: &[f64]) -> Vec<RowPoint> {
    let fine = (grid * SUBDIVISION) as f64;
    let c: Vec<i64> = center.iter().map(|v| (v * fine).round() as i64).collect();
    let span = SUBDIVISION as i64;
    let total = fine as i64;
    let ny = center.len();
    let mut out = Vec::new();
    let mut offs = vec![-span; ny - 1];
    loop {
        let mut counts: Vec<i64> = c[..ny - 1].iter().zip(&offs).map(|(a, b)| a + b).collect();
        let last = total - counts.iter().sum::<i64>();
        counts.push(last);
        if counts.iter().all(|&v| v >= 0) && (last - c[ny - 1]).abs() <= span {
            let v: Vec<f64> = counts.iter().map(|&k| k as f64 / fine).collect();
            if let Some(p) = row_point(v, w) {
                out.push(p);
            }
        }
        let mut pos = 0;
        loop {
            if pos == offs.len() {
                return out;
            }
            offs[pos] += 1;
            if offs[pos] <= span {
                break;
            }
            offs[pos] = -span;
            pos += 1;
        }
    }
}

/// `min_V D(V‖W|Q) + [I(Q,V) - R]⁺` on the lattice `V(y|x) ∈ {0, 1/grid, …, 1}`,
/// refined once by a tenfold subdivision around the lattice minimizer.
pub fn primal_exponent_oracle(q: &Dist, w: &Channel, rate: f64, grid: usize, cap: f64) -> Result<PrimalResult> {
    w.check_input(q)?;
    let (nx, ny) = (w.input_size(), w.output_size());
    if nx * ny > MAX_CELLS {
        return Err(Error::resource("primal oracle cells |X|·|Y|", (nx * ny) as f64, MAX_CELLS as f64));
    }
    if grid < 10 {
        return Err(Error::OutOfRange(format!("grid = {grid} must be at least 10")));
    }
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::OutOfRange(format!("rate R = {rate} must be finite and >= 0")));
    }
    let active: Vec<usize> = (0..nx).filter(|&x| q[x] > 0.0).collect();
    let per_row = binom(grid + ny - 1, ny - 1);
    let points = per_row.powi(active.len() as i32);
    if points > cap {
        return Err(Error::resource("primal oracle lattice points", points, cap));
    }
    let lattice = integer_compositions(grid, ny);
    let lists: Vec<Vec<RowPoint>> = active
        .iter()
        .map(|&x| {
            lattice
                .iter()
                .filter_map(|c| row_point(c.iter().map(|&k| k as f64 / grid as f64).collect(), w.row(x)))
                .collect()
        })
        .collect();
    let problem = Problem { q, w, rate, active };
    let (coarse_value, at) = problem.search(&lists);
    let mut center: Vec<Vec<f64>> = at.iter().zip(&lists).map(|(&i, l)| l[i].v.clone()).collect();

    let local: Vec<Vec<RowPoint>> = center
        .iter()
        .zip(&problem.active)
        .map(|(c, &x)| local_lattice(c, grid, w.row(x)))
        .collect();
    let joint: f64 = local.iter().map(|l| l.len() as f64).product();
    let mut value = coarse_value;
    if joint <= JOINT_REFINE_CAP {
        let (v, at) = problem.search(&local);
        if v < value {
            value = v;
            center = at.iter().zip(&local).map(|(&i, l)| l[i].v.clone()).collect();
        }
    } else {
        // cyclic coordinate refinement, one row at a time
        for (r, cands) in local.iter().enumerate() {
            let mut lists: Vec<Vec<RowPoint>> = center
                .iter()
                .zip(&problem.active)
                .map(|(c, &x)| vec![row_point(c.clone(), w.row(x)).expect("finite at the coarse minimizer")])
                .collect();
            lists[r] = cands.clone();
            let (v, at) = problem.search(&lists);
            if v < value {
                value = v;
                center[r] = cands[at[r]].v.clone();
            }
        }
    }

    let mut v = w.rows();
    for (row, &x) in center.into_iter().zip(&problem.active) {
        v[x] = row;
    }
    Ok(PrimalResult {
        value,
        v,
        grid,
        coarse_value,
        resolution: 1.0 / (grid * SUBDIVISION) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::channel::random_coding_exponent;
    use crate::prob::mutual_information;

    #[test]
    fn identity_channel_is_positive_and_decreasing() {
        let q = Dist::uniform(2).unwrap();
        let w = Channel::identity(2).unwrap();
        let mut prev = f64::INFINITY;
        for rate in [0.1, 0.3, 0.5, 0.65] {
            let v = primal_exponent_oracle(&q, &w, rate, 200, 1e7).unwrap().value;
            assert!(v > 0.0 && v < prev);
            assert!((v - (2f64.ln() - rate)).abs() < 1e-9);
            prev = v;
        }
    }

    #[test]
    fn bounded_by_v_equals_w() {
        let q = Dist::new(vec![0.4, 0.6]).unwrap();
        let w = Channel::z(0.3).unwrap();
        let i = mutual_information(&q, &w).unwrap();
        for rate in [0.0, 0.1, 0.2] {
            let v = primal_exponent_oracle(&q, &w, rate, 100, 1e7).unwrap().value;
            assert!(v <= (i - rate).max(0.0) + 1e-12);
        }
    }

    #[test]
    fn agrees_with_dual_on_bsc() {
        let q = Dist::uniform(2).unwrap();
        let w = Channel::bsc(0.1).unwrap();
        for rate in [0.05, 0.1, 0.2] {
            let p = primal_exponent_oracle(&q, &w, rate, 2000, 1e7).unwrap().value;
            let d = random_coding_exponent(&q, &w, rate).unwrap().value;
            assert!((p - d).abs() <= 2e-3, "R={rate}: primal {p} dual {d}");
        }
    }

    #[test]
    fn rejects_large_alphabets_and_coarse_grids() {
        let q = Dist::uniform(4).unwrap();
        let w = Channel::identity(4).unwrap();
        assert!(matches!(
            primal_exponent_oracle(&q, &w, 0.1, 100, 1e7),
            Err(Error::ResourceLimit { .. })
        ));
        let q = Dist::uniform(2).unwrap();
        let w = Channel::bsc(0.1).unwrap();
        assert!(primal_exponent_oracle(&q, &w, 0.1, 5, 1e7).is_err());
        assert!(matches!(
            primal_exponent_oracle(&q, &w, 0.1, 5000, 1e7),
            Err(Error::ResourceLimit { .. })
        ));
    }
}
