//! Channel-coding exponent under constant-composition random coding.
//!
//! For an input composition `Q` and `ρ ∈ [0, 1]`,
//!
//! ```text
//! E0(Q, ρ) = sup_r  -log Σ_y ( Σ_x Q(x) W(y|x)^{1/(1+ρ)} e^{r(x) - φ_r} )^{1+ρ},   φ_r = Σ_x Q(x) r(x)
//! ```
//!
//! and `E_r(R) = max_{ρ∈[0,1]} E0(Q, ρ) - ρR`. The same value is reached by
//! MMI decoding, which never looks at `W`.
//!
//! The objective is concave in `r` and invariant to `r → r + c`. Its gradient
//! is `(1+ρ)(Q - π_r)` where `π_r(x) = Σ_y w_y γ_r(x|y)` mixes the tilted
//! posteriors `γ_r` with output weights `w_y ∝ (Σ_x …)^{1+ρ}`; the optimum is
//! the `r` whose tilted input marginal reproduces `Q`.

use log::warn;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::optim::maximize_on_interval;
use crate::prob::{log_sum_exp, Channel, CondDist, Dist};
use crate::rng::Seed;

/// Tolerance on `|Δρ|` for the outer `ρ` search.
pub const RHO_TOL: f64 = 1e-6;
/// Step of the fallback `ρ` grid used when the unimodality check fails.
pub const RHO_GRID_STEP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct E0Params {
    pub q: Dist,
    pub w: Channel,
    pub rho: f64,
}

impl E0Params {
    pub fn new(q: Dist, w: Channel, rho: f64) -> Result<Self> {
        w.check_input(&q)?;
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::OutOfRange(format!("rho = {rho} not in [0, 1]")));
        }
        Ok(E0Params { q, w, rho })
    }

    fn with_rho(&self, rho: f64) -> Result<Self> {
        E0Params::new(self.q.clone(), self.w.clone(), rho)
    }
}

/// Auxiliary function `r(·)` on the input alphabet together with `φ_r = Σ Q r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RVector {
    r: Vec<f64>,
    phi: f64,
}

impl RVector {
    pub fn new(r: Vec<f64>, q: &Dist) -> Result<Self> {
        if r.len() != q.len() {
            return Err(Error::ShapeMismatch(format!(
                "r has {} entries for {} inputs",
                r.len(),
                q.len()
            )));
        }
        let phi = r.iter().zip(q.probs()).map(|(a, b)| a * b).sum();
        Ok(RVector { r, phi })
    }

    pub fn zeros(q: &Dist) -> Self {
        RVector {
            r: vec![0.0; q.len()],
            phi: 0.0,
        }
    }

    /// Map an `r` written inside the `U`-optimization form (exponent
    /// `-ρ/(1+ρ)·[r - φ]`) to the convention of [`e0_objective`]:
    /// `r ↦ -ρ/(1+ρ)·r`.
    pub fn from_u_form(r_u: &RVector, rho: f64) -> RVector {
        let c = -rho / (1.0 + rho);
        RVector {
            r: r_u.r.iter().map(|v| c * v).collect(),
            phi: c * r_u.phi,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.r
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// `r(x) - φ_r`.
    pub fn centered(&self, x: usize) -> f64 {
        self.r[x] - self.phi
    }
}

/// Log-domain tables for one `(Q, W, ρ)` restricted to inputs with `Q(x) > 0`.
struct Tilted {
    rho: f64,
    q: Vec<f64>,
    active: Vec<usize>,
    /// `log Q(x) + log W(y|x)/(1+ρ)`, `-∞` where `W(y|x) = 0`.
    la: Vec<Vec<f64>>,
}

struct Eval {
    value: f64,
    grad: Vec<f64>,
    hess: Vec<Vec<f64>>,
}

impl Tilted {
    fn new(p: &E0Params) -> Result<Self> {
        let s = 1.0 / (1.0 + p.rho);
        let active: Vec<usize> = (0..p.q.len()).filter(|&x| p.q[x] > 0.0).collect();
        let la: Vec<Vec<f64>> = active
            .iter()
            .map(|&x| {
                p.w.row(x)
                    .iter()
                    .map(|&w| if w > 0.0 { p.q[x].ln() + s * w.ln() } else { f64::NEG_INFINITY })
                    .collect()
            })
            .collect();
        let reachable = (0..p.w.output_size()).any(|y| la.iter().any(|row| row[y] > f64::NEG_INFINITY));
        if !reachable {
            return Err(Error::DegenerateChannel("no output reachable from the support of Q".into()));
        }
        Ok(Tilted {
            rho: p.rho,
            q: active.iter().map(|&x| p.q[x]).collect(),
            active,
            la,
        })
    }

    fn ny(&self) -> usize {
        self.la[0].len()
    }

    fn phi(&self, r: &[f64]) -> f64 {
        self.q.iter().zip(r).map(|(a, b)| a * b).sum()
    }

    fn log_inner(&self, r: &[f64]) -> Vec<f64> {
        (0..self.ny())
            .map(|y| log_sum_exp(self.la.iter().zip(r).map(|(row, rx)| row[y] + rx)))
            .collect()
    }

    fn value(&self, r: &[f64]) -> f64 {
        let l = self.log_inner(r);
        let log_s = log_sum_exp(l.iter().map(|v| (1.0 + self.rho) * v));
        -log_s + (1.0 + self.rho) * self.phi(r)
    }

    fn eval(&self, r: &[f64]) -> Eval {
        let k = self.q.len();
        let rho = self.rho;
        let l = self.log_inner(r);
        let log_s = log_sum_exp(l.iter().map(|v| (1.0 + rho) * v));
        let value = -log_s + (1.0 + rho) * self.phi(r);
        let mut pi = vec![0.0; k];
        let mut cross = vec![vec![0.0; k]; k];
        for (y, &ly) in l.iter().enumerate() {
            if ly == f64::NEG_INFINITY {
                continue;
            }
            let wy = ((1.0 + rho) * ly - log_s).exp();
            let gamma: Vec<f64> = (0..k).map(|x| (self.la[x][y] + r[x] - ly).exp()).collect();
            for a in 0..k {
                pi[a] += wy * gamma[a];
                for b in 0..k {
                    cross[a][b] += wy * gamma[a] * gamma[b];
                }
            }
        }
        let grad = (0..k).map(|x| (1.0 + rho) * (self.q[x] - pi[x])).collect();
        let hess = (0..k)
            .map(|a| {
                (0..k)
                    .map(|b| {
                        let diag = if a == b { pi[a] } else { 0.0 };
                        (1.0 + rho) * (diag + rho * cross[a][b] - (1.0 + rho) * pi[a] * pi[b])
                    })
                    .collect()
            })
            .collect();
        Eval { value, grad, hess }
    }
}

/// Solve `a·x = b` by Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for c in col..n {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizerConfig {
    pub max_iter: usize,
    pub grad_tol: f64,
    /// Random restarts in `[-2, 2]^|X|` on top of the start at `r = 0`.
    pub restarts: usize,
    pub seed: Seed,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            max_iter: 100_000,
            grad_tol: 1e-9,
            restarts: 4,
            seed: Seed::with_stream(0x6530_6f70, 0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Default)]
pub struct OptimizerDiagnostics {
    pub iterations: usize,
    pub grad_norm: f64,
    pub starts: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ROptimum {
    /// Maximizer, normalized to `φ_r = 0`.
    pub r: RVector,
    pub value: f64,
    pub diagnostics: OptimizerDiagnostics,
}

struct Ascent {
    r: Vec<f64>,
    value: f64,
    grad_norm: f64,
    iterations: usize,
}

fn ascend(t: &Tilted, mut r: Vec<f64>, cfg: &OptimizerConfig) -> Ascent {
    let k = r.len();
    let recenter = |r: &mut Vec<f64>| {
        let phi = t.phi(r);
        r.iter_mut().for_each(|v| *v -= phi);
    };
    recenter(&mut r);
    let mut e = t.eval(&r);
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        let gn = norm(&e.grad);
        if gn <= cfg.grad_tol {
            break;
        }
        iterations += 1;
        // Newton direction on the complement of the constant shift
        let mut h = e.hess.clone();
        h.iter_mut().for_each(|row| row.iter_mut().for_each(|v| *v += 1.0));
        let mut dir = solve(h, e.grad.clone()).unwrap_or_else(|| e.grad.clone());
        let mut slope: f64 = dir.iter().zip(&e.grad).map(|(a, b)| a * b).sum();
        if !(slope > 0.0) {
            dir = e.grad.clone();
            slope = gn * gn;
        }
        let mut step = 1.0;
        let mut accepted = None;
        while step > 1e-20 {
            let mut cand: Vec<f64> = (0..k).map(|i| r[i] + step * dir[i]).collect();
            recenter(&mut cand);
            let v = t.value(&cand);
            if v >= e.value + 1e-4 * step * slope {
                accepted = Some(cand);
                break;
            }
            // near the optimum the decrease test drowns in rounding; fall back to the gradient
            if (v - e.value).abs() <= 8.0 * f64::EPSILON * e.value.abs().max(1.0) {
                let ec = t.eval(&cand);
                if norm(&ec.grad) < gn {
                    accepted = Some(cand);
                    break;
                }
            }
            step *= 0.5;
        }
        match accepted {
            Some(cand) => {
                r = cand;
                e = t.eval(&r);
            }
            None => break,
        }
    }
    Ascent {
        grad_norm: norm(&e.grad),
        value: e.value,
        r,
        iterations,
    }
}

/// `-log Σ_y ( Σ_x Q(x) W(y|x)^{1/(1+ρ)} e^{r(x)-φ_r} )^{1+ρ}`, in log-sum-exp form.
pub fn e0_objective(p: &E0Params, r: &RVector) -> Result<f64> {
    if r.values().len() != p.q.len() {
        return Err(Error::ShapeMismatch("r does not match the input alphabet".into()));
    }
    let t = Tilted::new(p)?;
    let ra: Vec<f64> = t.active.iter().map(|&x| r.values()[x]).collect();
    // φ over the active inputs equals φ_r because Q vanishes elsewhere
    Ok(t.value(&ra))
}

/// Gallager's i.i.d. `E0`: the objective at `r ≡ 0`.
pub fn e0_iid(q: &Dist, w: &Channel, rho: f64) -> Result<f64> {
    let p = E0Params::new(q.clone(), w.clone(), rho)?;
    e0_objective(&p, &RVector::zeros(q))
}

pub fn optimize_r(p: &E0Params) -> Result<ROptimum> {
    optimize_r_with(p, &OptimizerConfig::default())
}

/// Maximize [`e0_objective`] over `r`, from `r = 0` and `cfg.restarts`
/// seeded random starts; the best run wins.
pub fn optimize_r_with(p: &E0Params, cfg: &OptimizerConfig) -> Result<ROptimum> {
    let t = Tilted::new(p)?;
    let k = t.q.len();
    let mut best = ascend(&t, vec![0.0; k], cfg);
    let mut iterations = best.iterations;
    for i in 0..cfg.restarts {
        let mut rng = cfg.seed.substream(0x7273, i as u64);
        let start: Vec<f64> = (0..k).map(|_| rng.gen_range(-2.0..=2.0)).collect();
        let run = ascend(&t, start, cfg);
        iterations += run.iterations;
        if run.value > best.value {
            best = run;
        }
    }
    let converged = best.grad_norm <= cfg.grad_tol;
    if !converged {
        warn!(
            "r-optimization stopped at gradient norm {:.3e} (rho = {})",
            best.grad_norm, p.rho
        );
    }
    let mut r = vec![0.0; p.q.len()];
    for (i, &x) in t.active.iter().enumerate() {
        r[x] = best.r[i];
    }
    Ok(ROptimum {
        r: RVector::new(r, &p.q)?,
        value: best.value,
        diagnostics: OptimizerDiagnostics {
            iterations,
            grad_norm: best.grad_norm,
            starts: cfg.restarts + 1,
            converged,
        },
    })
}

/// `E0(Q, ρ)` for constant-composition codes.
pub fn e0_ml(p: &E0Params) -> Result<f64> {
    Ok(optimize_r(p)?.value)
}

/// Optimal auxiliary channel `U*(x|y) ∝ Q(x) W(y|x)^{1/(1+ρ)} e^{-ρ/(1+ρ)[r(x) - φ_r]}`.
///
/// `r_u` is written in the `U`-optimization convention; [`RVector::from_u_form`]
/// maps it to the convention of [`e0_objective`]. Outputs unreachable from the
/// support of `Q` get the row `Q` itself; they carry no weight in any sum.
pub fn u_star(p: &E0Params, r_u: &RVector) -> Result<CondDist> {
    let (nx, ny) = (p.w.input_size(), p.w.output_size());
    let c = -p.rho / (1.0 + p.rho);
    let s = 1.0 / (1.0 + p.rho);
    let mut rows = Vec::with_capacity(ny);
    let mut reachable = false;
    for y in 0..ny {
        let num: Vec<f64> = (0..nx)
            .map(|x| {
                let w = p.w.prob(x, y);
                if p.q[x] > 0.0 && w > 0.0 {
                    p.q[x] * w.powf(s) * (c * r_u.centered(x)).exp()
                } else {
                    0.0
                }
            })
            .collect();
        let z: f64 = num.iter().sum();
        if z > 0.0 {
            reachable = true;
            let mut row: Vec<f64> = num.iter().map(|v| v / z).collect();
            let resid = 1.0 - row.iter().sum::<f64>();
            let imax = (0..nx).max_by(|&a, &b| row[a].total_cmp(&row[b])).expect("nx >= 1");
            row[imax] += resid;
            rows.push(row);
        } else {
            rows.push(p.q.probs().to_vec());
        }
    }
    if !reachable {
        return Err(Error::DegenerateChannel("every output column is zero on supp(Q)".into()));
    }
    CondDist::new(rows)
}

/// `Σ_{x,y} Q(x) W(y|x) ( Q(x) / (U(x|y) e^{r(x)-φ_r}) )^ρ`, the quantity minimized over `U`.
pub fn u_objective(p: &E0Params, u: &CondDist, r_u: &RVector) -> f64 {
    let mut total = 0.0;
    for x in 0..p.w.input_size() {
        if p.q[x] == 0.0 {
            continue;
        }
        for y in 0..p.w.output_size() {
            let w = p.w.prob(x, y);
            if w == 0.0 {
                continue;
            }
            let uxy = u.prob(y, x);
            let term = if p.rho == 0.0 {
                1.0
            } else if uxy == 0.0 {
                f64::INFINITY
            } else {
                (p.q[x] / (uxy * r_u.centered(x).exp())).powf(p.rho)
            };
            total += p.q[x] * w * term;
        }
    }
    total
}

/// `Σ_y [ Σ_x Q(x) W(y|x)^{1/(1+ρ)} e^{-ρ/(1+ρ)[r(x)-φ_r]} ]^{1+ρ}`, the value of
/// [`u_objective`] at `U*`.
pub fn u_closed_form(p: &E0Params, r_u: &RVector) -> f64 {
    let c = -p.rho / (1.0 + p.rho);
    let s = 1.0 / (1.0 + p.rho);
    (0..p.w.output_size())
        .map(|y| {
            let inner: f64 = (0..p.w.input_size())
                .filter(|&x| p.q[x] > 0.0)
                .map(|x| p.q[x] * p.w.prob(x, y).powf(s) * (c * r_u.centered(x)).exp())
                .sum();
            inner.powf(1.0 + p.rho)
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomCodingExponent {
    pub rate: f64,
    pub value: f64,
    pub rho_star: f64,
    pub r_star: RVector,
    pub diagnostics: OptimizerDiagnostics,
    pub used_grid: bool,
}

/// `E_r(R) = max_{ρ∈[0,1]} E0(Q, ρ) - ρR`.
pub fn random_coding_exponent(q: &Dist, w: &Channel, rate: f64) -> Result<RandomCodingExponent> {
    if !(rate >= 0.0) || !rate.is_finite() {
        return Err(Error::OutOfRange(format!("rate R = {rate} must be finite and >= 0")));
    }
    let base = E0Params::new(q.clone(), w.clone(), 0.0)?;
    let mut diag = OptimizerDiagnostics {
        converged: true,
        ..Default::default()
    };
    let m = maximize_on_interval(
        |rho| {
            let opt = optimize_r(&base.with_rho(rho)?)?;
            diag.iterations = diag.iterations.max(opt.diagnostics.iterations);
            diag.grad_norm = diag.grad_norm.max(opt.diagnostics.grad_norm);
            diag.starts = opt.diagnostics.starts;
            diag.converged &= opt.diagnostics.converged;
            Ok(opt.value - rho * rate)
        },
        0.0,
        1.0,
        RHO_TOL,
        RHO_GRID_STEP,
    )?;
    let at = optimize_r(&base.with_rho(m.x)?)?;
    // E0(Q, 0) = 0 makes the ρ = 0 endpoint worth exactly zero
    let (value, rho_star, r_star) = if m.x == 0.0 || m.value <= 0.0 {
        (0.0, 0.0, RVector::zeros(q))
    } else {
        (m.value, m.x, at.r)
    };
    Ok(RandomCodingExponent {
        rate,
        value,
        rho_star,
        r_star,
        diagnostics: diag,
        used_grid: m.used_grid,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentPoint {
    pub rate: f64,
    pub exponent: f64,
    pub rho_star: f64,
    pub r_star: RVector,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentCurve {
    pub points: Vec<ExponentPoint>,
    pub diagnostics: OptimizerDiagnostics,
    pub grid_fallbacks: usize,
}

/// `E_r(R)` at each requested rate.
pub fn exponent_curve(q: &Dist, w: &Channel, rates: &[f64]) -> Result<ExponentCurve> {
    let mut points = Vec::with_capacity(rates.len());
    let mut diag = OptimizerDiagnostics {
        converged: true,
        ..Default::default()
    };
    let mut grid_fallbacks = 0;
    for &rate in rates {
        let e = random_coding_exponent(q, w, rate)?;
        diag.iterations = diag.iterations.max(e.diagnostics.iterations);
        diag.grad_norm = diag.grad_norm.max(e.diagnostics.grad_norm);
        diag.starts = e.diagnostics.starts;
        diag.converged &= e.diagnostics.converged;
        grid_fallbacks += e.used_grid as usize;
        points.push(ExponentPoint {
            rate,
            exponent: e.value,
            rho_star: e.rho_star,
            r_star: e.r_star,
        });
    }
    Ok(ExponentCurve {
        points,
        diagnostics: diag,
        grid_fallbacks,
    })
}
