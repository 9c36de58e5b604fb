//! One-dimensional maximization on a closed interval.

use crate::error::Result;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarMax {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
    /// True when the unimodality check failed and a dense grid located the bracket.
    pub used_grid: bool,
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`,
/// stopping when the bracket is narrower than `tol`.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<ScalarMax>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut evaluations = 2;
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
        evaluations += 1;
    }
    let (x, value) = if fc >= fd { (c, fc) } else { (d, fd) };
    Ok(ScalarMax {
        x,
        value,
        evaluations,
        used_grid: false,
    })
}

/// Maximize a function expected to be concave on `[lo, hi]`.
///
/// A coarse 21-point scan checks unimodality first. If it holds, golden-section
/// search runs to `tol`; otherwise a dense grid with step `grid_step` picks the
/// bracket and golden-section refines inside it. The endpoints are always
/// compared, so a maximum on the boundary is returned exactly.
pub fn maximize_on_interval<F>(mut f: F, lo: f64, hi: f64, tol: f64, grid_step: f64) -> Result<ScalarMax>
where
    F: FnMut(f64) -> Result<f64>,
{
    const PROBES: usize = 21;
    let xs: Vec<f64> = (0..PROBES)
        .map(|i| lo + (hi - lo) * i as f64 / (PROBES - 1) as f64)
        .collect();
    let mut ys = Vec::with_capacity(PROBES);
    for &x in &xs {
        ys.push(f(x)?);
    }
    let mut evaluations = PROBES;
    let scale = ys.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let slack = 1e-12 * scale;
    let peak = (0..PROBES)
        .max_by(|&i, &j| ys[i].total_cmp(&ys[j]))
        .expect("nonempty");
    let unimodal = (1..=peak).all(|i| ys[i] >= ys[i - 1] - slack)
        && (peak + 1..PROBES).all(|i| ys[i] <= ys[i - 1] + slack);

    let mut best = ScalarMax {
        x: xs[peak],
        value: ys[peak],
        evaluations,
        used_grid: !unimodal,
    };
    let (a, b) = if unimodal {
        (
            xs[peak.saturating_sub(1)],
            xs[(peak + 1).min(PROBES - 1)],
        )
    } else {
        let steps = ((hi - lo) / grid_step).ceil() as usize;
        let mut arg = lo;
        let mut val = f64::NEG_INFINITY;
        for i in 0..=steps {
            let x = (lo + i as f64 * grid_step).min(hi);
            let v = f(x)?;
            if v > val {
                val = v;
                arg = x;
            }
        }
        evaluations += steps + 1;
        if val > best.value {
            best.x = arg;
            best.value = val;
        }
        ((arg - grid_step).max(lo), (arg + grid_step).min(hi))
    };
    let refined = golden_section_max(&mut f, a, b, tol)?;
    evaluations += refined.evaluations;
    if refined.value > best.value {
        best.x = refined.x;
        best.value = refined.value;
    }
    for x in [lo, hi] {
        let v = f(x)?;
        evaluations += 1;
        if v >= best.value {
            best.x = x;
            best.value = v;
        }
    }
    best.evaluations = evaluations;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_and_boundary_maxima() {
        let m = maximize_on_interval(|x| Ok(-(x - 0.3f64).powi(2)), 0.0, 1.0, 1e-8, 1e-3).unwrap();
        assert!((m.x - 0.3).abs() < 1e-7);
        assert!(!m.used_grid);
        let m = maximize_on_interval(Ok, 0.0, 1.0, 1e-8, 1e-3).unwrap();
        assert_eq!(m.x, 1.0);
        let m = maximize_on_interval(|x| Ok(-x), 0.0, 1.0, 1e-8, 1e-3).unwrap();
        assert_eq!(m.x, 0.0);
        assert_eq!(m.value, 0.0);
    }

    #[test]
    fn falls_back_to_grid_for_bimodal_functions() {
        // two bumps; the taller one at 0.83
        let f = |x: f64| Ok((-(x - 0.17f64).powi(2) * 400.0).exp() + 1.2 * (-(x - 0.83f64).powi(2) * 400.0).exp());
        let m = maximize_on_interval(f, 0.0, 1.0, 1e-9, 1e-3).unwrap();
        assert!(m.used_grid);
        assert!((m.x - 0.83).abs() < 1e-6);
    }
}
