//! Error probability given the joint type of the transmitted pair.
//!
//! Under constant-composition random coding a competing codeword is uniform
//! on `T^n(Q)` and independent of everything else, and both decoders score
//! a codeword through its joint type with `y` only. So given the true joint
//! type `J`, each competitor beats or ties the transmitted codeword with the
//! same probability `π(J)`, independently, and
//! `P[error | J] = 1 - (1 - π(J))^{M-1}`.

use crate::decode::{ml_score_joint, ties_with};
use crate::prob::Channel;
use crate::types::{empirical_mi, log_multinomial, JointTypeCounts};

/// Scoring rule shared by the simulators and the oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Score {
    Ml,
    Mmi,
}

impl Score {
    pub(crate) fn of(self, j: &JointTypeCounts, w: &Channel) -> f64 {
        match self {
            Score::Ml => ml_score_joint(j, w),
            Score::Mmi => empirical_mi(j),
        }
    }
}

/// All nonnegative integer matrices with the given row and column sums, row-major.
pub(crate) fn tables_with_margins(rows: &[usize], cols: &[usize]) -> Vec<Vec<usize>> {
    fn rec(cell: usize, rows: &mut [usize], cols: &mut [usize], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let nb = cols.len();
        if cell == rows.len() * nb {
            out.push(cur.clone());
            return;
        }
        let (a, b) = (cell / nb, cell % nb);
        let fixed = b + 1 == nb || a + 1 == rows.len();
        let hi = rows[a].min(cols[b]);
        let lo = if fixed { hi } else { 0 };
        // the last cell of a row or column is forced
        if b + 1 == nb && rows[a] > cols[b] || a + 1 == rows.len() && cols[b] > rows[a] {
            return;
        }
        for c in lo..=hi {
            rows[a] -= c;
            cols[b] -= c;
            cur.push(c);
            rec(cell + 1, rows, cols, cur, out);
            cur.pop();
            rows[a] += c;
            cols[b] += c;
        }
    }
    let mut out = Vec::new();
    rec(0, &mut rows.to_vec(), &mut cols.to_vec(), &mut Vec::new(), &mut out);
    out
}

/// `π(J)`: probability that a uniform codeword of composition `J`'s row sums
/// scores at least as high as (or ties with) the pair of joint type `j`.
pub fn competitor_win_prob(j: &JointTypeCounts, w: &Channel, score: Score) -> f64 {
    let rows = j.row_sums();
    let cols = j.col_sums();
    let (na, nb) = (j.a_size(), j.b_size());
    let s_true = score.of(j, w);
    let log_total = log_multinomial(j.n(), &rows);
    let mut pi = 0.0;
    for t in tables_with_margins(&rows, &cols) {
        let jt = JointTypeCounts::from_flat(na, nb, t);
        if !ties_with(s_true, score.of(&jt, w)) {
            continue;
        }
        let log_count: f64 = (0..nb)
            .map(|b| {
                let col: Vec<usize> = (0..na).map(|a| jt.get(a, b)).collect();
                log_multinomial(cols[b], &col)
            })
            .sum();
        pi += (log_count - log_total).exp();
    }
    pi.min(1.0)
}

/// `1 - (1 - π)^{M-1}`, accurate for tiny `π`.
pub fn error_given_pi(pi: f64, m: u64) -> f64 {
    if m <= 1 {
        0.0
    } else if pi >= 1.0 {
        1.0
    } else {
        -((m - 1) as f64 * (-pi).ln_1p()).exp_m1()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_match_hypergeometric_support() {
        let t = tables_with_margins(&[2, 2], &[3, 1]);
        assert_eq!(t, vec![vec![1, 1, 2, 0], vec![2, 0, 1, 1]]);
        // total count of x' over tables equals |T(Q)|
        let rows = [3, 3];
        let cols = [4, 2];
        let total: f64 = tables_with_margins(&rows, &cols)
            .iter()
            .map(|t| (log_multinomial(4, &[t[0], t[2]]) + log_multinomial(2, &[t[1], t[3]])).exp())
            .sum();
        assert!((total - 20.0).abs() < 1e-9);
        assert_eq!(tables_with_margins(&[2, 1, 1], &[1, 1, 2]).len(), 7);
    }

    #[test]
    fn competitor_probabilities() {
        // noiseless, n = 2, composition (1,1): the competitor equals x w.p. 1/2,
        // otherwise it is the complement, which MMI cannot tell apart
        let w = Channel::identity(2).unwrap();
        let j = JointTypeCounts::new(vec![vec![1, 0], vec![0, 1]]).unwrap();
        assert!((competitor_win_prob(&j, &w, Score::Ml) - 0.5).abs() < 1e-12);
        assert!((competitor_win_prob(&j, &w, Score::Mmi) - 1.0).abs() < 1e-12);
        assert_eq!(error_given_pi(0.5, 1), 0.0);
        assert!((error_given_pi(0.5, 3) - 0.75).abs() < 1e-15);
        assert!((error_given_pi(1e-18, 1_000_001) - 1e-12).abs() < 1e-24);
    }
}
