//! Method of types: integer types and joint types of sequences, type-class
//! sizes, enumeration of all `n`-types and uniform sampling from a type class.
//!
//! Types are kept as integer counts so that two sequences have the same type
//! exactly when their counts compare equal.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::prob::{entropy_of, Alphabet, Dist};
use crate::rng::Seed;

/// Empirical counts of a length-`n` sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TypeCounts {
    #[serde(skip)]
    alphabet: Alphabet,
    counts: Vec<usize>,
    n: usize,
}

impl TypeCounts {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        let alphabet = Alphabet::new(counts.len())?;
        let n: usize = counts.iter().sum();
        if n == 0 {
            return Err(Error::Empty("type counts must sum to at least 1".into()));
        }
        Ok(TypeCounts { alphabet, counts, n })
    }

    pub fn on(alphabet: Alphabet, counts: Vec<usize>) -> Result<Self> {
        if counts.len() != alphabet.size() {
            return Err(Error::ShapeMismatch(format!(
                "{} counts for alphabet of size {}",
                counts.len(),
                alphabet.size()
            )));
        }
        let mut t = TypeCounts::new(counts)?;
        t.alphabet = alphabet;
        Ok(t)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.counts.len()
    }

    pub fn freq(&self, a: usize) -> f64 {
        self.counts[a] as f64 / self.n as f64
    }

    pub fn to_dist(&self) -> Dist {
        let mut p: Vec<f64> = self.counts.iter().map(|&c| c as f64 / self.n as f64).collect();
        // exact rationals may round off by an ulp; fold the residue into the largest entry
        let resid = 1.0 - p.iter().sum::<f64>();
        if let Some(i) = (0..p.len()).max_by_key(|&i| self.counts[i]) {
            p[i] += resid;
        }
        Dist::on(self.alphabet.clone(), p).expect("n-type is a distribution")
    }

    pub fn entropy(&self) -> f64 {
        let p: Vec<f64> = (0..self.size()).map(|a| self.freq(a)).collect();
        entropy_of(&p)
    }

    /// `Σ_a counts[a]·log p(a)`, the log-probability under `p^n` of any
    /// sequence of this type (`-∞` when a used symbol has `p(a) = 0`).
    pub fn log_prob_under(&self, p: &[f64]) -> f64 {
        self.counts
            .iter()
            .zip(p)
            .filter(|(c, _)| **c > 0)
            .map(|(&c, &pa)| if pa > 0.0 { c as f64 * pa.ln() } else { f64::NEG_INFINITY })
            .sum()
    }

    /// The sequence `0^{c_0} 1^{c_1} …`.
    pub fn canonical_sequence(&self) -> Vec<usize> {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(a, &c)| std::iter::repeat_n(a, c))
            .collect()
    }
}

/// Joint counts of a pair of equal-length sequences, row-major over `a × b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JointTypeCounts {
    a: Alphabet,
    b: Alphabet,
    counts: Vec<usize>,
    n: usize,
}

impl JointTypeCounts {
    pub fn new(rows: Vec<Vec<usize>>) -> Result<Self> {
        let a = Alphabet::new(rows.len())?;
        let b = Alphabet::new(rows[0].len())?;
        if rows.iter().any(|r| r.len() != b.size()) {
            return Err(Error::ShapeMismatch("ragged joint count matrix".into()));
        }
        let counts: Vec<usize> = rows.into_iter().flatten().collect();
        let n = counts.iter().sum();
        if n == 0 {
            return Err(Error::Empty("joint type with n = 0".into()));
        }
        Ok(JointTypeCounts { a, b, counts, n })
    }

    pub(crate) fn from_flat(a_size: usize, b_size: usize, counts: Vec<usize>) -> Self {
        let n = counts.iter().sum();
        JointTypeCounts {
            a: Alphabet::new(a_size).expect("nonempty"),
            b: Alphabet::new(b_size).expect("nonempty"),
            counts,
            n,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a_size(&self) -> usize {
        self.a.size()
    }

    pub fn b_size(&self) -> usize {
        self.b.size()
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> usize {
        self.counts[a * self.b.size() + b]
    }

    pub fn flat(&self) -> &[usize] {
        &self.counts
    }

    pub fn row_sums(&self) -> Vec<usize> {
        (0..self.a_size())
            .map(|a| (0..self.b_size()).map(|b| self.get(a, b)).sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<usize> {
        (0..self.b_size())
            .map(|b| (0..self.a_size()).map(|a| self.get(a, b)).sum())
            .collect()
    }

    pub fn first_marginal(&self) -> TypeCounts {
        TypeCounts::on(self.a.clone(), self.row_sums()).expect("n >= 1")
    }

    pub fn second_marginal(&self) -> TypeCounts {
        TypeCounts::on(self.b.clone(), self.col_sums()).expect("n >= 1")
    }

    /// `P̂_{b|a}(b|a)`; zero when symbol `a` never occurs.
    pub fn cond_second_given_first(&self, a: usize, b: usize) -> f64 {
        let r: usize = (0..self.b_size()).map(|bb| self.get(a, bb)).sum();
        if r == 0 {
            0.0
        } else {
            self.get(a, b) as f64 / r as f64
        }
    }

    /// `P̂_{a|b}(a|b)`; zero when symbol `b` never occurs.
    pub fn cond_first_given_second(&self, a: usize, b: usize) -> f64 {
        let c: usize = (0..self.a_size()).map(|aa| self.get(aa, b)).sum();
        if c == 0 {
            0.0
        } else {
            self.get(a, b) as f64 / c as f64
        }
    }
}

fn check_symbols(seq: &[usize], size: usize) -> Result<()> {
    match seq.iter().position(|&s| s >= size) {
        Some(position) => Err(Error::SymbolOutOfRange {
            symbol: seq[position],
            position,
            size,
        }),
        None => Ok(()),
    }
}

pub fn type_of(seq: &[usize], alphabet: &Alphabet) -> Result<TypeCounts> {
    if seq.is_empty() {
        return Err(Error::Empty("sequence".into()));
    }
    check_symbols(seq, alphabet.size())?;
    let mut counts = vec![0usize; alphabet.size()];
    for &s in seq {
        counts[s] += 1;
    }
    TypeCounts::on(alphabet.clone(), counts)
}

pub fn joint_type_of(
    x: &[usize],
    y: &[usize],
    x_alphabet: &Alphabet,
    y_alphabet: &Alphabet,
) -> Result<JointTypeCounts> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.is_empty() {
        return Err(Error::Empty("sequence pair".into()));
    }
    check_symbols(x, x_alphabet.size())?;
    check_symbols(y, y_alphabet.size())?;
    Ok(joint_counts_unchecked(x, y, x_alphabet.size(), y_alphabet.size()))
}

pub(crate) fn joint_counts_unchecked(
    x: &[usize],
    y: &[usize],
    a_size: usize,
    b_size: usize,
) -> JointTypeCounts {
    let mut counts = vec![0usize; a_size * b_size];
    for (&a, &b) in x.iter().zip(y) {
        counts[a * b_size + b] += 1;
    }
    JointTypeCounts::from_flat(a_size, b_size, counts)
}

#[inline]
fn xlogx(c: usize) -> f64 {
    if c == 0 {
        0.0
    } else {
        let c = c as f64;
        c * c.ln()
    }
}

/// Mutual information of the normalized joint type,
/// `Σ p̂(a,b) log( p̂(a,b) / (p̂(a) p̂(b)) )`.
pub fn empirical_mi(j: &JointTypeCounts) -> f64 {
    let n = j.n() as f64;
    let rows = j.row_sums();
    let cols = j.col_sums();
    let mut acc = 0.0;
    for a in 0..j.a_size() {
        for b in 0..j.b_size() {
            let c = j.get(a, b);
            if c > 0 {
                let c = c as f64;
                acc += c * (c * n / (rows[a] as f64 * cols[b] as f64)).ln();
            }
        }
    }
    (acc / n).max(0.0)
}

/// Conditional entropy `H(P̂_{b|a})` of the joint type.
pub fn empirical_cond_entropy(j: &JointTypeCounts) -> f64 {
    let rows: f64 = j.row_sums().into_iter().map(xlogx).sum();
    let cells: f64 = j.flat().iter().map(|&c| xlogx(c)).sum();
    ((rows - cells) / j.n() as f64).max(0.0)
}

/// `log( n! / Π c! )`.
pub fn log_multinomial(n: usize, counts: &[usize]) -> f64 {
    let lf = |k: usize| if k < 2 { 0.0 } else { ln_gamma(k as f64 + 1.0) };
    lf(n) - counts.iter().map(|&c| lf(c)).sum::<f64>()
}

/// Exact `log |T^n(t)|` via log-gamma.
pub fn log_type_class_size(t: &TypeCounts) -> f64 {
    log_multinomial(t.n(), t.counts())
}

/// `C(n + k - 1, k - 1)`, the number of `n`-types on `k` symbols, saturating.
pub fn num_types(k: usize, n: usize) -> f64 {
    let (top, choose) = (n + k - 1, (k - 1).min(n));
    let mut acc: u128 = 1;
    for i in 0..choose {
        acc = match acc.checked_mul((top - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return f64::INFINITY,
        };
    }
    acc as f64
}

/// All ways to write `total` as an ordered sum of `parts` nonnegative
/// integers, in lexicographic order.
pub(crate) fn integer_compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(pos: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for c in 0..=left {
            cur[pos] = c;
            rec(pos + 1, left - c, cur, out);
        }
    }
    let mut out = Vec::new();
    rec(0, total, &mut vec![0; parts], &mut out);
    out
}

/// All `n`-types on `alphabet` in lexicographic order of their count vectors.
pub fn enumerate_types(alphabet: &Alphabet, n: usize, cap: f64) -> Result<Vec<TypeCounts>> {
    if n == 0 {
        return Err(Error::Empty("block length".into()));
    }
    let k = alphabet.size();
    let total = num_types(k, n);
    if total > cap {
        return Err(Error::resource("enumerate_types", total, cap));
    }
    let raw = integer_compositions(n, k);
    let mut out = Vec::with_capacity(raw.len());
    for counts in raw {
        out.push(TypeCounts::on(alphabet.clone(), counts)?);
    }
    Ok(out)
}

/// Uniform element of `T^n(t)`: the multiset of symbols under a uniform
/// random permutation.
pub fn sample_type_class_with<R: Rng + ?Sized>(t: &TypeCounts, rng: &mut R) -> Vec<usize> {
    let mut seq = t.canonical_sequence();
    seq.shuffle(rng);
    seq
}

/// Deterministic in `(t, seed)`.
pub fn sample_type_class(t: &TypeCounts, seed: &Seed) -> Vec<usize> {
    sample_type_class_with(t, &mut seed.rng())
}

/// The `n`-type closest in L1 to `n·d`: floors plus largest remainders,
/// ties (within 1e-9) to the lowest symbol index.
pub fn quantize_to_type(d: &Dist, n: usize) -> Result<TypeCounts> {
    if n == 0 {
        return Err(Error::Empty("block length".into()));
    }
    let targets: Vec<f64> = d.probs().iter().map(|&p| p * n as f64).collect();
    let mut counts: Vec<usize> = targets.iter().map(|t| t.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let deficit = n.saturating_sub(assigned);
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by_key(|&i| {
        let rem = targets[i] - targets[i].floor();
        (std::cmp::Reverse((rem * 1e9).round() as i64), i)
    });
    for &i in order.iter().take(deficit) {
        counts[i] += 1;
    }
    TypeCounts::on(d.alphabet().clone(), counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn ab(k: usize) -> Alphabet {
        Alphabet::new(k).unwrap()
    }

    #[test]
    fn type_of_examples() {
        assert_eq!(type_of(&[0, 0, 1, 1], &ab(2)).unwrap().counts(), &[2, 2]);
        assert_eq!(type_of(&[0, 0, 1, 1], &ab(2)).unwrap().n(), 4);
        assert!(matches!(type_of(&[], &ab(2)), Err(Error::Empty(_))));
        assert_eq!(type_of(&[0, 1, 0, 2, 0], &ab(3)).unwrap().counts(), &[3, 1, 1]);
        assert!(matches!(
            type_of(&[0, 2], &ab(2)),
            Err(Error::SymbolOutOfRange { symbol: 2, position: 1, size: 2 })
        ));
    }

    #[test]
    fn joint_type_examples() {
        let j = joint_type_of(&[0, 0, 1, 1], &[0, 0, 1, 1], &ab(2), &ab(2)).unwrap();
        assert_eq!(j.flat(), &[2, 0, 0, 2]);
        let j = joint_type_of(&[0, 0, 1, 1], &[0, 1, 0, 1], &ab(2), &ab(2)).unwrap();
        assert_eq!(j.flat(), &[1, 1, 1, 1]);
        let j = joint_type_of(&[0, 0, 0], &[1, 1, 1], &ab(2), &ab(2)).unwrap();
        assert_eq!(j.flat(), &[0, 3, 0, 0]);
        assert_eq!(j.first_marginal().counts(), &[3, 0]);
        assert_eq!(j.second_marginal().counts(), &[0, 3]);
        assert!(matches!(
            joint_type_of(&[0, 1], &[0], &ab(2), &ab(2)),
            Err(Error::LengthMismatch(2, 1))
        ));
    }

    #[test]
    fn empirical_mi_examples() {
        let prod = JointTypeCounts::new(vec![vec![1, 1], vec![1, 1]]).unwrap();
        assert_eq!(empirical_mi(&prod), 0.0);
        let diag = JointTypeCounts::new(vec![vec![2, 0], vec![0, 2]]).unwrap();
        assert_abs_diff_eq!(empirical_mi(&diag), 2f64.ln(), epsilon = 1e-15);

        // [[2,1],[0,1]] by the definition, and by H(P̂_y) - H(P̂_{y|x})
        let j = JointTypeCounts::new(vec![vec![2, 1], vec![0, 1]]).unwrap();
        let cells: [(f64, f64, f64); 3] = [(0.5, 0.75, 0.5), (0.25, 0.75, 0.5), (0.25, 0.25, 0.5)];
        let by_def: f64 = cells.iter().map(|(p, r, c)| p * (p / (r * c)).ln()).sum();
        let hy = entropy_of(&[0.5, 0.5]);
        let hyx = 0.75 * entropy_of(&[2.0 / 3.0, 1.0 / 3.0]);
        assert_abs_diff_eq!(by_def, hy - hyx, epsilon = 1e-15);
        assert_abs_diff_eq!(empirical_mi(&j), by_def, epsilon = 1e-14);
        assert_abs_diff_eq!(empirical_cond_entropy(&j), hyx, epsilon = 1e-14);
    }

    #[test]
    fn type_class_size_examples() {
        let t = |c: Vec<usize>| TypeCounts::new(c).unwrap();
        assert_eq!(log_type_class_size(&t(vec![4, 0])), 0.0);
        assert_relative_eq!(log_type_class_size(&t(vec![2, 2])), 6f64.ln(), max_relative = 1e-10);
        assert_relative_eq!(
            log_type_class_size(&t(vec![3, 2, 1])),
            60f64.ln(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn enumerate_types_examples() {
        let ts = enumerate_types(&ab(2), 2, 1e7).unwrap();
        let raw: Vec<&[usize]> = ts.iter().map(|t| t.counts()).collect();
        assert_eq!(raw, vec![&[0, 2][..], &[1, 1], &[2, 0]]);
        assert_eq!(enumerate_types(&ab(1), 9, 1e7).unwrap().len(), 1);
        assert_eq!(enumerate_types(&ab(3), 4, 1e7).unwrap().len(), 15);
        assert!(matches!(
            enumerate_types(&ab(3), 4, 10.0),
            Err(Error::ResourceLimit { .. })
        ));
        assert!(enumerate_types(&ab(2), 0, 1e7).is_err());
    }

    #[test]
    fn sampler_examples() {
        let t = TypeCounts::new(vec![2, 2]).unwrap();
        for v in 0..50 {
            let s = sample_type_class(&t, &Seed::new(v));
            assert_eq!(type_of(&s, &ab(2)).unwrap(), t);
        }
        let t = TypeCounts::new(vec![5, 0]).unwrap();
        assert_eq!(sample_type_class(&t, &Seed::new(9)), vec![0; 5]);
        let t = TypeCounts::new(vec![3, 3]).unwrap();
        assert_eq!(
            sample_type_class(&t, &Seed::new(1)),
            sample_type_class(&t, &Seed::new(1))
        );
    }

    #[test]
    fn quantize_examples() {
        let q = |p: Vec<f64>, n| quantize_to_type(&Dist::new(p).unwrap(), n).unwrap();
        assert_eq!(q(vec![0.5, 0.5], 4).counts(), &[2, 2]);
        assert_eq!(q(vec![1.0 / 3.0, 2.0 / 3.0], 3).counts(), &[1, 2]);
        // floors (4,5), equal remainders 0.5, the unit goes to symbol 0
        assert_eq!(q(vec![0.45, 0.55], 10).counts(), &[5, 5]);
        assert_eq!(q(vec![0.2, 0.3, 0.5], 7).n(), 7);
    }

    fn all_sequences(k: usize, n: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|s| {
                    (0..k).map(move |a| {
                        let mut t = s.clone();
                        t.push(a);
                        t
                    })
                })
                .collect();
        }
        out
    }

    #[test]
    fn class_sizes_match_brute_force() {
        for k in 1..=3 {
            for n in 1..=8 {
                let mut brute: HashMap<Vec<usize>, usize> = HashMap::new();
                for s in all_sequences(k, n) {
                    *brute.entry(type_of(&s, &ab(k)).unwrap().counts().to_vec()).or_default() += 1;
                }
                let types = enumerate_types(&ab(k), n, 1e7).unwrap();
                assert_eq!(types.len(), brute.len());
                for t in &types {
                    let size = log_type_class_size(t).exp().round() as usize;
                    assert_eq!(size, brute[t.counts()], "k={k} n={n} {:?}", t.counts());
                }
                let total = crate::prob::log_sum_exp(types.iter().map(log_type_class_size));
                assert_abs_diff_eq!(total, n as f64 * (k as f64).ln(), epsilon = 1e-9);
            }
        }
    }

    fn seq_pair() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
        (1usize..30).prop_flat_map(|n| {
            (
                proptest::collection::vec(0usize..3, n),
                proptest::collection::vec(0usize..2, n),
            )
        })
    }

    proptest! {
        #[test]
        fn product_of_conditional_type_is_exp_cond_entropy((x, y) in seq_pair()) {
            let j = joint_type_of(&x, &y, &ab(3), &ab(2)).unwrap();
            let direct: f64 = x.iter().zip(&y).map(|(&a, &b)| j.cond_second_given_first(a, b).ln()).sum();
            let via_h = -(x.len() as f64) * empirical_cond_entropy(&j);
            prop_assert!((direct - via_h).abs() <= 1e-10);
        }

        #[test]
        fn sequence_probability_under_own_type((x, _y) in seq_pair()) {
            let t = type_of(&x, &ab(3)).unwrap();
            let direct: f64 = x.iter().map(|&a| t.freq(a).ln()).sum();
            prop_assert!((direct + x.len() as f64 * t.entropy()).abs() <= 1e-10);
        }

        #[test]
        fn sampler_preserves_type(counts in proptest::collection::vec(0usize..6, 1..4), v in any::<u64>()) {
            prop_assume!(counts.iter().sum::<usize>() > 0);
            let t = TypeCounts::new(counts).unwrap();
            let s = sample_type_class(&t, &Seed::new(v));
            prop_assert_eq!(type_of(&s, t.alphabet()).unwrap(), t);
        }

        #[test]
        fn quantize_sums_to_n(p in proptest::collection::vec(0.01f64..1.0, 1..5), n in 1usize..200) {
            let s: f64 = p.iter().sum();
            let mut p: Vec<f64> = p.iter().map(|v| v / s).collect();
            let rest: f64 = p[1..].iter().sum();
            p[0] = 1.0 - rest;
            let d = Dist::new(p).unwrap();
            let t = quantize_to_type(&d, n).unwrap();
            prop_assert_eq!(t.n(), n);
            for (c, q) in t.counts().iter().zip(d.probs()) {
                prop_assert!((*c as f64 - q * n as f64).abs() < 1.0 + 1e-9);
            }
        }
    }
}
