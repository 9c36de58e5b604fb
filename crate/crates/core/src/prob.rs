//! Finite alphabets, distributions, channels and the information functionals
//! built on them. All logarithms are natural (nats).
//!
//! Conventions: `0·log 0 = 0`, and `x·log(x/0) = +∞` for `x > 0`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance on `Σ p = 1` for distributions and channel rows.
pub const PROB_TOL: f64 = 1e-12;

/// A finite alphabet `{0, …, size-1}` with optional display labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Alphabet {
    size: usize,
    labels: Option<Vec<String>>,
}

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidAlphabet("size must be at least 1".into()));
        }
        Ok(Alphabet { size, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        let mut alphabet = Alphabet::new(labels.len())?;
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::InvalidAlphabet(format!("duplicate label {l:?}")));
            }
        }
        alphabet.labels = Some(labels);
        Ok(alphabet)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }
}

fn check_prob_vector(p: &[f64], tol: f64, what: &str) -> Result<()> {
    if let Some((i, v)) = p.iter().enumerate().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidDistribution(format!(
            "{what}: entry {i} = {v} is not a finite non-negative number"
        )));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(Error::InvalidDistribution(format!(
            "{what}: sums to {sum:.15}, not 1"
        )));
    }
    Ok(())
}

/// A probability vector on a finite alphabet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dist {
    alphabet: Alphabet,
    p: Vec<f64>,
}

impl Dist {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        let alphabet = Alphabet::new(p.len())?;
        Dist::on(alphabet, p)
    }

    pub fn on(alphabet: Alphabet, p: Vec<f64>) -> Result<Self> {
        if p.len() != alphabet.size() {
            return Err(Error::ShapeMismatch(format!(
                "distribution has {} entries for an alphabet of size {}",
                p.len(),
                alphabet.size()
            )));
        }
        check_prob_vector(&p, PROB_TOL, "distribution")?;
        Ok(Dist { alphabet, p })
    }

    pub fn uniform(size: usize) -> Result<Self> {
        let alphabet = Alphabet::new(size)?;
        Ok(Dist {
            alphabet,
            p: vec![1.0 / size as f64; size],
        })
    }

    pub fn point_mass(size: usize, symbol: usize) -> Result<Self> {
        let alphabet = Alphabet::new(size)?;
        if symbol >= size {
            return Err(Error::OutOfRange(format!("symbol {symbol} >= {size}")));
        }
        let mut p = vec![0.0; size];
        p[symbol] = 1.0;
        Ok(Dist { alphabet, p })
    }

    /// `λ·self + (1-λ)·other`.
    pub fn mix(&self, other: &Dist, lambda: f64) -> Result<Dist> {
        if self.len() != other.len() {
            return Err(Error::ShapeMismatch("mixing distributions of different sizes".into()));
        }
        let p = self
            .p
            .iter()
            .zip(&other.p)
            .map(|(a, b)| lambda * a + (1.0 - lambda) * b)
            .collect();
        Dist::on(self.alphabet.clone(), p)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn probs(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.len() as f64;
        self.p.iter().all(|&v| (v - u).abs() <= PROB_TOL)
    }
}

impl std::ops::Index<usize> for Dist {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.p[i]
    }
}

/// Row-stochastic matrix `W(y|x)` of a discrete memoryless channel.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Channel {
    input: Alphabet,
    output: Alphabet,
    w: Vec<f64>,
}

impl Channel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        Channel::with_tolerance(rows, PROB_TOL)
    }

    /// Like [`Channel::new`] but with a caller-chosen row-sum tolerance.
    pub fn with_tolerance(rows: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        let input = Alphabet::new(rows.len())?;
        let cols = rows[0].len();
        let output = Alphabet::new(cols)?;
        let mut w = Vec::with_capacity(rows.len() * cols);
        for (x, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::ShapeMismatch(format!(
                    "channel row {x} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            check_prob_vector(row, tol, &format!("channel row {x}"))?;
            w.extend_from_slice(row);
        }
        Ok(Channel { input, output, w })
    }

    /// Binary symmetric channel with crossover `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        Channel::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Binary erasure channel; output 1 is the erasure symbol.
    pub fn bec(e: f64) -> Result<Self> {
        Channel::new(vec![vec![1.0 - e, e, 0.0], vec![0.0, e, 1.0 - e]])
    }

    /// Z-channel: input 0 is noiseless, input 1 flips to 0 with probability `p`.
    pub fn z(p: f64) -> Result<Self> {
        Channel::new(vec![vec![1.0, 0.0], vec![p, 1.0 - p]])
    }

    /// Noiseless channel on `size` symbols.
    pub fn identity(size: usize) -> Result<Self> {
        Channel::new(
            (0..size)
                .map(|x| (0..size).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
                .collect(),
        )
    }

    pub fn input(&self) -> &Alphabet {
        &self.input
    }

    pub fn output(&self) -> &Alphabet {
        &self.output
    }

    pub fn input_size(&self) -> usize {
        self.input.size()
    }

    pub fn output_size(&self) -> usize {
        self.output.size()
    }

    #[inline]
    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.w[x * self.output.size() + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        let c = self.output.size();
        &self.w[x * c..(x + 1) * c]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.input_size()).map(|x| self.row(x).to_vec()).collect()
    }

    /// Output distribution `Σ_x q(x) W(y|x)`.
    pub fn output_marginal(&self, q: &Dist) -> Result<Vec<f64>> {
        self.check_input(q)?;
        let mut py = vec![0.0; self.output_size()];
        for x in 0..self.input_size() {
            for (y, v) in py.iter_mut().enumerate() {
                *v += q[x] * self.prob(x, y);
            }
        }
        Ok(py)
    }

    pub(crate) fn check_input(&self, q: &Dist) -> Result<()> {
        if q.len() != self.input_size() {
            return Err(Error::ShapeMismatch(format!(
                "input distribution of size {} for a channel with {} inputs",
                q.len(),
                self.input_size()
            )));
        }
        Ok(())
    }

    /// True when every row is a permutation of the first row and every
    /// column a permutation of the first column.
    pub fn is_symmetric(&self) -> bool {
        let sorted = |mut v: Vec<f64>| {
            v.sort_by(f64::total_cmp);
            v
        };
        let r0 = sorted(self.row(0).to_vec());
        let c0 = sorted((0..self.input_size()).map(|x| self.prob(x, 0)).collect());
        (0..self.input_size()).all(|x| sorted(self.row(x).to_vec()) == r0)
            && (0..self.output_size())
                .all(|y| sorted((0..self.input_size()).map(|x| self.prob(x, y)).collect()) == c0)
    }
}

/// A conditional distribution `u(of | given)`, one row per `given` symbol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CondDist {
    given: Alphabet,
    of: Alphabet,
    u: Vec<f64>,
}

impl CondDist {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let given = Alphabet::new(rows.len())?;
        let cols = rows[0].len();
        let of = Alphabet::new(cols)?;
        let mut u = Vec::with_capacity(rows.len() * cols);
        for (g, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::ShapeMismatch(format!("row {g} has {} entries", row.len())));
            }
            check_prob_vector(row, PROB_TOL, &format!("conditional row {g}"))?;
            u.extend_from_slice(row);
        }
        Ok(CondDist { given, of, u })
    }

    pub fn given_size(&self) -> usize {
        self.given.size()
    }

    pub fn of_size(&self) -> usize {
        self.of.size()
    }

    #[inline]
    pub fn prob(&self, given: usize, of: usize) -> f64 {
        self.u[given * self.of.size() + of]
    }

    pub fn row(&self, given: usize) -> &[f64] {
        let c = self.of.size();
        &self.u[given * c..(given + 1) * c]
    }
}

/// `log Σ exp(v)`, returning `-∞` for an empty or all `-∞` input.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let v: Vec<f64> = values.into_iter().collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `-Σ p log p` of a raw probability slice.
pub fn entropy_of(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.ln())
        .sum::<f64>()
}

pub fn entropy(d: &Dist) -> f64 {
    entropy_of(d.probs())
}

/// Conditional relative entropy `Σ_y marg(y) Σ_x p(x|y) log(p(x|y)/q(x|y))`.
pub fn kl_cond(p: &CondDist, q: &CondDist, marg: &Dist) -> Result<f64> {
    if p.given_size() != q.given_size()
        || p.of_size() != q.of_size()
        || marg.len() != p.given_size()
    {
        return Err(Error::ShapeMismatch("kl_cond operands".into()));
    }
    let mut total = 0.0;
    for g in 0..p.given_size() {
        if marg[g] == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for s in 0..p.of_size() {
            let a = p.prob(g, s);
            if a == 0.0 {
                continue;
            }
            let b = q.prob(g, s);
            if b == 0.0 {
                return Err(Error::AbsoluteContinuity { given: g, symbol: s });
            }
            row += a * (a / b).ln();
        }
        total += marg[g] * row;
    }
    Ok(total.max(0.0))
}

/// `I(Q, W)` in nats.
pub fn mutual_information(q: &Dist, w: &Channel) -> Result<f64> {
    let py = w.output_marginal(q)?;
    let mut mi = 0.0;
    for x in 0..w.input_size() {
        if q[x] == 0.0 {
            continue;
        }
        for (y, &pyv) in py.iter().enumerate() {
            let wv = w.prob(x, y);
            if wv > 0.0 {
                mi += q[x] * wv * (wv / pyv).ln();
            }
        }
    }
    Ok(mi.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(entropy(&Dist::uniform(2).unwrap()), 2f64.ln(), epsilon = 1e-15);
        assert_eq!(entropy(&Dist::point_mass(3, 1).unwrap()), 0.0);
        // -(0.1 ln 0.1 + 0.9 ln 0.9)
        let h = entropy(&Dist::new(vec![0.1, 0.9]).unwrap());
        assert_abs_diff_eq!(h, 0.325_082_973_391_448_2, epsilon = 1e-12);
    }

    #[test]
    fn kl_cond_examples() {
        let p = CondDist::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let q = CondDist::new(vec![vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let u = Dist::uniform(2).unwrap();
        assert_abs_diff_eq!(kl_cond(&p, &q, &u).unwrap(), 2f64.ln(), epsilon = 1e-15);
        assert_eq!(kl_cond(&p, &p, &u).unwrap(), 0.0);

        // zero marginal mass on row 1 hides the mismatch there
        let q2 = CondDist::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let m = Dist::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(kl_cond(&p, &q2, &m).unwrap(), 0.0);
        assert!(matches!(
            kl_cond(&p, &q2, &u),
            Err(Error::AbsoluteContinuity { given: 1, symbol: 1 })
        ));
    }

    #[test]
    fn mutual_information_examples() {
        let u = Dist::uniform(2).unwrap();
        let mi = mutual_information(&u, &Channel::identity(2).unwrap()).unwrap();
        assert_abs_diff_eq!(mi, 2f64.ln(), epsilon = 1e-15);
        let flat = Channel::new(vec![vec![0.3, 0.7], vec![0.3, 0.7]]).unwrap();
        assert_abs_diff_eq!(mutual_information(&u, &flat).unwrap(), 0.0, epsilon = 1e-15);
        // log 2 - H_b(0.1)
        let mi = mutual_information(&u, &Channel::bsc(0.1).unwrap()).unwrap();
        assert_abs_diff_eq!(mi, 2f64.ln() - 0.325_082_973_391_448_2, epsilon = 1e-12);
        assert_abs_diff_eq!(mi, 0.368064, epsilon = 1e-6);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Alphabet::new(0).is_err());
        assert!(Alphabet::with_labels(vec!["a".into(), "a".into()]).is_err());
        assert!(Dist::new(vec![0.5, 0.6]).is_err());
        assert!(Dist::new(vec![-0.1, 1.1]).is_err());
        // no silent renormalization
        assert!(Dist::new(vec![0.5, 0.5 + 1e-10]).is_err());
        assert!(Channel::new(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
        assert!(CondDist::new(vec![vec![0.2, 0.2]]).is_err());
    }

    #[test]
    fn log_sum_exp_edges() {
        assert_eq!(log_sum_exp(Vec::new()), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(vec![f64::NEG_INFINITY, 0.0]), 0.0);
        assert_abs_diff_eq!(log_sum_exp(vec![1000.0, 1000.0]), 1000.0 + 2f64.ln());
    }

    fn dist_strategy(k: usize) -> impl Strategy<Value = Dist> {
        proptest::collection::vec(0.0f64..1.0, k).prop_filter_map("nonzero", |v| {
            let s: f64 = v.iter().sum();
            if s < 1e-6 {
                return None;
            }
            let mut p: Vec<f64> = v.iter().map(|x| x / s).collect();
            let rest: f64 = p[1..].iter().sum();
            p[0] = (1.0 - rest).max(0.0);
            Dist::new(p).ok()
        })
    }

    fn channel_strategy(rows: usize, cols: usize) -> impl Strategy<Value = Channel> {
        proptest::collection::vec(dist_strategy(cols), rows)
            .prop_filter_map("channel", |ds| {
                Channel::new(ds.iter().map(|d| d.probs().to_vec()).collect()).ok()
            })
    }

    proptest! {
        #[test]
        fn entropy_is_concave(a in dist_strategy(4), b in dist_strategy(4), lambda in 0.0f64..=1.0) {
            let m = a.mix(&b, lambda).unwrap();
            prop_assert!(entropy(&m) >= lambda * entropy(&a) + (1.0 - lambda) * entropy(&b) - 1e-12);
            prop_assert!(entropy(&m) <= 4f64.ln() + 1e-12);
        }

        #[test]
        fn kl_cond_nonnegative(
            p in channel_strategy(3, 3),
            q in channel_strategy(3, 3),
            m in dist_strategy(3),
        ) {
            let p = CondDist::new(p.rows()).unwrap();
            let q = CondDist::new(q.rows()).unwrap();
            match kl_cond(&p, &q, &m) {
                Ok(v) => prop_assert!(v >= 0.0),
                Err(e) => { let ok = matches!(e, Error::AbsoluteContinuity { .. }); prop_assert!(ok) }
            }
            prop_assert_eq!(kl_cond(&p, &p, &m).unwrap(), 0.0);
        }

        #[test]
        fn mutual_information_bounded(q in dist_strategy(3), w in channel_strategy(3, 4)) {
            let mi = mutual_information(&q, &w).unwrap();
            let hy = entropy_of(&w.output_marginal(&q).unwrap());
            prop_assert!(mi >= 0.0);
            prop_assert!(mi <= entropy(&q).min(hy) + 1e-12);
        }
    }
}
