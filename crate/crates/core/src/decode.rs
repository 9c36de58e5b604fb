//! Maximum-likelihood, MMI and generalized MMI decoding.
//!
//! Scores are log-domain and summed in ascending index order. A decode is
//! `Ambiguous` whenever more than one candidate attains the maximum; two
//! scores tie when they differ by at most `TIE_TOL·max(1, |best|)`. Distinct
//! joint types at desk-scale block lengths are separated by far more than
//! that, while one joint type scored through different summation orders
//! agrees to a few ulps.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::jscc::JsccDesign;
use crate::prob::{Alphabet, Channel};
use crate::types::{
    empirical_mi, joint_counts_unchecked, sample_type_class_with, type_of, JointTypeCounts,
    TypeCounts,
};

/// Relative tolerance for tie detection.
pub const TIE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Winner {
    Unique(usize),
    Ambiguous,
}

impl Winner {
    pub fn index(self) -> Option<usize> {
        match self {
            Winner::Unique(i) => Some(i),
            Winner::Ambiguous => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecodeResult {
    pub winner: Winner,
    pub scores: Vec<f64>,
}

pub(crate) fn ties_with(best: f64, s: f64) -> bool {
    if best == f64::NEG_INFINITY {
        return s == f64::NEG_INFINITY;
    }
    s >= best - TIE_TOL * best.abs().max(1.0)
}

impl DecodeResult {
    pub fn from_scores(scores: Vec<f64>) -> Self {
        let best = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut it = scores.iter().enumerate().filter(|(_, &s)| ties_with(best, s));
        let winner = match (it.next(), it.next()) {
            (Some((i, _)), None) => Winner::Unique(i),
            _ => Winner::Ambiguous,
        };
        DecodeResult { winner, scores }
    }

    /// Every index attaining the maximum score.
    pub fn tie_set(&self) -> Vec<usize> {
        let best = self.scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        self.scores
            .iter()
            .enumerate()
            .filter(|(_, &s)| ties_with(best, s))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Constant-composition codebook: `M` codewords of length `n`, all of one type.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    rows: Vec<Vec<usize>>,
    composition: TypeCounts,
}

impl Codebook {
    pub fn new(rows: Vec<Vec<usize>>, composition: TypeCounts) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("codebook".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != composition.n() {
                return Err(Error::LengthMismatch(row.len(), composition.n()));
            }
            if type_of(row, composition.alphabet())? != composition {
                return Err(Error::CompositionViolated { row: i });
            }
        }
        Ok(Codebook { rows, composition })
    }

    /// `m` codewords drawn independently and uniformly from `T^n(composition)`.
    pub fn random<R: Rng + ?Sized>(composition: &TypeCounts, m: usize, rng: &mut R) -> Self {
        let rows = (0..m)
            .map(|_| sample_type_class_with(composition, rng))
            .collect();
        Codebook {
            rows,
            composition: composition.clone(),
        }
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.composition.n()
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn row(&self, m: usize) -> &[usize] {
        &self.rows[m]
    }

    pub fn composition(&self) -> &TypeCounts {
        &self.composition
    }

    fn check_output(&self, y: &[usize]) -> Result<()> {
        if y.len() != self.n() {
            return Err(Error::LengthMismatch(y.len(), self.n()));
        }
        Ok(())
    }
}

fn output_size(y: &[usize]) -> usize {
    y.iter().copied().max().map_or(1, |m| m + 1)
}

/// `Σ_{a,b} N(a,b) log W(b|a)`: the log-likelihood of any pair with joint type `j`.
pub(crate) fn ml_score_joint(j: &JointTypeCounts, w: &Channel) -> f64 {
    let mut s = 0.0;
    for a in 0..j.a_size() {
        for b in 0..j.b_size() {
            let c = j.get(a, b);
            if c > 0 {
                let p = w.prob(a, b);
                s += if p > 0.0 { c as f64 * p.ln() } else { f64::NEG_INFINITY };
            }
        }
    }
    s
}

pub fn decode_ml(cb: &Codebook, y: &[usize], w: &Channel) -> Result<DecodeResult> {
    cb.check_output(y)?;
    if output_size(y) > w.output_size() {
        return Err(Error::SymbolOutOfRange {
            symbol: output_size(y) - 1,
            position: y.iter().position(|&b| b + 1 == output_size(y)).unwrap_or(0),
            size: w.output_size(),
        });
    }
    let scores = cb
        .rows()
        .iter()
        .map(|x| x.iter().zip(y).map(|(&a, &b)| w.prob(a, b).ln()).sum())
        .collect();
    Ok(DecodeResult::from_scores(scores))
}

/// MMI: maximize the empirical mutual information of `(x(m), y)`.
pub fn decode_mmi(cb: &Codebook, y: &[usize]) -> Result<DecodeResult> {
    cb.check_output(y)?;
    let (a, b) = (cb.composition().size(), output_size(y));
    let scores = cb
        .rows()
        .iter()
        .map(|x| empirical_mi(&joint_counts_unchecked(x, y, a, b)))
        .collect();
    Ok(DecodeResult::from_scores(scores))
}

/// `Σ_i log P̂_{y|x}(y_i | x_i)`, the log of the conditional-type product.
fn log_cond_type_product(x: &[usize], y: &[usize], a: usize, b: usize) -> f64 {
    let j = joint_counts_unchecked(x, y, a, b);
    let rows = j.row_sums();
    x.iter()
        .zip(y)
        .map(|(&xa, &yb)| (j.get(xa, yb) as f64 / rows[xa] as f64).ln())
        .sum()
}

/// MMI in its conditional-type product form: maximize `Π_i P̂_{y|x(m)}(y_i|x_{m,i})`.
pub fn decode_mmi_product_form(cb: &Codebook, y: &[usize]) -> Result<DecodeResult> {
    cb.check_output(y)?;
    let (a, b) = (cb.composition().size(), output_size(y));
    let scores = cb
        .rows()
        .iter()
        .map(|x| log_cond_type_product(x, y, a, b))
        .collect();
    Ok(DecodeResult::from_scores(scores))
}

/// Codebook for joint source-channel coding: one codeword per source
/// sequence `v ∈ V^k`, drawn from the type class of the composition of the
/// class containing `v`. Source sequences are indexed lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct JsccCodebook {
    k: usize,
    v_size: usize,
    codewords: Vec<Vec<usize>>,
    class_of: Vec<usize>,
    compositions: Vec<TypeCounts>,
}

impl JsccCodebook {
    pub fn new(
        k: usize,
        v_size: usize,
        codewords: Vec<Vec<usize>>,
        class_of: Vec<usize>,
        compositions: Vec<TypeCounts>,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::Empty("source length k".into()));
        }
        let count = (v_size as f64).powi(k as i32);
        if codewords.len() as f64 != count || class_of.len() != codewords.len() {
            return Err(Error::ShapeMismatch(format!(
                "need {count} codewords and class labels, got {} and {}",
                codewords.len(),
                class_of.len()
            )));
        }
        for (v, (x, &c)) in codewords.iter().zip(&class_of).enumerate() {
            let q = compositions
                .get(c)
                .ok_or_else(|| Error::OutOfRange(format!("class {c} of source index {v}")))?;
            if x.len() != q.n() || type_of(x, q.alphabet())? != *q {
                return Err(Error::CompositionViolated { row: v });
            }
        }
        for (i, q) in compositions.iter().enumerate() {
            let members = class_of.iter().filter(|&&c| c == i).count() as f64;
            let class_size = crate::types::log_type_class_size(q);
            if members > 0.0 && class_size < members.ln() - 1e-9 {
                return Err(Error::InfeasibleComposition {
                    class: i,
                    log_type_class: class_size,
                    log_class: members.ln(),
                });
            }
        }
        Ok(JsccCodebook {
            k,
            v_size,
            codewords,
            class_of,
            compositions,
        })
    }

    /// Draw every codeword independently from the design's per-class type classes.
    pub fn random<R: Rng + ?Sized>(design: &JsccDesign, rng: &mut R) -> Result<Self> {
        let k = design.source().k;
        let v_size = design.source().v_alphabet.size();
        let total = (v_size as f64).powi(k as i32);
        let mut codewords = Vec::with_capacity(total as usize);
        let mut class_of = Vec::with_capacity(total as usize);
        for idx in 0..total as usize {
            let v = source_sequence(idx, k, v_size);
            let c = design.class_of_sequence(&v)?;
            codewords.push(sample_type_class_with(&design.compositions()[c], rng));
            class_of.push(c);
        }
        Ok(JsccCodebook {
            k,
            v_size,
            codewords,
            class_of,
            compositions: design.compositions().to_vec(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.compositions[0].n()
    }

    pub fn v_size(&self) -> usize {
        self.v_size
    }

    pub fn len(&self) -> usize {
        self.codewords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codewords.is_empty()
    }

    pub fn codeword(&self, v_index: usize) -> &[usize] {
        &self.codewords[v_index]
    }

    pub fn class_of(&self, v_index: usize) -> usize {
        self.class_of[v_index]
    }

    pub fn compositions(&self) -> &[TypeCounts] {
        &self.compositions
    }

    fn x_size(&self) -> usize {
        self.compositions[0].size()
    }

    fn check(&self, y: &[usize], cap: f64) -> Result<()> {
        if y.len() != self.n() {
            return Err(Error::LengthMismatch(y.len(), self.n()));
        }
        if self.codewords.len() as f64 > cap {
            return Err(Error::resource(
                "generalized MMI candidates",
                self.codewords.len() as f64,
                cap,
            ));
        }
        Ok(())
    }
}

/// The `idx`-th source sequence of `V^k` in lexicographic order.
pub fn source_sequence(mut idx: usize, k: usize, v_size: usize) -> Vec<usize> {
    let mut v = vec![0; k];
    for slot in v.iter_mut().rev() {
        *slot = idx % v_size;
        idx /= v_size;
    }
    v
}

/// Inverse of [`source_sequence`].
pub fn source_index(v: &[usize], v_size: usize) -> usize {
    v.iter().fold(0, |acc, &s| acc * v_size + s)
}

/// Generalized MMI: maximize `I(P̂_{x(v)y}) - (k/n)·H(P̂_v)` over all `v ∈ V^k`.
/// Scores are reported multiplied by `n`. The winner indexes `V^k` lexicographically.
pub fn decode_gmmi(jcb: &JsccCodebook, y: &[usize], cap: f64) -> Result<DecodeResult> {
    jcb.check(y, cap)?;
    let n = jcb.n() as f64;
    let (a, b) = (jcb.x_size(), output_size(y));
    let v_alphabet = Alphabet::new(jcb.v_size)?;
    let scores = (0..jcb.len())
        .map(|idx| {
            let v = source_sequence(idx, jcb.k, jcb.v_size);
            let hv = type_of(&v, &v_alphabet).expect("valid source symbols").entropy();
            let mi = empirical_mi(&joint_counts_unchecked(jcb.codeword(idx), y, a, b));
            n * mi - jcb.k as f64 * hv
        })
        .collect();
    Ok(DecodeResult::from_scores(scores))
}

/// Generalized MMI in product form:
/// maximize `Π_ℓ P̂_v(v_ℓ) · Π_ℓ P̂_{y|x(v)}(y_ℓ | x_ℓ)`.
pub fn decode_gmmi_product_form(jcb: &JsccCodebook, y: &[usize], cap: f64) -> Result<DecodeResult> {
    jcb.check(y, cap)?;
    let (a, b) = (jcb.x_size(), output_size(y));
    let v_alphabet = Alphabet::new(jcb.v_size)?;
    let scores = (0..jcb.len())
        .map(|idx| {
            let v = source_sequence(idx, jcb.k, jcb.v_size);
            let t = type_of(&v, &v_alphabet).expect("valid source symbols");
            let src: f64 = v.iter().map(|&s| t.freq(s).ln()).sum();
            src + log_cond_type_product(jcb.codeword(idx), y, a, b)
        })
        .collect();
    Ok(DecodeResult::from_scores(scores))
}

/// MAP decoding: maximize `log P^k(v) + log W^n(y | x(v))`.
pub fn decode_map(
    jcb: &JsccCodebook,
    y: &[usize],
    w: &Channel,
    p_v: &[f64],
    cap: f64,
) -> Result<DecodeResult> {
    jcb.check(y, cap)?;
    let scores = (0..jcb.len())
        .map(|idx| {
            let v = source_sequence(idx, jcb.k, jcb.v_size);
            let src: f64 = v.iter().map(|&s| p_v[s].ln()).sum();
            let ch: f64 = jcb
                .codeword(idx)
                .iter()
                .zip(y)
                .map(|(&a, &b)| w.prob(a, b).ln())
                .sum();
            src + ch
        })
        .collect();
    Ok(DecodeResult::from_scores(scores))
}
