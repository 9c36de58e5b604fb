//! Exact ensemble-average error probabilities for small configurations.

use rayon::prelude::*;

use super::pairwise::{competitor_win_prob, error_given_pi};
use super::{score_of, DecoderKind, SimConfig};
use crate::decode::{decode_ml, decode_mmi, Codebook, Winner};
use crate::error::{Error, Result};
use crate::types::{integer_compositions, log_multinomial, type_of, JointTypeCounts};

fn channel_only(cfg: &SimConfig) -> Result<()> {
    if cfg.jscc.is_some() || cfg.decoder == DecoderKind::Gmmi {
        return Err(Error::InvalidType("exact evaluation covers channel coding with ml or mmi".into()));
    }
    Ok(())
}

/// Exact `p̄_e` at block length `n` by brute force: every codebook in
/// `T^n(Q)^M`, every output in `Y^n`, decoded by the real decoders.
///
/// The transmitted message and codeword are fixed (message 0, the sorted
/// sequence of type `Q`); both choices leave `p̄_e` unchanged because the
/// ensemble and the channel are invariant under message relabeling and
/// coordinate permutations. The enumeration has `|T|^{M-1}·|Y|^n` terms.
pub fn exact_small_pe(cfg: &SimConfig, n: usize) -> Result<f64> {
    channel_only(cfg)?;
    let comp = cfg.composition_at(n)?;
    let m = cfg.messages_at(n)?;
    if m == 1 {
        return Ok(0.0);
    }
    let w = &cfg.channel;
    let (nx, ny) = (w.input_size() as f64, w.output_size() as f64);
    let cap = cfg.limits.max_exact_terms;
    if nx.powi(n as i32) > cap {
        return Err(Error::resource("input sequences |X|^n", nx.powi(n as i32), cap));
    }
    let class_size = log_multinomial(n, comp.counts()).exp().round();
    let terms = class_size.powf((m - 1) as f64) * ny.powi(n as i32);
    if terms > cap {
        return Err(Error::resource("exact error-probability terms", terms, cap));
    }
    let members: Vec<Vec<usize>> = (0..nx.powi(n as i32) as usize)
        .map(|i| digits(i, n, w.input_size()))
        .filter(|x| type_of(x, comp.alphabet()).is_ok_and(|t| t == comp))
        .collect();
    let x0 = comp.canonical_sequence();
    let m = m as usize;
    let weight = members.len() as f64;
    (0..ny.powi(n as i32) as usize)
        .into_par_iter()
        .map(|iy| {
            let y = digits(iy, n, w.output_size());
            let p_y: f64 = x0.iter().zip(&y).map(|(&a, &b)| w.prob(a, b)).product();
            if p_y == 0.0 {
                return Ok(0.0);
            }
            let mut idx = vec![0usize; m - 1];
            let mut errors = 0u64;
            loop {
                let mut rows = Vec::with_capacity(m);
                rows.push(x0.clone());
                rows.extend(idx.iter().map(|&i| members[i].clone()));
                let cb = Codebook::new(rows, comp.clone())?;
                let r = match cfg.decoder {
                    DecoderKind::Ml => decode_ml(&cb, &y, w)?,
                    _ => decode_mmi(&cb, &y)?,
                };
                errors += (r.winner != Winner::Unique(0)) as u64;
                let mut pos = 0;
                loop {
                    if pos == idx.len() {
                        return Ok(p_y * errors as f64 / weight.powi(m as i32 - 1));
                    }
                    idx[pos] += 1;
                    if idx[pos] < members.len() {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
            }
        })
        .try_reduce(|| 0.0, |a, b| Ok(a + b))
        .map(|p: f64| p.min(1.0))
}

fn digits(mut i: usize, n: usize, base: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for d in out.iter_mut().rev() {
        *d = i % base;
        i /= base;
    }
    out
}

/// Exact `p̄_e` at block length `n` as a sum over joint types of the
/// transmitted pair: `Σ_J P[J]·(1 - (1 - π(J))^{M-1})`. Polynomial in `n`.
pub fn exact_pe_by_types(cfg: &SimConfig, n: usize) -> Result<f64> {
    channel_only(cfg)?;
    let comp = cfg.composition_at(n)?;
    let m = cfg.messages_at(n)?;
    let w = &cfg.channel;
    let (na, nb) = (w.input_size(), w.output_size());
    let score = score_of(cfg.decoder);
    // joint types with row sums Q: one composition of Q(a) over Y per input
    let splits: Vec<Vec<Vec<usize>>> = comp.counts().iter().map(|&qa| integer_compositions(qa, nb)).collect();
    let count: f64 = splits.iter().map(|s| s.len() as f64).product();
    if count > cfg.limits.max_types {
        return Err(Error::resource("joint types", count, cfg.limits.max_types));
    }
    let mut idx = vec![0usize; na];
    let mut total = 0.0;
    loop {
        let flat: Vec<usize> = idx.iter().zip(&splits).flat_map(|(&i, s)| s[i].iter().copied()).collect();
        let j = JointTypeCounts::from_flat(na, nb, flat);
        let mut log_p = 0.0;
        for a in 0..na {
            let row: Vec<usize> = (0..nb).map(|b| j.get(a, b)).collect();
            log_p += log_multinomial(comp.counts()[a], &row);
            for (b, &c) in row.iter().enumerate() {
                if c > 0 {
                    log_p += c as f64 * w.prob(a, b).ln();
                }
            }
        }
        if log_p > f64::NEG_INFINITY {
            total += log_p.exp() * error_given_pi(competitor_win_prob(&j, w, score), m);
        }
        let mut pos = 0;
        loop {
            if pos == na {
                return Ok(total.min(1.0));
            }
            idx[pos] += 1;
            if idx[pos] < splits[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}
