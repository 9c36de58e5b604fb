//! Seeded Monte Carlo estimates of the ensemble-average error probability.
//!
//! Every trial draws a fresh codebook, so the estimate targets the average
//! over the constant-composition ensemble rather than one fixed code. An
//! ambiguous decision counts as an error.

mod exact;
mod fit;
mod pairwise;

use std::collections::HashMap;

use log::warn;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::decode::{decode_gmmi, decode_map, decode_ml, decode_mmi, source_index, Codebook, JsccCodebook, Winner};
use crate::error::{Error, Result};
use crate::exponent::channel::random_coding_exponent;
use crate::exponent::jscc::{jscc_exponent_bound, JsccDesign};
use crate::limits::Limits;
use crate::prob::{Channel, Dist};
use crate::rng::{Seed, PRNG_ID};
use crate::types::{joint_counts_unchecked, quantize_to_type, TypeCounts};

pub use exact::{exact_pe_by_types, exact_small_pe};
pub use fit::{fit_exponent, fit_slope, wilson, Fit, WILSON_Z};
pub use pairwise::{competitor_win_prob, error_given_pi, Score};

/// Predicted error probabilities below this are out of reach of plain Monte Carlo.
pub const RARE_EVENT_PE: f64 = 1e-6;
/// Largest `M·n` for which the automatic engine still draws explicit codebooks.
pub const AUTO_EXPLICIT_MAX: f64 = 4096.0;
const CHUNK: u64 = 1024;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CompositionSpec {
    /// A fixed type; every block length must equal its `n`.
    Counts(TypeCounts),
    /// Quantize a distribution to an `n`-type at each block length.
    Quantize(Dist),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RateSpec {
    /// `M = ceil(e^{nR})`, nats per channel use.
    Rate(f64),
    Messages(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DecoderKind {
    Ml,
    Mmi,
    Gmmi,
}

impl DecoderKind {
    pub fn name(self) -> &'static str {
        match self {
            DecoderKind::Ml => "ml",
            DecoderKind::Mmi => "mmi",
            DecoderKind::Gmmi => "gmmi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Engine {
    /// Explicit codebooks when they are small, the pairwise engine otherwise.
    Auto,
    /// Draw and decode a whole codebook per trial.
    Explicit,
    /// Draw the transmitted pair, then decide the error from its joint type.
    Pairwise,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub channel: Channel,
    pub composition: CompositionSpec,
    pub rate: RateSpec,
    pub n_list: Vec<usize>,
    pub trials: u64,
    pub seed: Seed,
    pub decoder: DecoderKind,
    pub engine: Engine,
    /// Joint source-channel experiment; overrides `composition`, `rate` and `n_list`.
    pub jscc: Option<JsccDesign>,
    #[serde(skip)]
    pub limits: Limits,
}

impl SimConfig {
    pub fn new(channel: Channel, composition: CompositionSpec, rate: RateSpec, n_list: Vec<usize>, trials: u64) -> Self {
        SimConfig {
            channel,
            composition,
            rate,
            n_list,
            trials,
            seed: Seed::default(),
            decoder: DecoderKind::Mmi,
            engine: Engine::Auto,
            jscc: None,
            limits: Limits::from_env(),
        }
    }

    pub fn jscc(design: JsccDesign, trials: u64) -> Self {
        SimConfig {
            channel: design.channel().clone(),
            composition: CompositionSpec::Counts(design.compositions()[0].clone()),
            rate: RateSpec::Messages(1),
            n_list: vec![design.n()],
            trials,
            seed: Seed::default(),
            decoder: DecoderKind::Gmmi,
            engine: Engine::Explicit,
            jscc: Some(design),
            limits: Limits::from_env(),
        }
    }

    pub fn composition_at(&self, n: usize) -> Result<TypeCounts> {
        let t = match &self.composition {
            CompositionSpec::Counts(t) if t.n() == n => t.clone(),
            CompositionSpec::Counts(t) => {
                return Err(Error::ShapeMismatch(format!(
                    "composition has n = {} but block length {n} was requested",
                    t.n()
                )))
            }
            CompositionSpec::Quantize(d) => quantize_to_type(d, n)?,
        };
        if t.size() != self.channel.input_size() {
            return Err(Error::ShapeMismatch("composition does not match the channel input".into()));
        }
        Ok(t)
    }

    pub fn messages_at(&self, n: usize) -> Result<u64> {
        match self.rate {
            RateSpec::Messages(0) => Err(Error::OutOfRange("M must be at least 1".into())),
            RateSpec::Messages(m) => Ok(m),
            RateSpec::Rate(r) => {
                if !(r > 0.0) || !r.is_finite() {
                    return Err(Error::OutOfRange(format!("rate R = {r} must be positive")));
                }
                let m = (n as f64 * r).exp().ceil();
                if m >= u64::MAX as f64 {
                    return Err(Error::resource("messages M", m, u64::MAX as f64));
                }
                Ok((m as u64).max(2))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::OutOfRange("trials must be at least 1".into()));
        }
        if self.n_list.is_empty() {
            return Err(Error::Empty("block length list".into()));
        }
        match (&self.jscc, self.decoder) {
            (None, DecoderKind::Gmmi) => Err(Error::InvalidType(
                "the generalized MMI decoder needs a source-channel design".into(),
            )),
            (Some(_), DecoderKind::Mmi) => Err(Error::InvalidType(
                "source-channel experiments decode with gmmi or ml".into(),
            )),
            (Some(d), _) if self.n_list != [d.n()] => Err(Error::ShapeMismatch(format!(
                "source-channel design fixes n = {}",
                d.n()
            ))),
            _ => Ok(()),
        }
    }

    /// SHA-256 of the canonical JSON form, in hex.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes).as_slice())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimPoint {
    pub n: usize,
    pub m: u64,
    pub errors: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub predicted_pe: f64,
    /// Left out of the exponent fit (rare event or no errors).
    pub excluded: bool,
    pub engine: Engine,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimMetadata {
    pub seed: Seed,
    pub prng: &'static str,
    pub decoder: DecoderKind,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub per_n: Vec<SimPoint>,
    pub fit: Option<Fit>,
    pub metadata: SimMetadata,
    pub warnings: Vec<String>,
}

fn channel_output<R: Rng + ?Sized>(x: &[usize], w: &Channel, rng: &mut R) -> Vec<usize> {
    let last = w.output_size() - 1;
    x.iter()
        .map(|&a| {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            for (b, &p) in w.row(a).iter().enumerate() {
                acc += p;
                if u < acc {
                    return b;
                }
            }
            // rounding left u above the cumulative sum: take the last positive cell
            (0..=last).rev().find(|&b| w.prob(a, b) > 0.0).unwrap_or(last)
        })
        .collect()
}

fn draw_symbol<R: Rng + ?Sized>(p: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &q) in p.iter().enumerate() {
        acc += q;
        if u < acc {
            return i;
        }
    }
    (0..p.len()).rev().find(|&i| p[i] > 0.0).unwrap_or(p.len() - 1)
}

/// Sum of per-trial error indicators over `0..trials`, chunked across threads.
fn count_errors<F>(trials: u64, trial: F) -> Result<u64>
where
    F: Fn(u64, &mut HashMap<Vec<usize>, f64>) -> Result<bool> + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut memo = HashMap::new();
            let mut errors = 0u64;
            for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                errors += trial(t, &mut memo)? as u64;
            }
            Ok(errors)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

fn score_of(decoder: DecoderKind) -> Score {
    match decoder {
        DecoderKind::Ml => Score::Ml,
        _ => Score::Mmi,
    }
}

fn run_channel(cfg: &SimConfig, n: usize, engine: Engine) -> Result<u64> {
    let comp = cfg.composition_at(n)?;
    let m = cfg.messages_at(n)?;
    let w = &cfg.channel;
    let domain = n as u64;
    match engine {
        Engine::Explicit => {
            let m = usize::try_from(m).map_err(|_| Error::resource("messages M", m as f64, usize::MAX as f64))?;
            count_errors(cfg.trials, |t, _| {
                let mut rng = cfg.seed.substream(domain, t);
                let cb = Codebook::random(&comp, m, &mut rng);
                let sent = rng.gen_range(0..m);
                let y = channel_output(cb.row(sent), w, &mut rng);
                let r = match cfg.decoder {
                    DecoderKind::Ml => decode_ml(&cb, &y, w)?,
                    _ => decode_mmi(&cb, &y)?,
                };
                Ok(r.winner != Winner::Unique(sent))
            })
        }
        _ => {
            // by permutation symmetry the transmitted codeword can be fixed
            let x0 = comp.canonical_sequence();
            let score = score_of(cfg.decoder);
            let (na, nb) = (w.input_size(), w.output_size());
            count_errors(cfg.trials, |t, memo| {
                let mut rng = cfg.seed.substream(domain, t);
                let y = channel_output(&x0, w, &mut rng);
                let j = joint_counts_unchecked(&x0, &y, na, nb);
                let p = *memo
                    .entry(j.flat().to_vec())
                    .or_insert_with(|| error_given_pi(competitor_win_prob(&j, w, score), m));
                let u: f64 = rng.gen();
                Ok(u < p)
            })
        }
    }
}

fn run_jscc(cfg: &SimConfig, d: &JsccDesign) -> Result<u64> {
    let src = d.source();
    let w = d.channel();
    let cap = cfg.limits.max_gmmi_candidates;
    let domain = (1u64 << 32) | d.n() as u64;
    count_errors(cfg.trials, |t, _| {
        let mut rng = cfg.seed.substream(domain, t);
        let jcb = JsccCodebook::random(d, &mut rng)?;
        let v: Vec<usize> = (0..src.k).map(|_| draw_symbol(src.p_v.probs(), &mut rng)).collect();
        let sent = source_index(&v, src.v_alphabet.size());
        let y = channel_output(jcb.codeword(sent), w, &mut rng);
        let r = match cfg.decoder {
            DecoderKind::Ml => decode_map(&jcb, &y, w, src.p_v.probs(), cap)?,
            _ => decode_gmmi(&jcb, &y, cap)?,
        };
        Ok(r.winner != Winner::Unique(sent))
    })
}

/// Engine actually used at block length `n`.
pub fn resolve_engine(cfg: &SimConfig, n: usize) -> Result<Engine> {
    if let Some(d) = &cfg.jscc {
        let codewords = (d.source().v_alphabet.size() as f64).powi(d.source().k as i32);
        let work = codewords * d.n() as f64 * cfg.trials as f64;
        if work > cfg.limits.max_sim_work {
            return Err(Error::resource("simulation work |V|^k·n·trials", work, cfg.limits.max_sim_work));
        }
        if cfg.engine == Engine::Pairwise {
            return Err(Error::InvalidType("source-channel experiments use explicit codebooks".into()));
        }
        return Ok(Engine::Explicit);
    }
    let m = cfg.messages_at(n)? as f64;
    let engine = match cfg.engine {
        Engine::Auto if m * n as f64 <= AUTO_EXPLICIT_MAX => Engine::Explicit,
        Engine::Auto => Engine::Pairwise,
        e => e,
    };
    let work = match engine {
        Engine::Explicit => m * n as f64 * cfg.trials as f64,
        _ => n as f64 * cfg.trials as f64,
    };
    if work > cfg.limits.max_sim_work {
        return Err(Error::resource("simulation work M·n·trials", work, cfg.limits.max_sim_work));
    }
    Ok(engine)
}

/// `e^{-n E_r(R)}` for channel coding, `e^{-E}` with the finite-length
/// class bound for source-channel coding.
fn predicted_pe(cfg: &SimConfig, n: usize) -> Result<f64> {
    if let Some(d) = &cfg.jscc {
        return Ok((-jscc_exponent_bound(d)?.overall_logsum).exp());
    }
    let m = cfg.messages_at(n)?;
    if m <= 1 {
        return Ok(0.0);
    }
    let rate = match cfg.rate {
        RateSpec::Rate(r) => r,
        RateSpec::Messages(m) => (m as f64).ln() / n as f64,
    };
    let q = cfg.composition_at(n)?.to_dist();
    Ok((-(n as f64) * random_coding_exponent(&q, &cfg.channel, rate)?.value).exp())
}

pub fn simulate(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let mut per_n = Vec::with_capacity(cfg.n_list.len());
    let mut warnings = Vec::new();
    for &n in &cfg.n_list {
        let engine = resolve_engine(cfg, n)?;
        let (m, errors) = match &cfg.jscc {
            Some(d) => (
                (d.source().v_alphabet.size() as u64).pow(d.source().k as u32),
                run_jscc(cfg, d)?,
            ),
            None => (cfg.messages_at(n)?, run_channel(cfg, n, engine)?),
        };
        let p_hat = errors as f64 / cfg.trials as f64;
        let (ci_lo, ci_hi) = wilson(errors, cfg.trials);
        let predicted = predicted_pe(cfg, n)?;
        let rare = predicted < RARE_EVENT_PE;
        if rare {
            let msg = format!("n = {n}: predicted error probability {predicted:.3e} is below {RARE_EVENT_PE:e}; excluded from the fit");
            warn!("{msg}");
            warnings.push(msg);
        } else if errors == 0 {
            warnings.push(format!("n = {n}: no errors in {} trials; excluded from the fit", cfg.trials));
        }
        per_n.push(SimPoint {
            n,
            m,
            errors,
            trials: cfg.trials,
            p_hat,
            ci_lo,
            ci_hi,
            predicted_pe: predicted,
            excluded: rare || errors == 0,
            engine,
        });
    }
    let mut result = SimResult {
        per_n,
        fit: None,
        metadata: SimMetadata {
            seed: cfg.seed,
            prng: PRNG_ID,
            decoder: cfg.decoder,
            config_hash: cfg.hash(),
        },
        warnings,
    };
    match fit_exponent(&result) {
        Ok(f) => result.fit = Some(f),
        Err(e) => result.warnings.push(format!("no exponent fit: {e}")),
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(w: Channel, comp: Vec<usize>, m: u64, trials: u64, decoder: DecoderKind, engine: Engine) -> SimConfig {
        let n = comp.iter().sum();
        let mut c = SimConfig::new(
            w,
            CompositionSpec::Counts(TypeCounts::new(comp).unwrap()),
            RateSpec::Messages(m),
            vec![n],
            trials,
        );
        c.decoder = decoder;
        c.engine = engine;
        c.seed = Seed::new(11);
        c
    }

    #[test]
    fn single_message_never_errs() {
        for engine in [Engine::Explicit, Engine::Pairwise] {
            let r = simulate(&cfg(Channel::bsc(0.3).unwrap(), vec![2, 2], 1, 500, DecoderKind::Mmi, engine)).unwrap();
            assert_eq!(r.per_n[0].errors, 0);
            assert_eq!(r.per_n[0].p_hat, 0.0);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let c = cfg(Channel::bsc(0.1).unwrap(), vec![3, 3], 4, 3000, DecoderKind::Ml, Engine::Explicit);
        assert_eq!(simulate(&c).unwrap(), simulate(&c).unwrap());
        let mut one = c.clone();
        one.trials = 1;
        let a = serde_json::to_string(&simulate(&one).unwrap()).unwrap();
        let b = serde_json::to_string(&simulate(&one).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn confidence_interval_contains_estimate() {
        let c = cfg(Channel::z(0.3).unwrap(), vec![2, 3], 3, 2000, DecoderKind::Mmi, Engine::Auto);
        let p = &simulate(&c).unwrap().per_n[0];
        assert!(p.ci_lo <= p.p_hat && p.p_hat <= p.ci_hi);
        assert_eq!(p.engine, Engine::Explicit);
    }

    #[test]
    fn rate_sets_message_count() {
        let mut c = cfg(Channel::bsc(0.05).unwrap(), vec![1, 1], 1, 1, DecoderKind::Mmi, Engine::Auto);
        c.rate = RateSpec::Rate(0.1);
        assert_eq!(c.messages_at(128).unwrap(), 362_218);
        assert_eq!(c.messages_at(32).unwrap(), 25);
        c.composition = CompositionSpec::Quantize(Dist::uniform(2).unwrap());
        c.n_list = vec![128];
        assert_eq!(resolve_engine(&c, 128).unwrap(), Engine::Pairwise);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut c = cfg(Channel::bsc(0.1).unwrap(), vec![2, 2], 2, 0, DecoderKind::Mmi, Engine::Auto);
        assert!(simulate(&c).is_err());
        c.trials = 10;
        c.decoder = DecoderKind::Gmmi;
        assert!(simulate(&c).is_err());
        c.decoder = DecoderKind::Mmi;
        c.limits.max_sim_work = 10.0;
        assert!(matches!(simulate(&c), Err(Error::ResourceLimit { .. })));
    }
}
