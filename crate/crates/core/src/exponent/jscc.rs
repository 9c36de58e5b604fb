//! Joint source-channel coding exponent for a partition of the source
//! sequences into unions of type classes, each class mapped to its own
//! constant-composition codebook.
//!
//! For class `A_i` with channel composition `Q_i`,
//!
//! ```text
//! E_s^(i)(ρ) = (1+ρ) log Σ_{v∈A_i} P^k(v)^{1/(1+ρ)}
//! p̄_e ≤ Σ_i exp(-max_ρ [n E0(Q_i, ρ) - E_s^(i)(ρ)])
//! ```
//!
//! `P^k(v)` is constant on a type class, so every sum runs over types.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponent::channel::{e0_ml, E0Params, RHO_GRID_STEP, RHO_TOL};
use crate::optim::maximize_on_interval;
use crate::prob::{log_sum_exp, Alphabet, Channel, Dist};
use crate::types::{enumerate_types, log_type_class_size, type_of, TypeCounts};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceSpec {
    #[serde(skip)]
    pub v_alphabet: Alphabet,
    pub p_v: Dist,
    pub k: usize,
}

impl SourceSpec {
    pub fn new(p_v: Dist, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Empty("source length k".into()));
        }
        Ok(SourceSpec {
            v_alphabet: p_v.alphabet().clone(),
            p_v,
            k,
        })
    }

    /// `log P^k(v)` for any `v` of type `t`.
    pub fn log_prob_of_type(&self, t: &TypeCounts) -> f64 {
        t.log_prob_under(self.p_v.probs())
    }
}

/// Disjoint classes of `k`-types covering all of them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    types: Vec<TypeCounts>,
    classes: Vec<Vec<usize>>,
    #[serde(skip)]
    lookup: HashMap<Vec<usize>, usize>,
}

impl Partition {
    /// `classes` index into `types`, which must be the complete list of `k`-types.
    pub fn new(types: Vec<TypeCounts>, classes: Vec<Vec<usize>>) -> Result<Self> {
        let mut owner = vec![None; types.len()];
        for (i, class) in classes.iter().enumerate() {
            if class.is_empty() {
                return Err(Error::Empty(format!("partition class {i}")));
            }
            for &t in class {
                let slot = owner
                    .get_mut(t)
                    .ok_or_else(|| Error::OutOfRange(format!("type index {t} in class {i}")))?;
                if slot.is_some() {
                    return Err(Error::InvalidType(format!("type {t} appears in two classes")));
                }
                *slot = Some(i);
            }
        }
        let mut lookup = HashMap::with_capacity(types.len());
        for (t, o) in owner.iter().enumerate() {
            let o = o.ok_or_else(|| Error::InvalidType(format!("type {t} is in no class")))?;
            lookup.insert(types[t].counts().to_vec(), o);
        }
        Ok(Partition { types, classes, lookup })
    }

    pub fn types(&self) -> &[TypeCounts] {
        &self.types
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class(&self, i: usize) -> &[usize] {
        &self.classes[i]
    }

    pub fn class_of_type(&self, t: &TypeCounts) -> Option<usize> {
        self.lookup.get(t.counts()).copied()
    }

    /// `log |A_i|`.
    pub fn log_class_size(&self, i: usize) -> f64 {
        log_sum_exp(self.classes[i].iter().map(|&t| log_type_class_size(&self.types[t])))
    }
}

/// One class per source type, ordered by decreasing class probability
/// (ties keep the lexicographic order of the count vectors).
pub fn default_partition(source: &SourceSpec, cap: f64) -> Result<Partition> {
    let types = enumerate_types(&source.v_alphabet, source.k, cap)?;
    let mass: Vec<f64> = types
        .iter()
        .map(|t| log_type_class_size(t) + source.log_prob_of_type(t))
        .collect();
    let mut order: Vec<usize> = (0..types.len()).collect();
    order.sort_by(|&a, &b| mass[b].total_cmp(&mass[a]));
    Partition::new(types, order.into_iter().map(|t| vec![t]).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JsccDesign {
    source: SourceSpec,
    n: usize,
    partition: Partition,
    compositions: Vec<TypeCounts>,
    channel: Channel,
}

impl JsccDesign {
    /// Checks `log |T^n(Q_i)| ≥ log |A_i|` for every class.
    pub fn new(
        source: SourceSpec,
        n: usize,
        partition: Partition,
        compositions: Vec<TypeCounts>,
        channel: Channel,
    ) -> Result<Self> {
        if partition.types.first().map(|t| (t.n(), t.size())) != Some((source.k, source.v_alphabet.size())) {
            return Err(Error::ShapeMismatch("partition types do not match the source".into()));
        }
        if compositions.len() != partition.num_classes() {
            return Err(Error::ShapeMismatch(format!(
                "{} compositions for {} classes",
                compositions.len(),
                partition.num_classes()
            )));
        }
        for (i, q) in compositions.iter().enumerate() {
            if q.n() != n || q.size() != channel.input_size() {
                return Err(Error::ShapeMismatch(format!(
                    "composition of class {i} is not an {n}-type on the channel input"
                )));
            }
            let log_type_class = log_type_class_size(q);
            let log_class = partition.log_class_size(i);
            if log_type_class < log_class - 1e-9 {
                return Err(Error::InfeasibleComposition {
                    class: i,
                    log_type_class,
                    log_class,
                });
            }
        }
        Ok(JsccDesign {
            source,
            n,
            partition,
            compositions,
            channel,
        })
    }

    /// Every class uses the same composition `q`.
    pub fn with_common_composition(
        source: SourceSpec,
        partition: Partition,
        q: TypeCounts,
        channel: Channel,
    ) -> Result<Self> {
        let n = q.n();
        let comps = vec![q; partition.num_classes()];
        JsccDesign::new(source, n, partition, comps, channel)
    }

    pub fn source(&self) -> &SourceSpec {
        &self.source
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn compositions(&self) -> &[TypeCounts] {
        &self.compositions
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn class_of_sequence(&self, v: &[usize]) -> Result<usize> {
        let t = type_of(v, &self.source.v_alphabet)?;
        self.partition
            .class_of_type(&t)
            .ok_or_else(|| Error::InvalidType("source sequence of unexpected length".into()))
    }
}

/// `E_s^(i)(ρ) = (1+ρ) log Σ_{P̄∈A_i} |T^k(P̄)| exp(Σ_b c_b log P_V(b) / (1+ρ))`.
pub fn class_log_mass_tilted(d: &JsccDesign, i: usize, rho: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::OutOfRange(format!("rho = {rho} not in [0, 1]")));
    }
    if i >= d.partition.num_classes() {
        return Err(Error::OutOfRange(format!("class index {i}")));
    }
    let s = 1.0 / (1.0 + rho);
    let terms = d.partition.classes[i].iter().map(|&t| {
        let t = &d.partition.types[t];
        log_type_class_size(t) + s * d.source.log_prob_of_type(t)
    });
    Ok((1.0 + rho) * log_sum_exp(terms))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassExponent {
    pub class_index: usize,
    /// `+∞` for a class of probability zero.
    pub value: f64,
    pub rho_star: f64,
    pub e_s_at_rho: f64,
    pub skipped: bool,
    pub used_grid: bool,
}

/// `max_{ρ∈[0,1]} n E0(Q_i, ρ) - E_s^(i)(ρ)`.
pub fn class_exponent(d: &JsccDesign, i: usize) -> Result<ClassExponent> {
    if class_log_mass_tilted(d, i, 0.0)? == f64::NEG_INFINITY {
        return Ok(ClassExponent {
            class_index: i,
            value: f64::INFINITY,
            rho_star: f64::NAN,
            e_s_at_rho: f64::NEG_INFINITY,
            skipped: true,
            used_grid: false,
        });
    }
    let q = d.compositions[i].to_dist();
    let n = d.n as f64;
    let m = maximize_on_interval(
        |rho| {
            let e0 = e0_ml(&E0Params::new(q.clone(), d.channel.clone(), rho)?)?;
            Ok(n * e0 - class_log_mass_tilted(d, i, rho)?)
        },
        0.0,
        1.0,
        RHO_TOL,
        RHO_GRID_STEP,
    )?;
    Ok(ClassExponent {
        class_index: i,
        value: m.value,
        rho_star: m.x,
        e_s_at_rho: class_log_mass_tilted(d, i, m.x)?,
        skipped: false,
        used_grid: m.used_grid,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JsccBound {
    pub per_class: Vec<ClassExponent>,
    /// `-log Σ_i exp(-E_i)`: the finite-length bound.
    pub overall_logsum: f64,
    /// `min_i E_i`: the asymptotically dominant class.
    pub overall_min: f64,
}

pub fn jscc_exponent_bound(d: &JsccDesign) -> Result<JsccBound> {
    let per_class = (0..d.partition.num_classes())
        .map(|i| class_exponent(d, i))
        .collect::<Result<Vec<_>>>()?;
    let live = || per_class.iter().filter(|c| !c.skipped).map(|c| c.value);
    let overall_logsum = -log_sum_exp(live().map(|v| -v));
    let overall_min = live().fold(f64::INFINITY, f64::min);
    Ok(JsccBound {
        per_class,
        overall_logsum,
        overall_min,
    })
}

/// Class exponent of class `i` for every feasible `n`-type on the channel
/// input, best first.
pub fn sweep_class_compositions(d: &JsccDesign, i: usize, cap: f64) -> Result<Vec<(TypeCounts, ClassExponent)>> {
    let log_class = d.partition.log_class_size(i);
    let mut out = Vec::new();
    for q in enumerate_types(d.channel.input(), d.n, cap)? {
        if log_type_class_size(&q) < log_class - 1e-9 {
            continue;
        }
        let mut comps = d.compositions.clone();
        comps[i] = q.clone();
        let trial = JsccDesign::new(d.source.clone(), d.n, d.partition.clone(), comps, d.channel.clone())?;
        out.push((q, class_exponent(&trial, i)?));
    }
    out.sort_by(|a, b| b.1.value.total_cmp(&a.1.value));
    Ok(out)
}
