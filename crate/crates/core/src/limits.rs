//! Resource caps for exhaustive enumerations.

/// Environment variable that overrides every enumeration cap.
pub const MAX_CELLS_ENV: &str = "EXPLAB_MAX_CELLS";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    /// Number of types returned by `enumerate_types`.
    pub max_types: f64,
    /// Candidate source sequences scanned by the generalized MMI decoder.
    pub max_gmmi_candidates: f64,
    /// Terms in the exact small-block error probability.
    pub max_exact_terms: f64,
    /// Lattice points visited by the primal exponent oracle.
    pub max_primal_points: f64,
    /// Symbol-level work `M·n·trials` of an explicit simulation.
    pub max_sim_work: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_types: 1e7,
            max_gmmi_candidates: 18f64.exp().floor(),
            max_exact_terms: 1e7,
            max_primal_points: 1e7,
            max_sim_work: 1e12,
        }
    }
}

impl Limits {
    /// Defaults, with every enumeration cap replaced by `EXPLAB_MAX_CELLS` when set.
    pub fn from_env() -> Self {
        let mut limits = Limits::default();
        if let Some(cap) = std::env::var(MAX_CELLS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<f64>().ok())
            .filter(|v| *v > 0.0)
        {
            limits.max_types = cap;
            limits.max_gmmi_candidates = cap;
            limits.max_exact_terms = cap;
            limits.max_primal_points = cap;
        }
        limits
    }
}
