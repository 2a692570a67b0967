//! Synthetic converging sequences `g_i = g_inf + delta_i` on a shared
//! chart, metric comparison measures, and diagnostics of the satellite
//! sequence built from their principal eigenfunctions.

mod diagnostics;
mod measures;

pub use diagnostics::{satellite_sequence_diagnostics, IndexRow, SequenceDiagnostics, SequenceVerdicts, TABLE_HEADER};
pub use measures::{ck_distance, ck_distance_terms, conformal_distortion, epsilon_isometry_check, EpsilonIsometry};

use crate::conformal::max_supported_k;
use crate::error::{Error, Result};
use crate::grid::{build_box_manifold, DiscreteManifold, ManifoldSpec};
use crate::scalar::Real;
use crate::spectral::Problem;

pub const SEQUENCE_FORMULA: &str = "perturbed-sequence";

#[derive(Clone, Debug)]
pub struct SequenceSpec {
    /// Chart and `perturbed-sequence` parameters; `index` is set per member.
    pub manifold: ManifoldSpec,
    /// Members `1..=count`.
    pub count: usize,
    pub problem: Problem,
    /// Radius of the fixed ball about the basepoint (distortion, Harnack).
    pub ball_radius: f64,
    /// Source nodes sampled for the epsilon-isometry check.
    pub samples: usize,
    pub seed: u64,
    /// Derivative order of the `C^k` distance (capped by the grid).
    pub k: usize,
}

impl SequenceSpec {
    pub fn new(manifold: ManifoldSpec, count: usize) -> Self {
        Self { manifold, count, problem: Problem::S1, ball_radius: 0.35, samples: 8, seed: 0x5eed, k: 2 }
    }

    fn param(&self, key: &str, default: f64) -> f64 {
        self.manifold.params.get(key).copied().unwrap_or(default)
    }

    /// Perturbation amplitude of member `i`.
    pub fn amplitude(&self, i: usize) -> f64 {
        self.param("amplitude", 0.2) * (i as f64).powf(-self.param("decay", 1.0))
    }

    pub fn member_spec(&self, i: usize) -> ManifoldSpec {
        let mut s = self.manifold.clone();
        s.params.insert("index".into(), i as f64);
        s
    }

    /// The unperturbed limit `g_inf`.
    pub fn limit_spec(&self) -> ManifoldSpec {
        let mut s = self.manifold.clone();
        s.params.insert("amplitude".into(), 0.0);
        s.params.remove("index");
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.manifold.metric != SEQUENCE_FORMULA {
            return Err(Error::InvalidParameter(format!(
                "sequence metric must be `{SEQUENCE_FORMULA}`, found `{}`",
                self.manifold.metric
            )));
        }
        if self.manifold.params.contains_key("index") {
            return Err(Error::InvalidParameter("`index` is set per member and may not be given".into()));
        }
        if self.count < 2 {
            return Err(Error::InvalidParameter(format!("sequence needs at least 2 members, got {}", self.count)));
        }
        if self.param("amplitude", 0.2) != 0.0 && !(self.param("decay", 1.0) > 0.0) {
            return Err(Error::InvalidParameter("decay must be positive so that amplitudes decrease".into()));
        }
        if !(self.ball_radius > 0.0) || self.samples == 0 {
            return Err(Error::InvalidParameter("ball radius and sample count must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Sequence<T> {
    pub members: Vec<DiscreteManifold<T>>,
    pub limit: DiscreteManifold<T>,
    pub amplitudes: Vec<f64>,
    /// `C^k` distance of each member to the limit.
    pub ck: Vec<T>,
    pub k: usize,
}

/// Builds members `1..=count` and the limit; checks that the `C^k`
/// distance to the limit strictly decreases (unless the family is
/// constant).
pub fn generate_sequence<T: Real>(spec: &SequenceSpec) -> Result<Sequence<T>> {
    spec.validate()?;
    let limit = build_box_manifold::<T>(&spec.limit_spec())?;
    let k = spec.k.min(max_supported_k(&limit));
    let mut members = Vec::with_capacity(spec.count);
    let mut ck = Vec::with_capacity(spec.count);
    for i in 1..=spec.count {
        let wrap = |e: Error| Error::Sequence { index: i, source: Box::new(e) };
        let m = build_box_manifold::<T>(&spec.member_spec(i)).map_err(wrap)?;
        ck.push(ck_distance(&limit, m.metric(), k, None).map_err(wrap)?);
        members.push(m);
    }
    let amplitudes: Vec<f64> = (1..=spec.count).map(|i| spec.amplitude(i)).collect();
    if amplitudes[0] != 0.0 {
        if let Some(i) = (1..ck.len()).find(|&i| !(ck[i] < ck[i - 1])) {
            return Err(Error::Sequence {
                index: i + 1,
                source: Box::new(Error::InvalidParameter(format!(
                    "C^{k} distance {} does not decrease from {}",
                    ck[i].to_f(),
                    ck[i - 1].to_f()
                ))),
            });
        }
    }
    Ok(Sequence { members, limit, amplitudes, ck, k })
}
