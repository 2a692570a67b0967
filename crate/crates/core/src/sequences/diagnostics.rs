use rayon::prelude::*;

use super::{conformal_distortion, epsilon_isometry_check, generate_sequence, SequenceSpec};
use crate::error::Result;
use crate::grid::{distances_from, fmt_num, metric_ball, DiscreteManifold};
use crate::satellite::{satellite_from, verify_identities, SatelliteManifold};
use crate::scalar::Real;
use crate::spectral::{assemble, eigen_bounds_check, harnack_ratio, solve_principal_with, SolverOptions};

/// One member of the sequence. Solver-dependent entries are `None` when
/// the solve failed; `error` then holds the message.
#[derive(Clone, Debug)]
pub struct IndexRow<T> {
    pub index: usize,
    pub amplitude: f64,
    pub ck: T,
    pub lambda: Option<T>,
    pub bound: Option<T>,
    pub within_envelope: Option<bool>,
    pub harnack: Option<T>,
    /// Distortion of the satellite against the last member's satellite on
    /// the fixed ball.
    pub distortion: Option<T>,
    /// Achieved epsilon of the identity map to the limit satellite.
    pub epsilon: Option<T>,
    /// Largest distance from the basepoint in the satellite metric.
    pub radius: Option<T>,
    /// `vol(g~_i) / vol(g_i)`.
    pub volume_ratio: Option<T>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default)]
pub struct SequenceVerdicts {
    /// Every solved eigenvalue lies inside its envelope.
    pub envelope: bool,
    /// `|l_N - l_{N/2}| < |l_{N/2} - l_{N/4}|`; needs `N >= 4`.
    pub cauchy: Option<bool>,
    /// Distortion decreases (one violation allowed) and its value at
    /// `N - 1` is below 10% of the first.
    pub distortion: Option<bool>,
    /// Achieved epsilon decreases, one violation allowed.
    pub epsilon: Option<bool>,
    /// Sign of the last satellite's curvature agrees with the sign of its
    /// eigenvalue (when resolvable).
    pub sign: Option<bool>,
    pub partial: bool,
}

#[derive(Clone, Debug)]
pub struct SequenceDiagnostics<T> {
    pub rows: Vec<IndexRow<T>>,
    pub limit_lambda: Option<T>,
    pub k: usize,
    pub verdicts: SequenceVerdicts,
}

pub const TABLE_HEADER: [&str; 12] = [
    "index",
    "amplitude",
    "ck_distance",
    "lambda",
    "envelope",
    "within_envelope",
    "harnack",
    "distortion",
    "epsilon",
    "radius",
    "volume_ratio",
    "status",
];

impl<T: Real> SequenceDiagnostics<T> {
    pub fn table(&self) -> Vec<Vec<String>> {
        let opt = |x: Option<T>| x.map(fmt_num).unwrap_or_default();
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.index.to_string(),
                    fmt_num(r.amplitude),
                    fmt_num(r.ck),
                    opt(r.lambda),
                    opt(r.bound),
                    r.within_envelope.map(|b| b.to_string()).unwrap_or_default(),
                    opt(r.harnack),
                    opt(r.distortion),
                    opt(r.epsilon),
                    opt(r.radius),
                    opt(r.volume_ratio),
                    r.error.clone().unwrap_or_else(|| "ok".into()),
                ]
            })
            .collect()
    }

    pub fn verdict_text(&self) -> String {
        let v = &self.verdicts;
        let show = |x: Option<bool>| match x {
            None => "n/a".to_string(),
            Some(b) => if b { "pass" } else { "fail" }.to_string(),
        };
        format!(
            "envelope = {}\ncauchy = {}\ndistortion = {}\nepsilon = {}\nsign = {}\npartial = {}\n",
            show(Some(v.envelope)),
            show(v.cauchy),
            show(v.distortion),
            show(v.epsilon),
            show(v.sign),
            v.partial
        )
    }
}

struct Solved<T> {
    sat: SatelliteManifold<T>,
    bound: T,
    within: bool,
}

fn solve_member<T: Real>(m: &DiscreteManifold<T>, spec: &SequenceSpec, opts: &SolverOptions) -> Result<Solved<T>> {
    let ops = assemble(m)?;
    let eigen = solve_principal_with(m, &ops, spec.problem, opts)?;
    let b = eigen_bounds_check(&ops, &eigen);
    let sat = satellite_from(m, eigen)?;
    Ok(Solved { sat, bound: b.bound, within: b.passes })
}

/// `true` when `xs` is non-increasing with at most one violation.
fn mostly_decreasing<T: Real>(xs: &[T]) -> bool {
    xs.windows(2).filter(|w| w[1] > w[0]).count() <= 1
}

/// Solves every member (in parallel) and tabulates eigenvalue, Harnack,
/// distortion, `C^k` and epsilon-isometry traces in index order.
pub fn satellite_sequence_diagnostics<T: Real>(spec: &SequenceSpec, opts: &SolverOptions) -> Result<SequenceDiagnostics<T>> {
    let seq = generate_sequence::<T>(spec)?;
    let solved: Vec<Result<Solved<T>>> = seq.members.par_iter().map(|m| solve_member(m, spec, opts)).collect();
    let limit = solve_member(&seq.limit, spec, opts).ok();
    let radius = T::lit(spec.ball_radius);
    let ball = metric_ball(&seq.limit, seq.limit.basepoint(), radius);
    let last = solved.last().and_then(|r| r.as_ref().ok());

    let rows: Vec<IndexRow<T>> = solved
        .par_iter()
        .enumerate()
        .map(|(k, r)| {
            let index = k + 1;
            let m = &seq.members[k];
            let mut row = IndexRow {
                index,
                amplitude: seq.amplitudes[k],
                ck: seq.ck[k],
                lambda: None,
                bound: None,
                within_envelope: None,
                harnack: None,
                distortion: None,
                epsilon: None,
                radius: None,
                volume_ratio: None,
                error: None,
            };
            let s = match r {
                Ok(s) => s,
                Err(e) => {
                    row.error = Some(e.to_string());
                    return row;
                }
            };
            row.lambda = Some(s.sat.eigen.lambda);
            row.bound = Some(s.bound);
            row.within_envelope = Some(s.within);
            let own_ball = metric_ball(m, m.basepoint(), radius);
            row.harnack = harnack_ratio(&s.sat.eigen.u, &own_ball).ok();
            if let Some(l) = last {
                row.distortion = conformal_distortion(l.sat.manifold.metric(), s.sat.manifold.metric(), &ball).ok();
            }
            if let Some(l) = &limit {
                let id: Vec<usize> = (0..m.len()).collect();
                row.epsilon = epsilon_isometry_check(&s.sat.manifold, &l.sat.manifold, &id, spec.samples, spec.seed, radius)
                    .ok()
                    .map(|e| e.epsilon);
            }
            let d = distances_from(&s.sat.manifold, s.sat.manifold.basepoint());
            row.radius = Some(crate::scalar::max_of(d.into_iter().filter(|x| x.is_finite())));
            row.volume_ratio = Some(s.sat.manifold.volume() / m.volume());
            row
        })
        .collect();

    let n = rows.len();
    let lambdas: Vec<Option<T>> = rows.iter().map(|r| r.lambda).collect();
    let mut v = SequenceVerdicts {
        envelope: rows.iter().all(|r| r.within_envelope.unwrap_or(true)),
        partial: rows.iter().any(|r| r.error.is_some()),
        ..Default::default()
    };
    if n >= 4 {
        if let (Some(a), Some(b), Some(c)) = (lambdas[n - 1], lambdas[n / 2 - 1], lambdas[n / 4 - 1]) {
            v.cauchy = Some((a - b).abs() < (b - c).abs());
        }
    }
    let dist: Vec<T> = rows[..n - 1].iter().filter_map(|r| r.distortion).collect();
    if dist.len() == n - 1 && n >= 2 {
        let first = dist[0];
        let fin = dist[n - 2];
        let tiny = T::loose_eps();
        v.distortion = Some(first <= tiny || (mostly_decreasing(&dist) && fin < T::lit(0.1) * first));
    }
    let eps: Vec<T> = rows.iter().filter_map(|r| r.epsilon).collect();
    if eps.len() == n {
        v.epsilon = Some(mostly_decreasing(&eps));
    }
    v.sign = last.and_then(|l| verify_identities(&l.sat).sign_law);
    Ok(SequenceDiagnostics { rows, limit_lambda: limit.map(|l| l.sat.eigen.lambda), k: seq.k, verdicts: v })
}
