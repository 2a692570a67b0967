use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{christoffel, covariant_derivative, tensor_norm};
use crate::grid::{distances_from, distances_from_set, metric_ball, DiscreteManifold, GraphFilter, MetricField, TensorField};
use crate::linalg;
use crate::scalar::Real;

/// `sup` over `region` of `lambda_max - lambda_min`, the eigenvalues of
/// `g2` relative to `g1`: the largest spread of `g2(v,v)/g1(v,v)`.
pub fn conformal_distortion<T: Real>(g1: &MetricField<T>, g2: &MetricField<T>, region: &[usize]) -> Result<T> {
    let n = g1.dim();
    if g2.dim() != n || g2.len() != g1.len() {
        return Err(Error::Shape("metrics differ in shape".into()));
    }
    let mut worst = T::zero();
    for &v in region {
        let ev = linalg::relative_eigenvalues(g1.at(v), g2.at(v), n)
            .ok_or(Error::NotPositiveDefinite { node: v, coords: Vec::new() })?;
        worst = worst.max(ev[n - 1] - ev[0]);
    }
    Ok(worst)
}

/// `sup_region |nabla^l (g2 - g1)|_{g1}` for `l = 0..=k`, measured with the
/// connection and norm of `m.metric()`.
pub fn ck_distance_terms<T: Real>(
    m: &DiscreteManifold<T>,
    g2: &MetricField<T>,
    k: usize,
    region: Option<&[usize]>,
) -> Result<Vec<T>> {
    let n = m.dim();
    if g2.dim() != n || g2.len() != m.len() {
        return Err(Error::Shape("metrics differ in shape".into()));
    }
    let diff: Vec<T> = g2.raw().iter().zip(m.metric().raw()).map(|(a, b)| *a - *b).collect();
    let delta = TensorField { one_sided: m.lattice().has_boundary(), ..TensorField::covariant(n, 2, diff) };
    let conn = christoffel(m)?;
    let sup = |t: &TensorField<T>| -> Result<T> {
        let f = tensor_norm(m, t)?;
        Ok(match region {
            Some(r) => r.iter().fold(T::zero(), |s, &v| s.max(f[v].abs())),
            None => f.sup_abs(),
        })
    };
    let mut out = vec![sup(&delta)?];
    for l in 1..=k {
        out.push(sup(&covariant_derivative(m, &conn, &delta, l)?)?);
    }
    Ok(out)
}

/// Maximum of [`ck_distance_terms`].
pub fn ck_distance<T: Real>(m: &DiscreteManifold<T>, g2: &MetricField<T>, k: usize, region: Option<&[usize]>) -> Result<T> {
    Ok(ck_distance_terms(m, g2, k, region)?.into_iter().fold(T::zero(), |a, b| a.max(b)))
}

#[derive(Clone, Debug)]
pub struct EpsilonIsometry<T> {
    /// `max |d2(phi a, phi b) - d1(a, b)|` over the sampled pairs.
    pub epsilon: T,
    /// Largest sampled `d1(a, b)`.
    pub max_distance: T,
    pub pairs: usize,
    /// Largest distance from a node of the target ball to the image.
    pub coverage_slack: T,
    /// Whether the target ball lies in the `epsilon`-neighbourhood of the
    /// image.
    pub covers: bool,
}

/// Compares graph distances through the node map `corr: M1 -> M2` from
/// `samples` seeded source nodes to every node, and checks that the ball of
/// `radius` about the image of the basepoint is covered.
pub fn epsilon_isometry_check<T: Real>(
    m1: &DiscreteManifold<T>,
    m2: &DiscreteManifold<T>,
    corr: &[usize],
    samples: usize,
    seed: u64,
    radius: T,
) -> Result<EpsilonIsometry<T>> {
    if corr.len() != m1.len() || corr.iter().any(|&w| w >= m2.len()) {
        return Err(Error::Shape("correspondence does not map M1 into M2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<usize> = (0..m1.len()).collect();
    let mut sources: Vec<usize> = all.choose_multiple(&mut rng, samples.min(m1.len())).copied().collect();
    sources.sort_unstable();
    let mut epsilon = T::zero();
    let mut max_distance = T::zero();
    let mut pairs = 0;
    for a in sources {
        let d1 = distances_from(m1, a);
        let d2 = distances_from(m2, corr[a]);
        for b in 0..m1.len() {
            if !d1[b].is_finite() {
                continue;
            }
            epsilon = epsilon.max((d2[corr[b]] - d1[b]).abs());
            max_distance = max_distance.max(d1[b]);
            pairs += 1;
        }
    }
    let mut image = corr.to_vec();
    image.sort_unstable();
    image.dedup();
    let to_image = distances_from_set(m2, &image, &GraphFilter::default());
    let ball = metric_ball(m2, corr[m1.basepoint()], radius);
    let coverage_slack = ball.iter().fold(T::zero(), |s, &v| s.max(to_image[v]));
    Ok(EpsilonIsometry { epsilon, max_distance, pairs, coverage_slack, covers: coverage_slack <= epsilon })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_stretch_by_brute_force() {
        // g1 = delta, g2 = diag(1, 4, 1): ratios over coordinate directions
        // are 1, 4, 1, so the spread is 3
        let g1 = MetricField::from_vec(3, crate::linalg::identity::<f64>(3)).unwrap();
        let g2 = MetricField::from_vec(3, vec![1.0, 0.0, 0.0, 0.0, 4.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let mut best: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                best = best.max(g2.at(0)[i * 3 + i] - g2.at(0)[j * 3 + j]);
            }
        }
        assert_eq!(best, 3.0);
        assert!((conformal_distortion(&g1, &g2, &[0]).unwrap() - best).abs() < 1e-14);
    }
}
