use super::metric::ExtendedManifold;
use crate::error::{Error, Result};
use crate::geometry::{fd, gradient_norm_sq, inverse_metric};
use crate::grid::{Axis, DiscreteManifold, Lattice, MetricField, ScalarField, Side};
use crate::linalg;
use crate::scalar::Real;

/// `tau(r) = r` for `r <= r2/4`, `r2/2` for `r >= r2/2`, joined by a
/// quintic with matching first and second derivatives.
pub fn taper<T: Real>(r: T, r2: T) -> T {
    let q = r2 * T::lit(0.25);
    if r <= q {
        return r;
    }
    if r >= r2 * T::lit(0.5) {
        return r2 * T::lit(0.5);
    }
    let s = (r - q) / q;
    let p = s + T::lit(4.0) * s.powi(3) - T::lit(7.0) * s.powi(4) + T::lit(3.0) * s.powi(5);
    q + q * p
}

#[derive(Clone, Debug)]
pub struct HeightOptions {
    pub r2: f64,
    /// Half-width of the band around the zero level; `None` means `r2/8`.
    pub band: Option<f64>,
    /// Slope threshold is `1/c`.
    pub c: f64,
}

impl Default for HeightOptions {
    fn default() -> Self {
        Self { r2: 0.5, band: None, c: 4.0 }
    }
}

#[derive(Clone, Debug)]
pub struct HeightField<T> {
    /// Values on the nodes of the extended manifold.
    pub f: ScalarField<T>,
    pub r2: T,
    pub band: T,
    /// `min |grad f|_g` over nodes with `|f| <= band`.
    pub slope: T,
    pub threshold: T,
    pub band_nodes: usize,
    /// Half a normal cell in metric units; nodes with `f >= -snap` are kept
    /// by a cut.
    pub snap: T,
}

impl<T: Real> HeightField<T> {
    pub fn slope_ok(&self) -> bool {
        self.slope >= self.threshold
    }

    /// Same field plus a constant (moves the zero level).
    pub fn shifted(&self, c: T) -> Self {
        Self { f: self.f.map(|x| x + c), ..self.clone() }
    }

    /// Nodes on the zero level, up to `snap`.
    pub fn zero_nodes(&self) -> Vec<usize> {
        (0..self.f.len()).filter(|&v| self.f[v].abs() <= self.snap).collect()
    }
}

/// Signed normal distance to a face of `M`, measured along coordinate
/// lines of `X` with the unit-speed weight `1/sqrt(g^aa)`.
fn face_distance<T: Real>(x: &ExtendedManifold<T>, ginv: &[T], axis: usize, side: Side) -> Vec<T> {
    let lat = x.manifold.lattice();
    let n = lat.dim();
    let ax = lat.axis(axis);
    let lo = x.layers[axis].0;
    let len = x.original.lattice().axis(axis).nodes;
    let b = match side {
        Side::Lo => lo,
        Side::Hi => lo + len - 1,
    };
    let stride = lat.stride(axis);
    let w = |v: usize| T::one() / ginv[v * n * n + axis * n + axis].sqrt();
    let half = T::lit(0.5) * ax.h;
    let inward: isize = if side == Side::Lo { 1 } else { -1 };
    let mut d = vec![T::zero(); lat.len()];
    for start in (0..lat.len()).filter(|&v| lat.index_along(v, axis) == 0) {
        let at = |i: usize| start + i * stride;
        let mut prev = T::zero();
        for i in b + 1..ax.nodes {
            let s = prev + half * (w(at(i - 1)) + w(at(i)));
            d[at(i)] = if inward > 0 { s } else { -s };
            prev = s;
        }
        let mut prev = T::zero();
        for i in (0..b).rev() {
            let s = prev + half * (w(at(i + 1)) + w(at(i)));
            d[at(i)] = if inward > 0 { -s } else { s };
            prev = s;
        }
    }
    d
}

/// `f = min over faces of tau(normal distance)`, zero on the boundary of
/// `M`, `r2/2` away from it and negative outside.
pub fn build_height_function<T: Real>(x: &ExtendedManifold<T>, opts: &HeightOptions) -> Result<HeightField<T>> {
    let r2 = T::lit(opts.r2);
    if !(opts.r2 > 0.0 && opts.r2 < 2.0) {
        return Err(Error::Height(format!("r2 = {} must lie in (0, 2) so that f < 1", opts.r2)));
    }
    if !(opts.c > 0.0) {
        return Err(Error::InvalidParameter(format!("c = {} must be positive", opts.c)));
    }
    let m = &x.manifold;
    let n = m.dim();
    let lat = m.lattice();
    let ginv = inverse_metric(m)?;
    let faces = x.original.faces().to_vec();
    if faces.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    let mut f = vec![T::infinity(); m.len()];
    let quarter = r2 * T::lit(0.25);
    for face in &faces {
        let a = face.axis;
        let stretch = (0..m.len()).fold(T::zero(), |s, v| s.max(T::one() / ginv[v * n * n + a * n + a].sqrt()));
        let across = (quarter / (lat.axis(a).h * stretch)).floor().to_usize().unwrap_or(0) + 1;
        if across < 3 {
            return Err(Error::Height(format!(
                "taper [r2/4, r2/2] spans {across} nodes along axis {a}; at least 3 are needed"
            )));
        }
        let d = face_distance(x, &ginv, a, face.side);
        let deepest = crate::scalar::min_of(d.iter().copied());
        if -deepest < quarter * (T::one() - T::lit(1e-9)) {
            return Err(Error::Height(format!(
                "extension reaches {} beyond axis {a}, below r2/4 = {}",
                (-deepest).to_f(),
                quarter.to_f()
            )));
        }
        for v in 0..m.len() {
            f[v] = f[v].min(taper(d[v], r2));
        }
    }
    let band = T::lit(opts.band.unwrap_or(opts.r2 / 8.0));
    let grad = gradient_norm_sq(m, &f)?;
    let mut slope = T::infinity();
    let mut band_nodes = 0;
    for v in 0..m.len() {
        if f[v].abs() <= band {
            band_nodes += 1;
            slope = slope.min(grad[v].max(T::zero()).sqrt());
        }
    }
    let lmin = m.metric().min_eigenvalue();
    let h = faces.iter().map(|fc| lat.axis(fc.axis).h).fold(T::infinity(), |a, b| a.min(b));
    let snap = T::lit(0.5) * h * lmin.sqrt();
    let hf = HeightField {
        f: ScalarField(f),
        r2,
        band,
        slope,
        threshold: T::one() / T::lit(opts.c),
        band_nodes,
        snap,
    };
    if !(hf.f[m.basepoint()] > T::zero()) {
        return Err(Error::Height("f(basepoint) is not positive".into()));
    }
    Ok(hf)
}

/// The box `{f >= 0}` (nodes with `f >= -snap`) of the extended manifold,
/// with the metric restricted exactly.
pub fn cut_manifold<T: Real>(x: &DiscreteManifold<T>, hf: &HeightField<T>) -> Result<DiscreteManifold<T>> {
    if hf.f.len() != x.len() {
        return Err(Error::Shape("height field does not match the manifold".into()));
    }
    if !hf.slope_ok() {
        return Err(Error::Cut(format!(
            "slope {} on the band is below the threshold {}",
            hf.slope.to_f(),
            hf.threshold.to_f()
        )));
    }
    if hf.zero_nodes().is_empty() {
        return Err(Error::Cut("the zero level set is empty".into()));
    }
    let lat = x.lattice();
    let d = lat.dim();
    let keep: Vec<usize> = (0..x.len()).filter(|&v| hf.f[v] >= -hf.snap).collect();
    let mut lo = vec![usize::MAX; d];
    let mut hi = vec![0; d];
    for &v in &keep {
        for a in 0..d {
            let i = lat.index_along(v, a);
            lo[a] = lo[a].min(i);
            hi[a] = hi[a].max(i);
        }
    }
    let count: usize = (0..d).map(|a| hi[a] + 1 - lo[a]).product();
    if count != keep.len() {
        return Err(Error::Cut(format!("{} kept nodes do not form a box of {count}", keep.len())));
    }
    let mut axes = Vec::with_capacity(d);
    for (a, ax) in lat.axes().iter().enumerate() {
        if ax.periodic && (lo[a] != 0 || hi[a] + 1 != ax.nodes) {
            return Err(Error::Cut(format!("periodic axis {a} would be cut")));
        }
        axes.push(Axis { offset: ax.offset + lo[a] as isize, nodes: hi[a] + 1 - lo[a], ..ax.clone() });
    }
    let small = Lattice::new(axes);
    let n = x.dim();
    let mut data = Vec::with_capacity(small.len() * n * n);
    for v in 0..small.len() {
        let mut idx = small.multi_index(v);
        for (a, i) in idx.iter_mut().enumerate() {
            *i += lo[a];
        }
        data.extend_from_slice(x.metric().at(lat.node(&idx)));
    }
    let bp = lat.multi_index(x.basepoint());
    if (0..d).any(|a| bp[a] < lo[a] || bp[a] > hi[a]) {
        return Err(Error::Cut("the basepoint is cut away".into()));
    }
    let idx: Vec<usize> = (0..d).map(|a| bp[a] - lo[a]).collect();
    let basepoint = small.node(&idx);
    DiscreteManifold::new_any_dim(small, MetricField::from_vec(n, data)?, basepoint)
}

#[derive(Clone, Debug)]
pub struct FlowOptions {
    /// Relative slack on the flow-time bound.
    pub slack: f64,
    /// Level tolerance of the final bisection.
    pub tol: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self { slack: 0.05, tol: 1e-9 }
    }
}

#[derive(Clone, Debug)]
pub struct FlowResult<T> {
    pub point: Vec<T>,
    pub time: T,
    pub value: T,
    pub steps: usize,
    /// `|f(start) - target| / (slope * min(1, slope))`, times `1 + slack`.
    pub bound: T,
    pub within_bound: bool,
}

/// Follows `+-grad f` from a node until `f` reaches `target`, with the
/// midpoint rule on the multilinearly interpolated gradient.
pub fn flow_to_level<T: Real>(
    x: &DiscreteManifold<T>,
    hf: &HeightField<T>,
    start: usize,
    target: T,
    opts: &FlowOptions,
) -> Result<FlowResult<T>> {
    let n = x.dim();
    let lat = x.lattice();
    let ginv = inverse_metric(x)?;
    let df = fd::gradient(lat, &hf.f);
    let mut grad = vec![T::zero(); x.len() * n];
    for v in 0..x.len() {
        let g = linalg::matvec(&ginv[v * n * n..(v + 1) * n * n], n, &df[v * n..(v + 1) * n]);
        grad[v * n..(v + 1) * n].copy_from_slice(&g);
    }
    let norm: Vec<T> = gradient_norm_sq(x, &hf.f)?.iter().map(|s| s.max(T::zero()).sqrt()).collect();
    let p0 = lat.coords(start);
    let f0 = hf.f[start];
    let delta = hf.slope;
    let bound = (f0 - target).abs() / (delta * delta.min(T::one())) * (T::one() + T::lit(opts.slack));
    let tol = T::lit(opts.tol);
    let done = |p: Vec<T>, time: T, value: T, steps: usize| FlowResult {
        point: p,
        time,
        value,
        steps,
        bound,
        within_bound: time <= bound,
    };
    if (f0 - target).abs() <= tol {
        return Ok(done(p0, T::zero(), f0, 0));
    }
    let sign = if target > f0 { T::one() } else { -T::one() };
    let zero = T::zero();
    let level = |p: &[T]| lat.interpolate(&hf.f, 1, p, zero).map(|v| v[0]);
    let field = |p: &[T], t: T| -> Result<Vec<T>> {
        let g = lat.interpolate(&grad, n, p, zero).ok_or(Error::LeftBand { time: t.to_f() })?;
        let s = lat.interpolate(&norm, 1, p, zero).ok_or(Error::LeftBand { time: t.to_f() })?[0];
        if s < delta * T::lit(0.5) {
            return Err(Error::LeftBand { time: t.to_f() });
        }
        Ok(g)
    };
    let step = |p: &[T], dt: T, t: T| -> Result<Vec<T>> {
        let k1 = field(p, t)?;
        let mid: Vec<T> = (0..n).map(|i| p[i] + sign * dt * T::lit(0.5) * k1[i]).collect();
        let k2 = field(&mid, t)?;
        Ok((0..n).map(|i| p[i] + sign * dt * k2[i]).collect())
    };
    let dt = lat.min_spacing() * T::lit(0.25);
    let max_steps = ((bound * T::lit(4.0) / dt).to_usize().unwrap_or(0)).max(16) + 16;
    let mut p = p0;
    let mut t = T::zero();
    for k in 0..max_steps {
        let q = step(&p, dt, t)?;
        let fq = level(&q).ok_or(Error::LeftBand { time: t.to_f() })?;
        if sign * (fq - target) >= zero {
            let (mut a, mut b) = (T::zero(), T::one());
            let mut best = (q, fq, T::one());
            for _ in 0..200 {
                let c = T::lit(0.5) * (a + b);
                let r = step(&p, dt * c, t)?;
                let fr = level(&r).ok_or(Error::LeftBand { time: t.to_f() })?;
                best = (r, fr, c);
                if (fr - target).abs() <= tol {
                    break;
                }
                if sign * (fr - target) >= zero {
                    b = c;
                } else {
                    a = c;
                }
            }
            let (r, fr, c) = best;
            return Ok(done(r, t + dt * c, fr, k + 1));
        }
        p = q;
        t = t + dt;
    }
    Err(Error::LeftBand { time: t.to_f() })
}
