//! Human-readable scenario descriptions.

use satlab::spectral::Problem;

use crate::scenario::{Check, Scenario};

fn identity_text(p: Problem) -> &'static str {
    match p {
        Problem::Closed => "closed: the satellite g~ = u^(4/(n-2)) g has scalar curvature R~ = lambda u^(-4/(n-2))",
        Problem::S0 => {
            "s0 (Steklov type): the satellite is scalar-flat, R~ = 0, and its boundary mean curvature is \
             h~ = -lambda u^(-2/(n-2)) / (2(n-1)) for the inward normal"
        }
        Problem::S1 => {
            "s1 (Robin type): the satellite has R~ = lambda u^(-4/(n-2)) and minimal boundary, h~ = 0"
        }
    }
}

fn check_text(c: Check) -> &'static str {
    match c {
        Check::Identity => {
            "curvature of the satellite metric built from the principal eigenfunction against its \
             closed form; residuals must decay at least linearly when the grid spacing is halved"
        }
        Check::Bounds => {
            "eigenvalue envelopes from the constant test function: |lambda| <= |R|max (closed), \
             |R|max vol/vol_bdry + 2(n-1)|h|max (s0), |R|max + 2(n-1)|h|max vol_bdry/vol (s1), with 5% slack"
        }
        Check::Harnack => "Harnack ratio inf u / sup u on a ball about the basepoint and its drift under a small C^2 metric perturbation",
        Check::FlatzoomerSweep => {
            "sup |nabla^k Riem| of e^(2c) g measured in that metric decays like e^(-(k+2)c); \
             the fitted exponent must match -(k+2)"
        }
        Check::QuasiFlatzoomer => "the empirical convexity radius satisfies 1/conv_est <= Psi = Phi0 + Phi1 + Phi2",
        Check::ExtensionRoundtrip => {
            "Seeley-type metric extension stays positive definite above its floor, the height function \
             has slope at least 1/c near its zero set, and cutting at the zero level returns the original manifold exactly"
        }
        Check::SequenceDiagnostics => {
            "C^k distances of the members to the limit, principal eigenvalues (Cauchy trend), \
             conformal distortion of the satellites on a fixed ball and epsilon-isometry to the limit satellite"
        }
    }
}

pub fn describe(sc: &Scenario) -> String {
    let m = &sc.manifold;
    let mut s = format!("{}\n", sc.name);
    if !sc.description.is_empty() {
        s.push_str(&format!("  {}\n", sc.description));
    }
    let axes: Vec<String> = m
        .axes
        .iter()
        .map(|a| format!("[{}, {}]{} x{}", a.lo, a.hi, if a.periodic { " periodic" } else { "" }, a.nodes))
        .collect();
    s.push_str(&format!("manifold: dim {}, metric `{}`, axes {}\n", m.dim, m.metric, axes.join(", ")));
    if !m.params.is_empty() {
        let p: Vec<String> = m.params.iter().map(|(k, v)| format!("{k} = {v}")).collect();
        s.push_str(&format!("params: {}\n", p.join(", ")));
    }
    s.push_str(&format!("seed: {}\n", sc.seed));
    s.push_str("checks:\n");
    for c in &sc.checks {
        s.push_str(&format!("  {}: {}\n", c.name(), check_text(*c)));
        if *c == Check::Identity {
            if let Ok(ps) = sc.problems() {
                for p in ps {
                    s.push_str(&format!("    {}\n", identity_text(p)));
                }
            }
        }
    }
    s
}
