//! Executes the checks of a scenario and writes their artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use satlab::conformal::{flatzoomer_sweep, quasi_flatzoomer_psi, ConformalFactor, ConvexityOptions};
use satlab::extension::{build_height_function, cut_manifold, extend_metric, HeightOptions, SeeleyScheme};
use satlab::grid::{build_box_manifold, fmt_num, write_fields_csv, write_table_csv};
use satlab::linalg;
use satlab::satellite::{make_satellite, satellite_from, verify_identities, IdentityReport, ROUNDOFF_FLOOR};
use satlab::sequences::{satellite_sequence_diagnostics, SequenceSpec, TABLE_HEADER};
use satlab::spectral::{
    assemble, eigen_bounds_check, harnack_stability, solve_principal_with, OperatorPair, Problem, SolverOptions, BOUND_SLACK,
};
use satlab::{Eigen, Manifold};

use crate::scenario::{Check, Scenario};
use crate::{CliError, EXIT_FAILED, EXIT_OK};

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub resolution: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub check: String,
    pub item: String,
    pub value: String,
    pub threshold: String,
    pub passes: bool,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub scenario: String,
    pub out_dir: PathBuf,
    pub verdicts: Vec<Verdict>,
    pub files: Vec<PathBuf>,
}

impl RunReport {
    pub fn passes(&self) -> bool {
        self.verdicts.iter().all(|v| v.passes)
    }

    pub fn failures(&self) -> Vec<&Verdict> {
        self.verdicts.iter().filter(|v| !v.passes).collect()
    }

    pub fn exit_code(&self) -> i32 {
        if self.passes() {
            EXIT_OK
        } else {
            EXIT_FAILED
        }
    }

    /// Contents of `verdict.txt`.
    pub fn text(&self) -> String {
        let mut s = format!("scenario = {}\nstatus = {}\n", self.scenario, if self.passes() { "pass" } else { "fail" });
        for v in &self.verdicts {
            let tag = if v.passes { "PASS" } else { "FAIL" };
            s.push_str(&format!("[{tag}] {} {}: {} (threshold {})\n", v.check, v.item, v.value, v.threshold));
        }
        s
    }
}

struct Ctx<'a> {
    sc: &'a Scenario,
    out: PathBuf,
    opts: SolverOptions,
    problems: Vec<Problem>,
    manifold: Manifold,
    sequence: Option<SequenceSpec>,
    solved: Vec<(Problem, OperatorPair<f64>, Eigen)>,
    verdicts: Vec<Verdict>,
    files: Vec<PathBuf>,
}

fn yes_no(b: bool) -> String {
    b.to_string()
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

/// `log2(coarse/fine)`, `None` when both are at round-off level.
fn order(coarse: f64, fine: f64) -> Option<f64> {
    if coarse <= ROUNDOFF_FLOOR && fine <= ROUNDOFF_FLOOR {
        None
    } else {
        Some((coarse / fine).log2())
    }
}

impl Ctx<'_> {
    fn verdict(&mut self, check: Check, item: impl Into<String>, value: String, threshold: impl Into<String>, passes: bool) {
        self.verdicts.push(Verdict {
            check: check.name().into(),
            item: item.into(),
            value,
            threshold: threshold.into(),
            passes,
        });
    }

    fn path(&mut self, file: &str) -> PathBuf {
        let p = self.out.join(file);
        self.files.push(p.clone());
        p
    }

    fn table(&mut self, file: &str, header: &[&str], rows: &[Vec<String>]) -> satlab::Result<()> {
        let p = self.path(file);
        write_table_csv(&p, header, rows)
    }

    fn solve(&mut self, p: Problem) -> satlab::Result<usize> {
        if let Some(i) = self.solved.iter().position(|s| s.0 == p) {
            return Ok(i);
        }
        let ops = assemble(&self.manifold)?;
        let eig = solve_principal_with(&self.manifold, &ops, p, &self.opts)?;
        self.solved.push((p, ops, eig));
        Ok(self.solved.len() - 1)
    }

    fn run(&mut self, check: Check) -> satlab::Result<()> {
        match check {
            Check::Identity => self.identity(),
            Check::Bounds => self.bounds(),
            Check::Harnack => self.harnack(),
            Check::FlatzoomerSweep => self.flatzoomer(),
            Check::QuasiFlatzoomer => self.quasi(),
            Check::ExtensionRoundtrip => self.extension(),
            Check::SequenceDiagnostics => self.sequence(),
        }
    }

    fn identity(&mut self) -> satlab::Result<()> {
        let cfg = self.sc.identity.clone();
        let mut rows = Vec::new();
        let row = |p: Problem, m: &Manifold, r: &IdentityReport<f64>| {
            vec![
                p.name().to_string(),
                m.len().to_string(),
                fmt_num(r.h),
                fmt_num(r.lambda),
                fmt_num(r.scalar_residual),
                opt(r.mean_residual),
                r.sign_law.map(yes_no).unwrap_or_default(),
            ]
        };
        for p in self.problems.clone() {
            let i = self.solve(p)?;
            let sat = satellite_from(&self.manifold, self.solved[i].2.clone())?;
            let coarse = verify_identities(&sat);
            rows.push(row(p, &self.manifold, &coarse));
            let expected = sat.expected_scalar();
            let file = self.path(&format!("identity_{}_fields.csv", p.name()));
            write_fields_csv(
                &file,
                self.manifold.lattice(),
                &[("u", sat.eigen.u.values()), ("scalar", sat.scalar.values()), ("expected_scalar", expected.values())],
            )?;
            let mut last = coarse.clone();
            if cfg.refine {
                let fm = build_box_manifold::<f64>(&self.sc.manifold.clone().refined())?;
                let fine = verify_identities(&make_satellite(&fm, p, &self.opts)?);
                rows.push(row(p, &fm, &fine));
                let so = order(coarse.scalar_residual, fine.scalar_residual);
                self.verdict(
                    Check::Identity,
                    format!("{}/scalar_order", p.name()),
                    so.map(fmt_num).unwrap_or_else(|| "exact".into()),
                    ">= 1",
                    so.map_or(true, |o| o >= 1.0),
                );
                if let (Some(a), Some(b)) = (coarse.mean_residual, fine.mean_residual) {
                    let mo = order(a, b);
                    self.verdict(
                        Check::Identity,
                        format!("{}/mean_order", p.name()),
                        mo.map(fmt_num).unwrap_or_else(|| "exact".into()),
                        ">= 1",
                        mo.map_or(true, |o| o >= 1.0),
                    );
                }
                last = fine;
            }
            if let Some(max) = cfg.max_residual {
                let worst = last.scalar_residual.max(last.mean_residual.unwrap_or(0.0));
                self.verdict(Check::Identity, format!("{}/residual", p.name()), fmt_num(worst), fmt_num(max), worst <= max);
            }
            self.verdict(
                Check::Identity,
                format!("{}/sign_law", p.name()),
                last.sign_law.map(yes_no).unwrap_or_else(|| "n/a".into()),
                if p == Problem::S0 { "sign h = -sign lambda" } else { "sign R = sign lambda" },
                last.sign_law != Some(false),
            );
        }
        self.table(
            "identity.csv",
            &["problem", "nodes", "h", "lambda", "scalar_residual", "mean_residual", "sign_law"],
            &rows,
        )
    }

    fn bounds(&mut self) -> satlab::Result<()> {
        let mut rows = Vec::new();
        for p in self.problems.clone() {
            let i = self.solve(p)?;
            let (_, ops, eig) = &self.solved[i];
            let r = eigen_bounds_check(ops, eig);
            rows.push(vec![
                p.name().to_string(),
                fmt_num(r.lambda),
                fmt_num(r.bound),
                fmt_num(r.margin),
                fmt_num(r.r_max),
                fmt_num(r.h_max),
                fmt_num(r.volume),
                fmt_num(r.boundary_volume),
                yes_no(r.passes),
            ]);
            let limit = (1.0 + BOUND_SLACK) * r.bound + 1e-10;
            self.verdict(Check::Bounds, p.name(), fmt_num(r.lambda.abs()), fmt_num(limit), r.passes);
        }
        self.table(
            "bounds.csv",
            &["problem", "lambda", "bound", "margin", "r_max", "h_max", "volume", "boundary_volume", "passes"],
            &rows,
        )
    }

    fn harnack(&mut self) -> satlab::Result<()> {
        let cfg = self.sc.harnack.clone();
        let mut rows = Vec::new();
        for p in self.problems.clone() {
            let i = self.solve(p)?;
            let r = harnack_stability(&self.manifold, &self.solved[i].2, cfg.radius, cfg.eps, &self.opts)?;
            rows.push(vec![
                p.name().to_string(),
                fmt_num(r.radius),
                r.nodes.to_string(),
                fmt_num(r.ratio),
                fmt_num(r.perturbed_ratio),
                fmt_num(r.drift),
                fmt_num(r.perturbation_c2),
            ]);
            let ok = r.ratio > 0.0 && r.ratio <= 1.0;
            self.verdict(Check::Harnack, format!("{}/ratio", p.name()), fmt_num(r.ratio), "(0, 1]", ok);
            self.verdict(Check::Harnack, format!("{}/drift", p.name()), fmt_num(r.drift), fmt_num(cfg.max_drift), r.drift <= cfg.max_drift);
        }
        self.table(
            "harnack.csv",
            &["problem", "radius", "nodes", "ratio", "perturbed_ratio", "drift", "perturbation_c2"],
            &rows,
        )
    }

    fn flatzoomer(&mut self) -> satlab::Result<()> {
        let cfg = self.sc.flatzoomer.clone();
        let zero = ConformalFactor::constant(self.manifold.len(), 0.0);
        let mut rows = Vec::new();
        let mut fits = Vec::new();
        for &k in &cfg.orders {
            let s = flatzoomer_sweep(&self.manifold, &zero, &cfg.shifts, k)?;
            rows.extend(s.rows.iter().map(|(c, phi)| vec![k.to_string(), fmt_num(*c), fmt_num(*phi)]));
            let expected = -((k + 2) as f64);
            fits.push(vec![k.to_string(), opt(s.fitted_exponent), fmt_num(expected)]);
            let item = format!("k={k}/exponent");
            match s.fitted_exponent {
                Some(e) => {
                    let err = (e - expected).abs();
                    self.verdict(Check::FlatzoomerSweep, item, fmt_num(e), format!("{} +- {}", fmt_num(expected), fmt_num(cfg.tol)), err <= cfg.tol)
                }
                None => {
                    // a flat metric has nothing to decay
                    let flat = s.rows.iter().all(|(_, phi)| phi.abs() <= 1e-12);
                    self.verdict(Check::FlatzoomerSweep, item, if flat { "flat".into() } else { "n/a".into() }, "sup = 0", flat)
                }
            }
        }
        self.table("flatzoomer.csv", &["k", "shift", "sup_phi"], &rows)?;
        self.table("flatzoomer_fit.csv", &["k", "fitted_exponent", "expected"], &fits)
    }

    fn quasi(&mut self) -> satlab::Result<()> {
        let cfg = self.sc.quasi.clone();
        let opts = ConvexityOptions { centers: cfg.centers, sources: cfg.sources, seed: self.sc.seed, slack: cfg.slack };
        let zero = ConformalFactor::constant(self.manifold.len(), 0.0);
        let q = quasi_flatzoomer_psi(&self.manifold, &zero, &opts)?;
        let inv = 1.0 / q.conv_est;
        let rows: Vec<Vec<String>> = [
            ("phi0", q.phi0),
            ("phi1", q.phi1),
            ("phi2", q.phi2),
            ("psi", q.psi),
            ("a_const", q.a_const),
            ("c_const", q.c_const),
            ("h_const", q.h_const),
            ("u1", q.u1),
            ("conv_est", q.conv_est),
            ("inverse_conv_est", inv),
        ]
        .iter()
        .map(|(k, v)| vec![k.to_string(), fmt_num(*v)])
        .chain([vec!["witnessed".into(), yes_no(q.witnessed)], vec!["skipped".into(), yes_no(q.skipped)]])
        .collect();
        let value = if q.skipped { "skipped".into() } else { fmt_num(inv) };
        self.verdict(Check::QuasiFlatzoomer, "inverse_conv_est", value, fmt_num(q.psi * (1.0 + cfg.slack)), q.bound_holds != Some(false));
        self.table("quasi_flatzoomer.csv", &["quantity", "value"], &rows)
    }

    fn extension(&mut self) -> satlab::Result<()> {
        let cfg = self.sc.extension.clone();
        let m = &self.manifold;
        let scheme = SeeleyScheme::<f64>::geometric(cfg.order)?;
        let x = extend_metric(m, &scheme, cfg.depth)?;
        let hf = build_height_function(&x, &HeightOptions { r2: cfg.r2, band: None, c: cfg.c })?;
        let back = cut_manifold(&x.manifold, &hf);
        let exact = match &back {
            Ok(b) => b.lattice() == m.lattice() && b.metric() == m.metric() && b.basepoint() == m.basepoint(),
            Err(_) => false,
        };
        let n = m.dim();
        let xl = x.manifold.lattice().clone();
        let lmin: Vec<f64> = (0..x.manifold.len())
            .map(|v| linalg::sym_eigen(x.manifold.metric().at(v), n).map_or(f64::NAN, |(vals, _)| vals[0]))
            .collect();
        let inside: Vec<f64> = (0..x.manifold.len()).map(|v| if x.restrict(v).is_some() { 1.0 } else { 0.0 }).collect();
        let spd = lmin.iter().all(|l| *l > 0.0);
        let rows = vec![
            vec!["order".into(), cfg.order.to_string()],
            vec!["depth".into(), fmt_num(x.depth)],
            vec!["nodes".into(), x.manifold.len().to_string()],
            vec!["clamped".into(), yes_no(x.clamped)],
            vec!["min_eigenvalue".into(), fmt_num(x.min_eigenvalue)],
            vec!["floor".into(), fmt_num(x.floor)],
            vec!["r2".into(), fmt_num(hf.r2)],
            vec!["band".into(), fmt_num(hf.band)],
            vec!["slope".into(), fmt_num(hf.slope)],
            vec!["slope_threshold".into(), fmt_num(hf.threshold)],
            vec!["round_trip_exact".into(), yes_no(exact)],
        ];
        self.verdict(Check::ExtensionRoundtrip, "spd", fmt_num(x.min_eigenvalue), "> 0", spd && x.min_eigenvalue > 0.0);
        self.verdict(Check::ExtensionRoundtrip, "floor", fmt_num(x.min_eigenvalue), fmt_num(x.floor), x.floor_holds);
        self.verdict(Check::ExtensionRoundtrip, "slope", fmt_num(hf.slope), fmt_num(hf.threshold), hf.slope_ok());
        let detail = match &back {
            Ok(_) => yes_no(exact),
            Err(e) => e.to_string(),
        };
        self.verdict(Check::ExtensionRoundtrip, "round_trip", detail, "exact", exact);
        let file = self.path("extension_fields.csv");
        write_fields_csv(&file, &xl, &[("height", hf.f.values()), ("min_eigenvalue", &lmin), ("original", &inside)])?;
        self.table("extension.csv", &["quantity", "value"], &rows)
    }

    fn sequence(&mut self) -> satlab::Result<()> {
        let spec = self.sequence.clone().expect("sequence spec is validated");
        let d = satellite_sequence_diagnostics::<f64>(&spec, &self.opts)?;
        self.table("sequence.csv", &TABLE_HEADER, &d.table())?;
        let text = format!("{}limit_lambda = {}\nk = {}\n", d.verdict_text(), opt(d.limit_lambda), d.k);
        let p = self.path("sequence_verdicts.txt");
        fs::write(p, text)?;
        let v = d.verdicts.clone();
        let show = |x: Option<bool>| x.map(yes_no).unwrap_or_else(|| "n/a".into());
        self.verdict(Check::SequenceDiagnostics, "complete", yes_no(!v.partial), "every member solved", !v.partial);
        self.verdict(Check::SequenceDiagnostics, "envelope", yes_no(v.envelope), "every lambda inside its envelope", v.envelope);
        self.verdict(Check::SequenceDiagnostics, "cauchy", show(v.cauchy), "|l_N - l_N/2| < |l_N/2 - l_N/4|", v.cauchy != Some(false));
        self.verdict(Check::SequenceDiagnostics, "distortion", show(v.distortion), "decreasing, final < 10% of first", v.distortion != Some(false));
        self.verdict(Check::SequenceDiagnostics, "epsilon", show(v.epsilon), "decreasing, one violation allowed", v.epsilon != Some(false));
        self.verdict(Check::SequenceDiagnostics, "sign", show(v.sign), "sign R = sign lambda", v.sign != Some(false));
        Ok(())
    }
}

fn write_history(out: &Path, history: &[f64]) -> std::io::Result<PathBuf> {
    let p = out.join("residual_history.csv");
    let rows: Vec<Vec<String>> = history.iter().enumerate().map(|(i, r)| vec![i.to_string(), fmt_num(*r)]).collect();
    write_table_csv(&p, &["iteration", "residual"], &rows).map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(p)
}

fn prepare_out_dir(dir: &Path) -> Result<(), CliError> {
    let fail = |e: std::io::Error| CliError::Config(format!("output directory {}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(fail)?;
    let probe = dir.join(".satlab-write-test");
    fs::write(&probe, b"").map_err(fail)?;
    fs::remove_file(&probe).map_err(fail)?;
    Ok(())
}

/// Runs every check of `scenario` and writes `summary.csv` and
/// `verdict.txt`. Errors other than solver failures inside a check become
/// failing verdicts.
pub fn run_scenario(scenario: &Scenario, opts: &RunOptions) -> Result<RunReport, CliError> {
    let mut sc = scenario.clone();
    if let Some(seed) = opts.seed {
        sc.seed = seed;
    }
    if let Some(n) = opts.resolution {
        sc = sc.with_resolution(n)?;
    }
    sc.validate()?;
    let out = opts
        .out_dir
        .clone()
        .or_else(|| sc.output.clone())
        .unwrap_or_else(|| PathBuf::from("satlab-out").join(&sc.name));
    prepare_out_dir(&out)?;

    let sequence = if sc.is_sequence() { Some(sc.sequence_spec()?) } else { None };
    let spec = sequence.as_ref().map(|s| s.member_spec(1)).unwrap_or_else(|| sc.manifold.clone());
    let manifold = build_box_manifold::<f64>(&spec).map_err(|e| CliError::Config(format!("manifold: {e}")))?;
    let problems = if sc.checks.iter().any(|c| matches!(c, Check::Identity | Check::Bounds | Check::Harnack)) {
        sc.problems()?
    } else {
        Vec::new()
    };
    let mut ctx = Ctx {
        sc: &sc,
        out: out.clone(),
        opts: sc.solver.options(),
        problems,
        manifold,
        sequence,
        solved: Vec::new(),
        verdicts: Vec::new(),
        files: Vec::new(),
    };
    let mut checks: Vec<Check> = Vec::new();
    for c in &sc.checks {
        if !checks.contains(c) {
            checks.push(*c);
        }
    }
    for check in checks {
        if let Err(e) = ctx.run(check) {
            if e.is_solver_failure() {
                let history = write_history(&out, e.residual_history().unwrap_or(&[]))
                    .map_err(|io| CliError::Config(format!("cannot write residual history: {io}")))?;
                return Err(CliError::Solver { check: check.name().into(), message: e.to_string(), history });
            }
            ctx.verdict(check, "error", e.to_string(), "no error", false);
        }
    }

    let mut report = RunReport { scenario: sc.name.clone(), out_dir: out.clone(), verdicts: ctx.verdicts, files: ctx.files };
    let rows: Vec<Vec<String>> = report
        .verdicts
        .iter()
        .map(|v| vec![v.check.clone(), v.item.clone(), v.value.clone(), v.threshold.clone(), if v.passes { "pass" } else { "fail" }.into()])
        .collect();
    let summary = out.join("summary.csv");
    let io = |e: satlab::Error| CliError::Config(format!("cannot write {}: {e}", out.display()));
    write_table_csv(&summary, &["check", "item", "value", "threshold", "verdict"], &rows).map_err(io)?;
    let text = out.join("verdict.txt");
    fs::write(&text, report.text()).map_err(|e| io(e.into()))?;
    report.files.push(summary);
    report.files.push(text);
    Ok(report)
}
