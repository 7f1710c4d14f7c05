//! The derivation pipeline and the checks requested on top of it.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::calc_var::{constraint_extract, ibp_split, variation, vertical_delta, LocalVarForm, TheorySpec};
use crate::expr::{latex_var, render, render_latex, Notation};
use crate::lattice::checks::{
    em_check, generic_check, length_check, mechanics_check, pc_check, scalar_check, EmCheck, GenericCheck,
    LengthCheck, MechanicsCheck, PcCheck, ScalarCheck,
};
use crate::lattice::LatticeGrid;
use crate::pointlin::sample::{point_checks, PointCheckReport};
use crate::theories::{self, Derived, GoldenReport};

#[derive(Debug, Error)]
#[error("{stage}: {message}")]
pub struct PipelineError {
    pub stage: &'static str,
    pub message: String,
}

fn fail(stage: &'static str) -> impl Fn(String) -> PipelineError {
    move |message| PipelineError { stage, message }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Options {
    /// Sites per axis; the number of entries is the grid dimension.
    pub lattice: Option<Vec<usize>>,
    pub run_lattice: bool,
    pub point_checks: usize,
    pub seed: u64,
    /// Tolerance for sampled brackets.
    pub tol: f64,
    pub golden: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            lattice: None,
            run_lattice: false,
            point_checks: 0,
            seed: 0,
            tol: 1e-6,
            golden: false,
        }
    }
}

/// Parses `N`, `NxN` or `NxNxN`.
pub fn parse_lattice(s: &str) -> Result<Vec<usize>, String> {
    let dims: Vec<usize> = s
        .split(['x', 'X', '×'])
        .map(|p| p.trim().parse::<usize>().map_err(|_| format!("bad lattice size `{s}`")))
        .collect::<Result<_, _>>()?;
    if dims.is_empty() || dims.len() > 3 {
        return Err(format!("lattice `{s}` must have one to three axes"));
    }
    if dims.iter().any(|&d| d != dims[0]) {
        return Err(format!("lattice `{s}` must have the same size on every axis"));
    }
    Ok(dims)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoryMeta {
    pub name: String,
    pub dim: usize,
    pub coords: Vec<String>,
    pub transversal: String,
    pub fields: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "check", rename_all = "snake_case")]
pub enum LatticeResult {
    Mechanics(MechanicsCheck),
    Length(LengthCheck),
    Scalar(ScalarCheck),
    Em(EmCheck),
    Pc(PcCheck),
    Generic(GenericCheck),
}

impl LatticeResult {
    /// Numeric field of the check by name; booleans count as 0 or 1.
    pub fn quantity(&self, name: &str) -> Option<f64> {
        let v = serde_json::to_value(self).ok()?;
        match v.get(name)? {
            serde_json::Value::Bool(b) => Some(f64::from(u8::from(*b))),
            other => other.as_f64(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum Stage {
    Variation {
        terms: usize,
        delta_l: String,
    },
    IbpSplit {
        el: BTreeMap<String, String>,
        alpha: BTreeMap<String, String>,
        /// Whether `δL` equals the sum of its pieces.
        reconstructs: bool,
    },
    VerticalDelta {
        omega: BTreeMap<String, String>,
    },
    ConstraintExtract {
        constraints: BTreeMap<String, String>,
    },
    PointChecks(PointCheckReport),
    LatticeChecks {
        grid: Vec<usize>,
        result: LatticeResult,
    },
    Skipped {
        name: String,
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoldenEntry {
    pub entry: String,
    pub expected: String,
    pub actual: String,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub theory: TheoryMeta,
    pub stages: Vec<Stage>,
    /// The derived structures in LaTeX.
    pub latex: Derived,
    pub golden: Vec<GoldenEntry>,
    pub passed: bool,
}

impl Report {
    /// Text normal forms gathered from the stages.
    pub fn derived(&self) -> Derived {
        let mut d = Derived::default();
        for s in &self.stages {
            match s {
                Stage::IbpSplit { el, alpha, .. } => {
                    d.el = el.clone();
                    d.alpha = alpha.clone();
                }
                Stage::VerticalDelta { omega, .. } => d.omega = omega.clone(),
                Stage::ConstraintExtract { constraints } => d.constraints = constraints.clone(),
                _ => {}
            }
        }
        d
    }

    pub fn lattice(&self) -> Option<&LatticeResult> {
        self.stages.iter().find_map(|s| match s {
            Stage::LatticeChecks { result, .. } => Some(result),
            _ => None,
        })
    }

    pub fn point_checks(&self) -> Option<&PointCheckReport> {
        self.stages.iter().find_map(|s| match s {
            Stage::PointChecks(p) => Some(p),
            _ => None,
        })
    }
}

fn generator_key(gens: &[crate::expr::JetVar], n: &Notation, latex: bool) -> String {
    let parts: Vec<String> = gens
        .iter()
        .map(|g| {
            if latex {
                format!("\\delta {}", latex_var(g, n))
            } else {
                format!("δ{}", g.render(n.transversal))
            }
        })
        .collect();
    parts.join(if latex { "\\wedge " } else { "^" })
}

fn form_maps(f: &LocalVarForm, n: &Notation) -> (BTreeMap<String, String>, BTreeMap<String, String>) {
    let mut text = BTreeMap::new();
    let mut tex = BTreeMap::new();
    for (gens, c) in f.terms() {
        text.insert(generator_key(gens, n, false), render(c, n));
        tex.insert(generator_key(gens, n, true), render_latex(c, n));
    }
    (text, tex)
}

fn is_pc_like(t: &TheorySpec) -> bool {
    t.dim == 4 && t.field("e").is_some() && t.field("w").is_some()
}

/// Runs the symbolic stages, then the requested pointwise and lattice
/// checks, and compares with the stored goldens when asked.
pub fn run_pipeline(t: &TheorySpec, opts: &Options) -> Result<Report, PipelineError> {
    let n = t.notation();
    let mut stages = Vec::new();
    let mut latex = Derived::default();

    let var = variation(t);
    stages.push(Stage::Variation {
        terms: var.terms().map(|(_, c)| c.len()).sum(),
        delta_l: var.render(&n),
    });

    let split = ibp_split(&var, t).map_err(|e| fail("ibp_split")(e.to_string()))?;
    let reconstructs = split.reconstruct(t).map_err(|e| fail("ibp_split")(e.to_string()))? == var;
    let mut el = BTreeMap::new();
    for (v, e) in &split.el {
        el.insert(v.render(n.transversal), render(e, &n));
        latex.el.insert(latex_var(v, &n), render_latex(e, &n));
    }
    let (alpha, alpha_tex) = form_maps(&split.alpha, &n);
    latex.alpha = alpha_tex;
    stages.push(Stage::IbpSplit {
        el,
        alpha,
        reconstructs,
    });

    let omega = vertical_delta(&split.alpha).map_err(|e| fail("vertical_delta")(e.to_string()))?;
    let (omega_text, omega_tex) = form_maps(&omega, &n);
    latex.omega = omega_tex;
    stages.push(Stage::VerticalDelta { omega: omega_text });

    let constraints = constraint_extract(t, &split).map_err(|e| fail("constraint_extract")(e.to_string()))?;
    let mut cs = BTreeMap::new();
    for c in &constraints {
        cs.insert(c.name.clone(), render(&c.density, &n));
        latex.constraints.insert(c.name.clone(), render_latex(&c.density, &n));
    }
    stages.push(Stage::ConstraintExtract { constraints: cs });

    if opts.point_checks > 0 {
        if is_pc_like(t) {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            stages.push(Stage::PointChecks(point_checks(&mut rng, opts.point_checks)));
        } else {
            stages.push(Stage::Skipped {
                name: "point_checks".into(),
                reason: "theory has no coframe and connection".into(),
            });
        }
    }

    if opts.run_lattice || opts.lattice.is_some() {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(1));
        let (grid, result) = lattice_checks(t, opts, &mut rng).map_err(fail("lattice"))?;
        stages.push(Stage::LatticeChecks { grid, result });
    }

    let mut report = Report {
        theory: TheoryMeta {
            name: t.name.clone(),
            dim: t.dim,
            coords: t.coords.clone(),
            transversal: t.coords[t.transversal].clone(),
            fields: t.fields.iter().map(|f| f.name.clone()).collect(),
        },
        stages,
        latex,
        golden: Vec::new(),
        passed: true,
    };
    if opts.golden {
        let g = theories::golden(&t.name).map_err(|e| fail("golden")(e.to_string()))?;
        report.golden = compare_golden(&report, &g);
    }
    report.passed = report.golden.iter().all(|e| e.passed) && requested_checks_pass(&report);
    Ok(report)
}

fn requested_checks_pass(r: &Report) -> bool {
    r.stages.iter().all(|s| match s {
        Stage::IbpSplit { reconstructs, .. } => *reconstructs,
        Stage::PointChecks(p) => p.all_passed(),
        _ => true,
    })
}

fn lattice_checks(t: &TheorySpec, opts: &Options, rng: &mut ChaCha8Rng) -> Result<(Vec<usize>, LatticeResult), String> {
    let side = opts.lattice.as_ref().map(|d| d[0]);
    let s = |e: crate::lattice::LatticeError| e.to_string();
    Ok(match t.name.as_str() {
        "mechanics" => (vec![], LatticeResult::Mechanics(mechanics_check(rng, 20).map_err(s)?)),
        "length" => (vec![], LatticeResult::Length(length_check(rng, 50).map_err(s)?)),
        "scalar" => {
            let n = side.unwrap_or(32);
            (vec![n], LatticeResult::Scalar(scalar_check(rng, n, 4).map_err(s)?))
        }
        "em" => {
            let n = side.unwrap_or(8);
            (vec![n; 3], LatticeResult::Em(em_check(rng, n, 20, 1000).map_err(s)?))
        }
        "pc4" => (vec![], LatticeResult::Pc(pc_check(rng, 20, 3, opts.tol).map_err(s)?)),
        _ => {
            let dims = opts.lattice.clone().unwrap_or_default();
            let grid = if dims.is_empty() {
                LatticeGrid::point()
            } else {
                LatticeGrid::new(dims.len(), dims[0], 1.0 / dims[0] as f64).map_err(s)?
            };
            (dims, LatticeResult::Generic(generic_check(rng, t, grid).map_err(s)?))
        }
    })
}

fn compare_maps(kind: &str, expected: &BTreeMap<String, String>, actual: &BTreeMap<String, String>, out: &mut Vec<GoldenEntry>) {
    let keys: std::collections::BTreeSet<&String> = expected.keys().chain(actual.keys()).collect();
    for k in keys {
        let e = expected.get(k).cloned().unwrap_or_else(|| "<absent>".into());
        let a = actual.get(k).cloned().unwrap_or_else(|| "<absent>".into());
        out.push(GoldenEntry {
            entry: format!("{kind}/{k}"),
            passed: e == a,
            expected: e,
            actual: a,
        });
    }
}

/// Entry-by-entry comparison; numeric targets only when the matching
/// checks ran.
pub fn compare_golden(r: &Report, g: &GoldenReport) -> Vec<GoldenEntry> {
    let d = r.derived();
    let mut out = Vec::new();
    compare_maps("el", &g.derived.el, &d.el, &mut out);
    compare_maps("alpha", &g.derived.alpha, &d.alpha, &mut out);
    compare_maps("omega", &g.derived.omega, &d.omega, &mut out);
    compare_maps("constraints", &g.derived.constraints, &d.constraints, &mut out);
    if let Some(p) = r.point_checks() {
        for (k, want) in &g.kernel {
            let got = match k.as_str() {
                "coframe_kernel_dim" => p.kernel_dims.iter().all(|&d| d as i64 == *want).then_some(*want),
                "injective_w21" => Some(i64::from(p.injective == p.samples)),
                "structural_exact" => Some(i64::from(p.structural_exact == p.samples)),
                _ => None,
            };
            out.push(GoldenEntry {
                entry: format!("kernel/{k}"),
                expected: want.to_string(),
                actual: got.map_or_else(|| format!("{:?}", p.kernel_dims), |v| v.to_string()),
                passed: got == Some(*want),
            });
        }
    }
    if let Some(l) = r.lattice() {
        for t in &g.lattice {
            let v = l.quantity(&t.quantity);
            out.push(GoldenEntry {
                entry: format!("lattice/{}", t.quantity),
                expected: format!("{:e} ± {:e}", t.expected, t.tolerance),
                actual: v.map_or_else(|| "<absent>".into(), |x| format!("{x:e}")),
                passed: v.is_some_and(|x| t.accepts(x)),
            });
        }
    }
    out
}
