//! Deterministic report output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::str::FromStr;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use super::pipeline::{Report, Stage};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// Pretty JSON with sorted keys.
    Data,
    Latex,
    Plain,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "data" => Ok(Format::Data),
            "latex" => Ok(Format::Latex),
            "plain" => Ok(Format::Plain),
            other => Err(format!("unknown format `{other}`")),
        }
    }
}

/// Pretty printing with every float written to 17 significant digits.
struct FixedFloats<'a>(PrettyFormatter<'a>);

impl Formatter for FixedFloats<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(v))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// JSON with sorted keys and fixed float formatting, newline terminated.
pub fn to_data<T: Serialize>(value: &T) -> Vec<u8> {
    // going through Value sorts every object's keys
    let v = serde_json::to_value(value).expect("report types serialize");
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, FixedFloats(PrettyFormatter::with_indent(b"  ")));
    v.serialize(&mut ser).expect("writing to memory");
    out.push(b'\n');
    out
}

pub fn emit_report(r: &Report, format: Format) -> Vec<u8> {
    match format {
        Format::Data => to_data(r),
        Format::Plain => plain(r).into_bytes(),
        Format::Latex => latex(r).into_bytes(),
    }
}

fn map_lines(out: &mut String, title: &str, m: &BTreeMap<String, String>) {
    let _ = writeln!(out, "{title}:");
    if m.is_empty() {
        let _ = writeln!(out, "  (none)");
    }
    for (k, v) in m {
        let _ = writeln!(out, "  {k}: {v}");
    }
}

fn value_lines<T: Serialize>(out: &mut String, value: &T) {
    if let Ok(serde_json::Value::Object(m)) = serde_json::to_value(value) {
        for (k, v) in m {
            let _ = writeln!(out, "  {k}: {v}");
        }
    }
}

fn plain(r: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "theory {} (dim {}, transversal {}, fields {})",
        r.theory.name,
        r.theory.dim,
        r.theory.transversal,
        r.theory.fields.join(", ")
    );
    for s in &r.stages {
        match s {
            Stage::Variation { terms, delta_l } => {
                let _ = writeln!(out, "\n[variation] {terms} terms\n  δL = {delta_l}");
            }
            Stage::IbpSplit { el, alpha, reconstructs } => {
                let _ = writeln!(out, "\n[ibp_split] reconstructs: {reconstructs}");
                map_lines(&mut out, "el", el);
                map_lines(&mut out, "alpha", alpha);
            }
            Stage::VerticalDelta { omega } => {
                let _ = writeln!(out, "\n[vertical_delta]");
                map_lines(&mut out, "omega", omega);
            }
            Stage::ConstraintExtract { constraints } => {
                let _ = writeln!(out, "\n[constraint_extract]");
                map_lines(&mut out, "constraints", constraints);
            }
            Stage::PointChecks(p) => {
                let _ = writeln!(out, "\n[point_checks]");
                value_lines(&mut out, p);
            }
            Stage::LatticeChecks { grid, result } => {
                let _ = writeln!(out, "\n[lattice_checks] grid {grid:?}");
                value_lines(&mut out, result);
            }
            Stage::Skipped { name, reason } => {
                let _ = writeln!(out, "\n[{name}] skipped: {reason}");
            }
        }
    }
    if !r.golden.is_empty() {
        let _ = writeln!(out, "\n[golden]");
        for g in &r.golden {
            let mark = if g.passed { "ok  " } else { "FAIL" };
            if g.passed {
                let _ = writeln!(out, "  {mark} {}", g.entry);
            } else {
                let _ = writeln!(out, "  {mark} {}\n       expected {}\n       actual   {}", g.entry, g.expected, g.actual);
            }
        }
    }
    let _ = writeln!(out, "\npassed: {}", r.passed);
    out
}

fn tex_escape(s: &str) -> String {
    s.replace('_', "\\_").replace('#', "\\#").replace('&', "\\&")
}

fn latex_block(out: &mut String, title: &str, m: &BTreeMap<String, String>, lhs: impl Fn(&str) -> String) {
    let _ = writeln!(out, "\\subsection*{{{title}}}");
    if m.is_empty() {
        let _ = writeln!(out, "None.\n");
        return;
    }
    for (k, v) in m {
        let _ = writeln!(out, "\\begin{{dmath*}}\n{} = {v}\n\\end{{dmath*}}", lhs(k));
    }
}

fn latex(r: &Report) -> String {
    let mut out = String::new();
    out.push_str("\\documentclass{article}\n\\usepackage{amsmath,breqn}\n\\begin{document}\n");
    let _ = writeln!(out, "\\section*{{Theory \\texttt{{{}}}}}", tex_escape(&r.theory.name));
    latex_block(&mut out, "Euler--Lagrange densities", &r.latex.el, |k| format!("E_{{{k}}}"));
    if !r.latex.alpha.is_empty() {
        let terms: Vec<String> = r
            .latex
            .alpha
            .iter()
            .map(|(g, c)| if c == "1" { g.clone() } else { format!("{c}\\,{g}") })
            .collect();
        let _ = writeln!(
            out,
            "\\subsection*{{Noether form}}\n\\begin{{dmath*}}\n\\alpha = {}\n\\end{{dmath*}}",
            terms.join(" + ")
        );
    }
    if !r.latex.omega.is_empty() {
        let terms: Vec<String> = r.latex.omega.iter().map(|(g, c)| format!("({c})\\,{g}")).collect();
        let _ = writeln!(
            out,
            "\\subsection*{{Two-form}}\n\\begin{{dmath*}}\n\\omega = {}\n\\end{{dmath*}}",
            terms.join(" + ")
        );
    }
    latex_block(&mut out, "Constraints", &r.latex.constraints, |k| {
        format!("C_{{\\mathrm{{{}}}}}", tex_escape(k))
    });
    let checks: Vec<&Stage> = r
        .stages
        .iter()
        .filter(|s| matches!(s, Stage::PointChecks(_) | Stage::LatticeChecks { .. }))
        .collect();
    if !checks.is_empty() {
        out.push_str("\\subsection*{Checks}\n\\begin{verbatim}\n");
        for s in checks {
            out.push_str(&String::from_utf8_lossy(&to_data(s)));
        }
        out.push_str("\\end{verbatim}\n");
    }
    let _ = writeln!(out, "\\paragraph{{Result}} {}", if r.passed { "passed" } else { "failed" });
    out.push_str("\\end{document}\n");
    out
}
