//! Line-oriented theory description language.
//!
//! ```text
//! theory mechanics
//! dim 1
//! coords t @transversal t
//! field q
//! background m constant
//! function V
//! lagrangian "1/2*m*q'^2 - V(q)"
//! jetorder 1
//! ```

use std::collections::BTreeSet;

use thiserror::Error;

use crate::calc_var::{BackgroundDecl, FieldDecl, MetricSplit, Substitution, TheorySpec};
use crate::expr::{parse_expr, ExprError, Notation, Tree};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: undeclared symbol `{name}`")]
    Undeclared { line: usize, col: usize, name: String },
    #[error("{line}:{col}: duplicate declaration of `{name}`")]
    Duplicate { line: usize, col: usize, name: String },
    #[error("{line}:{col}: a second transversal coordinate is marked")]
    MultipleTransversal { line: usize, col: usize },
}

impl DslError {
    pub fn line(&self) -> usize {
        match self {
            DslError::Syntax { line, .. }
            | DslError::Undeclared { line, .. }
            | DslError::Duplicate { line, .. }
            | DslError::MultipleTransversal { line, .. } => *line,
        }
    }
}

struct Token<'a> {
    text: &'a str,
    col: usize,
}

/// Splits a line into words; a double-quoted string is one token.
fn tokenize(line: &str, lineno: usize) -> Result<Vec<Token<'_>>, DslError> {
    let mut out = Vec::new();
    let bytes = line.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if bytes[i] == b'#' {
            break;
        }
        let start = i;
        if bytes[i] == b'"' {
            i += 1;
            while i < bytes.len() && bytes[i] != b'"' {
                i += 1;
            }
            if i == bytes.len() {
                return Err(DslError::Syntax {
                    line: lineno,
                    col: start + 1,
                    msg: "unterminated string".into(),
                });
            }
            i += 1;
        } else if bytes[i] == b'=' {
            i += 1;
        } else {
            while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'=' {
                i += 1;
            }
            // keep `key=value` together
            if i < bytes.len() && bytes[i] == b'=' && i + 1 < bytes.len() && bytes[i + 1] != b' ' && bytes[i + 1] != b'"' {
                i += 1;
                while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
                    i += 1;
                }
            }
        }
        out.push(Token {
            text: &line[start..i],
            col: start + 1,
        });
    }
    Ok(out)
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct Pending {
    line: usize,
    col: usize,
    text: String,
}

pub fn parse_theory(text: &str) -> Result<TheorySpec, DslError> {
    let mut spec = TheorySpec::new("", &[], 0);
    let mut names: BTreeSet<String> = BTreeSet::new();
    let mut transversal: Option<usize> = None;
    let mut dim: Option<(usize, usize)> = None;
    let mut coords_seen = false;
    let mut lagrangian: Option<Pending> = None;
    let mut substitutions: Vec<(Pending, Pending)> = Vec::new();
    let mut have_name = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = tokenize(raw, line)?;
        let Some(head) = toks.first() else { continue };
        let syntax = |col: usize, msg: &str| DslError::Syntax {
            line,
            col,
            msg: msg.to_string(),
        };
        let declare = |names: &mut BTreeSet<String>, tok: &Token| -> Result<(), DslError> {
            if !is_ident(tok.text) {
                return Err(syntax(tok.col, &format!("`{}` is not an identifier", tok.text)));
            }
            if !names.insert(tok.text.to_string()) {
                return Err(DslError::Duplicate {
                    line,
                    col: tok.col,
                    name: tok.text.to_string(),
                });
            }
            Ok(())
        };
        match head.text {
            "theory" => {
                let [_, name] = toks.as_slice() else {
                    return Err(syntax(head.col, "expected `theory NAME`"));
                };
                if have_name {
                    return Err(syntax(head.col, "theory name given twice"));
                }
                spec.name = name.text.to_string();
                have_name = true;
            }
            "dim" => {
                let [_, d] = toks.as_slice() else {
                    return Err(syntax(head.col, "expected `dim D`"));
                };
                let v: usize = d.text.parse().map_err(|_| syntax(d.col, "expected an integer"))?;
                dim = Some((v, d.col));
            }
            "coords" => {
                if coords_seen {
                    return Err(syntax(head.col, "coordinates declared twice"));
                }
                coords_seen = true;
                let mut i = 1;
                while i < toks.len() {
                    let tok = &toks[i];
                    if tok.text == "@transversal" {
                        let Some(target) = toks.get(i + 1) else {
                            return Err(syntax(tok.col, "`@transversal` needs a coordinate"));
                        };
                        if transversal.is_some() {
                            return Err(DslError::MultipleTransversal { line, col: tok.col });
                        }
                        let pos = spec
                            .coords
                            .iter()
                            .position(|c| c == target.text)
                            .ok_or_else(|| DslError::Undeclared {
                                line,
                                col: target.col,
                                name: target.text.to_string(),
                            })?;
                        transversal = Some(pos);
                        i += 2;
                        continue;
                    }
                    declare(&mut names, tok)?;
                    spec.coords.push(tok.text.to_string());
                    i += 1;
                }
            }
            "field" => {
                let Some(name) = toks.get(1) else {
                    return Err(syntax(head.col, "expected `field NAME ...`"));
                };
                declare(&mut names, name)?;
                let mut f = FieldDecl::scalar(name.text);
                for tok in &toks[2..] {
                    match tok.text.split_once('=') {
                        Some((k, v)) => {
                            let n: usize = v.parse().map_err(|_| syntax(tok.col, "expected an integer value"))?;
                            match k {
                                "base" => f.base = n,
                                "internal" => f.internal = n,
                                "idim" => f.idim = Some(n),
                                _ => return Err(syntax(tok.col, &format!("unknown field key `{k}`"))),
                            }
                        }
                        None => match tok.text {
                            "antisym" => f.antisym = true,
                            "sym" => f.sym = true,
                            "positive" => f.positive = true,
                            "boundary" => f.boundary = true,
                            other => return Err(syntax(tok.col, &format!("unknown field flag `{other}`"))),
                        },
                    }
                }
                if (f.antisym || f.sym) && f.internal < 2 {
                    return Err(syntax(name.col, "symmetry flags need two internal indices"));
                }
                spec.fields.push(f);
            }
            "background" => {
                let Some(name) = toks.get(1) else {
                    return Err(syntax(head.col, "expected `background NAME ...`"));
                };
                declare(&mut names, name)?;
                let mut b = BackgroundDecl {
                    frozen: 0,
                    ..BackgroundDecl::constant(name.text)
                };
                for tok in &toks[2..] {
                    match tok.text.split_once('=') {
                        Some(("indices", v)) => {
                            b.indices = v.parse().map_err(|_| syntax(tok.col, "expected an integer value"))?
                        }
                        Some((k, _)) => return Err(syntax(tok.col, &format!("unknown background key `{k}`"))),
                        None => match tok.text {
                            "spatial" => b.spatial = true,
                            "sym" => b.sym = true,
                            "positive" => b.positive = true,
                            "constant" => b.frozen = u16::MAX,
                            "time-independent" => b.frozen = u16::MAX - 1, // fixed below
                            other => {
                                return Err(syntax(tok.col, &format!("unknown background flag `{other}`")))
                            }
                        },
                    }
                }
                spec.backgrounds.push(b);
            }
            "metric" => {
                let ok = toks.len() >= 3 && toks[1].text == "split";
                if !ok {
                    return Err(syntax(head.col, "expected `metric split NAME [time-independent]`"));
                }
                let mut m = MetricSplit {
                    name: toks[2].text.to_string(),
                    time_independent: false,
                };
                for tok in &toks[3..] {
                    match tok.text {
                        "time-independent" => m.time_independent = true,
                        other => return Err(syntax(tok.col, &format!("unknown metric flag `{other}`"))),
                    }
                }
                if spec.metric_split.is_some() {
                    return Err(syntax(head.col, "metric split declared twice"));
                }
                declare(&mut names, &toks[2])?;
                for derived in [m.inverse_name(), m.sqrt_det_name()] {
                    if !names.insert(derived.clone()) {
                        return Err(DslError::Duplicate {
                            line,
                            col: toks[2].col,
                            name: derived,
                        });
                    }
                }
                spec.metric_split = Some(m);
            }
            "function" => {
                for tok in &toks[1..] {
                    declare(&mut names, tok)?;
                    spec.functions.push(tok.text.to_string());
                }
                if toks.len() < 2 {
                    return Err(syntax(head.col, "expected `function NAME`"));
                }
            }
            "substitute" => {
                let eq = toks.iter().position(|t| t.text == "=");
                let (Some(eq), Some(rhs)) = (eq, toks.last()) else {
                    return Err(syntax(head.col, "expected `substitute JET = \"EXPR\"`"));
                };
                if eq + 2 != toks.len() || eq < 2 || !rhs.text.starts_with('"') {
                    return Err(syntax(head.col, "expected `substitute JET = \"EXPR\"`"));
                }
                let lhs_col = toks[1].col;
                let lhs_end = toks[eq - 1].col + toks[eq - 1].text.len() - 1;
                substitutions.push((
                    Pending {
                        line,
                        col: lhs_col,
                        text: raw[lhs_col - 1..lhs_end].to_string(),
                    },
                    Pending {
                        line,
                        col: rhs.col + 1,
                        text: rhs.text.trim_matches('"').to_string(),
                    },
                ));
            }
            "lagrangian" => {
                let [_, body] = toks.as_slice() else {
                    return Err(syntax(head.col, "expected `lagrangian \"EXPR\"`"));
                };
                if !body.text.starts_with('"') {
                    return Err(syntax(body.col, "the Lagrangian must be quoted"));
                }
                if lagrangian.is_some() {
                    return Err(syntax(head.col, "Lagrangian given twice"));
                }
                lagrangian = Some(Pending {
                    line,
                    col: body.col + 1,
                    text: body.text.trim_matches('"').to_string(),
                });
            }
            "jetorder" => {
                let [_, n] = toks.as_slice() else {
                    return Err(syntax(head.col, "expected `jetorder N`"));
                };
                spec.jet_order = n.text.parse().map_err(|_| syntax(n.col, "expected an integer"))?;
            }
            other => return Err(syntax(head.col, &format!("unknown key `{other}`"))),
        }
    }

    let end = text.lines().count().max(1);
    if !have_name {
        return Err(DslError::Syntax { line: end, col: 1, msg: "missing `theory NAME`".into() });
    }
    if spec.coords.is_empty() {
        return Err(DslError::Syntax { line: end, col: 1, msg: "missing `coords`".into() });
    }
    spec.dim = spec.coords.len();
    if let Some((d, col)) = dim {
        if d != spec.dim {
            return Err(DslError::Syntax {
                line: 1,
                col,
                msg: format!("dim {d} does not match {} coordinates", spec.dim),
            });
        }
    }
    spec.transversal = transversal.ok_or(DslError::Syntax {
        line: end,
        col: 1,
        msg: "no coordinate is marked `@transversal`".into(),
    })?;
    let tbit = 1u16 << spec.transversal;
    for b in &mut spec.backgrounds {
        if b.frozen == u16::MAX - 1 {
            b.frozen = tbit;
        }
    }

    for (lhs, rhs) in substitutions {
        let lt = parse_pending(&lhs, &spec)?;
        let Tree::Var(v) = lt else {
            return Err(DslError::Syntax {
                line: lhs.line,
                col: lhs.col,
                msg: "the left side of a substitution must be a single jet".into(),
            });
        };
        let rt = parse_pending(&rhs, &spec)?;
        let r = rt.normalize().map_err(|e| expr_error(&rhs, e))?;
        spec.substitutions.push(Substitution { lhs: v, rhs: r });
    }
    if let Some(l) = lagrangian {
        let tree = parse_pending(&l, &spec)?;
        spec.lagrangian = tree.normalize().map_err(|e| expr_error(&l, e))?;
        for v in spec.lagrangian.vars() {
            if v.order() > spec.jet_order {
                return Err(DslError::Syntax {
                    line: l.line,
                    col: l.col,
                    msg: format!("jet `{v}` exceeds the declared jet order {}", spec.jet_order),
                });
            }
        }
    }
    Ok(spec)
}

fn parse_pending(p: &Pending, spec: &TheorySpec) -> Result<Tree, DslError> {
    parse_expr(&p.text, spec).map_err(|e| expr_error(p, e))
}

fn expr_error(p: &Pending, e: ExprError) -> DslError {
    match e {
        ExprError::Parse { pos, msg } => {
            let col = p.col + pos;
            match msg.strip_prefix("undeclared symbol `").and_then(|s| s.strip_suffix('`')) {
                Some(name) => DslError::Undeclared {
                    line: p.line,
                    col,
                    name: name.to_string(),
                },
                None => match msg.strip_prefix("undeclared function `").and_then(|s| s.strip_suffix('`')) {
                    Some(name) => DslError::Undeclared {
                        line: p.line,
                        col,
                        name: name.to_string(),
                    },
                    None => DslError::Syntax { line: p.line, col, msg },
                },
            }
        }
        other => DslError::Syntax {
            line: p.line,
            col: p.col,
            msg: other.to_string(),
        },
    }
}

/// Canonical DSL text; `parse_theory(&emit_theory(t)) == t`.
pub fn emit_theory(t: &TheorySpec) -> String {
    let n = Notation::with_transversal(t.transversal);
    let mut out = String::new();
    out.push_str(&format!("theory {}\n", t.name));
    out.push_str(&format!("dim {}\n", t.dim));
    out.push_str(&format!(
        "coords {} @transversal {}\n",
        t.coords.join(" "),
        t.coords[t.transversal]
    ));
    for f in &t.fields {
        let mut line = format!("field {}", f.name);
        if f.base > 0 {
            line.push_str(&format!(" base={}", f.base));
        }
        if f.internal > 0 {
            line.push_str(&format!(" internal={}", f.internal));
        }
        if let Some(d) = f.idim {
            line.push_str(&format!(" idim={d}"));
        }
        for (flag, on) in [
            ("antisym", f.antisym),
            ("sym", f.sym),
            ("positive", f.positive),
            ("boundary", f.boundary),
        ] {
            if on {
                line.push(' ');
                line.push_str(flag);
            }
        }
        out.push_str(&line);
        out.push('\n');
    }
    for b in &t.backgrounds {
        let mut line = format!("background {}", b.name);
        if b.indices > 0 {
            line.push_str(&format!(" indices={}", b.indices));
        }
        for (flag, on) in [("spatial", b.spatial), ("sym", b.sym), ("positive", b.positive)] {
            if on {
                line.push(' ');
                line.push_str(flag);
            }
        }
        if b.frozen == u16::MAX {
            line.push_str(" constant");
        } else if b.frozen == 1 << t.transversal {
            line.push_str(" time-independent");
        }
        out.push_str(&line);
        out.push('\n');
    }
    if let Some(m) = &t.metric_split {
        out.push_str(&format!(
            "metric split {}{}\n",
            m.name,
            if m.time_independent { " time-independent" } else { "" }
        ));
    }
    for f in &t.functions {
        out.push_str(&format!("function {f}\n"));
    }
    for s in &t.substitutions {
        out.push_str(&format!(
            "substitute {} = \"{}\"\n",
            s.lhs.render(Some(t.transversal)),
            crate::expr::render(&s.rhs, &n)
        ));
    }
    out.push_str(&format!(
        "lagrangian \"{}\"\n",
        crate::expr::render(&t.lagrangian, &n)
    ));
    out.push_str(&format!("jetorder {}\n", t.jet_order));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MECHANICS: &str = "theory mechanics\ndim 1\ncoords t @transversal t\nfield q\n\
        background m constant\nfunction V\nlagrangian \"1/2*m*q'^2 - V(q)\"\njetorder 1\n";

    #[test]
    fn mechanics_round_trip() {
        let t = parse_theory(MECHANICS).unwrap();
        assert_eq!(t.dim, 1);
        assert_eq!(t.backgrounds[0].frozen, u16::MAX);
        let text = emit_theory(&t);
        assert_eq!(parse_theory(&text).unwrap(), t);
    }

    #[test]
    fn second_transversal_mark_is_rejected() {
        let src = "theory x\ncoords t x @transversal t @transversal x\n";
        assert_eq!(
            parse_theory(src),
            Err(DslError::MultipleTransversal { line: 2, col: 27 })
        );
    }

    #[test]
    fn undeclared_background_is_named() {
        let src = "theory x\ncoords t @transversal t\nfield q\nlagrangian \"k*q'^2\"\n";
        match parse_theory(src) {
            Err(DslError::Undeclared { name, line, col }) => {
                assert_eq!(name, "k");
                assert_eq!((line, col), (4, 13));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicates_and_unknown_keys() {
        let dup = "theory x\ncoords t @transversal t\nfield q\nfield q\n";
        assert!(matches!(parse_theory(dup), Err(DslError::Duplicate { line: 4, .. })));
        let unk = "theory x\ncoords t @transversal t\ncolour blue\n";
        assert!(matches!(parse_theory(unk), Err(DslError::Syntax { line: 3, .. })));
        let order = "theory x\ncoords t @transversal t\nfield q\nlagrangian \"q''\"\njetorder 1\n";
        assert!(parse_theory(order).is_err());
    }

    #[test]
    fn substitution_rules_parse() {
        let src = "theory em\ncoords t x @transversal t\nfield A base=1\nfield F0 base=1 boundary\n\
            substitute A[1]' = \"F0[1] + d[1]A[0]\"\nlagrangian \"A[1]'^2\"\n";
        let t = parse_theory(src).unwrap();
        assert_eq!(t.substitutions.len(), 1);
        assert_eq!(parse_theory(&emit_theory(&t)).unwrap(), t);
    }
}
