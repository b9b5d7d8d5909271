//! LP text format export and a small independent reader.
//!
//! The writer emits the conventional sections (objective, `Subject To`,
//! `Bounds`, `Binaries`, `End`) with `x{id}` variable names and constraint
//! tags as row names. The parser is a separate token-stream reader used for
//! round-trip checks and for loading hand-written files; it shares no code
//! with the writer.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

use crate::model::{ConstraintSense, Model, ObjectiveSense, VarId, VarKind};

/// Format a coefficient or bound without losing precision. Integral values
/// print without a fraction; everything else uses the shortest round-trip
/// form.
fn fmt_num(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v }; // normalize -0
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Row names must start with a letter or underscore and stay alphanumeric.
fn sanitize_name(tag: &str, fallback_idx: usize) -> String {
    if tag.is_empty() {
        return format!("c{fallback_idx}");
    }
    let mut out = String::with_capacity(tag.len());
    for (i, ch) in tag.chars().enumerate() {
        let ok = ch.is_ascii_alphanumeric() || ch == '_' || (i > 0 && ch == '.');
        out.push(if ok { ch } else { '_' });
    }
    if out.chars().next().is_some_and(|c| c.is_ascii_digit()) {
        out.insert(0, 'c');
    }
    out
}

fn write_terms(buf: &mut String, terms: &[(VarId, f64)]) {
    if terms.is_empty() {
        buf.push_str("0 x0");
        return;
    }
    for (i, &(var, coef)) in terms.iter().enumerate() {
        if i == 0 {
            if coef < 0.0 {
                buf.push_str("- ");
            }
        } else if coef < 0.0 {
            buf.push_str(" - ");
        } else {
            buf.push_str(" + ");
        }
        let a = coef.abs();
        if a != 1.0 {
            let _ = write!(buf, "{} ", fmt_num(a));
        }
        let _ = write!(buf, "{var}");
    }
}

/// Render `model` in LP text format.
pub fn write_lp_string(model: &Model) -> String {
    let mut buf = String::new();
    buf.push_str(match model.sense() {
        ObjectiveSense::Maximize => "Maximize\n",
        ObjectiveSense::Minimize => "Minimize\n",
    });
    buf.push_str(" obj: ");
    write_terms(&mut buf, model.objective());
    buf.push('\n');

    buf.push_str("Subject To\n");
    for (i, con) in model.constraints().iter().enumerate() {
        let _ = write!(buf, " {}: ", sanitize_name(&con.tag, i));
        write_terms(&mut buf, &con.terms);
        let _ = writeln!(buf, " {} {}", con.sense, fmt_num(con.rhs));
    }

    buf.push_str("Bounds\n");
    for v in model.variables() {
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (true, true) if v.lower == v.upper => {
                let _ = writeln!(buf, " {} = {}", v.id, fmt_num(v.lower));
            }
            (true, true) => {
                let _ = writeln!(
                    buf,
                    " {} <= {} <= {}",
                    fmt_num(v.lower),
                    v.id,
                    fmt_num(v.upper)
                );
            }
            (true, false) => {
                let _ = writeln!(buf, " {} >= {}", v.id, fmt_num(v.lower));
            }
            (false, true) => {
                let _ = writeln!(buf, " -infinity <= {} <= {}", v.id, fmt_num(v.upper));
            }
            (false, false) => {
                let _ = writeln!(buf, " {} free", v.id);
            }
        }
    }

    let binaries: Vec<String> = model
        .variables()
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.id.to_string())
        .collect();
    if !binaries.is_empty() {
        buf.push_str("Binaries\n ");
        buf.push_str(&binaries.join(" "));
        buf.push('\n');
    }
    buf.push_str("End\n");
    buf
}

/// Write `model` to `path` in LP text format.
pub fn write_lp_file(model: &Model, path: impl AsRef<Path>) -> io::Result<()> {
    fs::write(path, write_lp_string(model))
}

#[derive(Debug, Error, PartialEq)]
pub enum LpParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing objective section")]
    MissingObjective,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Word(String),
    Num(f64),
    Plus,
    Minus,
    Colon,
    Le,
    Ge,
    Eq,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

fn lex(text: &str) -> Result<Lexer, LpParseError> {
    let mut toks = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let src = match raw.find('\\') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let bytes = src.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            match c {
                '+' => {
                    toks.push((Tok::Plus, line));
                    i += 1;
                }
                '-' => {
                    toks.push((Tok::Minus, line));
                    i += 1;
                }
                ':' => {
                    toks.push((Tok::Colon, line));
                    i += 1;
                }
                '<' | '>' | '=' => {
                    let mut j = i + 1;
                    if j < bytes.len() && bytes[j] as char == '=' {
                        j += 1;
                    }
                    let tok = match c {
                        '<' => Tok::Le,
                        '>' => Tok::Ge,
                        _ => Tok::Eq,
                    };
                    toks.push((tok, line));
                    i = j;
                }
                _ if c.is_ascii_digit() || c == '.' => {
                    let mut j = i;
                    while j < bytes.len() {
                        let d = bytes[j] as char;
                        let exp_sign = (d == '+' || d == '-')
                            && j > i
                            && matches!(bytes[j - 1] as char, 'e' | 'E');
                        if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                            j += 1;
                        } else {
                            break;
                        }
                    }
                    let s = &src[i..j];
                    let v: f64 = s.parse().map_err(|_| LpParseError::Syntax {
                        line,
                        message: format!("bad number '{s}'"),
                    })?;
                    toks.push((Tok::Num(v), line));
                    i = j;
                }
                _ if c.is_ascii_alphabetic() || c == '_' => {
                    let mut j = i;
                    while j < bytes.len() {
                        let d = bytes[j] as char;
                        if d.is_ascii_alphanumeric() || d == '_' || d == '.' {
                            j += 1;
                        } else {
                            break;
                        }
                    }
                    toks.push((Tok::Word(src[i..j].to_string()), line));
                    i = j;
                }
                _ => {
                    return Err(LpParseError::Syntax {
                        line,
                        message: format!("unexpected character '{c}'"),
                    })
                }
            }
        }
    }
    Ok(Lexer { toks, pos: 0 })
}

impl Lexer {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }
    fn line(&self) -> usize {
        self.toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map(|&(_, l)| l)
            .unwrap_or(0)
    }
    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }
    fn peek_word_is(&self, kws: &[&str]) -> bool {
        match self.peek() {
            Some(Tok::Word(w)) => kws.iter().any(|k| w.eq_ignore_ascii_case(k)),
            _ => false,
        }
    }
}

fn is_section_start(lx: &Lexer) -> bool {
    // "subject"/"st"/"s.t." introduce constraints, the rest are plain sections.
    lx.peek_word_is(&[
        "subject", "st", "s.t", "bounds", "bound", "binaries", "binary", "bin", "general",
        "generals", "gen", "end", "maximize", "minimize", "max", "min",
    ])
}

struct Builder {
    names: Vec<String>,
    lowers: Vec<f64>,
    uppers: Vec<f64>,
    binary: Vec<bool>,
    bounded: Vec<bool>,
}

impl Builder {
    fn new() -> Builder {
        Builder {
            names: Vec::new(),
            lowers: Vec::new(),
            uppers: Vec::new(),
            binary: Vec::new(),
            bounded: Vec::new(),
        }
    }

    fn var(&mut self, name: &str) -> usize {
        if let Some(i) = self.names.iter().position(|n| n == name) {
            return i;
        }
        self.names.push(name.to_string());
        // LP format default bounds.
        self.lowers.push(0.0);
        self.uppers.push(f64::INFINITY);
        self.binary.push(false);
        self.bounded.push(false);
        self.names.len() - 1
    }
}

/// Signed number or infinity; sign tokens already consumed by caller via mult.
fn parse_number(lx: &mut Lexer) -> Result<f64, LpParseError> {
    let mut mult = 1.0;
    loop {
        match lx.peek() {
            Some(Tok::Plus) => {
                lx.next();
            }
            Some(Tok::Minus) => {
                mult = -mult;
                lx.next();
            }
            _ => break,
        }
    }
    match lx.next() {
        Some(Tok::Num(v)) => Ok(mult * v),
        Some(Tok::Word(w))
            if w.eq_ignore_ascii_case("inf") || w.eq_ignore_ascii_case("infinity") =>
        {
            Ok(mult * f64::INFINITY)
        }
        other => Err(LpParseError::Syntax {
            line: lx.line(),
            message: format!("expected number, found {other:?}"),
        }),
    }
}

/// Read an LP text file back into a [`Model`]. Variables get dense ids in
/// order of first appearance.
pub fn parse_lp_str(text: &str) -> Result<Model, LpParseError> {
    let mut lx = lex(text)?;
    let mut b = Builder::new();

    // Objective sense.
    let sense = match lx.next() {
        Some(Tok::Word(w)) if w.eq_ignore_ascii_case("maximize") || w.eq_ignore_ascii_case("max") => {
            ObjectiveSense::Maximize
        }
        Some(Tok::Word(w)) if w.eq_ignore_ascii_case("minimize") || w.eq_ignore_ascii_case("min") => {
            ObjectiveSense::Minimize
        }
        _ => return Err(LpParseError::MissingObjective),
    };

    // Optional objective name.
    if matches!(lx.peek(), Some(Tok::Word(_)))
        && matches!(lx.toks.get(lx.pos + 1), Some((Tok::Colon, _)))
    {
        lx.next();
        lx.next();
    }
    let objective = parse_named_expr(&mut lx, &mut b)?;

    type ParsedRow = (String, Vec<(usize, f64)>, ConstraintSense, f64);
    let mut constraints: Vec<ParsedRow> = Vec::new();

    // Subject To section.
    if lx.peek_word_is(&["subject", "st", "s.t"]) {
        lx.next();
        if lx.peek_word_is(&["to"]) {
            lx.next();
        }
        let mut row_idx = 0usize;
        while lx.peek().is_some() && !lx.peek_word_is(&["bounds", "bound", "binaries", "binary", "bin", "general", "generals", "gen", "end"]) {
            let name = if matches!(lx.peek(), Some(Tok::Word(_)))
                && matches!(lx.toks.get(lx.pos + 1), Some((Tok::Colon, _)))
            {
                let Some(Tok::Word(w)) = lx.next() else {
                    unreachable!()
                };
                lx.next();
                w
            } else {
                format!("c{row_idx}")
            };
            let terms = parse_named_expr(&mut lx, &mut b)?;
            let sense = match lx.next() {
                Some(Tok::Le) => ConstraintSense::Le,
                Some(Tok::Ge) => ConstraintSense::Ge,
                Some(Tok::Eq) => ConstraintSense::Eq,
                other => {
                    return Err(LpParseError::Syntax {
                        line: lx.line(),
                        message: format!("expected relation, found {other:?}"),
                    })
                }
            };
            let rhs = parse_number(&mut lx)?;
            constraints.push((name, terms, sense, rhs));
            row_idx += 1;
        }
    }

    // Bounds section.
    if lx.peek_word_is(&["bounds", "bound"]) {
        lx.next();
        while lx.peek().is_some()
            && !lx.peek_word_is(&["binaries", "binary", "bin", "general", "generals", "gen", "end"])
        {
            parse_bound_line(&mut lx, &mut b)?;
        }
    }

    // Binaries section.
    if lx.peek_word_is(&["binaries", "binary", "bin"]) {
        lx.next();
        while let Some(Tok::Word(w)) = lx.peek() {
            if w.eq_ignore_ascii_case("end")
                || w.eq_ignore_ascii_case("general")
                || w.eq_ignore_ascii_case("generals")
            {
                break;
            }
            let name = w.clone();
            lx.next();
            let j = b.var(&name);
            b.binary[j] = true;
            if !b.bounded[j] {
                b.lowers[j] = 0.0;
                b.uppers[j] = 1.0;
            }
        }
    }

    let mut model = Model::new(sense);
    for j in 0..b.names.len() {
        let kind = if b.binary[j] {
            VarKind::Binary
        } else {
            VarKind::Continuous
        };
        let (lo, hi) = (b.lowers[j], b.uppers[j]);
        model.add_variable(lo, hi, kind);
    }
    for (name, terms, sense, rhs) in constraints {
        model.add_constraint(
            terms.into_iter().map(|(j, c)| (VarId(j), c)).collect(),
            sense,
            rhs,
            name,
        );
    }
    model.set_objective(objective.into_iter().map(|(j, c)| (VarId(j), c)).collect());
    Ok(model)
}

/// Expression with variables resolved against the builder.
fn parse_named_expr(
    lx: &mut Lexer,
    b: &mut Builder,
) -> Result<Vec<(usize, f64)>, LpParseError> {
    let mut out: Vec<(usize, f64)> = Vec::new();
    loop {
        let mut sign = 1.0;
        let mut saw_any = false;
        loop {
            match lx.peek() {
                Some(Tok::Plus) => {
                    lx.next();
                    saw_any = true;
                }
                Some(Tok::Minus) => {
                    sign = -sign;
                    lx.next();
                    saw_any = true;
                }
                _ => break,
            }
        }
        let coef = match lx.peek() {
            Some(Tok::Num(v)) => {
                let v = *v;
                lx.next();
                saw_any = true;
                v
            }
            _ => 1.0,
        };
        match lx.peek() {
            Some(Tok::Word(_)) if !is_section_start(lx) => {
                let Some(Tok::Word(name)) = lx.next() else {
                    unreachable!()
                };
                let j = b.var(&name);
                match out.iter_mut().find(|(v, _)| *v == j) {
                    Some((_, c)) => *c += sign * coef,
                    None => out.push((j, sign * coef)),
                }
            }
            _ => {
                if saw_any {
                    return Err(LpParseError::Syntax {
                        line: lx.line(),
                        message: "dangling term without a variable".to_string(),
                    });
                }
                break;
            }
        }
        match lx.peek() {
            Some(Tok::Le) | Some(Tok::Ge) | Some(Tok::Eq) | None => break,
            Some(Tok::Word(_)) if is_section_start(lx) => break,
            _ => {}
        }
    }
    Ok(out)
}

/// One Bounds line: `l <= x <= u`, `x <= u`, `x >= l`, `x = v`, `x free`,
/// `-infinity <= x <= u`.
fn parse_bound_line(lx: &mut Lexer, b: &mut Builder) -> Result<(), LpParseError> {
    // Either starts with a number (two-sided) or a variable name.
    let leading = match lx.peek() {
        Some(Tok::Num(_)) | Some(Tok::Plus) | Some(Tok::Minus) => Some(parse_number(lx)?),
        Some(Tok::Word(w))
            if w.eq_ignore_ascii_case("inf") || w.eq_ignore_ascii_case("infinity") =>
        {
            Some(parse_number(lx)?)
        }
        _ => None,
    };
    if let Some(lo) = leading {
        if !matches!(lx.next(), Some(Tok::Le)) {
            return Err(LpParseError::Syntax {
                line: lx.line(),
                message: "expected '<=' after bound value".to_string(),
            });
        }
        let Some(Tok::Word(name)) = lx.next() else {
            return Err(LpParseError::Syntax {
                line: lx.line(),
                message: "expected variable in bound".to_string(),
            });
        };
        let j = b.var(&name);
        b.lowers[j] = lo;
        b.bounded[j] = true;
        if matches!(lx.peek(), Some(Tok::Le)) {
            lx.next();
            let hi = parse_number(lx)?;
            b.uppers[j] = hi;
        }
        return Ok(());
    }

    let Some(Tok::Word(name)) = lx.next() else {
        return Err(LpParseError::Syntax {
            line: lx.line(),
            message: "expected variable in bound".to_string(),
        });
    };
    let j = b.var(&name);
    match lx.peek() {
        Some(Tok::Word(w)) if w.eq_ignore_ascii_case("free") => {
            lx.next();
            b.lowers[j] = f64::NEG_INFINITY;
            b.uppers[j] = f64::INFINITY;
            b.bounded[j] = true;
        }
        Some(Tok::Le) => {
            lx.next();
            let hi = parse_number(lx)?;
            b.uppers[j] = hi;
            b.bounded[j] = true;
        }
        Some(Tok::Ge) => {
            lx.next();
            let lo = parse_number(lx)?;
            b.lowers[j] = lo;
            b.bounded[j] = true;
        }
        Some(Tok::Eq) => {
            lx.next();
            let v = parse_number(lx)?;
            b.lowers[j] = v;
            b.uppers[j] = v;
            b.bounded[j] = true;
        }
        other => {
            return Err(LpParseError::Syntax {
                line: lx.line(),
                message: format!("unexpected token in bound: {other:?}"),
            })
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ConstraintSense, Model, ObjectiveSense};

    #[test]
    fn minimal_model_writes_objective_and_bounds() {
        let mut m = Model::new(ObjectiveSense::Maximize);
        let x = m.add_continuous(0.0, 1.0);
        m.set_objective(vec![(x, 1.0)]);
        let text = write_lp_string(&m);
        assert!(text.starts_with("Maximize\n obj: x0\n"));
        assert!(text.contains("Bounds\n 0 <= x0 <= 1\n"));
        assert!(text.ends_with("End\n"));
    }

    #[test]
    fn tag_appears_verbatim_as_row_name() {
        let mut m = Model::new(ObjectiveSense::Maximize);
        let x = m.add_binary();
        m.add_constraint(vec![(x, 1.0)], ConstraintSense::Le, 1.0, "flow_root_i3");
        m.set_objective(vec![(x, 1.0)]);
        let text = write_lp_string(&m);
        assert!(text.contains(" flow_root_i3: x0 <= 1\n"), "{text}");
    }

    #[test]
    fn roundtrip_preserves_structure() {
        let mut m = Model::new(ObjectiveSense::Maximize);
        let a = m.add_binary();
        let b = m.add_binary();
        m.add_constraint(
            vec![(a, 2.0), (b, 2.0)],
            ConstraintSense::Le,
            2.0,
            "cap",
        );
        m.set_objective(vec![(a, 3.0), (b, 2.0)]);
        let text = write_lp_string(&m);
        let back = parse_lp_str(&text).expect("parse");
        assert_eq!(back.num_variables(), 2);
        assert_eq!(back.num_constraints(), 1);
        assert_eq!(back.sense(), ObjectiveSense::Maximize);
        assert_eq!(back.constraints()[0].tag, "cap");
        assert_eq!(back.constraints()[0].sense, ConstraintSense::Le);
        assert_eq!(back.variables()[0].kind, VarKind::Binary);
    }

    #[test]
    fn parses_negative_and_implicit_coefficients() {
        let text = "Minimize\n obj: x - 2.5 y + z\nSubject To\n r0: -x + y >= -1\nBounds\n x free\n -infinity <= z <= 4\nEnd\n";
        let m = parse_lp_str(text).expect("parse");
        assert_eq!(m.num_variables(), 3);
        assert_eq!(m.objective().len(), 3);
        assert_eq!(m.constraints()[0].sense, ConstraintSense::Ge);
        assert_eq!(m.constraints()[0].rhs, -1.0);
        assert_eq!(m.variables()[0].lower, f64::NEG_INFINITY);
        assert_eq!(m.variables()[2].upper, 4.0);
    }

    #[test]
    fn truncated_input_is_rejected() {
        assert!(parse_lp_str("Maximize\n obj: 3").is_err());
        assert!(parse_lp_str("").is_err());
    }
}
