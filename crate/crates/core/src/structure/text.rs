//! Line-oriented text format for structures.
//!
//! ```text
//! # the two-element linear order
//! structure L2
//! universe 2
//! label 0 bottom
//! relation </2 = {(0,1)}
//! function s/1 = {(0)->1, (1)->1}
//! constant top = 1
//! ```
//!
//! Brace groups may span several lines; whitespace inside them is ignored.

use std::fmt::Write as _;

use super::{Structure, StructureBuilder, StructureError};

struct Cursor {
    chars: Vec<(usize, usize, char)>,
    pos: usize,
}

impl Cursor {
    /// Characters of `lines` with their positions, starting at column
    /// `start_col` of the first line.
    fn new(lines: &[(usize, &str)], start_col: usize) -> Self {
        let mut chars = Vec::new();
        for (k, (lineno, line)) in lines.iter().enumerate() {
            let offset = if k == 0 { start_col - 1 } else { 0 };
            for (c, ch) in line.chars().enumerate().skip(offset) {
                chars.push((*lineno, c + 1, ch));
            }
            chars.push((*lineno, line.chars().count() + 1, '\n'));
        }
        Cursor { chars, pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].2.is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|c| c.2)
    }

    fn here(&self) -> (usize, usize) {
        self.chars
            .get(self.pos)
            .or_else(|| self.chars.last())
            .map(|c| (c.0, c.1))
            .unwrap_or((0, 0))
    }

    fn error(&self, message: impl Into<String>) -> StructureError {
        let (line, column) = self.here();
        StructureError::Parse { line, column, message: message.into() }
    }

    fn expect(&mut self, want: &str) -> Result<(), StructureError> {
        self.skip_ws();
        for w in want.chars() {
            match self.chars.get(self.pos) {
                Some(&(_, _, c)) if c == w => self.pos += 1,
                _ => return Err(self.error(format!("expected `{want}`"))),
            }
        }
        Ok(())
    }

    fn number(&mut self) -> Result<usize, StructureError> {
        self.skip_ws();
        let start = self.pos;
        let mut s = String::new();
        while let Some(&(_, _, c)) = self.chars.get(self.pos) {
            if c.is_ascii_digit() {
                s.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        if s.is_empty() {
            self.pos = start;
            return Err(self.error("expected an element index"));
        }
        s.parse().map_err(|_| self.error("index out of range"))
    }

    fn tuple(&mut self) -> Result<Vec<usize>, StructureError> {
        self.expect("(")?;
        let mut out = Vec::new();
        if self.peek() == Some(')') {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            out.push(self.number()?);
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(')') => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return Err(self.error("expected `,` or `)`")),
            }
        }
    }

    /// Parse `{item, item, ...}` and return the cursor position after `}`.
    fn braced<T>(&mut self, mut item: impl FnMut(&mut Self) -> Result<T, StructureError>) -> Result<Vec<T>, StructureError> {
        self.expect("{")?;
        let mut out = Vec::new();
        if self.peek() == Some('}') {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            match self.peek() {
                Some(',') => self.pos += 1,
                Some('}') => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return Err(self.error("expected `,` or `}`")),
            }
        }
    }

    fn rest_is_blank(&mut self) -> bool {
        self.peek().is_none()
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_error(line: usize, column: usize, message: impl Into<String>) -> StructureError {
    StructureError::Parse { line, column, message: message.into() }
}

/// Split `name/arity`.
fn symbol_decl(token: &str, line: usize, column: usize) -> Result<(String, usize), StructureError> {
    let (name, arity) = token
        .rsplit_once('/')
        .ok_or_else(|| parse_error(line, column, "expected `<name>/<arity>`"))?;
    if name.is_empty() {
        return Err(parse_error(line, column, "empty symbol name"));
    }
    let arity = arity.parse().map_err(|_| parse_error(line, column, "invalid arity"))?;
    Ok((name.to_string(), arity))
}

/// Parse the structure file format.
pub fn load_structure(text: &str) -> Result<Structure, StructureError> {
    let lines: Vec<(usize, &str)> = text.lines().enumerate().map(|(i, l)| (i + 1, l)).collect();
    let mut name: Option<String> = None;
    let mut builder: Option<StructureBuilder> = None;
    let mut i = 0;
    while i < lines.len() {
        let (lineno, raw) = lines[i];
        let line = strip_comment(raw);
        let trimmed = line.trim_start();
        let indent = line.len() - trimmed.len();
        if trimmed.trim().is_empty() {
            i += 1;
            continue;
        }
        let (keyword, rest) = trimmed.split_once(char::is_whitespace).unwrap_or((trimmed, ""));
        let rest_col = indent + keyword.len() + 2;
        match keyword {
            "structure" => {
                if rest.trim().is_empty() {
                    return Err(parse_error(lineno, rest_col, "missing structure name"));
                }
                name = Some(rest.trim().to_string());
                if let Some(b) = builder.as_mut() {
                    b.name = rest.trim().to_string();
                }
                i += 1;
            }
            "universe" => {
                if builder.is_some() {
                    return Err(parse_error(lineno, 1, "universe declared twice"));
                }
                let n: usize = rest
                    .trim()
                    .parse()
                    .map_err(|_| parse_error(lineno, rest_col, "expected a universe size"))?;
                builder = Some(StructureBuilder::new(name.as_deref().unwrap_or("unnamed"), n));
                i += 1;
            }
            "label" | "relation" | "function" | "constant" => {
                let b = builder
                    .as_mut()
                    .ok_or_else(|| parse_error(lineno, 1, format!("`{keyword}` before `universe`")))?;
                match keyword {
                    "label" => {
                        let rest = rest.trim_start();
                        let (idx, label) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                        let idx: usize =
                            idx.parse().map_err(|_| parse_error(lineno, rest_col, "expected an element index"))?;
                        // Labels keep `#` and everything else on the line.
                        let full = raw.trim_start();
                        let label_text = full
                            .split_once(char::is_whitespace)
                            .and_then(|(_, r)| r.trim_start().split_once(char::is_whitespace))
                            .map(|(_, l)| l.trim())
                            .unwrap_or(label.trim());
                        b.label(idx, label_text);
                        i += 1;
                    }
                    "constant" => {
                        let (cname, value) = rest
                            .split_once('=')
                            .ok_or_else(|| parse_error(lineno, rest_col, "expected `constant <name> = <index>`"))?;
                        let cname = cname.trim();
                        if cname.is_empty() || cname.contains(char::is_whitespace) {
                            return Err(parse_error(lineno, rest_col, "invalid constant name"));
                        }
                        let value: usize = value
                            .trim()
                            .parse()
                            .map_err(|_| parse_error(lineno, rest_col, "expected an element index"))?;
                        b.constant(cname, value);
                        i += 1;
                    }
                    _ => {
                        let rest_trim = rest.trim_start();
                        let decl_col = rest_col + (rest.len() - rest_trim.len());
                        let decl = rest_trim.split_whitespace().next().unwrap_or("");
                        let (sym, arity) = symbol_decl(decl, lineno, decl_col)?;
                        // Gather lines until the brace group closes.
                        let body_col = decl_col + decl.chars().count();
                        let mut depth = 0i32;
                        let mut opened = false;
                        let mut j = i;
                        let mut group: Vec<(usize, &str)> = Vec::new();
                        loop {
                            let (ln, l) = lines[j];
                            let l = strip_comment(l);
                            let skip = if j == i { body_col - 1 } else { 0 };
                            for ch in l.chars().skip(skip) {
                                match ch {
                                    '{' => {
                                        depth += 1;
                                        opened = true;
                                    }
                                    '}' => depth -= 1,
                                    _ => {}
                                }
                            }
                            group.push((ln, l));
                            j += 1;
                            if (opened && depth <= 0) || j >= lines.len() {
                                break;
                            }
                        }
                        let mut cur = Cursor::new(&group, body_col);
                        cur.expect("=")?;
                        if keyword == "relation" {
                            let tuples = cur.braced(|c| c.tuple())?;
                            b.relation(&sym, arity, tuples);
                        } else {
                            let entries = cur.braced(|c| {
                                let args = c.tuple()?;
                                c.expect("->")?;
                                let v = c.number()?;
                                Ok((args, v))
                            })?;
                            b.function(&sym, arity, entries);
                        }
                        if !cur.rest_is_blank() {
                            return Err(cur.error("unexpected trailing input"));
                        }
                        i = j;
                    }
                }
            }
            other => return Err(parse_error(lineno, indent + 1, format!("unknown keyword `{other}`"))),
        }
    }
    let b = builder.ok_or_else(|| parse_error(lines.len().max(1), 1, "missing `universe` declaration"))?;
    b.build()
}

/// Render a structure in the text format; `load_structure` inverts it.
pub fn print_structure(s: &Structure) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "structure {}", s.name());
    let _ = writeln!(out, "universe {}", s.size());
    for i in 0..s.size() {
        if let Some(l) = s.label(i) {
            let _ = writeln!(out, "label {i} {l}");
        }
    }
    for ((name, arity), rel) in s.signature().relations().iter().zip(s.relations()) {
        let tuples: Vec<String> = rel.tuples().iter().map(|t| tuple_text(t)).collect();
        let _ = writeln!(out, "relation {name}/{arity} = {{{}}}", tuples.join(", "));
    }
    for ((name, arity), f) in s.signature().functions().iter().zip(s.functions()) {
        if *arity == 0 {
            let _ = writeln!(out, "constant {name} = {}", f.apply(&[]));
        } else {
            let entries: Vec<String> = f.entries().map(|(a, v)| format!("{}->{v}", tuple_text(&a))).collect();
            let _ = writeln!(out, "function {name}/{arity} = {{{}}}", entries.join(", "));
        }
    }
    out
}

fn tuple_text(t: &[usize]) -> String {
    let parts: Vec<String> = t.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(","))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_linear_order() {
        let s = load_structure("structure L2\nuniverse 2\nrelation </2 = {(0,1)}\n").unwrap();
        assert_eq!(s.size(), 2);
        assert_eq!(s.relation_by_name("<").unwrap().tuples(), &[vec![0, 1]]);
    }

    #[test]
    fn multi_line_groups_and_comments() {
        let text = "# comment\nstructure f\nuniverse 2\nfunction s/1 = {(0)->1,\n   (1) -> 0}  # swap\nconstant c = 1\nlabel 1 one # not a comment\n";
        let s = load_structure(text).unwrap();
        assert_eq!(s.function_by_name("s").unwrap().apply(&[0]), 1);
        assert_eq!(s.function_by_name("c").unwrap().apply(&[]), 1);
        assert_eq!(s.label(1), Some("one # not a comment"));
        assert_eq!(load_structure(&print_structure(&s)).unwrap(), s);
    }

    #[test]
    fn partial_function_is_rejected() {
        let err = load_structure("structure f\nuniverse 2\nfunction s/1 = {(0)->1}\n").unwrap_err();
        assert_eq!(err, StructureError::NotTotal("s".into()));
        assert_eq!(err.to_string(), "function not total: `s`");
    }

    #[test]
    fn parse_errors_carry_positions() {
        let err = load_structure("structure f\nuniverse 2\nrelation R/2 = {(0,1) (1,0)}\n").unwrap_err();
        match err {
            StructureError::Parse { line, column, .. } => {
                assert_eq!(line, 3);
                assert_eq!(column, 23);
            }
            other => panic!("unexpected {other:?}"),
        }
        let err = load_structure("structure f\nuniverse 2\nrelation R/2 = {(0,5)}\n").unwrap_err();
        assert!(matches!(err, StructureError::IndexOutOfRange { index: 5, .. }));
        assert!(matches!(load_structure("universe x\n"), Err(StructureError::Parse { line: 1, .. })));
        assert!(matches!(load_structure("structure s\n"), Err(StructureError::Parse { .. })));
        assert!(matches!(load_structure("bogus 1\n"), Err(StructureError::Parse { line: 1, column: 1, .. })));
    }

    #[test]
    fn symbolic_names_survive() {
        let text = "structure s\nuniverse 3\nrelation <=/2 = {(0,0), (0,1)}\nfunction +/2 = {(0,0)->0,(0,1)->1,(0,2)->2,(1,0)->1,(1,1)->2,(1,2)->0,(2,0)->2,(2,1)->0,(2,2)->1}\n";
        let s = load_structure(text).unwrap();
        assert!(s.relation_by_name("<=").is_some());
        assert_eq!(s.function_by_name("+").unwrap().apply(&[2, 2]), 1);
        assert_eq!(load_structure(&print_structure(&s)).unwrap(), s);
    }
}
