// Minimal YAML subset used by the task-file format: mappings, sequences,
// scalars and comments only. No anchors, aliases, tags, or multi-line
// scalars. Keeping the dialect this small is what makes the canonical
// serializer byte-stable across implementations.

use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Yaml {
    Null,
    Bool(bool),
    Int(i64),
    Str(String),
    List(Vec<Yaml>),
    Map(Vec<(String, Yaml)>),
}

impl Yaml {
    pub fn as_str(&self) -> Option<&str> {
        match self {
            Yaml::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Yaml::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Yaml::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Yaml]> {
        match self {
            Yaml::List(l) => Some(l),
            _ => None,
        }
    }

    pub fn as_map(&self) -> Option<&[(String, Yaml)]> {
        match self {
            Yaml::Map(m) => Some(m),
            _ => None,
        }
    }

    pub fn get(&self, key: &str) -> Option<&Yaml> {
        self.as_map()?
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, col {col}: {msg}")]
pub(crate) struct YamlError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

fn err<T>(line: usize, col: usize, msg: impl Into<String>) -> Result<T, YamlError> {
    Err(YamlError {
        line,
        col,
        msg: msg.into(),
    })
}

struct Line {
    no: usize,
    indent: usize,
    text: String,
}

/// Strip a comment starting at an unquoted '#'. Returns the retained prefix.
fn strip_comment(raw: &str) -> &str {
    let mut quote: Option<char> = None;
    for (i, c) in raw.char_indices() {
        match quote {
            Some(q) => {
                if c == q {
                    quote = None;
                }
            }
            None => match c {
                '"' | '\'' => quote = Some(c),
                '#' => return &raw[..i],
                _ => {}
            },
        }
    }
    raw
}

fn scan_lines(text: &str) -> Result<Vec<Line>, YamlError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let no = idx + 1;
        if raw.contains('\t') {
            return err(no, raw.find('\t').unwrap() + 1, "tabs are not allowed");
        }
        let kept = strip_comment(raw);
        let trimmed = kept.trim_end();
        if trimmed.trim().is_empty() {
            continue;
        }
        let indent = trimmed.len() - trimmed.trim_start().len();
        out.push(Line {
            no,
            indent,
            text: trimmed.trim_start().to_string(),
        });
    }
    Ok(out)
}

pub(crate) fn parse(text: &str) -> Result<Yaml, YamlError> {
    let lines = scan_lines(text)?;
    if lines.is_empty() {
        return Ok(Yaml::Null);
    }
    let mut i = 0;
    let root_indent = lines[0].indent;
    let value = parse_node(&lines, &mut i, root_indent)?;
    if i < lines.len() {
        return err(
            lines[i].no,
            lines[i].indent + 1,
            "unexpected content after document root",
        );
    }
    Ok(value)
}

fn parse_node(lines: &[Line], i: &mut usize, indent: usize) -> Result<Yaml, YamlError> {
    let line = &lines[*i];
    if line.indent != indent {
        return err(line.no, line.indent + 1, "unexpected indentation");
    }
    if line.text == "-" || line.text.starts_with("- ") {
        parse_sequence(lines, i, indent)
    } else if split_key(&line.text).is_some() {
        parse_map(lines, i, indent)
    } else {
        let v = parse_scalar_or_flow(&line.text, line.no, line.indent + 1)?;
        *i += 1;
        Ok(v)
    }
}

/// Split "key: rest" or "key:"; keys are plain or quoted scalars without
/// embedded colons.
fn split_key(text: &str) -> Option<(&str, &str)> {
    let mut quote: Option<char> = None;
    for (idx, c) in text.char_indices() {
        match quote {
            Some(q) => {
                if c == q {
                    quote = None;
                }
            }
            None => match c {
                '"' | '\'' => quote = Some(c),
                ':' => {
                    let rest = &text[idx + 1..];
                    if rest.is_empty() {
                        return Some((text[..idx].trim_end(), ""));
                    }
                    if let Some(stripped) = rest.strip_prefix(' ') {
                        return Some((text[..idx].trim_end(), stripped.trim()));
                    }
                    return None;
                }
                '[' | '{' => return None,
                _ => {}
            },
        }
    }
    None
}

fn parse_map(lines: &[Line], i: &mut usize, indent: usize) -> Result<Yaml, YamlError> {
    let mut entries: Vec<(String, Yaml)> = Vec::new();
    while *i < lines.len() && lines[*i].indent == indent {
        let line = &lines[*i];
        let Some((key, rest)) = split_key(&line.text) else {
            break;
        };
        let key = unquote(key);
        if entries.iter().any(|(k, _)| *k == key) {
            return err(line.no, line.indent + 1, format!("duplicate key {key:?}"));
        }
        let value = if rest.is_empty() {
            *i += 1;
            if *i < lines.len() && lines[*i].indent > indent {
                let child = lines[*i].indent;
                parse_node(lines, i, child)?
            } else {
                Yaml::Null
            }
        } else {
            let v = parse_scalar_or_flow(rest, line.no, line.indent + 1)?;
            *i += 1;
            v
        };
        entries.push((key, value));
    }
    Ok(Yaml::Map(entries))
}

fn parse_sequence(lines: &[Line], i: &mut usize, indent: usize) -> Result<Yaml, YamlError> {
    let mut items = Vec::new();
    while *i < lines.len() && lines[*i].indent == indent {
        let line = &lines[*i];
        let rest = if line.text == "-" {
            ""
        } else if let Some(r) = line.text.strip_prefix("- ") {
            r
        } else {
            break;
        };
        if rest.is_empty() {
            *i += 1;
            if *i < lines.len() && lines[*i].indent > indent {
                let child = lines[*i].indent;
                items.push(parse_node(lines, i, child)?);
            } else {
                items.push(Yaml::Null);
            }
        } else if let Some((key, vrest)) = split_key(rest) {
            // List item opening a block map: "- key: value" with any further
            // entries indented to the item column.
            let item_indent = indent + 2;
            let mut entries: Vec<(String, Yaml)> = Vec::new();
            let first_val = if vrest.is_empty() {
                *i += 1;
                if *i < lines.len() && lines[*i].indent > item_indent {
                    let child = lines[*i].indent;
                    parse_node(lines, i, child)?
                } else {
                    Yaml::Null
                }
            } else {
                let v = parse_scalar_or_flow(vrest, line.no, line.indent + 1)?;
                *i += 1;
                v
            };
            entries.push((unquote(key), first_val));
            while *i < lines.len() && lines[*i].indent == item_indent {
                let cont = &lines[*i];
                let Some((k, r)) = split_key(&cont.text) else {
                    break;
                };
                let v = if r.is_empty() {
                    *i += 1;
                    if *i < lines.len() && lines[*i].indent > item_indent {
                        let child = lines[*i].indent;
                        parse_node(lines, i, child)?
                    } else {
                        Yaml::Null
                    }
                } else {
                    let v = parse_scalar_or_flow(r, cont.no, cont.indent + 1)?;
                    *i += 1;
                    v
                };
                entries.push((unquote(k), v));
            }
            items.push(Yaml::Map(entries));
        } else {
            items.push(parse_scalar_or_flow(rest, line.no, line.indent + 1)?);
            *i += 1;
        }
    }
    Ok(Yaml::List(items))
}

fn parse_scalar_or_flow(s: &str, line: usize, col: usize) -> Result<Yaml, YamlError> {
    let s = s.trim();
    if s.starts_with('[') || s.starts_with('{') {
        let chars: Vec<char> = s.chars().collect();
        let mut idx = 0;
        let v = parse_flow(&chars, &mut idx, line, col)?;
        skip_spaces(&chars, &mut idx);
        if idx != chars.len() {
            return err(line, col + idx, "trailing characters after flow value");
        }
        Ok(v)
    } else {
        Ok(scalar(s))
    }
}

fn skip_spaces(chars: &[char], idx: &mut usize) {
    while *idx < chars.len() && chars[*idx] == ' ' {
        *idx += 1;
    }
}

fn parse_flow(
    chars: &[char],
    idx: &mut usize,
    line: usize,
    col: usize,
) -> Result<Yaml, YamlError> {
    skip_spaces(chars, idx);
    if *idx >= chars.len() {
        return err(line, col + *idx, "unexpected end of flow value");
    }
    match chars[*idx] {
        '[' => {
            *idx += 1;
            let mut items = Vec::new();
            loop {
                skip_spaces(chars, idx);
                if *idx >= chars.len() {
                    return err(line, col + *idx, "unterminated flow sequence");
                }
                if chars[*idx] == ']' {
                    *idx += 1;
                    break;
                }
                items.push(parse_flow(chars, idx, line, col)?);
                skip_spaces(chars, idx);
                match chars.get(*idx) {
                    Some(',') => *idx += 1,
                    Some(']') => {}
                    _ => return err(line, col + *idx, "expected ',' or ']'"),
                }
            }
            Ok(Yaml::List(items))
        }
        '{' => {
            *idx += 1;
            let mut entries = Vec::new();
            loop {
                skip_spaces(chars, idx);
                if *idx >= chars.len() {
                    return err(line, col + *idx, "unterminated flow mapping");
                }
                if chars[*idx] == '}' {
                    *idx += 1;
                    break;
                }
                let key = take_flow_token(chars, idx, &[':', ',', '}']);
                if chars.get(*idx) != Some(&':') {
                    return err(line, col + *idx, "expected ':' in flow mapping");
                }
                *idx += 1;
                let value = parse_flow(chars, idx, line, col)?;
                entries.push((unquote(key.trim()), value));
                skip_spaces(chars, idx);
                match chars.get(*idx) {
                    Some(',') => *idx += 1,
                    Some('}') => {}
                    _ => return err(line, col + *idx, "expected ',' or '}'"),
                }
            }
            Ok(Yaml::Map(entries))
        }
        _ => {
            let token = take_flow_token(chars, idx, &[',', ']', '}']);
            Ok(scalar(token.trim()))
        }
    }
}

fn take_flow_token(chars: &[char], idx: &mut usize, stops: &[char]) -> String {
    let mut out = String::new();
    let mut quote: Option<char> = None;
    while *idx < chars.len() {
        let c = chars[*idx];
        match quote {
            Some(q) => {
                out.push(c);
                *idx += 1;
                if c == q {
                    quote = None;
                }
            }
            None => {
                if stops.contains(&c) {
                    break;
                }
                if c == '"' || c == '\'' {
                    quote = Some(c);
                }
                out.push(c);
                *idx += 1;
            }
        }
    }
    out
}

fn scalar(s: &str) -> Yaml {
    match s {
        "" | "~" | "null" => return Yaml::Null,
        "true" => return Yaml::Bool(true),
        "false" => return Yaml::Bool(false),
        _ => {}
    }
    if let Ok(i) = s.parse::<i64>() {
        return Yaml::Int(i);
    }
    Yaml::Str(unquote(s))
}

fn unquote(s: &str) -> String {
    let s = s.trim();
    if s.len() >= 2 {
        let first = s.chars().next().unwrap();
        if (first == '"' || first == '\'') && s.ends_with(first) {
            return s[1..s.len() - 1].to_string();
        }
    }
    s.to_string()
}

// ---------------------------------------------------------------------------
// Canonical emission
// ---------------------------------------------------------------------------

/// Emit a scalar the canonical way: plain where unambiguous, double-quoted
/// otherwise.
pub(crate) fn emit_scalar(v: &Yaml) -> String {
    match v {
        Yaml::Null => "null".to_string(),
        Yaml::Bool(b) => b.to_string(),
        Yaml::Int(i) => i.to_string(),
        Yaml::Str(s) => emit_str(s),
        _ => panic!("emit_scalar on a collection"),
    }
}

pub(crate) fn emit_str(s: &str) -> String {
    let needs_quotes = s.is_empty()
        || s.parse::<i64>().is_ok()
        || matches!(s, "true" | "false" | "null" | "~")
        || s.starts_with(['-', '[', ']', '{', '}', '"', '\'', ' ', '#', '&', '*'])
        || s.ends_with(' ')
        || s.ends_with(':')
        || s.contains(": ")
        || s.contains(" #")
        || s.contains(',');
    if needs_quotes {
        format!("\"{}\"", s.replace('"', "\\\""))
    } else {
        s.to_string()
    }
}

/// Compact flow form, used for positions and small inline maps.
pub(crate) fn emit_flow(v: &Yaml) -> String {
    match v {
        Yaml::List(items) => {
            let inner: Vec<String> = items.iter().map(emit_flow).collect();
            format!("[{}]", inner.join(", "))
        }
        Yaml::Map(entries) => {
            let inner: Vec<String> = entries
                .iter()
                .map(|(k, v)| format!("{}: {}", emit_str(k), emit_flow(v)))
                .collect();
            format!("{{{}}}", inner.join(", "))
        }
        other => emit_scalar(other),
    }
}

/// Block-style emission used for preserved metadata: nested maps and lists
/// in block form, leaves inline.
pub(crate) fn emit_block(v: &Yaml, indent: usize, out: &mut String) {
    let pad = " ".repeat(indent);
    match v {
        Yaml::Map(entries) if !entries.is_empty() => {
            for (k, val) in entries {
                match val {
                    Yaml::Map(m) if !m.is_empty() => {
                        out.push_str(&format!("{pad}{}:\n", emit_str(k)));
                        emit_block(val, indent + 2, out);
                    }
                    Yaml::List(l) if !l.is_empty() => {
                        out.push_str(&format!("{pad}{}:\n", emit_str(k)));
                        emit_block(val, indent + 2, out);
                    }
                    _ => out.push_str(&format!("{pad}{}: {}\n", emit_str(k), emit_flow(val))),
                }
            }
        }
        Yaml::List(items) if !items.is_empty() => {
            for item in items {
                out.push_str(&format!("{pad}- {}\n", emit_flow(item)));
            }
        }
        other => out.push_str(&format!("{pad}{}\n", emit_flow(other))),
    }
}

impl fmt::Display for Yaml {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", emit_flow(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_nested_block_structure() {
        let doc = "\
# header comment
task_id: demo
world:
  anchor: [0, 4, 0]
  radius: 10
allowed_blocks:
  - minecraft:stone
  - minecraft:glass
test_cases:
  - name: main
    sequence:
      - {action: press_button}
      - {action: check_simultaneous, params: {tol: 1}}
flag: true
";
        let y = parse(doc).unwrap();
        assert_eq!(y.get("task_id").unwrap().as_str(), Some("demo"));
        let world = y.get("world").unwrap();
        assert_eq!(world.get("radius").unwrap().as_int(), Some(10));
        let anchor = world.get("anchor").unwrap().as_list().unwrap();
        assert_eq!(anchor.len(), 3);
        assert_eq!(anchor[1].as_int(), Some(4));
        let blocks = y.get("allowed_blocks").unwrap().as_list().unwrap();
        assert_eq!(blocks[1].as_str(), Some("minecraft:glass"));
        let cases = y.get("test_cases").unwrap().as_list().unwrap();
        let seq = cases[0].get("sequence").unwrap().as_list().unwrap();
        assert_eq!(seq[0].get("action").unwrap().as_str(), Some("press_button"));
        assert_eq!(
            seq[1].get("params").unwrap().get("tol").unwrap().as_int(),
            Some(1)
        );
        assert_eq!(y.get("flag").unwrap().as_bool(), Some(true));
    }

    #[test]
    fn reports_line_and_column() {
        let doc = "a:\n  - [1, 2\n";
        let e = parse(doc).unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.col > 0);
    }

    #[test]
    fn flow_roundtrip() {
        let v = Yaml::Map(vec![
            ("a".into(), Yaml::List(vec![Yaml::Int(1), Yaml::Int(-2)])),
            ("b".into(), Yaml::Str("x y".into())),
        ]);
        let s = emit_flow(&v);
        assert_eq!(s, "{a: [1, -2], b: x y}");
        let back = parse(&s).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn negative_ints_and_quoted_strings() {
        let y = parse("k: [-3, \"true\", hello]").unwrap();
        let l = y.get("k").unwrap().as_list().unwrap();
        assert_eq!(l[0].as_int(), Some(-3));
        assert_eq!(l[1].as_str(), Some("true"));
        assert_eq!(l[2].as_str(), Some("hello"));
    }
}
