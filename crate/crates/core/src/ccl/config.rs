//! Run-configuration (`.par`) files.
//!
//! ```text
//! ActiveThorns = "CartGrid MoL WaveToy"
//! mol::dt = 0.005
//! wavetoy::mode = "standing"   # comment
//! ```
//!
//! Values are kept as written; they are typed against the parameter
//! declarations when the flesh binds them.

use super::lexer::Pos;
use super::{ParseError, ParseErrorKind};
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq)]
pub struct RawValue {
    pub text: String,
    /// The value was written as a quoted string.
    pub quoted: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub implementation: String,
    pub name: String,
    pub value: RawValue,
    pub line: usize,
}

impl Assignment {
    pub fn full_name(&self) -> String {
        format!("{}::{}", self.implementation, self.name)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub active_thorns: Vec<String>,
    pub assignments: Vec<Assignment>,
}

impl RunConfig {
    pub fn assignment(&self, full_name: &str) -> Option<&Assignment> {
        self.assignments.iter().find(|a| a.full_name() == full_name)
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn at(line: usize, column: usize) -> Pos {
    Pos { line, column }
}

/// Strips a trailing `#` comment that is not inside a quoted string.
fn strip_comment(line: &str) -> &str {
    let mut in_str = false;
    let mut escaped = false;
    for (i, c) in line.char_indices() {
        match c {
            '\\' if in_str && !escaped => {
                escaped = true;
                continue;
            }
            '"' if !escaped => in_str = !in_str,
            '#' if !in_str => return &line[..i],
            _ => {}
        }
        escaped = false;
    }
    line
}

fn parse_raw_value(text: &str, pos: Pos) -> Result<RawValue, ParseError> {
    if let Some(rest) = text.strip_prefix('"') {
        let mut out = String::new();
        let mut chars = rest.chars();
        loop {
            match chars.next() {
                None => return Err(ParseError::new(ParseErrorKind::Syntax, pos, "unterminated string")),
                Some('"') => break,
                Some('\\') => match chars.next() {
                    Some('"') => out.push('"'),
                    Some('\\') => out.push('\\'),
                    Some('n') => out.push('\n'),
                    Some('t') => out.push('\t'),
                    _ => return Err(ParseError::new(ParseErrorKind::Syntax, pos, "invalid escape sequence")),
                },
                Some(c) => out.push(c),
            }
        }
        if !chars.as_str().trim().is_empty() {
            return Err(ParseError::new(
                ParseErrorKind::Syntax,
                pos,
                "unexpected text after quoted value",
            ));
        }
        Ok(RawValue {
            text: out,
            quoted: true,
        })
    } else if text.is_empty() || text.contains(char::is_whitespace) {
        Err(ParseError::new(
            ParseErrorKind::Syntax,
            pos,
            "expected a single value (quote values containing spaces)",
        ))
    } else {
        Ok(RawValue {
            text: text.to_string(),
            quoted: false,
        })
    }
}

pub fn parse_run_config(src: &str) -> Result<RunConfig, ParseError> {
    let mut config = RunConfig::default();
    let mut active_line: Option<usize> = None;
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (idx, raw_line) in src.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw_line);
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = line.len() - line.trim_start().len();
        let col = |offset: usize| line[..offset].chars().count() + 1;
        let Some(eq) = line.find('=') else {
            return Err(ParseError::new(
                ParseErrorKind::Syntax,
                at(line_no, col(indent)),
                "expected `<name> = <value>`",
            ));
        };
        let key = line[..eq].trim();
        let value_start = eq + 1 + (line[eq + 1..].len() - line[eq + 1..].trim_start().len());
        let value_text = line[eq + 1..].trim();
        let value_pos = at(line_no, col(value_start));
        if key == "ActiveThorns" {
            if let Some(first) = active_line {
                return Err(ParseError::new(
                    ParseErrorKind::DuplicateAssignment,
                    at(line_no, col(indent)),
                    format!("ActiveThorns already set on line {first}"),
                ));
            }
            active_line = Some(line_no);
            let value = parse_raw_value(value_text, value_pos)?;
            for name in value.text.split_whitespace() {
                if !is_ident(name) {
                    return Err(ParseError::new(
                        ParseErrorKind::Syntax,
                        value_pos,
                        format!("`{name}` is not a thorn name"),
                    ));
                }
                if config.active_thorns.iter().any(|t| t == name) {
                    return Err(ParseError::new(
                        ParseErrorKind::DuplicateAssignment,
                        value_pos,
                        format!("thorn `{name}` activated twice"),
                    ));
                }
                config.active_thorns.push(name.to_string());
            }
            continue;
        }
        let Some((implementation, name)) = key.split_once("::") else {
            return Err(ParseError::new(
                ParseErrorKind::Syntax,
                at(line_no, col(indent)),
                format!("expected `impl::param`, found `{key}`"),
            ));
        };
        if !is_ident(implementation) || !is_ident(name) {
            return Err(ParseError::new(
                ParseErrorKind::Syntax,
                at(line_no, col(indent)),
                format!("`{key}` is not a valid `impl::param` name"),
            ));
        }
        let value = parse_raw_value(value_text, value_pos)?;
        if let Some(first) = seen.insert(key.to_string(), line_no) {
            return Err(ParseError::new(
                ParseErrorKind::DuplicateAssignment,
                at(line_no, col(indent)),
                format!("`{key}` already assigned on line {first}"),
            ));
        }
        config.assignments.push(Assignment {
            implementation: implementation.to_string(),
            name: name.to_string(),
            value,
            line: line_no,
        });
    }
    Ok(config)
}
