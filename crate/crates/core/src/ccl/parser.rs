//! Recursive-descent parser for `.thorn` manifests.

use super::lexer::{tokenize, Pos, Spanned, Tok};
use super::manifest::*;
use super::{ParseError, ParseErrorKind};
use std::collections::HashSet;

pub const MAX_GHOST: u8 = 4;

struct Parser {
    toks: Vec<Spanned>,
    at: usize,
    end: Pos,
}

fn end_pos(src: &str) -> Pos {
    let line = src.lines().count().max(1);
    let column = src.lines().last().map_or(0, |l| l.chars().count()) + 1;
    Pos { line, column }
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|s| &s.tok)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.at).map_or(self.end, |s| s.pos)
    }

    fn next(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.at).cloned();
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        let found = self.peek().map_or("end of input".to_string(), Tok::describe);
        ParseError::new(
            ParseErrorKind::Syntax,
            self.pos(),
            format!("expected {wanted}, found {found}"),
        )
    }

    fn expect(&mut self, tok: Tok) -> Result<Pos, ParseError> {
        if self.peek() == Some(&tok) {
            let pos = self.pos();
            self.at += 1;
            Ok(pos)
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn ident(&mut self, what: &str) -> Result<(String, Pos), ParseError> {
        match self.peek() {
            Some(Tok::Ident(_)) => {
                let Spanned { tok, pos } = self.next().unwrap();
                let Tok::Ident(s) = tok else { unreachable!() };
                Ok((s, pos))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<Pos, ParseError> {
        if self.is_keyword(kw) {
            let pos = self.pos();
            self.at += 1;
            Ok(pos)
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn string(&mut self, what: &str) -> Result<(String, Pos), ParseError> {
        match self.peek() {
            Some(Tok::Str(_)) => {
                let Spanned { tok, pos } = self.next().unwrap();
                let Tok::Str(s) = tok else { unreachable!() };
                Ok((s, pos))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn number(&mut self, what: &str) -> Result<(String, Pos), ParseError> {
        match self.peek() {
            Some(Tok::Number(_)) => {
                let Spanned { tok, pos } = self.next().unwrap();
                let Tok::Number(s) = tok else { unreachable!() };
                Ok((s, pos))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    /// `key=value` attribute; returns the value identifier or number text.
    fn attribute(&mut self) -> Result<(String, Pos, Tok), ParseError> {
        let (key, pos) = self.ident("attribute")?;
        self.expect(Tok::Eq)?;
        match self.next() {
            Some(Spanned {
                tok: tok @ (Tok::Ident(_) | Tok::Number(_)),
                ..
            }) => Ok((key, pos, tok)),
            _ => {
                self.at -= 1;
                Err(self.unexpected(&format!("value for `{key}`")))
            }
        }
    }

    fn group_ref(&mut self) -> Result<GroupRef, ParseError> {
        let (implementation, _) = self.ident("implementation name")?;
        self.expect(Tok::DoubleColon)?;
        let (group, _) = self.ident("group name")?;
        Ok(GroupRef {
            implementation,
            group,
        })
    }
}

fn bad_value(pos: Pos, msg: impl Into<String>) -> ParseError {
    ParseError::new(ParseErrorKind::BadValue, pos, msg)
}

/// Parses one thorn manifest.
pub fn parse_manifest(src: &str) -> Result<ThornManifest, ParseError> {
    let mut p = Parser {
        toks: tokenize(src)?,
        at: 0,
        end: end_pos(src),
    };
    let mut thorn_name: Option<String> = None;
    let mut implementation: Option<String> = None;
    let mut inherits = Vec::new();
    let mut groups: Vec<GroupDecl> = Vec::new();
    let mut params: Vec<ParamDecl> = Vec::new();
    let mut schedule_items: Vec<ScheduleDecl> = Vec::new();
    let mut seen_groups = HashSet::new();
    let mut seen_params = HashSet::new();
    let mut seen_routines = HashSet::new();

    while p.peek().is_some() {
        let pos = p.pos();
        let (stmt, _) = p.ident("statement keyword")?;
        match stmt.as_str() {
            "thorn" => {
                if thorn_name.is_some() {
                    return Err(ParseError::new(
                        ParseErrorKind::Syntax,
                        pos,
                        "duplicate `thorn` statement",
                    ));
                }
                thorn_name = Some(p.ident("thorn name")?.0);
            }
            "implements" => {
                if implementation.is_some() {
                    return Err(ParseError::new(
                        ParseErrorKind::Syntax,
                        pos,
                        "duplicate `implements` statement",
                    ));
                }
                implementation = Some(p.ident("implementation name")?.0);
            }
            "inherits" => loop {
                inherits.push(p.ident("implementation name")?.0);
                if !p.eat(&Tok::Comma) {
                    break;
                }
            },
            "group" => {
                let g = parse_group(&mut p)?;
                if !seen_groups.insert(g.0.name.clone()) {
                    return Err(ParseError::new(
                        ParseErrorKind::DuplicateName,
                        g.1,
                        format!("group `{}` declared twice", g.0.name),
                    ));
                }
                groups.push(g.0);
            }
            "param" => {
                let d = parse_param(&mut p)?;
                if !seen_params.insert(d.0.name.clone()) {
                    return Err(ParseError::new(
                        ParseErrorKind::DuplicateName,
                        d.1,
                        format!("parameter `{}` declared twice", d.0.name),
                    ));
                }
                params.push(d.0);
            }
            "schedule" => {
                let s = parse_schedule(&mut p)?;
                if !seen_routines.insert(s.0.routine.clone()) {
                    return Err(ParseError::new(
                        ParseErrorKind::DuplicateName,
                        s.1,
                        format!("routine `{}` scheduled twice", s.0.routine),
                    ));
                }
                schedule_items.push(s.0);
            }
            other => {
                return Err(ParseError::new(
                    ParseErrorKind::Syntax,
                    pos,
                    format!("unknown statement `{other}`"),
                ))
            }
        }
    }

    let thorn_name = thorn_name.ok_or_else(|| {
        ParseError::new(ParseErrorKind::Syntax, p.end, "missing `thorn` statement")
    })?;
    let implementation = implementation.ok_or_else(|| {
        ParseError::new(
            ParseErrorKind::Syntax,
            p.end,
            "missing `implements` statement",
        )
    })?;
    Ok(ThornManifest {
        thorn_name,
        implementation,
        inherits,
        groups,
        params,
        schedule_items,
    })
}

fn parse_group(p: &mut Parser) -> Result<(GroupDecl, Pos), ParseError> {
    let (name, name_pos) = p.ident("group name")?;
    let mut kind = None;
    let mut timelevels = 1u8;
    let mut ghost = 0u8;
    let mut parity = Parity::Even;
    while let Some(Tok::Ident(_)) = p.peek() {
        let (key, pos, value) = p.attribute()?;
        let text = match &value {
            Tok::Ident(s) | Tok::Number(s) => s.clone(),
            _ => unreachable!(),
        };
        match key.as_str() {
            "kind" => {
                kind = Some(match text.as_str() {
                    "GF" => GroupKind::GridFunction,
                    "SCALAR" => GroupKind::Scalar,
                    _ => return Err(bad_value(pos, format!("unknown group kind `{text}`"))),
                })
            }
            "timelevels" => {
                timelevels = match text.parse::<u8>() {
                    Ok(n @ 1..=3) => n,
                    _ => return Err(bad_value(pos, format!("timelevels must be 1, 2 or 3, got `{text}`"))),
                }
            }
            "ghost" => {
                ghost = match text.parse::<u8>() {
                    Ok(n) if n <= MAX_GHOST => n,
                    _ => {
                        return Err(bad_value(
                            pos,
                            format!("ghost must be an integer in 0..={MAX_GHOST}, got `{text}`"),
                        ))
                    }
                }
            }
            "parity" => parity = parse_parity(&text).ok_or_else(|| bad_value(pos, format!("unknown parity `{text}`")))?,
            _ => {
                return Err(ParseError::new(
                    ParseErrorKind::Syntax,
                    pos,
                    format!("unknown group attribute `{key}`"),
                ))
            }
        }
    }
    let kind = kind.ok_or_else(|| {
        ParseError::new(
            ParseErrorKind::Syntax,
            name_pos,
            format!("group `{name}` is missing kind=<GF|SCALAR>"),
        )
    })?;
    if kind == GroupKind::Scalar && ghost > 0 {
        return Err(bad_value(name_pos, format!("SCALAR group `{name}` cannot have ghost points")));
    }
    p.expect(Tok::LBrace)?;
    let mut members = Vec::new();
    let mut seen = HashSet::new();
    loop {
        let (var, pos) = p.ident("variable name")?;
        let mut var_parity = parity;
        if p.eat(&Tok::Colon) {
            let (text, ppos) = p.ident("parity")?;
            var_parity = parse_parity(&text).ok_or_else(|| bad_value(ppos, format!("unknown parity `{text}`")))?;
        }
        if !seen.insert(var.clone()) {
            return Err(ParseError::new(
                ParseErrorKind::DuplicateName,
                pos,
                format!("variable `{var}` listed twice in group `{name}`"),
            ));
        }
        members.push(MemberDecl {
            name: var,
            parity: var_parity,
        });
        if !p.eat(&Tok::Comma) {
            break;
        }
    }
    p.expect(Tok::RBrace)?;
    Ok((
        GroupDecl {
            name,
            kind,
            timelevels,
            ghost,
            parity,
            members,
        },
        name_pos,
    ))
}

fn parse_parity(s: &str) -> Option<Parity> {
    match s {
        "even" => Some(Parity::Even),
        "odd" => Some(Parity::Odd),
        _ => None,
    }
}

fn parse_param(p: &mut Parser) -> Result<(ParamDecl, Pos), ParseError> {
    let (tname, tpos) = p.ident("parameter type")?;
    let ptype = match tname.as_str() {
        "real" => ParamType::Real,
        "int" => ParamType::Int,
        "keyword" => ParamType::Keyword,
        "boolean" => ParamType::Boolean,
        "string" => ParamType::String,
        _ => {
            return Err(ParseError::new(
                ParseErrorKind::Syntax,
                tpos,
                format!("unknown parameter type `{tname}`"),
            ))
        }
    };
    let (name, name_pos) = p.ident("parameter name")?;
    let (description, _) = p.string("quoted description")?;
    p.expect(Tok::LBrace)?;
    let range_pos = p.pos();
    let range = parse_range(p, ptype)?;
    p.expect(Tok::RBrace)?;
    if let ParamRange::Keywords(set) = &range {
        let mut seen = HashSet::new();
        if let Some(dup) = set.iter().find(|k| !seen.insert(k.as_str())) {
            return Err(ParseError::new(
                ParseErrorKind::BadRange,
                range_pos,
                format!("keyword `{dup}` listed twice"),
            ));
        }
    }
    p.keyword("default")?;
    let default_pos = p.pos();
    let default = parse_value(p, ptype)?;
    if !range.admits(&default) {
        return Err(ParseError::new(
            ParseErrorKind::BadRange,
            default_pos,
            format!("default {default} of `{name}` lies outside range {{ {range} }}"),
        ));
    }
    let mut steerable = Steerable::Never;
    if p.is_keyword("steerable") {
        let (_, pos, value) = p.attribute()?;
        steerable = match value {
            Tok::Ident(s) if s == "never" => Steerable::Never,
            Tok::Ident(s) if s == "always" => Steerable::Always,
            Tok::Ident(s) if s == "recover" => Steerable::Recover,
            other => return Err(bad_value(pos, format!("unknown steerable value {}", other.describe()))),
        };
    }
    Ok((
        ParamDecl {
            name,
            ptype,
            description,
            range,
            default,
            steerable,
        },
        name_pos,
    ))
}

fn parse_range(p: &mut Parser, ptype: ParamType) -> Result<ParamRange, ParseError> {
    match ptype {
        ParamType::Real | ParamType::Int => {
            let start = p.pos();
            let lo_open = p.eat(&Tok::LParen);
            let lo = parse_bound(p, ptype)?;
            p.expect(Tok::Colon)?;
            let hi = parse_bound(p, ptype)?;
            let hi_open = p.eat(&Tok::RParen);
            let range = match (lo, hi) {
                (BoundText::Real(lo), BoundText::Real(hi)) => {
                    if let (Some(l), Some(h)) = (lo, hi) {
                        if l > h || (l == h && (lo_open || hi_open)) {
                            return Err(ParseError::new(ParseErrorKind::BadRange, start, "empty numeric range"));
                        }
                    }
                    ParamRange::Real {
                        lo: Bound { value: lo, inclusive: !lo_open },
                        hi: Bound { value: hi, inclusive: !hi_open },
                    }
                }
                (BoundText::Int(lo), BoundText::Int(hi)) => {
                    if let (Some(l), Some(h)) = (lo, hi) {
                        if l > h || (l == h && (lo_open || hi_open)) {
                            return Err(ParseError::new(ParseErrorKind::BadRange, start, "empty numeric range"));
                        }
                    }
                    ParamRange::Int {
                        lo: Bound { value: lo, inclusive: !lo_open },
                        hi: Bound { value: hi, inclusive: !hi_open },
                    }
                }
                _ => unreachable!(),
            };
            Ok(range)
        }
        ParamType::Keyword => {
            let mut set = vec![p.string("quoted keyword")?.0];
            while p.eat(&Tok::Pipe) {
                set.push(p.string("quoted keyword")?.0);
            }
            Ok(ParamRange::Keywords(set))
        }
        ParamType::Boolean | ParamType::String => Ok(ParamRange::Any),
    }
}

enum BoundText {
    Real(Option<f64>),
    Int(Option<i64>),
}

fn parse_bound(p: &mut Parser, ptype: ParamType) -> Result<BoundText, ParseError> {
    if p.eat(&Tok::Star) {
        return Ok(match ptype {
            ParamType::Real => BoundText::Real(None),
            _ => BoundText::Int(None),
        });
    }
    let (text, pos) = p.number("range bound or `*`")?;
    match ptype {
        ParamType::Real => parse_real(&text, pos).map(|x| BoundText::Real(Some(x))),
        _ => parse_int(&text, pos).map(|x| BoundText::Int(Some(x))),
    }
}

fn parse_real(text: &str, pos: Pos) -> Result<f64, ParseError> {
    match text.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(bad_value(pos, format!("`{text}` is not a finite real"))),
    }
}

fn parse_int(text: &str, pos: Pos) -> Result<i64, ParseError> {
    text.parse::<i64>()
        .map_err(|_| bad_value(pos, format!("`{text}` is not an integer")))
}

fn parse_value(p: &mut Parser, ptype: ParamType) -> Result<ParamValue, ParseError> {
    let pos = p.pos();
    match ptype {
        ParamType::Real => {
            let (t, pos) = p.number("real value")?;
            parse_real(&t, pos).map(ParamValue::Real)
        }
        ParamType::Int => {
            let (t, pos) = p.number("integer value")?;
            parse_int(&t, pos).map(ParamValue::Int)
        }
        ParamType::Keyword => Ok(ParamValue::Keyword(p.string("quoted keyword")?.0)),
        ParamType::String => Ok(ParamValue::Str(p.string("quoted string")?.0)),
        ParamType::Boolean => {
            let (t, _) = p.ident("boolean value")?;
            parse_bool(&t)
                .map(ParamValue::Boolean)
                .ok_or_else(|| bad_value(pos, format!("`{t}` is not a boolean")))
        }
    }
}

pub(crate) fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "yes" | "true" | "1" => Some(true),
        "no" | "false" | "0" => Some(false),
        _ => None,
    }
}

fn parse_schedule(p: &mut Parser) -> Result<(ScheduleDecl, Pos), ParseError> {
    let (routine, routine_pos) = p.ident("routine name")?;
    let location = if p.is_keyword("at") {
        p.at += 1;
        let (bin, pos) = p.ident("schedule bin")?;
        ScheduleLocation::Bin(
            Bin::from_name(&bin).ok_or_else(|| bad_value(pos, format!("unknown schedule bin `{bin}`")))?,
        )
    } else if p.is_keyword("in") {
        p.at += 1;
        let (group, pos) = p.ident("schedule group name")?;
        if Bin::from_name(&group).is_some() {
            return Err(bad_value(pos, format!("`{group}` is a bin; use `at {group}`")));
        }
        ScheduleLocation::Group(group)
    } else {
        return Err(p.unexpected("`at <BIN>` or `in <group>`"));
    };
    let mut before = Vec::new();
    let mut after = Vec::new();
    loop {
        let list = if p.is_keyword("before") {
            &mut before
        } else if p.is_keyword("after") {
            &mut after
        } else {
            break;
        };
        p.at += 1;
        let (target, pos) = p.ident("routine name")?;
        if Bin::from_name(&target).is_some() {
            return Err(bad_value(pos, format!("ordering constraints name routines, not bins (`{target}`)")));
        }
        list.push(target);
    }
    p.expect(Tok::LBrace)?;
    let mut reads = Vec::new();
    let mut writes = Vec::new();
    let mut sync = Vec::new();
    while !p.eat(&Tok::RBrace) {
        let (key, pos) = p.ident("`reads:`, `writes:`, `sync:` or `}`")?;
        let list = match key.as_str() {
            "reads" => &mut reads,
            "writes" => &mut writes,
            "sync" => &mut sync,
            _ => {
                return Err(ParseError::new(
                    ParseErrorKind::Syntax,
                    pos,
                    format!("unknown schedule clause `{key}`"),
                ))
            }
        };
        p.expect(Tok::Colon)?;
        loop {
            list.push(p.group_ref()?);
            if !p.eat(&Tok::Comma) {
                break;
            }
        }
    }
    let (description, _) = p.string("quoted description")?;
    Ok((
        ScheduleDecl {
            routine,
            location,
            before,
            after,
            reads,
            writes,
            sync,
            description,
        },
        routine_pos,
    ))
}
