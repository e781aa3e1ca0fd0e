use super::{ParseError, ParseErrorKind};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    /// Raw numeric literal text; typed by the parser in context.
    Number(String),
    Str(String),
    DoubleColon,
    Colon,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Eq,
    Pipe,
    Star,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::DoubleColon => "`::`".into(),
            Tok::Colon => "`:`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Star => "`*`".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone)]
pub struct Spanned {
    pub tok: Tok,
    pub pos: Pos,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            column: self.column,
        }
    }
}

fn err(pos: Pos, message: impl Into<String>) -> ParseError {
    ParseError::new(ParseErrorKind::Syntax, pos, message)
}

/// Splits manifest text into tokens. `#` starts a comment outside string literals.
pub fn tokenize(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut cur = Cursor {
        chars: src.chars().peekable(),
        line: 1,
        column: 1,
    };
    let mut out = Vec::new();
    while let Some(c) = cur.peek() {
        let pos = cur.pos();
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '#' {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }
        let tok = match c {
            '{' | '}' | '(' | ')' | ',' | '=' | '|' | '*' => {
                cur.bump();
                match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ',' => Tok::Comma,
                    '=' => Tok::Eq,
                    '|' => Tok::Pipe,
                    _ => Tok::Star,
                }
            }
            ':' => {
                cur.bump();
                if cur.peek() == Some(':') {
                    cur.bump();
                    Tok::DoubleColon
                } else {
                    Tok::Colon
                }
            }
            '"' => {
                cur.bump();
                Tok::Str(lex_string(&mut cur, pos)?)
            }
            c if c.is_ascii_alphabetic() => {
                let mut s = String::new();
                while let Some(c) = cur.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        cur.bump();
                    } else {
                        break;
                    }
                }
                Tok::Ident(s)
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' => {
                Tok::Number(lex_number(&mut cur, pos)?)
            }
            other => return Err(err(pos, format!("unexpected character `{other}`"))),
        };
        out.push(Spanned { tok, pos });
    }
    Ok(out)
}

fn lex_string(cur: &mut Cursor<'_>, start: Pos) -> Result<String, ParseError> {
    let mut s = String::new();
    loop {
        let pos = cur.pos();
        match cur.bump() {
            None | Some('\n') => return Err(err(start, "unterminated string literal")),
            Some('"') => return Ok(s),
            Some('\\') => match cur.bump() {
                Some('"') => s.push('"'),
                Some('\\') => s.push('\\'),
                Some('n') => s.push('\n'),
                Some('t') => s.push('\t'),
                _ => return Err(err(pos, "invalid escape sequence")),
            },
            Some(c) => s.push(c),
        }
    }
}

fn lex_number(cur: &mut Cursor<'_>, start: Pos) -> Result<String, ParseError> {
    let mut s = String::new();
    if let Some(c @ ('-' | '+')) = cur.peek() {
        s.push(c);
        cur.bump();
    }
    let mut digits = 0;
    while let Some(c) = cur.peek() {
        if c.is_ascii_digit() {
            digits += 1;
        } else if !(c == '.') {
            break;
        }
        s.push(c);
        cur.bump();
    }
    if let Some(c @ ('e' | 'E')) = cur.peek() {
        s.push(c);
        cur.bump();
        if let Some(c @ ('-' | '+')) = cur.peek() {
            s.push(c);
            cur.bump();
        }
        let mut exp_digits = 0;
        while let Some(c) = cur.peek().filter(char::is_ascii_digit) {
            s.push(c);
            cur.bump();
            exp_digits += 1;
        }
        if exp_digits == 0 {
            return Err(err(start, format!("malformed number `{s}`")));
        }
    }
    if digits == 0 || s.matches('.').count() > 1 {
        return Err(err(start, format!("malformed number `{s}`")));
    }
    Ok(s)
}
