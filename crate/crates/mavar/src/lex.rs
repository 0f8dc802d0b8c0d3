//! Line tokenizer shared by every text format.

use std::fmt;

use mavar_core::{ContextValue, FeatureId, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    /// Unsigned digits; the parser applies any sign.
    Int(String),
    Float(f64),
    Str(String),
    LParen,
    RParen,
    Comma,
    Semi,
    Colon,
    Dot,
    Assign,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    AndAnd,
    OrOr,
    Bang,
    Minus,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{}`", s),
            Tok::Int(s) => return write!(f, "`{}`", s),
            Tok::Float(x) => return write!(f, "`{:?}`", x),
            Tok::Str(_) => "string literal",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::Comma => "`,`",
            Tok::Semi => "`;`",
            Tok::Colon => "`:`",
            Tok::Dot => "`.`",
            Tok::Assign => "`=`",
            Tok::Eq => "`==`",
            Tok::Ne => "`!=`",
            Tok::Lt => "`<`",
            Tok::Le => "`<=`",
            Tok::Gt => "`>`",
            Tok::Ge => "`>=`",
            Tok::AndAnd => "`&&`",
            Tok::OrOr => "`||`",
            Tok::Bang => "`!`",
            Tok::Minus => "`-`",
        };
        f.write_str(s)
    }
}

/// Splits one source line into tokens. A `#` outside a string starts a
/// comment running to the end of the line.
pub fn tokenize(line: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        match c {
            '#' => break,
            c if c.is_whitespace() => i += 1,
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            c if c.is_ascii_digit() => {
                let (tok, end) = number(&chars, i)?;
                out.push(tok);
                i = end;
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match chars.get(i) {
                        None => return Err("unterminated string literal".into()),
                        Some('"') => break,
                        Some('\\') => match chars.get(i + 1) {
                            Some(&e @ ('"' | '\\')) => {
                                s.push(e);
                                i += 2;
                            }
                            _ => return Err("invalid escape in string literal".into()),
                        },
                        Some(&ch) => {
                            s.push(ch);
                            i += 1;
                        }
                    }
                }
                i += 1;
                out.push(Tok::Str(s));
            }
            _ => {
                let (tok, width) = match (c, next) {
                    ('=', Some('=')) => (Tok::Eq, 2),
                    ('!', Some('=')) => (Tok::Ne, 2),
                    ('<', Some('=')) => (Tok::Le, 2),
                    ('>', Some('=')) => (Tok::Ge, 2),
                    ('&', Some('&')) => (Tok::AndAnd, 2),
                    ('|', Some('|')) => (Tok::OrOr, 2),
                    ('=', _) => (Tok::Assign, 1),
                    ('!', _) => (Tok::Bang, 1),
                    ('<', _) => (Tok::Lt, 1),
                    ('>', _) => (Tok::Gt, 1),
                    ('(', _) => (Tok::LParen, 1),
                    (')', _) => (Tok::RParen, 1),
                    (',', _) => (Tok::Comma, 1),
                    (';', _) => (Tok::Semi, 1),
                    (':', _) => (Tok::Colon, 1),
                    ('.', _) => (Tok::Dot, 1),
                    ('-', _) => (Tok::Minus, 1),
                    _ => return Err(format!("unexpected character `{}`", c)),
                };
                out.push(tok);
                i += width;
            }
        }
    }
    Ok(out)
}

fn number(chars: &[char], start: usize) -> Result<(Tok, usize), String> {
    let digits = |mut i: usize| {
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
        i
    };
    let mut i = digits(start);
    let mut is_float = false;
    if chars.get(i) == Some(&'.') && chars.get(i + 1).is_some_and(|c| c.is_ascii_digit()) {
        is_float = true;
        i = digits(i + 1);
    }
    if matches!(chars.get(i), Some('e' | 'E')) {
        let mut j = i + 1;
        if matches!(chars.get(j), Some('+' | '-')) {
            j += 1;
        }
        if chars.get(j).is_some_and(|c| c.is_ascii_digit()) {
            is_float = true;
            i = digits(j);
        }
    }
    if chars.get(i).is_some_and(|c| c.is_ascii_alphabetic() || *c == '_') {
        return Err("malformed number".into());
    }
    let text: String = chars[start..i].iter().collect();
    if is_float {
        let x: f64 = text.parse().map_err(|_| format!("malformed number `{}`", text))?;
        Ok((Tok::Float(x), i))
    } else {
        Ok((Tok::Int(text), i))
    }
}

/// Token stream over one line with small parsing helpers. Error values are
/// plain messages; callers attach the line number.
pub struct Cursor {
    toks: Vec<Tok>,
    pos: usize,
}

impl Cursor {
    pub fn new(line: &str) -> Result<Self, String> {
        Ok(Self {
            toks: tokenize(line)?,
            pos: 0,
        })
    }

    pub fn is_empty_line(&self) -> bool {
        self.toks.is_empty()
    }

    pub fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    pub fn peek_at(&self, offset: usize) -> Option<&Tok> {
        self.toks.get(self.pos + offset)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn eat_keyword(&mut self, kw: &str) -> bool {
        if self.peek_keyword(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub fn peek_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    pub fn expect(&mut self, tok: &Tok) -> Result<(), String> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(format!("expected {}, found {}", tok, self.describe_next()))
        }
    }

    pub fn expect_keyword(&mut self, kw: &str) -> Result<(), String> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(format!("expected `{}`, found {}", kw, self.describe_next()))
        }
    }

    pub fn ident(&mut self, what: &str) -> Result<String, String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(format!("expected {}, found {}", what, self.describe_next())),
        }
    }

    pub fn end(&self) -> Result<(), String> {
        if self.at_end() {
            Ok(())
        } else {
            Err(format!("unexpected {} at end of line", self.describe_next()))
        }
    }

    pub fn describe_next(&self) -> String {
        match self.peek() {
            Some(t) => t.to_string(),
            None => "end of line".into(),
        }
    }

    /// `env.x`, `user.x` or `platform.x`.
    pub fn feature(&mut self) -> Result<FeatureId, String> {
        let prefix = self.ident("feature")?;
        self.expect(&Tok::Dot)?;
        let name = self.ident("feature name")?;
        let text = format!("{}.{}", prefix, name);
        FeatureId::parse(&text).map_err(|e| e.to_string())
    }

    /// A signed integer literal.
    pub fn int(&mut self) -> Result<i64, String> {
        let neg = self.eat(&Tok::Minus);
        match self.bump() {
            Some(Tok::Int(digits)) => {
                let text = if neg { format!("-{}", digits) } else { digits };
                text.parse().map_err(|_| format!("integer `{}` out of range", text))
            }
            other => Err(format!("expected integer, found {}", describe(other.as_ref()))),
        }
    }

    /// A signed number, integers widened to float.
    pub fn number(&mut self) -> Result<f64, String> {
        let neg = self.eat(&Tok::Minus);
        let x = match self.bump() {
            Some(Tok::Int(digits)) => digits
                .parse::<f64>()
                .map_err(|_| format!("malformed number `{}`", digits))?,
            Some(Tok::Float(x)) => x,
            other => return Err(format!("expected number, found {}", describe(other.as_ref()))),
        };
        Ok(if neg { -x } else { x })
    }

    pub fn vec3_tail(&mut self) -> Result<Vec3, String> {
        let x = self.number()?;
        self.expect(&Tok::Comma)?;
        let y = self.number()?;
        self.expect(&Tok::Comma)?;
        let z = self.number()?;
        self.expect(&Tok::RParen)?;
        Ok(Vec3::new(x, y, z))
    }

    /// `true`, `false`, signed int or float, `"text"`, or `(x, y, z)`.
    pub fn literal(&mut self) -> Result<ContextValue, String> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == "true" || s == "false" => {
                let b = s == "true";
                self.pos += 1;
                Ok(ContextValue::Bool(b))
            }
            Some(Tok::Str(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(ContextValue::Text(s))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                Ok(ContextValue::Vec3(self.vec3_tail()?))
            }
            Some(Tok::Minus) | Some(Tok::Int(_)) | Some(Tok::Float(_)) => {
                let is_float = match self.peek() {
                    Some(Tok::Minus) => matches!(self.peek_at(1), Some(Tok::Float(_))),
                    t => matches!(t, Some(Tok::Float(_))),
                };
                if is_float {
                    Ok(ContextValue::Float(self.number()?))
                } else {
                    Ok(ContextValue::Int(self.int()?))
                }
            }
            _ => Err(format!("expected literal, found {}", self.describe_next())),
        }
    }

    pub fn bool(&mut self) -> Result<bool, String> {
        match self.literal()? {
            ContextValue::Bool(b) => Ok(b),
            other => Err(format!("expected `true` or `false`, found {}", other)),
        }
    }
}

fn describe(t: Option<&Tok>) -> String {
    match t {
        Some(t) => t.to_string(),
        None => "end of line".into(),
    }
}

/// Parses a whole string as a single literal value.
pub fn parse_literal(text: &str) -> Result<ContextValue, String> {
    let mut c = Cursor::new(text)?;
    let v = c.literal()?;
    c.end()?;
    v.check().map_err(String::from)?;
    Ok(v)
}
