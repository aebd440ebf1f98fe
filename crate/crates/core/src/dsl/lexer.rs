use super::ast::Span;
use super::SyntaxError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    /// Integer literal, sign included.
    Int(i64),
    /// Decimal literal kept as text so it can be converted exactly.
    Decimal(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Slash,
    /// Newline or `;`.
    Sep,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Decimal(s) => format!("`{s}`"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Sep => "end of statement".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    while i < chars.len() {
        let c = chars[i];
        let span = Span::new(line, col);
        match c {
            '\n' => {
                out.push(Token { tok: Tok::Sep, span });
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            ' ' | '\t' | '\r' | '\u{feff}' => {}
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                    col += 1;
                }
                continue;
            }
            ';' => out.push(Token { tok: Tok::Sep, span }),
            '{' => out.push(Token { tok: Tok::LBrace, span }),
            '}' => out.push(Token { tok: Tok::RBrace, span }),
            '(' => out.push(Token { tok: Tok::LParen, span }),
            ')' => out.push(Token { tok: Tok::RParen, span }),
            ',' => out.push(Token { tok: Tok::Comma, span }),
            '/' => out.push(Token { tok: Tok::Slash, span }),
            c if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let mut decimal = false;
                if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                    decimal = true;
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let text: String = chars[start..i].iter().collect();
                col += (i - start) as u32;
                let tok = if decimal {
                    Tok::Decimal(text)
                } else {
                    match text.parse::<i64>() {
                        Ok(n) => Tok::Int(n),
                        Err(_) => {
                            return Err(SyntaxError::new(span, vec!["integer in range".into()], format!("`{text}`")))
                        }
                    }
                };
                out.push(Token { tok, span });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                col += (i - start) as u32;
                out.push(Token { tok: Tok::Ident(text), span });
                continue;
            }
            other => {
                return Err(SyntaxError::new(span, vec!["token".into()], format!("character `{other}`")));
            }
        }
        i += 1;
        col += 1;
    }
    out.push(Token { tok: Tok::Eof, span: Span::new(line, col) });
    Ok(out)
}
