use super::SyntaxError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Nat(u32),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Amp,
    Bar,
    Tilde,
    Arrow,
    DArrow,
    Eq,
    Ge,
    Gt,
    ApproxOp,
    Le,
    Lt,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Nat(n) => format!("number {n}"),
            Tok::Eof => "end of input".to_string(),
            other => format!("{:?}", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::Comma => ",",
            Tok::Amp => "&",
            Tok::Bar => "|",
            Tok::Tilde => "~",
            Tok::Arrow => "->",
            Tok::DArrow => "<->",
            Tok::Eq => "=",
            Tok::Ge => ">=",
            Tok::Gt => ">",
            Tok::ApproxOp => "~=",
            Tok::Le => "<=",
            Tok::Lt => "<",
            _ => "",
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub offset: usize,
}

pub(crate) fn lex(text: &str) -> Result<Vec<Token>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let rest = &text[i..];
        // Longest match first.
        let fixed = [
            ("<->", Tok::DArrow),
            ("->", Tok::Arrow),
            (">=", Tok::Ge),
            ("<=", Tok::Le),
            ("~=", Tok::ApproxOp),
            (">", Tok::Gt),
            ("<", Tok::Lt),
            ("~", Tok::Tilde),
            ("=", Tok::Eq),
            ("&", Tok::Amp),
            ("|", Tok::Bar),
            ("(", Tok::LParen),
            (")", Tok::RParen),
            ("[", Tok::LBrack),
            ("]", Tok::RBrack),
            (",", Tok::Comma),
        ];
        if let Some((sym, tok)) = fixed.iter().find(|(sym, _)| rest.starts_with(sym)) {
            out.push(Token {
                tok: tok.clone(),
                offset: start,
            });
            i += sym.len();
            continue;
        }
        if c.is_ascii_alphabetic() {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(text[start..i].to_string()),
                offset: start,
            });
            continue;
        }
        if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = text[start..i]
                .parse::<u32>()
                .map_err(|_| SyntaxError::Lex {
                    offset: start,
                    found: c as char,
                })?;
            out.push(Token {
                tok: Tok::Nat(n),
                offset: start,
            });
            continue;
        }
        let found = rest.chars().next().unwrap_or('\0');
        return Err(SyntaxError::Lex {
            offset: start,
            found,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        offset: text.len(),
    });
    Ok(out)
}
