use super::Span;

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: Span,
}

#[derive(Debug)]
pub(crate) struct LexError {
    pub span: Span,
    pub found: char,
}

// Longest first.
const SYMBOLS: &[&str] = &[
    "<-", "<=", "=>", "->", "(", ")", ",", ";", ":", ".", "*", "+", "-", "=", "#", "[", "]", "⊗",
    "×", "λ", "\\",
];

fn ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

pub(crate) fn lex(src: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, n: usize| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    let starts_with = |i: usize, s: &str| {
        let mut j = i;
        for c in s.chars() {
            if j >= chars.len() || chars[j] != c {
                return false;
            }
            j += 1;
        }
        true
    };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        if starts_with(i, "--") {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1);
            }
            continue;
        }
        let span = Span { line, col };
        if starts_with(i, "bit-control") && !chars.get(i + 11).is_some_and(|c| ident_char(*c)) {
            out.push(Token { tok: Tok::Ident("bit-control".into()), span });
            advance(&mut i, &mut line, &mut col, 11);
            continue;
        }
        if ident_start(c) {
            let start = i;
            let mut j = i;
            while j < chars.len() && ident_char(chars[j]) {
                j += 1;
            }
            // Specialization suffix `name@k`.
            if j + 1 < chars.len() && chars[j] == '@' && chars[j + 1].is_ascii_digit() {
                j += 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
            }
            let text: String = chars[start..j].iter().collect();
            advance(&mut i, &mut line, &mut col, j - start);
            out.push(Token { tok: Tok::Ident(text), span });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            let mut j = i;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            let text: String = chars[start..j].iter().collect();
            let n = text.parse::<i64>().map_err(|_| LexError { span, found: c })?;
            advance(&mut i, &mut line, &mut col, j - start);
            out.push(Token { tok: Tok::Int(n), span });
            continue;
        }
        match SYMBOLS.iter().find(|s| starts_with(i, s)) {
            Some(s) => {
                out.push(Token { tok: Tok::Sym(s), span });
                advance(&mut i, &mut line, &mut col, s.chars().count());
            }
            None => return Err(LexError { span, found: c }),
        }
    }
    out.push(Token { tok: Tok::Eof, span: Span { line, col } });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn arrows_and_comments() {
        assert_eq!(
            toks("a' <- x -- note\n<= =>"),
            vec![
                Tok::Ident("a'".into()),
                Tok::Sym("<-"),
                Tok::Ident("x".into()),
                Tok::Sym("<="),
                Tok::Sym("=>"),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn bit_control_and_suffix() {
        assert_eq!(
            toks("bit-control X fourier@3 bit - 1"),
            vec![
                Tok::Ident("bit-control".into()),
                Tok::Ident("X".into()),
                Tok::Ident("fourier@3".into()),
                Tok::Ident("bit".into()),
                Tok::Sym("-"),
                Tok::Int(1),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn spans_track_lines() {
        let t = lex("x\n  y").unwrap();
        assert_eq!(t[1].span, Span { line: 2, col: 3 });
    }
}
