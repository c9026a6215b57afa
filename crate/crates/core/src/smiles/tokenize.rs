use super::SmilesError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    /// Organic-subset atom written without brackets, e.g. `C`, `Cl`, `c`.
    Atom {
        symbol: String,
        aromatic: bool,
    },
    /// Full text between `[` and `]`, exclusive.
    BracketAtom(String),
    /// One of `- = # : / \`.
    Bond(char),
    BranchOpen,
    BranchClose,
    RingClosure(u32),
    Dot,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// Byte offset of the first character.
    pub start: usize,
    pub len: usize,
}

/// Splits a SMILES string into tokens that cover the input exactly.
pub fn tokenize(smiles: &str) -> Result<Vec<Token>, SmilesError> {
    let bytes = smiles.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let (kind, len) = match c {
            b'C' if bytes.get(i + 1) == Some(&b'l') => (atom("Cl", false), 2),
            b'B' if bytes.get(i + 1) == Some(&b'r') => (atom("Br", false), 2),
            b'B' | b'C' | b'N' | b'O' | b'P' | b'S' | b'F' | b'I' => (atom(&(c as char).to_string(), false), 1),
            b'b' | b'c' | b'n' | b'o' | b'p' | b's' => (atom(&(c as char).to_string(), true), 1),
            b'*' => (atom("*", false), 1),
            b'[' => {
                let close = bytes[i + 1..]
                    .iter()
                    .position(|&b| b == b']')
                    .ok_or(SmilesError::UnterminatedBracket { position: i })?;
                let inner = &smiles[i + 1..i + 1 + close];
                if !inner.is_ascii() || inner.contains('[') {
                    return Err(SmilesError::UnterminatedBracket { position: i });
                }
                (TokenKind::BracketAtom(inner.to_string()), close + 2)
            }
            b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => (TokenKind::Bond(c as char), 1),
            b'(' => (TokenKind::BranchOpen, 1),
            b')' => (TokenKind::BranchClose, 1),
            b'.' => (TokenKind::Dot, 1),
            b'0'..=b'9' => (TokenKind::RingClosure((c - b'0') as u32), 1),
            b'%' => {
                let digits = bytes.get(i + 1..i + 3);
                match digits {
                    Some(d) if d.iter().all(u8::is_ascii_digit) => {
                        let n = ((d[0] - b'0') * 10 + (d[1] - b'0')) as u32;
                        (TokenKind::RingClosure(n), 3)
                    }
                    _ => return Err(SmilesError::UnknownCharacter { position: i }),
                }
            }
            _ => return Err(SmilesError::UnknownCharacter { position: i }),
        };
        tokens.push(Token { kind, start: i, len });
        i += len;
    }
    Ok(tokens)
}

fn atom(symbol: &str, aromatic: bool) -> TokenKind {
    TokenKind::Atom {
        symbol: symbol.to_string(),
        aromatic,
    }
}
