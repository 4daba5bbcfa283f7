//! Three-symbol token alphabet and its two-bit encoding.
//!
//! A sampler state is a string over `{a, b, M}` where `M` is the mask.
//! Each token is carried by two bits: the first says whether the position
//! is masked, the second carries the value of an unmasked token.
//!
//! ```text
//!   a -> (0, 0)    b -> (0, 1)    M -> (1, 0)
//! ```
//!
//! `(1, 1)` is not a token; circuits that emit it are rejected at run time.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Token {
    A,
    B,
    M,
}

impl Token {
    pub fn from_value_bit(bit: bool) -> Token {
        if bit {
            Token::B
        } else {
            Token::A
        }
    }

    pub fn is_masked(self) -> bool {
        matches!(self, Token::M)
    }

    /// The value carried by an unmasked token.
    pub fn value(self) -> Option<bool> {
        match self {
            Token::A => Some(false),
            Token::B => Some(true),
            Token::M => None,
        }
    }

    /// First encoding bit: maskedness.
    pub fn mask_bit(self) -> bool {
        self.is_masked()
    }

    /// Second encoding bit: value, zero for the mask token.
    pub fn value_bit(self) -> bool {
        matches!(self, Token::B)
    }

    pub fn encode(self) -> (bool, bool) {
        (self.mask_bit(), self.value_bit())
    }

    /// Inverse of [`encode`](Token::encode); `(1, 1)` has no preimage.
    pub fn decode(mask: bool, value: bool) -> Option<Token> {
        match (mask, value) {
            (false, false) => Some(Token::A),
            (false, true) => Some(Token::B),
            (true, false) => Some(Token::M),
            (true, true) => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Token::A => 'a',
            Token::B => 'b',
            Token::M => 'M',
        }
    }

    /// Accepts both the letter form (`a`, `b`, `M`) and the bit form
    /// (`0`, `1`, `_`).
    pub fn from_char(c: char) -> Option<Token> {
        match c {
            'a' | '0' => Some(Token::A),
            'b' | '1' => Some(Token::B),
            'M' | 'm' | '_' => Some(Token::M),
            _ => None,
        }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// Renders a state as a string of `a`/`b`/`M` characters.
pub fn state_string(tokens: &[Token]) -> String {
    tokens.iter().map(|t| t.to_char()).collect()
}

/// Parses a state string; each character must name a token.
pub fn parse_state(s: &str) -> Result<Vec<Token>, String> {
    s.chars()
        .map(|c| Token::from_char(c).ok_or_else(|| format!("invalid token character {c:?}")))
        .collect()
}

/// Renders fully unmasked tokens as a `0`/`1` outcome key.
///
/// Masked positions render as `M` so that an invalid final state is still
/// distinguishable in a distribution report.
pub fn output_key(tokens: &[Token]) -> String {
    tokens
        .iter()
        .map(|t| match t.value() {
            Some(false) => '0',
            Some(true) => '1',
            None => 'M',
        })
        .collect()
}

/// Renders a bit vector as a `0`/`1` key.
pub fn bits_key(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Parses a `0`/`1` key back into bits.
pub fn parse_bits(s: &str) -> Result<Vec<bool>, String> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(format!("invalid bit character {c:?}")),
        })
        .collect()
}
