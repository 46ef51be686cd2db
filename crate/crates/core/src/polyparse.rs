//! Sparse multivariate polynomials and a small parser for them.
//!
//! Grammar (whitespace ignored, variable indices 1-based):
//!
//! ```text
//! expression  := [sign] term (sign term)*
//! term        := coefficient ['*' factor ('*' factor)*]
//!              | factor ('*' factor)*
//! factor      := 'x' index ['^' exponent]
//! coefficient := decimal literal, e.g. 3, 0.25, 1.5e-3
//! ```

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Parse failure with the 1-based column it was detected at.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} (at column {column})")]
pub struct ParseError {
    pub column: usize,
    pub message: String,
}

/// `Σ c_α x^α` with exponent vectors stored without trailing zeros and no
/// zero coefficients.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Polynomial {
    terms: BTreeMap<Vec<u32>, f64>,
}

fn trim(mut alpha: Vec<u32>) -> Vec<u32> {
    while alpha.last() == Some(&0) {
        alpha.pop();
    }
    alpha
}

impl Polynomial {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut p = Self::new();
        p.add_term(Vec::new(), c);
        p
    }

    pub fn monomial(alpha: &[u32]) -> Self {
        let mut p = Self::new();
        p.add_term(alpha.to_vec(), 1.0);
        p
    }

    /// Adds `c x^α`, combining with an existing like term.
    pub fn add_term(&mut self, alpha: Vec<u32>, c: f64) {
        let alpha = trim(alpha);
        let value = self.terms.get(&alpha).copied().unwrap_or(0.0) + c;
        if value == 0.0 {
            self.terms.remove(&alpha);
        } else {
            self.terms.insert(alpha, value);
        }
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, f64> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest variable index in use (0 for constants).
    pub fn inferred_dimension(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    /// Total degree (0 for the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|a| a.iter().sum())
            .max()
            .unwrap_or(0)
    }

    /// Value at `x`; `x` must cover [`Polynomial::inferred_dimension`].
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(alpha, c)| {
                c * alpha
                    .iter()
                    .zip(x)
                    .map(|(&e, &xi)| xi.powi(e as i32))
                    .product::<f64>()
            })
            .sum()
    }

    /// Parses `input` against a space of `dimension` variables.
    pub fn parse(input: &str, dimension: usize) -> Result<Self, ParseError> {
        parse(input, dimension)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (alpha, &c)) in self.terms.iter().enumerate() {
            let magnitude = c.abs();
            match (k, c < 0.0) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let factors: Vec<String> = alpha
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        format!("x{}", i + 1)
                    } else {
                        format!("x{}^{}", i + 1, e)
                    }
                })
                .collect();
            if factors.is_empty() {
                write!(f, "{magnitude}")?;
            } else if magnitude == 1.0 {
                f.write_str(&factors.join("*"))?;
            } else {
                write!(f, "{magnitude}*{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    dimension: usize,
    input: &'a str,
}

impl<'a> Parser<'a> {
    fn new(input: &'a str, dimension: usize) -> Self {
        let chars = input
            .char_indices()
            .filter(|(_, c)| !c.is_whitespace())
            .map(|(i, c)| (input[..i].chars().count() + 1, c))
            .collect();
        Self {
            chars,
            pos: 0,
            dimension,
            input,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn column(&self) -> usize {
        self.chars
            .get(self.pos)
            .map(|&(col, _)| col)
            .unwrap_or_else(|| self.input.chars().count() + 1)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            column: self.column(),
            message: message.into(),
        }
    }

    fn expression(&mut self) -> Result<Polynomial, ParseError> {
        if self.chars.is_empty() {
            return Err(self.error("empty input"));
        }
        let mut poly = Polynomial::new();
        let mut sign = match self.peek() {
            Some('-') => {
                self.pos += 1;
                -1.0
            }
            Some('+') => {
                self.pos += 1;
                1.0
            }
            _ => 1.0,
        };
        loop {
            if self.peek().is_none() {
                return Err(self.error("dangling operator: expected a term"));
            }
            let (alpha, c) = self.term()?;
            poly.add_term(alpha, sign * c);
            match self.peek() {
                None => break,
                Some('+') => sign = 1.0,
                Some('-') => sign = -1.0,
                Some(other) => return Err(self.error(format!("unexpected '{other}'"))),
            }
            self.pos += 1;
        }
        Ok(poly)
    }

    fn term(&mut self) -> Result<(Vec<u32>, f64), ParseError> {
        let mut alpha = vec![0u32; self.dimension];
        let coefficient = match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let value = self.coefficient()?;
                if self.peek() != Some('*') {
                    return Ok((alpha, value));
                }
                self.pos += 1;
                value
            }
            _ => 1.0,
        };
        loop {
            self.factor(&mut alpha)?;
            if self.peek() == Some('*') {
                self.pos += 1;
                if self.peek().is_none() {
                    return Err(self.error("dangling operator: expected a factor after '*'"));
                }
            } else {
                break;
            }
        }
        Ok((alpha, coefficient))
    }

    fn coefficient(&mut self) -> Result<f64, ParseError> {
        let start = self.pos;
        let start_col = self.column();
        let mut text = String::new();
        let mut prev: Option<char> = None;
        while let Some(c) = self.peek() {
            let exponent_sign = matches!(c, '+' | '-') && matches!(prev, Some('e' | 'E'));
            if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || exponent_sign {
                text.push(c);
                prev = Some(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        text.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| {
                self.pos = start;
                ParseError {
                    column: start_col,
                    message: format!("malformed coefficient '{text}'"),
                }
            })
    }

    fn digits(&mut self) -> String {
        let mut text = String::new();
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            text.push(c);
            self.pos += 1;
        }
        text
    }

    fn factor(&mut self, alpha: &mut [u32]) -> Result<(), ParseError> {
        match self.peek() {
            Some('x') | Some('X') => self.pos += 1,
            Some(c) => return Err(self.error(format!("expected a variable 'x<index>', found '{c}'"))),
            None => return Err(self.error("expected a variable 'x<index>'")),
        }
        let index_col = self.column();
        let index_text = self.digits();
        if index_text.is_empty() {
            return Err(self.error("expected a variable index after 'x'"));
        }
        let index: usize = index_text.parse().map_err(|_| ParseError {
            column: index_col,
            message: format!("variable index '{index_text}' is too large"),
        })?;
        if index == 0 {
            return Err(ParseError {
                column: index_col,
                message: "variable index 0 is invalid; indices start at 1".into(),
            });
        }
        if index > self.dimension {
            return Err(ParseError {
                column: index_col,
                message: format!(
                    "variable index {index} exceeds dimension {}",
                    self.dimension
                ),
            });
        }
        let mut exponent = 1u32;
        if self.peek() == Some('^') {
            self.pos += 1;
            let exp_col = self.column();
            let text = self.digits();
            exponent = text.parse().map_err(|_| ParseError {
                column: exp_col,
                message: if text.is_empty() {
                    "malformed exponent: expected a nonnegative integer after '^'".into()
                } else {
                    format!("malformed exponent '{text}'")
                },
            })?;
        }
        alpha[index - 1] = alpha[index - 1]
            .checked_add(exponent)
            .ok_or_else(|| self.error("exponent overflow"))?;
        Ok(())
    }
}

/// Parses a polynomial over `dimension` variables.
pub fn parse(input: &str, dimension: usize) -> Result<Polynomial, ParseError> {
    Parser::new(input, dimension).expression()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single(alpha: &[u32], c: f64) -> Polynomial {
        let mut p = Polynomial::new();
        p.add_term(alpha.to_vec(), c);
        p
    }

    #[test]
    fn simple_term() {
        assert_eq!(parse("3*x1^2*x2", 2).unwrap(), single(&[2, 1], 3.0));
        assert_eq!(parse(" 3 * x1 ^ 2 * x2 ", 4).unwrap(), single(&[2, 1], 3.0));
    }

    #[test]
    fn like_terms_combine() {
        assert_eq!(parse("x1 - 0.5*x1", 1).unwrap(), single(&[1], 0.5));
        assert!(parse("x1*x2 - x2*x1", 2).unwrap().is_zero());
        assert_eq!(parse("x1*x1", 1).unwrap(), single(&[2], 1.0));
    }

    #[test]
    fn constants_and_signs() {
        assert_eq!(parse("1", 3).unwrap(), Polynomial::constant(1.0));
        assert_eq!(parse("-x3", 3).unwrap(), single(&[0, 0, 1], -1.0));
        assert_eq!(parse("2.5e-1*x2", 2).unwrap(), single(&[0, 1], 0.25));
    }

    #[test]
    fn index_beyond_dimension() {
        let err = parse("x1^2*x5", 4).unwrap_err();
        assert_eq!(err.message, "variable index 5 exceeds dimension 4");
        assert_eq!(err.column, 7);
    }

    #[test]
    fn error_cases() {
        assert_eq!(parse("", 3).unwrap_err().message, "empty input");
        assert_eq!(parse("   ", 3).unwrap_err().message, "empty input");
        assert!(parse("x0", 3).unwrap_err().message.contains("index 0"));
        assert!(parse("x1^", 3).unwrap_err().message.contains("malformed exponent"));
        assert!(parse("x1^a", 3).unwrap_err().message.contains("malformed exponent"));
        assert!(parse("x1 +", 3).unwrap_err().message.contains("dangling"));
        assert!(parse("x1 *", 3).unwrap_err().message.contains("dangling"));
        assert!(parse("x1 + + x2", 3).is_err());
        assert!(parse("x", 3).unwrap_err().message.contains("index"));
        assert!(parse("y1", 3).is_err());
        assert!(parse("3 x1", 3).is_err());
        let dangling = parse("x1 -", 3).unwrap_err();
        assert_eq!(dangling.column, 5);
    }

    #[test]
    fn evaluation() {
        let p = parse("2*x1^2*x2 - x3 + 0.5", 3).unwrap();
        assert_eq!(p.evaluate(&[2.0, 3.0, 1.0]), 2.0 * 4.0 * 3.0 - 1.0 + 0.5);
        assert_eq!(p.degree(), 3);
        assert_eq!(p.inferred_dimension(), 3);
    }

    #[test]
    fn display_format() {
        let p = parse("-x1^2 + 0.25*x2*x3 + 3", 3).unwrap();
        let shown = p.to_string();
        assert_eq!(parse(&shown, 3).unwrap(), p);
    }

    fn term_strategy() -> impl Strategy<Value = String> {
        (
            prop::option::of(0.0f64..1e6),
            prop::collection::vec((1usize..=6, prop::option::of(0u32..7)), 0..4),
        )
            .prop_filter("term needs content", |(c, f)| c.is_some() || !f.is_empty())
            .prop_map(|(c, factors)| {
                let mut parts = Vec::new();
                if let Some(c) = c {
                    parts.push(format!("{c}"));
                }
                for (i, e) in factors {
                    parts.push(match e {
                        Some(e) => format!("x{i}^{e}"),
                        None => format!("x{i}"),
                    });
                }
                parts.join("*")
            })
    }

    fn expression_strategy() -> impl Strategy<Value = String> {
        (
            prop::option::of(prop::bool::ANY),
            prop::collection::vec((prop::bool::ANY, term_strategy()), 1..6),
        )
            .prop_map(|(lead, terms)| {
                let mut s = String::new();
                match lead {
                    Some(true) => s.push('-'),
                    Some(false) => s.push('+'),
                    None => {}
                }
                for (k, (minus, term)) in terms.into_iter().enumerate() {
                    if k > 0 {
                        s.push_str(if minus { " - " } else { " + " });
                    }
                    s.push_str(&term);
                }
                s
            })
    }

    proptest! {
        #[test]
        fn valid_strings_parse_to_canonical_form(s in expression_strategy()) {
            let p = parse(&s, 6).unwrap();
            for (alpha, c) in p.terms() {
                prop_assert!(*c != 0.0);
                prop_assert!(alpha.last() != Some(&0));
                prop_assert!(alpha.len() <= 6);
            }
        }

        #[test]
        fn format_then_parse_round_trips(s in expression_strategy()) {
            let p = parse(&s, 6).unwrap();
            let again = parse(&p.to_string(), 6).unwrap();
            prop_assert_eq!(p.terms(), again.terms());
        }

        #[test]
        fn arbitrary_input_never_panics(s in "[x0-9.^*+ e-]{0,24}") {
            let _ = parse(&s, 4);
        }
    }
}
