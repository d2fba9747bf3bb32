//! Boolean query language: parsing, canonical rendering and OR-expansion.
//!
//! Grammar (keywords are case-insensitive, AND binds tighter than OR):
//!
//! ```text
//! expr := or
//! or   := and ("OR" and)*
//! and  := atom (["AND"] atom)*        adjacency is an implicit AND
//! atom := "(" expr ")" | '"' phrase '"' | term ["*"]
//! ```
//!
//! A trailing `*` marks prefix truncation (`povert*` matches every index term
//! starting with `povert`). Terms are lowercased; phrases keep their text as
//! written and are lowercased only when matched.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum QueryAst {
    Term(String),
    PrefixTerm(String),
    Phrase(String),
    And(Vec<QueryAst>),
    Or(Vec<QueryAst>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at position {position}: {message}")]
pub struct QueryError {
    /// Byte offset into the query string.
    pub position: usize,
    pub message: String,
}

impl QueryError {
    fn new(position: usize, message: impl Into<String>) -> Self {
        QueryError { position, message: message.into() }
    }
}

impl QueryAst {
    pub fn term(text: &str) -> Self {
        QueryAst::Term(text.to_lowercase())
    }

    pub fn prefix(stem: &str) -> Self {
        QueryAst::PrefixTerm(stem.to_lowercase())
    }

    pub fn phrase(text: &str) -> Self {
        QueryAst::Phrase(text.to_string())
    }

    /// Conjunction; a single child is returned unwrapped.
    pub fn and(mut children: Vec<QueryAst>) -> Self {
        if children.len() == 1 {
            children.pop().unwrap()
        } else {
            QueryAst::And(children)
        }
    }

    /// Disjunction; a single child is returned unwrapped.
    pub fn or(mut children: Vec<QueryAst>) -> Self {
        if children.len() == 1 {
            children.pop().unwrap()
        } else {
            QueryAst::Or(children)
        }
    }

    pub fn is_compound(&self) -> bool {
        matches!(self, QueryAst::And(_) | QueryAst::Or(_))
    }

    /// Leaf nodes in left-to-right order.
    pub fn leaves(&self) -> Vec<&QueryAst> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a QueryAst>) {
        match self {
            QueryAst::And(c) | QueryAst::Or(c) => c.iter().for_each(|n| n.collect_leaves(out)),
            leaf => out.push(leaf),
        }
    }
}

impl fmt::Display for QueryAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_query(self))
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    LParen,
    RParen,
    And,
    Or,
    Phrase(String),
    Word(String),
}

fn lex(input: &str) -> Result<Vec<(usize, Token)>, QueryError> {
    let mut tokens = Vec::new();
    let mut chars = input.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                tokens.push((pos, Token::LParen));
            }
            ')' => {
                chars.next();
                tokens.push((pos, Token::RParen));
            }
            '"' => {
                chars.next();
                let mut text = String::new();
                let mut closed = false;
                for (_, c) in chars.by_ref() {
                    if c == '"' {
                        closed = true;
                        break;
                    }
                    text.push(c);
                }
                if !closed {
                    return Err(QueryError::new(pos, "unterminated phrase"));
                }
                if text.trim().is_empty() {
                    return Err(QueryError::new(pos, "empty phrase"));
                }
                tokens.push((pos, Token::Phrase(text)));
            }
            _ => {
                let mut word = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_whitespace() || matches!(c, '(' | ')' | '"') {
                        break;
                    }
                    word.push(c);
                    chars.next();
                }
                let tok = if word.eq_ignore_ascii_case("and") {
                    Token::And
                } else if word.eq_ignore_ascii_case("or") {
                    Token::Or
                } else {
                    Token::Word(word)
                };
                tokens.push((pos, tok));
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn parse_or(&mut self) -> Result<QueryAst, QueryError> {
        let mut children = vec![self.parse_and()?];
        while self.peek() == Some(&Token::Or) {
            self.pos += 1;
            children.push(self.parse_and()?);
        }
        Ok(QueryAst::or(children))
    }

    fn parse_and(&mut self) -> Result<QueryAst, QueryError> {
        let mut children = vec![self.parse_atom()?];
        loop {
            match self.peek() {
                Some(Token::And) => {
                    self.pos += 1;
                    children.push(self.parse_atom()?);
                }
                Some(Token::LParen | Token::Phrase(_) | Token::Word(_)) => {
                    children.push(self.parse_atom()?);
                }
                _ => break,
            }
        }
        Ok(QueryAst::and(children))
    }

    fn parse_atom(&mut self) -> Result<QueryAst, QueryError> {
        let at = self.offset();
        let Some((_, tok)) = self.tokens.get(self.pos).cloned() else {
            return Err(QueryError::new(at, "expected a term, phrase or '(' but the query ended"));
        };
        self.pos += 1;
        match tok {
            Token::LParen => {
                let inner = self.parse_or()?;
                if self.peek() != Some(&Token::RParen) {
                    return Err(QueryError::new(at, "unbalanced parenthesis: '(' is never closed"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Token::RParen => Err(QueryError::new(at, "unexpected ')'")),
            Token::And | Token::Or => Err(QueryError::new(at, "dangling operator")),
            Token::Phrase(text) => Ok(QueryAst::Phrase(text)),
            Token::Word(word) => {
                let (stem, truncated) = match word.strip_suffix('*') {
                    Some(stem) => (stem, true),
                    None => (word.as_str(), false),
                };
                if stem.is_empty() {
                    return Err(QueryError::new(at, "truncation needs a non-empty stem"));
                }
                if stem.contains('*') {
                    return Err(QueryError::new(at, "'*' is only allowed at the end of a term"));
                }
                Ok(if truncated { QueryAst::prefix(stem) } else { QueryAst::term(stem) })
            }
        }
    }
}

pub fn parse_query(input: &str) -> Result<QueryAst, QueryError> {
    let tokens = lex(input)?;
    if tokens.is_empty() {
        return Err(QueryError::new(0, "empty query"));
    }
    let mut parser = Parser { tokens, pos: 0, end: input.len() };
    let ast = parser.parse_or()?;
    if parser.pos < parser.tokens.len() {
        let at = parser.offset();
        let msg = match parser.peek() {
            Some(Token::RParen) => "unbalanced parenthesis: unexpected ')'",
            _ => "unexpected trailing input",
        };
        return Err(QueryError::new(at, msg));
    }
    Ok(ast)
}

/// Canonical text form. Every compound child is parenthesized, so
/// `parse_query(&render_query(ast)) == ast` for any parser-producible tree.
pub fn render_query(ast: &QueryAst) -> String {
    fn child(node: &QueryAst) -> String {
        if node.is_compound() {
            format!("({})", render_query(node))
        } else {
            render_query(node)
        }
    }
    match ast {
        QueryAst::Term(t) => t.clone(),
        QueryAst::PrefixTerm(s) => format!("{s}*"),
        QueryAst::Phrase(p) => format!("\"{p}\""),
        QueryAst::And(c) => c.iter().map(child).collect::<Vec<_>>().join(" AND "),
        QueryAst::Or(c) => c.iter().map(child).collect::<Vec<_>>().join(" OR "),
    }
}

/// ORs the controlled terms onto the query as phrases, in order, dropping
/// repeated terms. An empty term list returns the query unchanged.
pub fn expand_query<S: AsRef<str>>(ast: &QueryAst, terms: &[S]) -> QueryAst {
    let mut seen = HashSet::new();
    let phrases: Vec<QueryAst> = terms
        .iter()
        .map(AsRef::as_ref)
        .filter(|t| !t.trim().is_empty() && seen.insert(t.to_string()))
        .map(QueryAst::phrase)
        .collect();
    if phrases.is_empty() {
        return ast.clone();
    }
    let mut children = Vec::with_capacity(phrases.len() + 1);
    children.push(ast.clone());
    children.extend(phrases);
    QueryAst::Or(children)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncated_conjunction() {
        let ast = parse_query("povert* AND german*").unwrap();
        assert_eq!(ast, QueryAst::And(vec![QueryAst::prefix("povert"), QueryAst::prefix("german")]));
    }

    #[test]
    fn expanded_form_parses() {
        let ast = parse_query(r#"(povert* AND german*) OR "poverty" OR "social assistance""#).unwrap();
        assert_eq!(
            ast,
            QueryAst::Or(vec![
                QueryAst::And(vec![QueryAst::prefix("povert"), QueryAst::prefix("german")]),
                QueryAst::phrase("poverty"),
                QueryAst::phrase("social assistance"),
            ])
        );
    }

    #[test]
    fn precedence_and_implicit_and() {
        let ast = parse_query("a b OR c and d").unwrap();
        assert_eq!(
            ast,
            QueryAst::Or(vec![
                QueryAst::And(vec![QueryAst::term("a"), QueryAst::term("b")]),
                QueryAst::And(vec![QueryAst::term("c"), QueryAst::term("d")]),
            ])
        );
        assert_eq!(parse_query("War").unwrap(), QueryAst::term("war"));
        assert_eq!(parse_query("((war))").unwrap(), QueryAst::term("war"));
    }

    #[test]
    fn syntax_errors() {
        let e = parse_query("a AND").unwrap_err();
        assert_eq!(e.position, 5);
        assert!(e.message.contains("ended"), "{e}");
        assert!(parse_query("OR a").unwrap_err().message.contains("dangling"));
        assert!(parse_query("(a OR b").unwrap_err().message.contains("unbalanced"));
        assert!(parse_query("a OR b)").unwrap_err().message.contains("unbalanced"));
        assert!(parse_query(r#"a OR """#).unwrap_err().message.contains("empty phrase"));
        assert!(parse_query(r#"a OR "open"#).is_err());
        assert!(parse_query("*").is_err());
        assert!(parse_query("a*b").is_err());
        assert!(parse_query("   ").is_err());
    }

    #[test]
    fn render_canonical() {
        let ast = QueryAst::Or(vec![
            QueryAst::And(vec![QueryAst::prefix("povert"), QueryAst::prefix("german")]),
            QueryAst::phrase("poverty"),
        ]);
        assert_eq!(render_query(&ast), r#"(povert* AND german*) OR "poverty""#);
        assert_eq!(render_query(&QueryAst::term("war")), "war");
    }

    #[test]
    fn expansion_reproduces_printed_example() {
        let base = parse_query("povert* AND german*").unwrap();
        let terms = ["poverty", "Federal Republic of Germany", "social assistance", "immiseration"];
        let expanded = expand_query(&base, &terms);
        assert_eq!(
            render_query(&expanded),
            r#"(povert* AND german*) OR "poverty" OR "Federal Republic of Germany" OR "social assistance" OR "immiseration""#
        );
    }

    #[test]
    fn expansion_edge_cases() {
        let x = QueryAst::term("x");
        assert_eq!(expand_query(&x, &[] as &[&str]), x);
        assert_eq!(expand_query(&x, &["y"]), QueryAst::Or(vec![x.clone(), QueryAst::phrase("y")]));
        assert_eq!(
            expand_query(&x, &["y", "y", "z"]),
            QueryAst::Or(vec![x, QueryAst::phrase("y"), QueryAst::phrase("z")])
        );
    }
}
