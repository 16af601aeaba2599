//! Minimal s-expression reader for PDDL text.
//!
//! Symbols are lower-cased on read, `;` starts a comment running to the end
//! of the line, and every node remembers the 1-based line/column where it
//! starts so later stages can report positioned errors.

use crate::error::{ParseError, ParseErrorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SExpr {
    Symbol(String, Pos),
    List(Vec<SExpr>, Pos),
}

impl SExpr {
    pub fn pos(&self) -> Pos {
        match self {
            SExpr::Symbol(_, p) | SExpr::List(_, p) => *p,
        }
    }

    pub fn as_symbol(&self) -> Option<&str> {
        match self {
            SExpr::Symbol(s, _) => Some(s),
            SExpr::List(..) => None,
        }
    }

    pub fn as_list(&self) -> Option<&[SExpr]> {
        match self {
            SExpr::List(items, _) => Some(items),
            SExpr::Symbol(..) => None,
        }
    }

    /// The head symbol of a list, if the list is non-empty and starts with one.
    pub fn head(&self) -> Option<&str> {
        self.as_list()?.first()?.as_symbol()
    }
}

pub(crate) fn syntax(pos: Pos, msg: impl Into<String>) -> ParseError {
    ParseError::new(pos, ParseErrorKind::Syntax(msg.into()))
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Reader {
            chars: text.chars().peekable(),
            pos: Pos { line: 1, column: 1 },
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.column = 1;
        } else {
            self.pos.column += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while let Some(&c) = self.chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn read_symbol(&mut self) -> String {
        let mut s = String::new();
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                break;
            }
            s.extend(c.to_lowercase());
            self.bump();
        }
        s
    }
}

const MAX_DEPTH: usize = 256;

/// Reads every top-level expression in `text`.
pub fn parse_all(text: &str) -> Result<Vec<SExpr>, ParseError> {
    let mut reader = Reader::new(text);
    // Explicit stack; depth is capped so that later recursive walks (and
    // dropping the tree) stay within the call stack.
    let mut stack: Vec<(Vec<SExpr>, Pos)> = Vec::new();
    let mut top = Vec::new();
    loop {
        reader.skip_trivia();
        let pos = reader.pos;
        match reader.chars.peek().copied() {
            None => {
                if let Some((_, open)) = stack.last() {
                    return Err(syntax(*open, "unclosed parenthesis"));
                }
                return Ok(top);
            }
            Some('(') => {
                reader.bump();
                if stack.len() >= MAX_DEPTH {
                    return Err(syntax(pos, "expression nested too deeply"));
                }
                stack.push((Vec::new(), pos));
            }
            Some(')') => {
                reader.bump();
                let (items, open) = stack.pop().ok_or_else(|| syntax(pos, "unexpected ')'"))?;
                let node = SExpr::List(items, open);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(node),
                    None => top.push(node),
                }
            }
            Some(_) => {
                let sym = reader.read_symbol();
                let node = SExpr::Symbol(sym, pos);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(node),
                    None => top.push(node),
                }
            }
        }
    }
}

/// Reads exactly one top-level expression.
pub fn parse_one(text: &str) -> Result<SExpr, ParseError> {
    let mut all = parse_all(text)?;
    match all.len() {
        0 => Err(syntax(Pos { line: 1, column: 1 }, "empty input")),
        1 => Ok(all.pop().unwrap()),
        _ => Err(syntax(all[1].pos(), "unexpected trailing expression")),
    }
}
