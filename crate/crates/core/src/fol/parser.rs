//! Hand-written lexer and recursive-descent parser for the sentence grammar:
//!
//! ```text
//! sentence := iff
//! iff      := imp ("<->" imp)*
//! imp      := or  ("->"  or)*
//! or       := and ("|"   and)*
//! and      := unary ("&" unary)*
//! unary    := "~" unary | "forall" IDENT "." unary | "exists" IDENT "." unary
//!           | "(" sentence ")" | atom
//! atom     := IDENT "(" term ("," term)? ")"
//! term     := IDENT
//! ```
//!
//! Binary chains fold left. Bound variables are renamed to `v{depth}` so
//! structurally equal sentences compare equal regardless of the names the
//! author chose; shadowing (of an enclosing variable or of an entity) is
//! rejected rather than silently captured.

use super::formula::{Formula, Term};
use super::{FolError, Signature, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Tilde,
    Amp,
    Pipe,
    Arrow,
    DArrow,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::DArrow => "`<->`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Span)>, FolError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0usize;
    let mut line = 1u32;
    let mut col = 1u32;
    while i < bytes.len() {
        let span = Span { offset: i, line, col };
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\r' => {
                i += 1;
                col += 1;
            }
            b'\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            b'(' | b')' | b',' | b'.' | b'~' | b'&' | b'|' => {
                let tok = match c {
                    b'(' => Tok::LParen,
                    b')' => Tok::RParen,
                    b',' => Tok::Comma,
                    b'.' => Tok::Dot,
                    b'~' => Tok::Tilde,
                    b'&' => Tok::Amp,
                    _ => Tok::Pipe,
                };
                out.push((tok, span));
                i += 1;
                col += 1;
            }
            b'-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    out.push((Tok::Arrow, span));
                    i += 2;
                    col += 2;
                } else {
                    return Err(FolError::Syntax {
                        span,
                        message: "expected `->`".into(),
                    });
                }
            }
            b'<' => {
                if bytes.get(i + 1) == Some(&b'-') && bytes.get(i + 2) == Some(&b'>') {
                    out.push((Tok::DArrow, span));
                    i += 3;
                    col += 3;
                } else {
                    return Err(FolError::Syntax {
                        span,
                        message: "expected `<->`".into(),
                    });
                }
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                    col += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), span));
            }
            other => {
                return Err(FolError::Syntax {
                    span,
                    message: format!("unexpected character `{}`", other as char),
                });
            }
        }
    }
    out.push((Tok::Eof, Span { offset: text.len(), line, col }));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, Span)>,
    pos: usize,
    sig: &'a Signature,
    // (source name, canonical index); index equals nesting depth at binding.
    scope: Vec<(String, u32)>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, Span) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Span, FolError> {
        if *self.peek() == want {
            Ok(self.bump().1)
        } else {
            Err(FolError::Syntax {
                span: self.span(),
                message: format!("expected {what}, found {}", self.peek().describe()),
            })
        }
    }

    fn sentence(&mut self) -> Result<Formula, FolError> {
        let mut f = self.imp()?;
        while *self.peek() == Tok::DArrow {
            self.bump();
            f = Formula::iff(f, self.imp()?);
        }
        Ok(f)
    }

    fn imp(&mut self) -> Result<Formula, FolError> {
        let mut f = self.or()?;
        while *self.peek() == Tok::Arrow {
            self.bump();
            f = Formula::implies(f, self.or()?);
        }
        Ok(f)
    }

    fn or(&mut self) -> Result<Formula, FolError> {
        let mut f = self.and()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            f = Formula::or(f, self.and()?);
        }
        Ok(f)
    }

    fn and(&mut self) -> Result<Formula, FolError> {
        let mut f = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, FolError> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.sentence()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(name) if name == "forall" || name == "exists" => {
                self.bump();
                let (var_tok, var_span) = self.bump();
                let var_name = match var_tok {
                    Tok::Ident(n) if n != "forall" && n != "exists" => n,
                    other => {
                        return Err(FolError::Syntax {
                            span: var_span,
                            message: format!(
                                "expected quantifier variable, found {}",
                                other.describe()
                            ),
                        });
                    }
                };
                if self.scope.iter().any(|(n, _)| *n == var_name) {
                    return Err(FolError::ShadowedVariable { name: var_name, span: var_span });
                }
                if self.sig.lookup_entity(&var_name).is_some() {
                    return Err(FolError::VariableShadowsEntity {
                        name: var_name,
                        span: var_span,
                    });
                }
                self.expect(Tok::Dot, "`.`")?;
                let idx = self.scope.len() as u32;
                self.scope.push((var_name, idx));
                let body = self.unary();
                self.scope.pop();
                let body = body?;
                Ok(if name == "forall" {
                    Formula::forall(idx, body)
                } else {
                    Formula::exists(idx, body)
                })
            }
            Tok::Ident(_) => self.atom(),
            _ => Err(FolError::Syntax {
                span: self.span(),
                message: format!("expected a sentence, found {}", self.peek().describe()),
            }),
        }
    }

    fn atom(&mut self) -> Result<Formula, FolError> {
        let (tok, span) = self.bump();
        let name = match tok {
            Tok::Ident(n) => n,
            _ => unreachable!("atom called on identifier"),
        };
        let pred = self.sig.lookup_predicate(&name).ok_or(FolError::UnknownPredicate {
            name: name.clone(),
            span,
        })?;
        let expected = self.sig.predicate(pred).arity.argument_count();
        self.expect(Tok::LParen, "`(`")?;
        let first = self.term()?;
        let second = if *self.peek() == Tok::Comma {
            self.bump();
            Some(self.term()?)
        } else {
            None
        };
        self.expect(Tok::RParen, "`)` or `,`")?;
        let got = 1 + second.is_some() as u8;
        if got != expected {
            return Err(FolError::ArityMismatch { name, expected, got, span });
        }
        Ok(match second {
            Some(b) => Formula::atom2(pred, first, b),
            None => Formula::atom1(pred, first),
        })
    }

    fn term(&mut self) -> Result<Term, FolError> {
        let span = self.span();
        let name = match self.bump().0 {
            Tok::Ident(n) => n,
            other => {
                return Err(FolError::Syntax {
                    span,
                    message: format!("expected a term, found {}", other.describe()),
                });
            }
        };
        // Innermost binding wins; entities are only consulted for names that
        // are not in scope (and shadowing is already rejected at the binder).
        if let Some((_, idx)) = self.scope.iter().rev().find(|(n, _)| *n == name) {
            return Ok(Term::Var(*idx));
        }
        if let Some(e) = self.sig.lookup_entity(&name) {
            return Ok(Term::Entity(e));
        }
        Err(FolError::UnknownTerm { name, span })
    }
}

/// Parses one closed sentence over the signature.
pub fn parse(text: &str, sig: &Signature) -> Result<Formula, FolError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, sig, scope: Vec::new() };
    let f = p.sentence()?;
    if *p.peek() != Tok::Eof {
        return Err(FolError::Syntax {
            span: p.span(),
            message: format!("expected end of input, found {}", p.peek().describe()),
        });
    }
    debug_assert!(f.free_vars().is_empty(), "parser produced an open sentence");
    Ok(f)
}
