//! Symbolic group expressions over the grammar
//! `I_m | Z_m | S_m | G + G | G * G | G wr G`.

use std::fmt;
use std::str::FromStr;

use super::GroupError;

/// Default cap on the degree of any expression the parser accepts.
pub const DEFAULT_MAX_DEGREE: usize = 4096;

/// A permutation group built from trivial, cyclic and symmetric groups by
/// direct sum, direct (Kronecker) product and wreath product.
///
/// `Wreath { inner, outer }` acts on `outer.degree()` blocks of size
/// `inner.degree()`; point `i * q + j` lives in block `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GroupExpr {
    Trivial(usize),
    Cyclic(usize),
    Symmetric(usize),
    Sum(Box<GroupExpr>, Box<GroupExpr>),
    Product(Box<GroupExpr>, Box<GroupExpr>),
    Wreath {
        inner: Box<GroupExpr>,
        outer: Box<GroupExpr>,
    },
}

impl GroupExpr {
    pub fn sum(a: GroupExpr, b: GroupExpr) -> Self {
        GroupExpr::Sum(Box::new(a), Box::new(b))
    }

    pub fn product(a: GroupExpr, b: GroupExpr) -> Self {
        GroupExpr::Product(Box::new(a), Box::new(b))
    }

    pub fn wreath(inner: GroupExpr, outer: GroupExpr) -> Self {
        GroupExpr::Wreath {
            inner: Box::new(inner),
            outer: Box::new(outer),
        }
    }

    /// Left-nested sum of a non-empty list.
    pub fn sum_all(parts: Vec<GroupExpr>) -> Self {
        let mut it = parts.into_iter();
        let first = it.next().expect("sum_all needs at least one summand");
        it.fold(first, GroupExpr::sum)
    }

    pub fn degree(&self) -> usize {
        match self {
            GroupExpr::Trivial(m) | GroupExpr::Cyclic(m) | GroupExpr::Symmetric(m) => *m,
            GroupExpr::Sum(a, b) => a.degree() + b.degree(),
            GroupExpr::Product(a, b) => a.degree() * b.degree(),
            GroupExpr::Wreath { inner, outer } => inner.degree() * outer.degree(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(
            self,
            GroupExpr::Trivial(_) | GroupExpr::Cyclic(_) | GroupExpr::Symmetric(_)
        )
    }

    /// True when the expression only contains trivial leaves, i.e. denotes
    /// the trivial group.
    pub fn is_trivial(&self) -> bool {
        match self {
            GroupExpr::Trivial(_) => true,
            GroupExpr::Cyclic(m) | GroupExpr::Symmetric(m) => *m == 1,
            GroupExpr::Sum(a, b) | GroupExpr::Product(a, b) => a.is_trivial() && b.is_trivial(),
            GroupExpr::Wreath { inner, outer } => inner.is_trivial() && outer.is_trivial(),
        }
    }

    /// Number of orbits of the group on its points.
    pub fn orbit_count(&self) -> usize {
        match self {
            GroupExpr::Trivial(m) => *m,
            GroupExpr::Cyclic(_) | GroupExpr::Symmetric(_) => 1,
            GroupExpr::Sum(a, b) => a.orbit_count() + b.orbit_count(),
            GroupExpr::Product(a, b) => a.orbit_count() * b.orbit_count(),
            GroupExpr::Wreath { inner, outer } => inner.orbit_count() * outer.orbit_count(),
        }
    }

    /// Dimension of the space of equivariant matrices, computed from the
    /// expression alone by the trace-counting formulas.
    pub fn basis_dim(&self) -> usize {
        match self {
            GroupExpr::Trivial(m) => m * m,
            GroupExpr::Cyclic(m) => *m,
            GroupExpr::Symmetric(m) => {
                if *m == 1 {
                    1
                } else {
                    2
                }
            }
            GroupExpr::Sum(a, b) => {
                a.basis_dim() + b.basis_dim() + 2 * a.orbit_count() * b.orbit_count()
            }
            GroupExpr::Product(a, b) => a.basis_dim() * b.basis_dim(),
            GroupExpr::Wreath { inner, outer } => {
                let oh = inner.orbit_count();
                outer.orbit_count() * inner.basis_dim()
                    + (outer.basis_dim() - outer.orbit_count()) * oh * oh
            }
        }
    }

    /// Paths to every leaf in left-to-right order. A path is a list of child
    /// indices (0 = left/inner, 1 = right/outer).
    pub fn leaf_paths(&self) -> Vec<Vec<u8>> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        self.collect_leaf_paths(&mut cur, &mut out);
        out
    }

    fn collect_leaf_paths(&self, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        match self {
            GroupExpr::Trivial(_) | GroupExpr::Cyclic(_) | GroupExpr::Symmetric(_) => {
                out.push(cur.clone())
            }
            GroupExpr::Sum(a, b) | GroupExpr::Product(a, b) => {
                cur.push(0);
                a.collect_leaf_paths(cur, out);
                cur.pop();
                cur.push(1);
                b.collect_leaf_paths(cur, out);
                cur.pop();
            }
            GroupExpr::Wreath { inner, outer } => {
                cur.push(0);
                inner.collect_leaf_paths(cur, out);
                cur.pop();
                cur.push(1);
                outer.collect_leaf_paths(cur, out);
                cur.pop();
            }
        }
    }

    pub fn subexpr(&self, path: &[u8]) -> Option<&GroupExpr> {
        let Some((&first, rest)) = path.split_first() else {
            return Some(self);
        };
        let child = match (self, first) {
            (GroupExpr::Sum(a, _) | GroupExpr::Product(a, _), 0) => a,
            (GroupExpr::Sum(_, b) | GroupExpr::Product(_, b), 1) => b,
            (GroupExpr::Wreath { inner, .. }, 0) => inner,
            (GroupExpr::Wreath { outer, .. }, 1) => outer,
            _ => return None,
        };
        child.subexpr(rest)
    }

    /// Rebuilds the expression with every leaf passed through `f`, which
    /// receives the leaf and its path.
    pub fn map_leaves<F>(&self, f: &mut F) -> GroupExpr
    where
        F: FnMut(&GroupExpr, &[u8]) -> GroupExpr,
    {
        let mut path = Vec::new();
        self.map_leaves_at(&mut path, f)
    }

    fn map_leaves_at<F>(&self, path: &mut Vec<u8>, f: &mut F) -> GroupExpr
    where
        F: FnMut(&GroupExpr, &[u8]) -> GroupExpr,
    {
        let child = |e: &GroupExpr, idx: u8, path: &mut Vec<u8>, f: &mut F| {
            path.push(idx);
            let r = e.map_leaves_at(path, f);
            path.pop();
            r
        };
        match self {
            GroupExpr::Trivial(_) | GroupExpr::Cyclic(_) | GroupExpr::Symmetric(_) => f(self, path),
            GroupExpr::Sum(a, b) => {
                GroupExpr::sum(child(a, 0, path, f), child(b, 1, path, f))
            }
            GroupExpr::Product(a, b) => {
                GroupExpr::product(child(a, 0, path, f), child(b, 1, path, f))
            }
            GroupExpr::Wreath { inner, outer } => {
                GroupExpr::wreath(child(inner, 0, path, f), child(outer, 1, path, f))
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            GroupExpr::Sum(..) => 0,
            GroupExpr::Product(..) => 1,
            GroupExpr::Wreath { .. } => 2,
            _ => 3,
        }
    }
}

fn write_operand(
    f: &mut fmt::Formatter<'_>,
    e: &GroupExpr,
    min_prec: u8,
) -> fmt::Result {
    if e.precedence() < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for GroupExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupExpr::Trivial(m) => write!(f, "I{m}"),
            GroupExpr::Cyclic(m) => write!(f, "Z{m}"),
            GroupExpr::Symmetric(m) => write!(f, "S{m}"),
            GroupExpr::Sum(a, b) => {
                write_operand(f, a, 0)?;
                f.write_str(" + ")?;
                write_operand(f, b, 1)
            }
            GroupExpr::Product(a, b) => {
                write_operand(f, a, 1)?;
                f.write_str(" * ")?;
                write_operand(f, b, 2)
            }
            GroupExpr::Wreath { inner, outer } => {
                write_operand(f, inner, 2)?;
                f.write_str(" wr ")?;
                write_operand(f, outer, 3)
            }
        }
    }
}

impl FromStr for GroupExpr {
    type Err = GroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_group_expr(s, DEFAULT_MAX_DEGREE)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Base(char, usize),
    Plus,
    Star,
    Wr,
    LParen,
    RParen,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, GroupError> {
    let err = |pos: usize, msg: &str| GroupError::Parse {
        pos,
        msg: msg.to_string(),
    };
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '+' | '⊕' => {
                toks.push((pos, Tok::Plus));
                i += 1;
            }
            '*' | '⊗' => {
                toks.push((pos, Tok::Star));
                i += 1;
            }
            '≀' => {
                toks.push((pos, Tok::Wr));
                i += 1;
            }
            '(' => {
                toks.push((pos, Tok::LParen));
                i += 1;
            }
            ')' => {
                toks.push((pos, Tok::RParen));
                i += 1;
            }
            'w' => {
                if i + 1 < chars.len() && chars[i + 1].1 == 'r' {
                    toks.push((pos, Tok::Wr));
                    i += 2;
                } else {
                    return Err(err(pos, "expected `wr`"));
                }
            }
            'I' | 'Z' | 'S' => {
                let mut j = i + 1;
                let mut value: usize = 0;
                while j < chars.len() && chars[j].1.is_ascii_digit() {
                    let d = chars[j].1.to_digit(10).unwrap() as usize;
                    value = value
                        .checked_mul(10)
                        .and_then(|v| v.checked_add(d))
                        .ok_or_else(|| err(chars[j].0, "number too large"))?;
                    j += 1;
                }
                if j == i + 1 {
                    return Err(err(pos, "expected a degree after group letter"));
                }
                if value == 0 {
                    return Err(err(pos, "group degree must be at least 1"));
                }
                toks.push((pos, Tok::Base(c, value)));
                i = j;
            }
            _ => return Err(err(pos, &format!("unexpected character `{c}`"))),
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    end: usize,
    max_degree: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn check(&self, e: GroupExpr, pos: usize) -> Result<GroupExpr, GroupError> {
        // degrees are checked bottom-up so products cannot overflow usize
        let d = e.degree();
        if d > self.max_degree {
            return Err(GroupError::DegreeOverflow {
                degree: d,
                max: self.max_degree,
                pos,
            });
        }
        Ok(e)
    }

    fn sum(&mut self) -> Result<GroupExpr, GroupError> {
        let mut lhs = self.product()?;
        while self.peek() == Some(&Tok::Plus) {
            let pos = self.pos();
            self.idx += 1;
            let rhs = self.product()?;
            lhs = self.check(GroupExpr::sum(lhs, rhs), pos)?;
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<GroupExpr, GroupError> {
        let mut lhs = self.wreath()?;
        while self.peek() == Some(&Tok::Star) {
            let pos = self.pos();
            self.idx += 1;
            let rhs = self.wreath()?;
            if lhs.degree().checked_mul(rhs.degree()).is_none() {
                return Err(GroupError::DegreeOverflow {
                    degree: usize::MAX,
                    max: self.max_degree,
                    pos,
                });
            }
            lhs = self.check(GroupExpr::product(lhs, rhs), pos)?;
        }
        Ok(lhs)
    }

    fn wreath(&mut self) -> Result<GroupExpr, GroupError> {
        let mut lhs = self.atom()?;
        while self.peek() == Some(&Tok::Wr) {
            let pos = self.pos();
            self.idx += 1;
            let rhs = self.atom()?;
            if lhs.degree().checked_mul(rhs.degree()).is_none() {
                return Err(GroupError::DegreeOverflow {
                    degree: usize::MAX,
                    max: self.max_degree,
                    pos,
                });
            }
            lhs = self.check(GroupExpr::wreath(lhs, rhs), pos)?;
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<GroupExpr, GroupError> {
        let pos = self.pos();
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.idx += 1;
                let e = self.sum()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(GroupError::Parse {
                        pos: self.pos(),
                        msg: "expected `)`".into(),
                    });
                }
                self.idx += 1;
                Ok(e)
            }
            Some(Tok::Base(c, m)) => {
                self.idx += 1;
                let e = match c {
                    'I' => GroupExpr::Trivial(m),
                    'Z' => GroupExpr::Cyclic(m),
                    _ => GroupExpr::Symmetric(m),
                };
                self.check(e, pos)
            }
            Some(t) => Err(GroupError::Parse {
                pos,
                msg: format!("unexpected token {t:?}"),
            }),
            None => Err(GroupError::Parse {
                pos,
                msg: "unexpected end of input".into(),
            }),
        }
    }
}

/// Parses the textual grammar. `wr` binds tighter than `*`, which binds
/// tighter than `+`; all operators are left-associative. `A wr B` has inner
/// group `A` and outer group `B`.
pub fn parse_group_expr(text: &str, max_degree: usize) -> Result<GroupExpr, GroupError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        idx: 0,
        end: text.len(),
        max_degree,
    };
    let e = p.sum()?;
    if p.idx != p.toks.len() {
        return Err(GroupError::Parse {
            pos: p.pos(),
            msg: "trailing input".into(),
        });
    }
    Ok(e)
}
