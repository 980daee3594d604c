use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// An interned variable name.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Self {
        Var(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Var {
    fn from(name: &str) -> Self {
        Var::new(name)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// First-order formulas over relational vocabularies, with built-in
/// bounded-distance atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Rel { symbol: String, args: Vec<Var> },
    Eq(Var, Var),
    /// `dist(x, y) <= r` in the Gaifman graph.
    DistLe(Var, Var, usize),
    /// `dist(x, y) > r` in the Gaifman graph.
    DistGt(Var, Var, usize),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
}

impl Formula {
    pub fn rel<I, V>(symbol: &str, args: I) -> Formula
    where
        I: IntoIterator<Item = V>,
        V: Into<Var>,
    {
        Formula::Rel {
            symbol: symbol.to_string(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }

    pub fn eq(x: impl Into<Var>, y: impl Into<Var>) -> Formula {
        Formula::Eq(x.into(), y.into())
    }

    pub fn dist_le(x: impl Into<Var>, y: impl Into<Var>, r: usize) -> Formula {
        Formula::DistLe(x.into(), y.into(), r)
    }

    pub fn dist_gt(x: impl Into<Var>, y: impl Into<Var>, r: usize) -> Formula {
        Formula::DistGt(x.into(), y.into(), r)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn exists(v: impl Into<Var>, body: Formula) -> Formula {
        Formula::Exists(v.into(), Box::new(body))
    }

    pub fn forall(v: impl Into<Var>, body: Formula) -> Formula {
        Formula::Forall(v.into(), Box::new(body))
    }

    /// Right-nested conjunction; `None` for an empty iterator.
    pub fn conjunction<I: IntoIterator<Item = Formula>>(parts: I) -> Option<Formula> {
        Self::fold_right(parts, Formula::and)
    }

    /// Right-nested disjunction; `None` for an empty iterator.
    pub fn disjunction<I: IntoIterator<Item = Formula>>(parts: I) -> Option<Formula> {
        Self::fold_right(parts, Formula::or)
    }

    fn fold_right<I, F>(parts: I, join: F) -> Option<Formula>
    where
        I: IntoIterator<Item = Formula>,
        F: Fn(Formula, Formula) -> Formula,
    {
        let mut parts: Vec<Formula> = parts.into_iter().collect();
        let mut acc = parts.pop()?;
        while let Some(f) = parts.pop() {
            acc = join(f, acc);
        }
        Some(acc)
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut free = BTreeSet::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut free);
        free
    }

    fn collect_free(&self, bound: &mut Vec<Var>, free: &mut BTreeSet<Var>) {
        let mut note = |v: &Var, bound: &Vec<Var>| {
            if !bound.contains(v) {
                free.insert(v.clone());
            }
        };
        match self {
            Formula::Rel { args, .. } => args.iter().for_each(|v| note(v, bound)),
            Formula::Eq(x, y) | Formula::DistLe(x, y, _) | Formula::DistGt(x, y, _) => {
                note(x, bound);
                note(y, bound);
            }
            Formula::Not(f) => f.collect_free(bound, free),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_free(bound, free);
                b.collect_free(bound, free);
            }
            Formula::Exists(v, body) | Formula::Forall(v, body) => {
                bound.push(v.clone());
                body.collect_free(bound, free);
                bound.pop();
            }
        }
    }

    /// Every variable occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::Rel { args, .. } => out.extend(args.iter().cloned()),
            Formula::Eq(x, y) | Formula::DistLe(x, y, _) | Formula::DistGt(x, y, _) => {
                out.insert(x.clone());
                out.insert(y.clone());
            }
            Formula::Exists(v, _) | Formula::Forall(v, _) => {
                out.insert(v.clone());
            }
            _ => {}
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<F: FnMut(&Formula)>(&self, f: &mut F) {
        f(self);
        match self {
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => g.visit(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::Not(f) => f.quantifier_depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.quantifier_depth().max(b.quantifier_depth())
            }
            Formula::Exists(_, f) | Formula::Forall(_, f) => 1 + f.quantifier_depth(),
            _ => 0,
        }
    }

    /// Largest radius of any distance atom, 0 if there is none.
    pub fn max_radius(&self) -> usize {
        let mut r = 0;
        self.visit(&mut |f| {
            if let Formula::DistLe(_, _, s) | Formula::DistGt(_, _, s) = f {
                r = r.max(*s);
            }
        });
        r
    }

    /// A variable quantified inside the scope of an enclosing quantifier over
    /// the same variable, if any.
    pub fn shadowed_var(&self) -> Option<Var> {
        fn go(f: &Formula, bound: &mut Vec<Var>) -> Option<Var> {
            match f {
                Formula::Not(g) => go(g, bound),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                    go(a, bound).or_else(|| go(b, bound))
                }
                Formula::Exists(v, body) | Formula::Forall(v, body) => {
                    if bound.contains(v) {
                        return Some(v.clone());
                    }
                    bound.push(v.clone());
                    let found = go(body, bound);
                    bound.pop();
                    found
                }
                _ => None,
            }
        }
        go(self, &mut Vec::new())
    }

    fn is_binary(&self) -> bool {
        matches!(
            self,
            Formula::And(..) | Formula::Or(..) | Formula::Implies(..)
        )
    }
}

/// Prints the concrete syntax accepted by [`super::parse_formula`].
/// Operands that are themselves binary connectives are always parenthesized,
/// so printing and parsing are exact inverses.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn operand(g: &Formula, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            if g.is_binary() {
                write!(f, "({g})")
            } else {
                write!(f, "{g}")
            }
        }
        match self {
            Formula::Rel { symbol, args } => {
                write!(f, "{symbol}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
            Formula::Eq(x, y) => write!(f, "{x} = {y}"),
            Formula::DistLe(x, y, r) => write!(f, "dist({x}, {y}) <= {r}"),
            Formula::DistGt(x, y, r) => write!(f, "dist({x}, {y}) > {r}"),
            Formula::Not(g) => {
                f.write_str("not ")?;
                operand(g, f)
            }
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                let op = match self {
                    Formula::And(..) => "and",
                    Formula::Or(..) => "or",
                    _ => "->",
                };
                operand(a, f)?;
                write!(f, " {op} ")?;
                operand(b, f)
            }
            Formula::Exists(v, body) => write!(f, "exists {v} ({body})"),
            Formula::Forall(v, body) => write!(f, "forall {v} ({body})"),
        }
    }
}
