//! Random formulas and Gaifman-normal-form sentences for randomized testing.
//!
//! Generated formulas have free variables among `{x}`, never shadow a bound
//! variable, and only use distance atoms anchored at `x`, so relativizing
//! them always succeeds.

use rand::seq::SliceRandom;
use rand::Rng;

use super::formula::{Formula, Var};
use super::gnf::{center_var, GaifmanSentence};
use super::locality::relativize;
use crate::structure::Vocabulary;

#[derive(Debug, Clone, Copy)]
pub struct FormulaShape {
    /// Maximum nesting of connectives and quantifiers.
    pub depth: usize,
    /// Maximum quantifier nesting depth.
    pub quantifiers: usize,
    /// Largest radius used in distance atoms.
    pub max_distance: usize,
}

impl Default for FormulaShape {
    fn default() -> Self {
        FormulaShape {
            depth: 4,
            quantifiers: 2,
            max_distance: 2,
        }
    }
}

struct Gen<'a, R> {
    rng: &'a mut R,
    vocab: &'a Vocabulary,
    shape: FormulaShape,
    next_var: usize,
}

impl<R: Rng> Gen<'_, R> {
    fn atom(&mut self, scope: &[Var]) -> Formula {
        let center = center_var();
        let pick = |rng: &mut R| scope.choose(rng).expect("scope holds x").clone();
        let choice = self.rng.gen_range(0..10);
        if choice < 6 && !self.vocab.is_empty() {
            let sym = self.vocab.symbols().choose(self.rng).expect("non-empty");
            let args = (0..sym.arity).map(|_| pick(self.rng)).collect();
            Formula::Rel {
                symbol: sym.name.clone(),
                args,
            }
        } else if choice < 8 {
            Formula::Eq(pick(self.rng), pick(self.rng))
        } else {
            let other = pick(self.rng);
            let r = self.rng.gen_range(0..=self.shape.max_distance);
            if self.rng.gen_bool(0.5) {
                Formula::DistLe(center, other, r)
            } else {
                Formula::DistGt(other, center, r)
            }
        }
    }

    fn formula(&mut self, scope: &mut Vec<Var>, depth: usize, quantifiers: usize) -> Formula {
        if depth == 0 || self.rng.gen_bool(0.25) {
            return self.atom(scope);
        }
        match self.rng.gen_range(0..6) {
            0 => Formula::not(self.formula(scope, depth - 1, quantifiers)),
            1 => Formula::and(
                self.formula(scope, depth - 1, quantifiers),
                self.formula(scope, depth - 1, quantifiers),
            ),
            2 => Formula::or(
                self.formula(scope, depth - 1, quantifiers),
                self.formula(scope, depth - 1, quantifiers),
            ),
            3 => Formula::implies(
                self.formula(scope, depth - 1, quantifiers),
                self.formula(scope, depth - 1, quantifiers),
            ),
            _ if quantifiers > 0 => {
                let v = Var::new(&format!("y{}", self.next_var));
                self.next_var += 1;
                scope.push(v.clone());
                let body = self.formula(scope, depth - 1, quantifiers - 1);
                scope.pop();
                if self.rng.gen_bool(0.5) {
                    Formula::exists(v, body)
                } else {
                    Formula::forall(v, body)
                }
            }
            _ => self.atom(scope),
        }
    }
}

/// A random formula with free variables among `{x}`.
pub fn random_formula<R: Rng>(rng: &mut R, vocab: &Vocabulary, shape: FormulaShape) -> Formula {
    let mut g = Gen {
        rng,
        vocab,
        shape,
        next_var: 0,
    };
    g.formula(&mut vec![center_var()], shape.depth, shape.quantifiers)
}

/// A random formula relativized to `N_r(x)`.
pub fn random_local_formula<R: Rng>(
    rng: &mut R,
    vocab: &Vocabulary,
    shape: FormulaShape,
    r: usize,
) -> Formula {
    relativize(&random_formula(rng, vocab, shape), r, &center_var())
        .expect("generated formulas relativize")
}

#[derive(Debug, Clone, Copy)]
pub struct SentenceShape {
    pub max_radius: usize,
    pub max_count: usize,
    /// Depth of the Boolean tree above the leaves.
    pub boolean_depth: usize,
    pub psi: FormulaShape,
}

impl Default for SentenceShape {
    fn default() -> Self {
        SentenceShape {
            max_radius: 2,
            max_count: 3,
            boolean_depth: 2,
            psi: FormulaShape::default(),
        }
    }
}

/// A random Gaifman-normal-form sentence.
pub fn random_sentence<R: Rng>(rng: &mut R, vocab: &Vocabulary, shape: SentenceShape) -> GaifmanSentence {
    if shape.boolean_depth == 0 || rng.gen_bool(0.3) {
        let r = rng.gen_range(1..=shape.max_radius);
        let m = rng.gen_range(1..=shape.max_count);
        let psi = random_local_formula(rng, vocab, shape.psi, r);
        return GaifmanSentence::leaf(r, m, psi).expect("relativized formulas are local");
    }
    let child = SentenceShape {
        boolean_depth: shape.boolean_depth - 1,
        ..shape
    };
    match rng.gen_range(0..3) {
        0 => GaifmanSentence::not(random_sentence(rng, vocab, child)),
        k => {
            let n = rng.gen_range(1..=2);
            let children = (0..n).map(|_| random_sentence(rng, vocab, child)).collect();
            if k == 1 {
                GaifmanSentence::And(children)
            } else {
                GaifmanSentence::Or(children)
            }
        }
    }
}
