//! Relativization to `N_r(x)`, the syntactic r-locality check, and the
//! pure first-order expansion of distance atoms.
//!
//! A formula is r-local around `x` when every quantifier is guarded by the
//! center's ball:
//!
//! ```text
//! exists y (dist(x, y) <= r and ...)
//! forall y (dist(x, y) <= r -> ...)
//! ```
//!
//! Distance atoms inside a local formula must have `x` as an endpoint. The
//! distance between two other elements of the ball may be realized by a path
//! that leaves the ball, so such an atom is not determined by `<N_r(x)>`.

use std::collections::BTreeSet;

use super::formula::{Formula, Var};
use super::LogicError;
use crate::structure::Vocabulary;

/// Rewrites `phi` so that every quantifier ranges over `N_r(x)`.
pub fn relativize(phi: &Formula, r: usize, x: &Var) -> Result<Formula, LogicError> {
    match phi {
        Formula::Rel { .. } | Formula::Eq(..) => Ok(phi.clone()),
        Formula::DistLe(u, v, _) | Formula::DistGt(u, v, _) => {
            if anchored(u, v, x) {
                Ok(phi.clone())
            } else {
                Err(LogicError::NonLocalDistance {
                    atom: phi.to_string(),
                    center: x.clone(),
                })
            }
        }
        Formula::Not(f) => Ok(Formula::not(relativize(f, r, x)?)),
        Formula::And(a, b) => Ok(Formula::and(relativize(a, r, x)?, relativize(b, r, x)?)),
        Formula::Or(a, b) => Ok(Formula::or(relativize(a, r, x)?, relativize(b, r, x)?)),
        Formula::Implies(a, b) => Ok(Formula::implies(
            relativize(a, r, x)?,
            relativize(b, r, x)?,
        )),
        Formula::Exists(y, body) | Formula::Forall(y, body) => {
            if y == x {
                return Err(LogicError::VariableCapture(x.clone()));
            }
            let guard = Formula::DistLe(x.clone(), y.clone(), r);
            let body = relativize(body, r, x)?;
            Ok(if matches!(phi, Formula::Exists(..)) {
                Formula::exists(y.clone(), Formula::and(guard, body))
            } else {
                Formula::forall(y.clone(), Formula::implies(guard, body))
            })
        }
    }
}

fn anchored(u: &Var, v: &Var, x: &Var) -> bool {
    u == x || v == x || u == v
}

fn is_guard(f: &Formula, r: usize, x: &Var, y: &Var) -> bool {
    match f {
        Formula::DistLe(u, v, s) => *s == r && ((u == x && v == y) || (u == y && v == x)),
        _ => false,
    }
}

/// Whether `phi` has the shape produced by [`relativize`] with radius `r`
/// around `x`, up to Boolean recombination of such formulas.
pub fn check_r_local(phi: &Formula, r: usize, x: &Var) -> bool {
    match phi {
        Formula::Rel { .. } | Formula::Eq(..) => true,
        Formula::DistLe(u, v, _) | Formula::DistGt(u, v, _) => anchored(u, v, x),
        Formula::Not(f) => check_r_local(f, r, x),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            check_r_local(a, r, x) && check_r_local(b, r, x)
        }
        Formula::Exists(y, body) => {
            y != x
                && matches!(&**body, Formula::And(g, inner)
                    if is_guard(g, r, x, y) && check_r_local(inner, r, x))
        }
        Formula::Forall(y, body) => {
            y != x
                && matches!(&**body, Formula::Implies(g, inner)
                    if is_guard(g, r, x, y) && check_r_local(inner, r, x))
        }
    }
}

struct Fresh {
    avoid: BTreeSet<Var>,
    next: usize,
}

impl Fresh {
    fn var(&mut self) -> Var {
        loop {
            let v = Var::new(&format!("z{}", self.next));
            self.next += 1;
            if !self.avoid.contains(&v) {
                return v;
            }
        }
    }
}

/// The pure first-order formula `delta_r(x, y)` expressing `d(x, y) <= r`
/// over `vocab`, without distance atoms.
///
/// `delta_0 = (x = y)`; `delta_1` adds, for every relation symbol, the
/// existence of a tuple holding `x` and `y` at two distinct positions; for
/// `r >= 2`, `delta_r = delta_0 or delta_1 or exists z (delta_ceil(r/2)(x, z)
/// and delta_floor(r/2)(z, y))`.
pub fn expand_distance_atom(r: usize, x: &Var, y: &Var, vocab: &Vocabulary) -> Formula {
    let mut fresh = Fresh {
        avoid: BTreeSet::from([x.clone(), y.clone()]),
        next: 0,
    };
    delta(r, x, y, vocab, &mut fresh)
}

fn delta(r: usize, x: &Var, y: &Var, vocab: &Vocabulary, fresh: &mut Fresh) -> Formula {
    let delta0 = Formula::Eq(x.clone(), y.clone());
    if r == 0 {
        return delta0;
    }
    let delta1 = {
        let mut parts = vec![delta0.clone()];
        for sym in vocab.symbols().iter().filter(|s| s.arity >= 2) {
            let extra: Vec<Var> = (0..sym.arity - 2).map(|_| fresh.var()).collect();
            let mut placements = Vec::new();
            for i in 0..sym.arity {
                for j in 0..sym.arity {
                    if i == j {
                        continue;
                    }
                    let mut rest = extra.iter();
                    let args = (0..sym.arity)
                        .map(|p| {
                            if p == i {
                                x.clone()
                            } else if p == j {
                                y.clone()
                            } else {
                                rest.next().expect("arity - 2 fillers").clone()
                            }
                        })
                        .collect();
                    placements.push(Formula::Rel {
                        symbol: sym.name.clone(),
                        args,
                    });
                }
            }
            let mut f = Formula::disjunction(placements).expect("arity >= 2");
            for z in extra.into_iter().rev() {
                f = Formula::exists(z, f);
            }
            parts.push(f);
        }
        Formula::disjunction(parts).expect("non-empty")
    };
    if r == 1 {
        return delta1;
    }
    let z = fresh.var();
    let left = delta(r.div_ceil(2), x, &z, vocab, fresh);
    let right = delta(r / 2, &z, y, vocab, fresh);
    Formula::disjunction([delta0, delta1, Formula::exists(z, Formula::and(left, right))])
        .expect("non-empty")
}

/// Replaces every distance atom of `phi` by its pure first-order expansion.
pub fn expand_distance_atoms(phi: &Formula, vocab: &Vocabulary) -> Formula {
    let mut fresh = Fresh {
        avoid: phi.all_vars(),
        next: 0,
    };
    expand_in(phi, vocab, &mut fresh)
}

fn expand_in(phi: &Formula, vocab: &Vocabulary, fresh: &mut Fresh) -> Formula {
    match phi {
        Formula::Rel { .. } | Formula::Eq(..) => phi.clone(),
        Formula::DistLe(u, v, r) => delta(*r, u, v, vocab, fresh),
        Formula::DistGt(u, v, r) => Formula::not(delta(*r, u, v, vocab, fresh)),
        Formula::Not(f) => Formula::not(expand_in(f, vocab, fresh)),
        Formula::And(a, b) => Formula::and(expand_in(a, vocab, fresh), expand_in(b, vocab, fresh)),
        Formula::Or(a, b) => Formula::or(expand_in(a, vocab, fresh), expand_in(b, vocab, fresh)),
        Formula::Implies(a, b) => {
            Formula::implies(expand_in(a, vocab, fresh), expand_in(b, vocab, fresh))
        }
        Formula::Exists(y, body) => Formula::exists(y.clone(), expand_in(body, vocab, fresh)),
        Formula::Forall(y, body) => Formula::forall(y.clone(), expand_in(body, vocab, fresh)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse_formula;

    fn x() -> Var {
        Var::new("x")
    }

    #[test]
    fn quantifier_free_is_unchanged() {
        let phi = parse_formula("E(x, x) or not P(x)").unwrap();
        assert_eq!(relativize(&phi, 3, &x()).unwrap(), phi);
    }

    #[test]
    fn existential_gets_conjunctive_guard() {
        let phi = parse_formula("exists y (E(x, y))").unwrap();
        assert_eq!(
            relativize(&phi, 1, &x()).unwrap(),
            parse_formula("exists y (dist(x, y) <= 1 and E(x, y))").unwrap()
        );
    }

    #[test]
    fn nested_quantifiers_both_guarded() {
        let phi = parse_formula("forall y (exists z (E(y, z)))").unwrap();
        assert_eq!(
            relativize(&phi, 2, &x()).unwrap(),
            parse_formula(
                "forall y (dist(x, y) <= 2 -> exists z (dist(x, z) <= 2 and E(y, z)))"
            )
            .unwrap()
        );
    }

    #[test]
    fn capture_and_nonlocal_distance_rejected() {
        let phi = parse_formula("exists x (P(x))").unwrap();
        assert_eq!(
            relativize(&phi, 1, &x()),
            Err(LogicError::VariableCapture(x()))
        );
        let phi = parse_formula("exists y (exists z (dist(y, z) <= 1))").unwrap();
        assert!(matches!(
            relativize(&phi, 1, &x()),
            Err(LogicError::NonLocalDistance { .. })
        ));
    }

    #[test]
    fn locality_check() {
        let phi = parse_formula("forall y (exists z (E(y, z) and dist(x, z) > 1))").unwrap();
        let local = relativize(&phi, 2, &x()).unwrap();
        assert!(check_r_local(&local, 2, &x()));
        assert!(!check_r_local(&local, 1, &x()));
        assert!(!check_r_local(&local, 3, &x()));
        assert!(!check_r_local(&parse_formula("exists y (E(x, y))").unwrap(), 1, &x()));
        let wide = parse_formula("exists y (dist(x, y) <= 3 and E(x, y))").unwrap();
        assert!(!check_r_local(&wide, 2, &x()));
        let flipped = parse_formula("exists y (dist(y, x) <= 2 and E(x, y))").unwrap();
        assert!(check_r_local(&flipped, 2, &x()));
        let recombined = Formula::or(
            Formula::not(local.clone()),
            Formula::and(local, Formula::rel("P", ["x"])),
        );
        assert!(check_r_local(&recombined, 2, &x()));
    }

    #[test]
    fn delta_small_radii() {
        let vocab = Vocabulary::new([("E", 2)]).unwrap();
        let (x, y) = (Var::new("x"), Var::new("y"));
        assert_eq!(expand_distance_atom(0, &x, &y, &vocab), Formula::eq("x", "y"));
        assert_eq!(
            expand_distance_atom(1, &x, &y, &vocab),
            parse_formula("x = y or E(x, y) or E(y, x)").unwrap()
        );
        let d2 = expand_distance_atom(2, &x, &y, &vocab);
        let expected = parse_formula(
            "x = y or (x = y or E(x, y) or E(y, x)) or exists z0 \
             ((x = z0 or E(x, z0) or E(z0, x)) and (z0 = y or E(z0, y) or E(y, z0)))",
        )
        .unwrap();
        assert_eq!(d2, expected);
    }

    #[test]
    fn delta_ternary_quantifies_filler() {
        let vocab = Vocabulary::new([("T", 3)]).unwrap();
        let d1 = expand_distance_atom(1, &Var::new("x"), &Var::new("y"), &vocab);
        assert_eq!(
            d1,
            parse_formula(
                "x = y or exists z0 (T(x, y, z0) or T(x, z0, y) or T(y, x, z0) \
                 or T(z0, x, y) or T(y, z0, x) or T(z0, y, x))"
            )
            .unwrap()
        );
    }
}
