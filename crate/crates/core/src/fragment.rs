//! Random coefficient expressions of prescribed parity and random problems
//! satisfying the hypotheses of a catalog case, shared by tests and benchmarks.
//!
//! Expressions are short sums of atoms `c·f(w·t)` with `|c| ∈ [0.1, 0.5]`
//! and `w ∈ [0.5, 1.5]`, both rounded to two decimals.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::closedform::ProblemSpec;
use crate::exponent::{classify_exponent, ExponentClass, RationalExponent};
use crate::expr::{Expr, Func, Parity};
use crate::symmetry::{ClassRequirement, Relation, SymmetryCase};

const EVEN_OVER_ODD: &[(i64, i64)] = &[
    (0, 1),
    (2, 1),
    (4, 1),
    (-2, 1),
    (2, 3),
    (4, 3),
    (-2, 3),
    (2, 5),
];
const ODD_OVER_ODD: &[(i64, i64)] = &[(3, 1), (-1, 1), (1, 3), (5, 3), (-1, 3), (3, 5)];
const ODD_OVER_EVEN: &[(i64, i64)] = &[(1, 2), (3, 2), (-1, 2), (5, 2), (1, 4)];

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn coefficient<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let c = round2(rng.gen_range(0.1..=0.5));
    if rng.gen_bool(0.5) {
        c
    } else {
        -c
    }
}

fn frequency<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    round2(rng.gen_range(0.5..=1.5))
}

fn scaled(c: f64, e: Expr) -> Expr {
    Expr::Mul(Box::new(Expr::Const(c)), Box::new(e))
}

fn call<R: Rng + ?Sized>(rng: &mut R, f: Func) -> Expr {
    let arg = scaled(frequency(rng), Expr::Var);
    Expr::Call(f, Box::new(arg))
}

fn even_atom<R: Rng + ?Sized>(rng: &mut R) -> Expr {
    let c = coefficient(rng);
    match rng.gen_range(0..5) {
        0 => Expr::Const(c),
        1 => scaled(c, call(rng, Func::Cos)),
        2 => scaled(c, Expr::Pow(Box::new(Expr::Var), 2)),
        3 => scaled(c, call(rng, Func::Cosh)),
        _ => scaled(
            c,
            Expr::Mul(Box::new(Expr::Var), Box::new(call(rng, Func::Sin))),
        ),
    }
}

fn odd_atom<R: Rng + ?Sized>(rng: &mut R) -> Expr {
    let c = coefficient(rng);
    match rng.gen_range(0..4) {
        0 => scaled(c, Expr::Var),
        1 => scaled(c, call(rng, Func::Sin)),
        2 => scaled(c, call(rng, Func::Sinh)),
        _ => scaled(
            c,
            Expr::Mul(Box::new(Expr::Var), Box::new(call(rng, Func::Cos))),
        ),
    }
}

/// A random expression whose parity is `parity`. For `Neither` the result
/// is a sum of an even and an odd atom, so it has no parity.
pub fn random_expr<R: Rng + ?Sized>(rng: &mut R, parity: Parity) -> Expr {
    match parity {
        Parity::Even | Parity::Odd => {
            let atom = |rng: &mut R| match parity {
                Parity::Even => even_atom(rng),
                _ => odd_atom(rng),
            };
            let mut e = atom(rng);
            if rng.gen_bool(0.5) {
                e = Expr::Add(Box::new(e), Box::new(atom(rng)));
            }
            e
        }
        Parity::Neither => Expr::Add(Box::new(even_atom(rng)), Box::new(odd_atom(rng))),
    }
}

/// A random exponent of class `class`.
pub fn random_exponent<R: Rng + ?Sized>(rng: &mut R, class: ExponentClass) -> RationalExponent {
    let &(p, q) = match class {
        ExponentClass::EvenOverOdd => EVEN_OVER_ODD.choose(rng),
        ExponentClass::OddOverOdd => ODD_OVER_ODD.choose(rng),
        ExponentClass::OddOverEven => ODD_OVER_EVEN.choose(rng),
        ExponentClass::One => Some(&(1, 1)),
    }
    .expect("non-empty table");
    classify_exponent(p, q).expect("table entries are valid")
}

/// `d ∈ [-3, -0.1] ∪ [0.1, 3]`, or only the positive half.
pub fn random_d<R: Rng + ?Sized>(rng: &mut R, positive_only: bool) -> f64 {
    let d = round2(rng.gen_range(0.1..=3.0));
    if positive_only || rng.gen_bool(0.5) {
        d
    } else {
        -d
    }
}

fn any_parity<R: Rng + ?Sized>(rng: &mut R) -> Parity {
    *[Parity::Even, Parity::Odd, Parity::Neither]
        .choose(rng)
        .expect("non-empty")
}

fn class_for<R: Rng + ?Sized>(rng: &mut R, req: ClassRequirement) -> ExponentClass {
    match req {
        ClassRequirement::EvenOverOdd => ExponentClass::EvenOverOdd,
        ClassRequirement::OddOverOdd => {
            if rng.gen_bool(0.1) {
                ExponentClass::One
            } else {
                ExponentClass::OddOverOdd
            }
        }
        ClassRequirement::AnyRational => random_class(rng),
    }
}

/// A random class, `One` included.
pub fn random_class<R: Rng + ?Sized>(rng: &mut R) -> ExponentClass {
    match rng.gen_range(0..10) {
        0..=2 => ExponentClass::EvenOverOdd,
        3..=5 => ExponentClass::OddOverOdd,
        6..=8 => ExponentClass::OddOverEven,
        _ => ExponentClass::One,
    }
}

/// A random problem satisfying every hypothesis of `case`.
pub fn random_problem_for<R: Rng + ?Sized>(rng: &mut R, case: &SymmetryCase) -> ProblemSpec {
    let (pa, pb) = case
        .parity
        .unwrap_or_else(|| (any_parity(rng), any_parity(rng)));
    let class = class_for(rng, case.class);
    let positive_only = class == ExponentClass::OddOverEven;
    debug_assert!(!(positive_only && case.relation != Relation::YAxis));
    build(rng, pa, pb, class, positive_only)
}

/// A random problem with arbitrary parities and exponent class.
pub fn random_problem<R: Rng + ?Sized>(rng: &mut R) -> ProblemSpec {
    let (pa, pb) = (any_parity(rng), any_parity(rng));
    let class = random_class(rng);
    build(rng, pa, pb, class, class == ExponentClass::OddOverEven)
}

fn build<R: Rng + ?Sized>(
    rng: &mut R,
    pa: Parity,
    pb: Parity,
    class: ExponentClass,
    positive_only: bool,
) -> ProblemSpec {
    let a = random_expr(rng, pa);
    let b = random_expr(rng, pb);
    let n = random_exponent(rng, class);
    let d = random_d(rng, positive_only);
    ProblemSpec::new(a, b, n, d).expect("generated problems are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::detect_parity;
    use crate::symmetry::{applicable_cases, CATALOG};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_parities_are_detected() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            for parity in [Parity::Even, Parity::Odd, Parity::Neither] {
                let e = random_expr(&mut rng, parity);
                assert_eq!(detect_parity(&e).unwrap(), parity, "{e}");
            }
        }
    }

    #[test]
    fn generated_problems_satisfy_their_case() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for case in &CATALOG {
            for _ in 0..40 {
                let p = random_problem_for(&mut rng, case);
                let ids: Vec<_> = applicable_cases(&p).iter().map(|c| c.id).collect();
                assert!(
                    ids.contains(&case.id),
                    "{} not applicable to {p:?}",
                    case.id
                );
            }
        }
    }

    #[test]
    fn exponent_tables_match_their_class() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for class in [
            ExponentClass::EvenOverOdd,
            ExponentClass::OddOverOdd,
            ExponentClass::OddOverEven,
            ExponentClass::One,
        ] {
            for _ in 0..20 {
                assert_eq!(random_exponent(&mut rng, class).class(), class);
            }
        }
    }
}
