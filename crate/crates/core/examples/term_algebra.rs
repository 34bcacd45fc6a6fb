//! Operator symbols, term vectors and flows along terms: the relation of
//! pairs `(x, succ(x))` obtained by pushing the diagonal through a term.
//!
//! Run with `cargo run --example term_algebra`.

use std::collections::BTreeMap;

use fole::algebra::{eval_vector, flow_along_term, satisfies_equation, Algebra, Equation, OpSig, OperatorDomain, Term, TermVector};
use fole::kernel::{tup, Classification, FlowMode, Tuple, TupleRelation, TypeList};
use fole::{Sort, Symbol, Token};

fn main() -> fole::Result<()> {
    let n = Sort::new("N");
    let digits: Vec<Token> = (0..4).map(|d| Token::new(d.to_string())).collect();
    let e = Classification::new([n.clone()], digits.clone(), digits.iter().map(|d| (d.clone(), n.clone())))?;

    let one = TypeList::of(&[("x", "N")]);
    let domain = OperatorDomain::new(
        [n.clone()],
        [(Symbol::new("succ"), OpSig { args: one.clone(), result: n.clone() })],
    )?;
    // successor modulo four
    let succ: BTreeMap<Tuple, Token> = digits
        .iter()
        .enumerate()
        .map(|(i, d)| (Tuple::of(&[("x", d.as_ref())]), digits[(i + 1) % 4].clone()))
        .collect();
    let a = Algebra::new(e, domain, [(Symbol::new("succ"), succ)].into_iter().collect())?;

    // <from: x, to: succ(x)> over the context {x}
    let pair = TypeList::of(&[("from", "N"), ("to", "N")]);
    let step = TermVector::new(
        a.domain(),
        pair.clone(),
        one.clone(),
        [
            ("from".into(), Term::var("x")),
            ("to".into(), Term::app("succ", [("x".into(), Term::var("x"))])),
        ]
        .into_iter()
        .collect(),
    )?;
    let all = tup(a.entities(), &one)?;
    let graph = flow_along_term(&a, &step, FlowMode::Exists, &all)?;
    println!("graph of succ over {}:", graph.type_list);
    for t in &graph.tuples {
        println!("  {t}");
    }

    // Pairs whose second component is 0 pull back to the x with succ(x) = 0.
    let to_zero = TupleRelation::new(
        a.entities(),
        pair,
        digits.iter().map(|d| Tuple::of(&[("from", d.as_ref()), ("to", "0")])),
    )?;
    let back = flow_along_term(&a, &step, FlowMode::Inverse, &to_zero)?;
    println!("x with succ(x) = 0: {:?}", back.tuples.iter().map(|t| t.to_string()).collect::<Vec<_>>());

    // succ applied four times is the identity.
    let four = (0..4).fold(Term::var("x"), |t, _| Term::app("succ", [("x".into(), t)]));
    let lhs = TermVector::new(a.domain(), one.clone(), one.clone(), [("x".into(), four)].into_iter().collect())?;
    let rhs = TermVector::new(a.domain(), one.clone(), one.clone(), [("x".into(), Term::var("x"))].into_iter().collect())?;
    let eq = Equation::new(lhs.clone(), rhs)?;
    println!("{eq} holds: {}", satisfies_equation(&a, &eq)?);
    println!("succ^4(2) = {}", eval_vector(&a, &lhs, &Tuple::of(&[("x", "2")]))?);
    Ok(())
}
