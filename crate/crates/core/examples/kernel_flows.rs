//! Tuples, type-list morphisms and the three flows between relations.
//!
//! Run with `cargo run --example kernel_flows`.

use fole::kernel::{flow, tup, typelist_pushout, Classification, FlowMode, Tuple, TupleRelation, TypeList, TypeListMorphism};
use fole::{Sort, Token};

fn show(label: &str, r: &TupleRelation) {
    println!("{label} over {}:", r.type_list);
    for t in &r.tuples {
        println!("  {t}");
    }
}

fn main() -> fole::Result<()> {
    // People and cities, with one token that is both.
    let e = Classification::new(
        [Sort::new("Person"), Sort::new("City")],
        ["ann", "bob", "paris", "york"].map(Token::new),
        [
            (Token::new("ann"), Sort::new("Person")),
            (Token::new("bob"), Sort::new("Person")),
            (Token::new("paris"), Sort::new("City")),
            (Token::new("york"), Sort::new("City")),
            (Token::new("york"), Sort::new("Person")),
        ],
    )?;

    let visit = TypeList::of(&[("who", "Person"), ("where", "City")]);
    let person = TypeList::of(&[("p", "Person")]);
    println!("|tup(visit)| = {}", tup(&e, &visit)?.len());

    // h picks the visitor out of a visit; its tuple map runs visit -> person.
    let h = TypeListMorphism::from_pairs(person.clone(), visit.clone(), &[("p", "who")])?;
    let visits = TupleRelation::new(
        &e,
        visit.clone(),
        [
            Tuple::of(&[("who", "ann"), ("where", "paris")]),
            Tuple::of(&[("who", "ann"), ("where", "york")]),
            Tuple::of(&[("who", "bob"), ("where", "paris")]),
        ],
    )?;
    show("visits", &visits);
    show("someone visited some city (exists)", &flow(&e, &h, FlowMode::Exists, &visits)?);
    show("visited every city (forall)", &flow(&e, &h, FlowMode::Forall, &visits)?);

    let ann = TupleRelation::new(&e, person.clone(), [Tuple::of(&[("p", "ann")])])?;
    show("visits by ann (inverse)", &flow(&e, &h, FlowMode::Inverse, &ann)?);

    // Gluing two lists along a shared index.
    let stay = TypeList::of(&[("guest", "Person"), ("host", "Person")]);
    let shared = TypeList::of(&[("x", "Person")]);
    let left = TypeListMorphism::from_pairs(shared.clone(), visit, &[("x", "who")])?;
    let right = TypeListMorphism::from_pairs(shared, stay, &[("x", "guest")])?;
    let p = typelist_pushout(&left, &right)?;
    println!("pushout of the two lists: {}", p.list);
    Ok(())
}
