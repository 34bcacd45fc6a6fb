//! Joining two tables on a shared column through the pushout of their
//! index maps.
//!
//! Run with `cargo run --example joins`.

use fole::database::{join_via_formula, JoinSpan};
use fole::formula::Formula;
use fole::kernel::{TypeList, TypeListMorphism};
use fole::workspace::Workspace;

const TEXT: &str = r#"
schema Staff
  sort Person Dept City
  rel WorksIn(emp: Person, dept: Dept)
  rel Located(dept: Dept, city: City)
end

structure Company : Staff
  token eve sam : Person
  token ops lab : Dept
  token oslo rome : City
  key w1 : WorksIn (emp: eve, dept: ops)
  key w2 : WorksIn (emp: sam, dept: lab)
  key l1 : Located (dept: ops, city: oslo)
  key l2 : Located (dept: lab, city: rome)
  key l3 : Located (dept: lab, city: oslo)
end
"#;

fn main() -> fole::Result<()> {
    let ws = Workspace::from_str(TEXT)?;
    let m = &ws.structures["Company"].structure;
    let works = m.schema().signature(&"WorksIn".into())?.clone();
    let located = m.schema().signature(&"Located".into())?.clone();
    let shared = TypeList::of(&[("d", "Dept")]);
    let span = JoinSpan {
        left: (TypeListMorphism::from_pairs(shared.clone(), works, &[("d", "dept")])?, Formula::atom("WorksIn")),
        right: (TypeListMorphism::from_pairs(shared, located, &[("d", "dept")])?, Formula::atom("Located")),
    };
    let (formula, relation) = join_via_formula(m, &span)?;
    println!("join formula: {formula}");
    println!("joined relation over {}:", relation.type_list);
    for t in &relation.tuples {
        println!("  {t}");
    }
    // The join formula itself has no keys here: no key carries a tuple over
    // the glued list. The relation is computed from the two legs.
    println!("keys satisfying the formula: {}", m.eval(&formula)?.len());
    Ok(())
}
