//! Closing a specification over a bounded formula universe, answering
//! derivability queries and checking the closure against a model.
//!
//! Run with `cargo run --example consequence`.

use fole::formula::{Formula, Sequent};
use fole::speclogic::{consequence, soundness_check, Logic};
use fole::workspace::Workspace;

const TEXT: &str = r#"
schema Zoo
  sort Animal
  rel Cat(a: Animal)
  rel Mammal(a: Animal)
  rel Pet(a: Animal)
end

spec Facts : Zoo
  Cat |- Mammal
  Cat |- Pet
end

structure Home : Zoo
  token tom rex : Animal
  key t : Cat Mammal Pet (a: tom)
  key r : Mammal Pet (a: rex)
end

universe U : Zoo
  depth 1
  connectives meet join neg
end
"#;

fn main() -> fole::Result<()> {
    let ws = Workspace::from_str(TEXT)?;
    let spec = &ws.specs["Facts"].spec;
    let universe = &ws.universes["U"].universe;
    println!("universe: {} formulas, {} sequents", universe.len(), universe.sequent_count());

    let closure = consequence(spec, universe)?;
    println!("closure: {} derivable sequents", closure.len());

    let cat = Formula::atom("Cat");
    let queries = [
        Sequent::new(cat.clone(), Formula::meet(Formula::atom("Mammal"), Formula::atom("Pet"))),
        Sequent::new(Formula::not(Formula::atom("Mammal")), Formula::not(cat.clone())),
        Sequent::new(Formula::atom("Pet"), cat),
    ];
    for q in &queries {
        let verdict = if closure.derives(q) { "derivable" } else { "not derivable" };
        println!("  {verdict:<14} {q}");
    }

    // The closure is sound: the model of the facts satisfies all of it.
    let home = &ws.structures["Home"].structure;
    let mut failures = 0;
    for q in closure.sequents() {
        if !home.satisfies_sequent(&q)? {
            failures += 1;
        }
    }
    println!("derived sequents failing in Home: {failures}");
    let logic = Logic::new(home.clone(), spec.clone())?;
    println!("facts failing in Home: {}", soundness_check(&logic)?.len());
    Ok(())
}
