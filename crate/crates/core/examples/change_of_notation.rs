//! Satisfaction does not depend on notation: a constraint holds in the
//! reduct of a structure exactly when its translation holds in the
//! structure itself.
//!
//! Run with `cargo run --example change_of_notation`.

use std::sync::Arc;

use fole::formula::{translate_constraint, Constraint, Formula};
use fole::structure::reduct;
use fole::workspace::Workspace;

const TEXT: &str = r#"
schema Library
  sort Person Book
  rel Borrowed(who: Person, what: Book)
  rel Member(who: Person)
end

schema Shop
  sort Customer Item
  rel Bought(who: Customer, what: Item)
  rel Client(who: Customer)
end

morphism rename : schema Shop -> Library
  rel Bought -> Borrowed
  rel Client -> Member
  sort Customer -> Person
  sort Item -> Book
end

structure Town : Library
  token ann bob : Person
  token atlas novel : Book
  key b1 : Borrowed (who: ann, what: atlas)
  key b2 : Borrowed (who: bob, what: novel)
  key m1 : Member (who: ann)
  key p2 (who: bob)
end

morphism buyer : list {who: Customer} -> {who: Customer, what: Item} <who -> who>
"#;

fn main() -> fole::Result<()> {
    let ws = Workspace::from_str(TEXT)?;
    let m = &ws.schema_morphisms["rename"].morphism;
    let shop = Arc::clone(&ws.schemas["Shop"].schema);
    let town = &ws.structures["Town"].structure;
    let (seen_as_shop, _) = reduct(m, shop, town)?;

    let buyer = ws.list_morphisms["buyer"].clone();
    let constraints = [
        // every buyer is a client
        Constraint::along(buyer.clone(), Formula::atom("Bought"), Formula::atom("Client")),
        // every client bought something
        Constraint::sequent(Formula::atom("Client"), Formula::exists(buyer, Formula::atom("Bought"))),
    ];
    for c in &constraints {
        let translated = translate_constraint(m, c)?;
        println!("{c}");
        println!("  in the reduct:     {}", seen_as_shop.satisfies_constraint(c)?);
        println!("  translated:        {translated}");
        println!("  in the structure:  {}", town.satisfies_constraint(&translated)?);
    }
    Ok(())
}
