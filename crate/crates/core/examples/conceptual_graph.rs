//! "John is going to Boston by bus": a structure written in the text
//! format, queried with formulas and shown as keyed tables. Formulas are
//! satisfied by keys, so the city keys `c1` and `c2` carry the answers to
//! questions about cities.
//!
//! Run with `cargo run --example conceptual_graph`.

use fole::formula::Formula;
use fole::workspace::Workspace;

const TEXT: &str = r#"
schema S_go
  sort Person City Bus
  rel Go(agnt: Person, dest: City, inst: Bus)
  rel Lives(who: Person, in: City)
end

structure M_go : S_go
  token john jane : Person
  token boston denver : City
  token bus1 bus2 : Bus
  key g1 : Go (agnt: john, dest: boston, inst: bus1)
  key g2 : Go (agnt: jane, dest: denver, inst: bus2)
  key l1 : Lives (who: john, in: denver)
  key l2 : Lives (who: jane, in: denver)
  key c1 (dest: boston)
  key c2 (dest: denver)
end

morphism dest : list {dest: City} -> {agnt: Person, dest: City, inst: Bus} <dest -> dest>
morphism home : list {dest: City} -> {who: Person, in: City} <dest -> in>
"#;

fn main() -> fole::Result<()> {
    let ws = Workspace::from_str(TEXT)?;
    let m = &ws.structures["M_go"].structure;
    let dest = ws.list_morphisms["dest"].clone();
    let home = ws.list_morphisms["home"].clone();

    let queries = [
        ("trips", Formula::atom("Go")),
        ("cities someone travels to", Formula::exists(dest.clone(), Formula::atom("Go"))),
        ("cities someone lives in", Formula::exists(home.clone(), Formula::atom("Lives"))),
        (
            "trips to a city where nobody lives",
            Formula::meet(
                Formula::atom("Go"),
                Formula::not(Formula::subst(dest, Formula::exists(home, Formula::atom("Lives")))),
            ),
        ),
    ];
    for (label, phi) in queries {
        let table = m.table_interp(&phi)?;
        println!("{label}: {phi}");
        for (k, t) in &table.rows {
            println!("  {k:<4} {t}");
        }
        println!("  ({} rows, {} distinct tuples)", table.len(), m.relation_interp(&phi)?.len());
    }
    Ok(())
}
