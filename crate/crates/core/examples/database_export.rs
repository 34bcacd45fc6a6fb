//! The database of a logic: one keyed table per formula of a universe,
//! written as CSV files with a JSON manifest and read back.
//!
//! Run with `cargo run --example database_export [OUT_DIR]`.

use fole::database::{db_of_logic, export, read_manifest, read_table};
use fole::speclogic::Logic;
use fole::workspace::Workspace;

const TEXT: &str = r#"
schema Orders
  sort Customer Product
  rel Ordered(who: Customer, what: Product)
  rel Vip(who: Customer)
end

structure Shop : Orders
  token ana raj : Customer
  token pen ink : Product
  key o1 : Ordered (who: ana, what: pen)
  key o2 : Ordered (who: ana, what: ink)
  key o3 : Ordered (who: raj, what: pen)
  key v1 : Vip (who: ana)
end

morphism buyer : list {who: Customer} -> {who: Customer, what: Product} <who -> who>

spec Rules : Orders
  Vip |- exists[buyer](Ordered)
end

universe U : Orders
  depth 1
  pool buyer
  connectives meet neg exists
end
"#;

fn main() -> fole::Result<()> {
    let ws = Workspace::from_str(TEXT)?;
    let logic = Logic::new(ws.structures["Shop"].structure.clone(), ws.specs["Rules"].spec.clone())?;
    let db = db_of_logic(&logic, &ws.universes["U"].universe)?;
    println!("{} tables", db.tables().len());
    for group in db.equivalence_classes() {
        println!("{} tables share the relation of {}", group.len(), group[0]);
    }

    let dir = match std::env::args().nth(1) {
        Some(d) => std::path::PathBuf::from(d),
        None => std::env::temp_dir().join("fole-database-example"),
    };
    let written = export(&db, &dir)?;
    println!("wrote {} files to {}", written.len(), dir.display());
    for (formula, entry) in read_manifest(&dir)? {
        let (header, rows) = read_table(&dir.join(&entry.file))?;
        println!("{formula}  [{}]  {} rows", header.join(","), rows.len());
    }
    Ok(())
}
