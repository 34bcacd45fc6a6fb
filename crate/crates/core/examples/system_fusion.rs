//! Two logics linked by a structure morphism, fused through their sum
//! channel. Each node keeps its own consequences and gains new ones.
//!
//! Run with `cargo run --example system_fusion`.

use std::collections::BTreeMap;

use fole::formula::Constraint;
use fole::speclogic::{consequence, Connectives, FormulaUniverse};
use fole::system::{channel_covers, sum_system, system_consequence, underlying};
use fole::workspace::Workspace;

const TEXT: &str = r#"
schema Clinic
  sort P
  rel Flu(p: P)
  rel Fever(p: P)
  rel Rest(p: P)
end

schema Ward
  sort P
  rel Fever(p: P)
  rel Rest(p: P)
end

structure Records : Clinic
  token amy ben : P
  key r1 : Flu Fever Rest (p: amy)
  key r2 : Rest (p: ben)
end

structure Beds : Ward
  token amy ben : P
  key b1 : Fever Rest (p: amy)
  key b2 : Rest (p: ben)
end

spec Diagnosis : Clinic
  Fever |- Flu
  Flu |- Rest
end

spec Care : Ward
  Rest |- Rest
end

morphism share : structure Beds -> Records
  rel Fever -> Fever
  rel Rest -> Rest
  sort P -> P
  key r1 -> b1
  key r2 -> b2
  token amy -> amy
  token ben -> ben
end

system Hospital
  node clinic = Records Diagnosis
  node ward = Beds Care
  edge e : ward -> clinic = share
end
"#;

fn main() -> fole::Result<()> {
    let ws = Workspace::from_str(TEXT)?;
    let sys = &ws.systems["Hospital"].system;
    let channel = sum_system(&underlying(sys))?;
    println!("sum channel covers the diagram: {}", channel_covers(&channel, &underlying(sys))?);

    let connectives = Connectives::from_names(["meet", "join"])?;
    let universes: BTreeMap<_, _> = sys
        .logics
        .iter()
        .map(|(n, l)| Ok((n.clone(), FormulaUniverse::new(l.spec().schema().clone(), 1, [], connectives)?)))
        .collect::<fole::Result<_>>()?;
    let core = FormulaUniverse::new(channel.core.schema_arc().clone(), 1, [], connectives)?;
    let derived = system_consequence(sys, &channel, &universes, &core)?;

    for (node, logic) in &sys.logics {
        let mut u = universes[node].clone();
        u.extend(logic.spec().constraints().iter().flat_map(|c| c.formulas()))?;
        let own: Vec<Constraint> = consequence(logic.spec(), &u)?.sequents().map(Constraint::from).collect();
        let gained: Vec<&Constraint> = derived[node].constraints().iter().filter(|c| !own.contains(c)).collect();
        println!("{node}: {} own, {} after fusion", own.len(), derived[node].len());
        for c in gained.iter().take(3) {
            println!("  gained {c}");
        }
    }
    Ok(())
}
