//! Logical/relational databases generated from sound logics.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::formula::{translate, Constraint, Formula, Sequent};
use crate::kernel::{flow, tuple_bridge, typelist_pushout, FlowMode, Infomorphism, Tuple, TupleRelation, TypeList, TypeListMorphism};
use crate::name::{Key, Sort, Token};
use crate::speclogic::{consequence, soundness_check, Consequence, FormulaUniverse, Logic};
use crate::structure::{Structure, StructureMorphism, Table};

/// One keyed table per formula of a bounded universe.
#[derive(Clone, Debug)]
pub struct Database {
    logic: Logic,
    universe: FormulaUniverse,
    tables: BTreeMap<Formula, Table>,
    key_maps: BTreeMap<Constraint, BTreeMap<Key, Key>>,
}

/// Builds the database of a sound logic over the formulas of `u`, extended
/// by the formulas of the specification.
pub fn db_of_logic(l: &Logic, u: &FormulaUniverse) -> Result<Database> {
    let unsound = soundness_check(l)?;
    if !unsound.is_empty() {
        return Err(Error::UnsoundLogic(unsound.iter().map(ToString::to_string).collect()));
    }
    let mut universe = u.clone();
    universe.extend(l.spec().constraints().iter().flat_map(|c| c.formulas()))?;
    let m = l.structure();
    let tables = universe
        .formulas()
        .iter()
        .map(|f| Ok((f.clone(), m.table_interp(f)?)))
        .collect::<Result<_>>()?;
    let mut key_maps = BTreeMap::new();
    for c in l.spec().constraints() {
        let map = m
            .constraint_key_map(c)?
            .expect("a satisfied constraint has a key map");
        key_maps.insert(c.clone(), map);
    }
    Ok(Database {
        logic: l.clone(),
        universe,
        tables,
        key_maps,
    })
}

impl Database {
    pub fn logic(&self) -> &Logic {
        &self.logic
    }

    pub fn structure(&self) -> &Structure {
        self.logic.structure()
    }

    pub fn universe(&self) -> &FormulaUniverse {
        &self.universe
    }

    pub fn tables(&self) -> &BTreeMap<Formula, Table> {
        &self.tables
    }

    pub fn table(&self, phi: &Formula) -> Option<&Table> {
        self.tables.get(phi)
    }

    /// Key maps realizing the specification's constraints as table morphisms.
    pub fn spec_key_maps(&self) -> &BTreeMap<Constraint, BTreeMap<Key, Key>> {
        &self.key_maps
    }

    /// The key map realizing a sequent derivable from the specification, or
    /// `None` when it is not derivable within the universe.
    pub fn key_map(&self, closure: &Consequence, q: &Sequent) -> Result<Option<BTreeMap<Key, Key>>> {
        if !closure.derives(q) {
            return Ok(None);
        }
        self.structure().constraint_key_map(&Constraint::from(q.clone()))
    }

    /// The closure of the specification over this database's universe.
    pub fn consequence(&self) -> Result<Consequence> {
        consequence(self.logic.spec(), &self.universe)
    }

    /// Formulas grouped by the relation their tables denote; members of a
    /// group are informationally equivalent.
    pub fn equivalence_classes(&self) -> Vec<Vec<&Formula>> {
        let mut groups: BTreeMap<(&TypeList, BTreeSet<&Tuple>), Vec<&Formula>> = BTreeMap::new();
        for (f, t) in &self.tables {
            groups.entry((&t.type_list, t.rows.values().collect())).or_default().push(f);
        }
        groups.into_values().filter(|g| g.len() > 1).collect()
    }
}

/// `⟨F, ⟨f, g⟩, κ⟩ : db₂ ⇄ db₁`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatabaseMorphism {
    /// Formula passage from the tables of `db₂` to those of `db₁`.
    pub formula_map: BTreeMap<Formula, Formula>,
    pub info: Infomorphism<Sort, Token>,
    /// Per formula `φ` of `db₂`, the key map `K₁(Fφ) → K₂(φ)`.
    pub kappa: BTreeMap<Formula, BTreeMap<Key, Key>>,
}

/// The database morphism induced by a structure morphism `h : M₂ ⇄ M₁`,
/// checking `τ₂(κ(k)) = g ∘ τ₁(k)` for every tabulated formula and key.
pub fn db_morphism_of(h: &StructureMorphism, db2: &Database, db1: &Database) -> Result<DatabaseMorphism> {
    let m = h.schema_morphism();
    let info = h.entity_infomorphism();
    let mut formula_map = BTreeMap::new();
    let mut kappa = BTreeMap::new();
    for (phi, t2) in &db2.tables {
        let image = translate(&m, phi)?;
        let t1 = db1.tables.get(&image).ok_or_else(|| {
            Error::invalid("database morphism", format!("translated formula `{image}` has no table"))
        })?;
        let mut map = BTreeMap::new();
        for (k1, tuple1) in &t1.rows {
            let violated = || Error::ConditionViolated {
                formula: phi.to_string(),
                key: k1.clone(),
            };
            let k2 = h.key_map.get(k1).ok_or_else(violated)?;
            let tuple2 = t2.rows.get(k2).ok_or_else(violated)?;
            match tuple_bridge(&info, tuple1) {
                Ok(b) if &b == tuple2 => {}
                _ => return Err(violated()),
            }
            map.insert(k1.clone(), k2.clone());
        }
        formula_map.insert(phi.clone(), image);
        kappa.insert(phi.clone(), map);
    }
    Ok(DatabaseMorphism {
        formula_map,
        info,
        kappa,
    })
}

/// Two formulas indexed over a shared type list `I` through `h1: I → I₁`
/// and `h2: I → I₂`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinSpan {
    pub left: (TypeListMorphism, Formula),
    pub right: (TypeListMorphism, Formula),
}

/// The join of the two legs: `ι₁*(φ₁) ∧ ι₂*(φ₂)` over the pushout of the
/// span, with its relation computed from the legs' relation images.
pub fn join_via_formula(m: &Structure, span: &JoinSpan) -> Result<(Formula, TupleRelation)> {
    let (h1, phi1) = &span.left;
    let (h2, phi2) = &span.right;
    for (h, phi) in [(h1, phi1), (h2, phi2)] {
        let list = crate::formula::infer_typelist(m.schema(), phi)?;
        if &list != h.target() {
            return Err(Error::TypeMismatch(format!("join leg `{phi}` is over {list}, expected {}", h.target())));
        }
    }
    let p = typelist_pushout(h1, h2)?;
    let formula = Formula::meet(
        Formula::subst(p.left.clone(), phi1.clone()),
        Formula::subst(p.right.clone(), phi2.clone()),
    );
    let r1 = flow(m.entities(), &p.left, FlowMode::Inverse, &m.relation_interp(phi1)?)?;
    let r2 = flow(m.entities(), &p.right, FlowMode::Inverse, &m.relation_interp(phi2)?)?;
    Ok((formula, r1.intersection(&r2)))
}

/// A manifest entry: the table file of one formula.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub type_list: String,
    pub rows: usize,
}

pub type Manifest = BTreeMap<String, ManifestEntry>;

pub const MANIFEST_FILE: &str = "manifest.json";

/// `Go.csv` for an atom, `f_<hash>.csv` for any other formula.
pub fn table_file_name(phi: &Formula) -> String {
    match phi {
        Formula::Atom(r) => format!("{r}.csv"),
        other => {
            let digest = Sha256::digest(other.to_string().as_bytes());
            let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
            format!("f_{hex}.csv")
        }
    }
}

/// Writes one CSV per table and a JSON manifest into `dir`, returning the
/// paths written.
pub fn export(db: &Database, dir: &Path) -> Result<Vec<PathBuf>> {
    export_tables(db.tables.iter(), dir)
}

pub fn export_tables<'a>(tables: impl IntoIterator<Item = (&'a Formula, &'a Table)>, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut manifest = Manifest::new();
    let mut written = Vec::new();
    let mut names: BTreeSet<String> = BTreeSet::new();
    for (phi, table) in tables {
        let file = table_file_name(phi);
        if !names.insert(file.clone()) {
            return Err(Error::invalid("export", format!("file name `{file}` is not unique")));
        }
        let path = dir.join(&file);
        write_table(table, &path)?;
        manifest.insert(
            phi.to_string(),
            ManifestEntry {
                file,
                type_list: table.type_list.to_string(),
                rows: table.len(),
            },
        );
        written.push(path);
    }
    let path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&path, text)?;
    written.push(path);
    Ok(written)
}

fn write_table(table: &Table, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["_key".to_string()];
    header.extend(table.type_list.arity().map(|i| i.to_string()));
    w.write_record(&header)?;
    for (k, t) in &table.rows {
        let mut record = vec![k.to_string()];
        record.extend(t.values().map(|y| y.to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an exported table back as `(header, rows)`.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| Ok(rec?.iter().map(str::to_string).collect()))
        .collect::<Result<_>>()?;
    Ok((header, rows))
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
    Ok(serde_json::from_str(&text)?)
}
