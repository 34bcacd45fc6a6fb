//! Finite structures, formula evaluation, satisfaction, reducts and
//! structure morphisms.
//!
//! A structure pairs a relation classification (keys classified by
//! relation types) with an entity classification, linked by the signature
//! map `σ` of its schema and a tuple map `τ` sending every key to a tuple of
//! tokens. Formulas are evaluated to key sets. A formula over the type list
//! `L` only ever contains keys of the typed fiber `K_L`, the keys whose tuple
//! is classified by `L`; negation and implication complement within it.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::formula::{infer_typelist, Constraint, Formula, Sequent};
use crate::kernel::{
    inverse_image_classification, list_holds, preimages, tup_map, tuple_bridge, Classification, EntityClassification,
    Infomorphism, InfomorphismFinding, Tuple, TupleRelation, TypeList,
};
use crate::name::{Key, RelName, Sort, Token};
use crate::schema::{schema_morphism_validate, Schema, SchemaMorphism, SchemaMorphismFinding};

type KeySet = Arc<BTreeSet<Key>>;

pub struct Structure {
    schema: Arc<Schema>,
    entities: EntityClassification,
    relations: Classification<RelName, Key>,
    tau: BTreeMap<Key, Tuple>,
    memo: Mutex<HashMap<Formula, (TypeList, KeySet)>>,
    fibers: Mutex<HashMap<TypeList, KeySet>>,
}

impl Clone for Structure {
    fn clone(&self) -> Self {
        Structure {
            schema: self.schema.clone(),
            entities: self.entities.clone(),
            relations: self.relations.clone(),
            tau: self.tau.clone(),
            memo: Mutex::default(),
            fibers: Mutex::default(),
        }
    }
}

impl PartialEq for Structure {
    fn eq(&self, other: &Self) -> bool {
        self.schema == other.schema
            && self.entities == other.entities
            && self.relations == other.relations
            && self.tau == other.tau
    }
}

impl Eq for Structure {}

impl fmt::Debug for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Structure")
            .field("sorts", self.entities.types())
            .field("tokens", self.entities.tokens())
            .field("tau", &self.tau)
            .finish_non_exhaustive()
    }
}

/// A key whose tuple is not classified by the signature of a relation the
/// key is classified by.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureFinding {
    pub key: Key,
    pub relation: RelName,
}

impl fmt::Display for StructureFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "key `{}` is classified by `{}` but its tuple is not classified by the signature",
            self.key, self.relation
        )
    }
}

impl Structure {
    /// Builds a structure. The entity types must equal the schema's sorts,
    /// incidences must name declared relations, and tuples may only use
    /// declared tokens. The structure condition itself is not enforced; see
    /// [`structure_validate`].
    pub fn new(
        schema: Arc<Schema>,
        entities: EntityClassification,
        tau: BTreeMap<Key, Tuple>,
        incidence: impl IntoIterator<Item = (Key, RelName)>,
    ) -> Result<Self> {
        if entities.types() != schema.sorts() {
            return Err(Error::invalid(
                "structure",
                "entity types differ from the schema's sorts",
            ));
        }
        for (k, t) in &tau {
            if let Some(y) = t.values().find(|y| !entities.tokens().contains(*y)) {
                return Err(Error::invalid("structure", format!("key `{k}` uses undeclared token `{y}`")));
            }
        }
        let mut incidence: Vec<(Key, RelName)> = incidence.into_iter().collect();
        for (k, r) in &incidence {
            if !tau.contains_key(k) {
                return Err(Error::invalid("structure", format!("undeclared key `{k}`")));
            }
            if !schema.relations().contains_key(r) {
                return Err(Error::UnknownRelation(r.clone()));
            }
        }
        incidence.sort();
        let relations = Classification::new(schema.relations().keys().cloned(), tau.keys().cloned(), incidence)?;
        Ok(Structure {
            schema,
            entities,
            relations,
            tau,
            memo: Mutex::default(),
            fibers: Mutex::default(),
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn schema_arc(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn entities(&self) -> &EntityClassification {
        &self.entities
    }

    pub fn relations(&self) -> &Classification<RelName, Key> {
        &self.relations
    }

    pub fn keys(&self) -> &BTreeSet<Key> {
        self.relations.tokens()
    }

    pub fn tau(&self) -> &BTreeMap<Key, Tuple> {
        &self.tau
    }

    pub fn tuple(&self, k: &Key) -> Option<&Tuple> {
        self.tau.get(k)
    }

    /// `K_L`: keys whose tuple is classified by `list`.
    pub fn fiber(&self, list: &TypeList) -> Result<KeySet> {
        self.schema.check_list(list)?;
        if let Some(hit) = self.fibers.lock().expect("fiber cache").get(list) {
            return Ok(hit.clone());
        }
        let keys: BTreeSet<Key> = self
            .tau
            .iter()
            .filter(|(_, t)| list_holds(&self.entities, t, list))
            .map(|(k, _)| k.clone())
            .collect();
        let keys = Arc::new(keys);
        self.fibers
            .lock()
            .expect("fiber cache")
            .insert(list.clone(), keys.clone());
        Ok(keys)
    }

    fn image(&self, keys: &BTreeSet<Key>) -> BTreeSet<Tuple> {
        keys.iter().map(|k| self.tau[k].clone()).collect()
    }

    /// The extent of `φ` in the formula classification.
    pub fn eval(&self, phi: &Formula) -> Result<KeySet> {
        Ok(self.eval_typed(phi)?.1)
    }

    /// The extent of `φ` together with its type list.
    pub fn eval_typed(&self, phi: &Formula) -> Result<(TypeList, KeySet)> {
        if let Some(hit) = self.memo.lock().expect("eval cache").get(phi) {
            return Ok(hit.clone());
        }
        let result = self.eval_uncached(phi)?;
        self.memo
            .lock()
            .expect("eval cache")
            .insert(phi.clone(), result.clone());
        Ok(result)
    }

    fn eval_uncached(&self, phi: &Formula) -> Result<(TypeList, KeySet)> {
        let binary = |a: &Formula, b: &Formula| -> Result<(TypeList, KeySet, KeySet)> {
            let (la, ea) = self.eval_typed(a)?;
            let (lb, eb) = self.eval_typed(b)?;
            if la != lb {
                return Err(Error::TypeMismatch(format!(
                    "binary connective joins formulas over {la} and {lb}"
                )));
            }
            Ok((la, ea, eb))
        };
        let (list, keys): (TypeList, BTreeSet<Key>) = match phi {
            Formula::Atom(r) => {
                let list = self.schema.signature(r)?.clone();
                let ext = self.relations.extent(r);
                let keys = self.fiber(&list)?.iter().filter(|k| ext.contains(*k)).cloned().collect();
                (list, keys)
            }
            Formula::Top(l) => (l.clone(), (*self.fiber(l)?).clone()),
            Formula::Bottom(l) => {
                self.schema.check_list(l)?;
                (l.clone(), BTreeSet::new())
            }
            Formula::Meet(a, b) => {
                let (l, ea, eb) = binary(a, b)?;
                (l, ea.intersection(&eb).cloned().collect())
            }
            Formula::Join(a, b) => {
                let (l, ea, eb) = binary(a, b)?;
                (l, ea.union(&eb).cloned().collect())
            }
            Formula::Impl(a, b) => {
                let (l, ea, eb) = binary(a, b)?;
                let fiber = self.fiber(&l)?;
                let keys = fiber.iter().filter(|k| !ea.contains(*k) || eb.contains(*k)).cloned().collect();
                (l, keys)
            }
            Formula::Diff(a, b) => {
                let (l, ea, eb) = binary(a, b)?;
                (l, ea.difference(&eb).cloned().collect())
            }
            Formula::Neg(a) => {
                let (l, ea) = self.eval_typed(a)?;
                let keys = self.fiber(&l)?.difference(&ea).cloned().collect();
                (l, keys)
            }
            Formula::SumFlow(h, a) => {
                let r = self.flow_operand(h.target(), a)?;
                let image: BTreeSet<Tuple> = r.iter().map(|t| tup_map(h, t)).collect::<Result<_>>()?;
                let keys = self
                    .fiber(h.source())?
                    .iter()
                    .filter(|k| image.contains(&self.tau[*k]))
                    .cloned()
                    .collect();
                (h.source().clone(), keys)
            }
            Formula::ProdFlow(h, a) => {
                let r = self.flow_operand(h.target(), a)?;
                let mut keys = BTreeSet::new();
                for k in self.fiber(h.source())?.iter() {
                    let pre = preimages(&self.entities, h, &self.tau[k])?;
                    if pre.iter().all(|t| r.contains(t)) {
                        keys.insert(k.clone());
                    }
                }
                (h.source().clone(), keys)
            }
            Formula::Subst(h, a) => {
                let r = self.flow_operand(h.source(), a)?;
                let mut keys = BTreeSet::new();
                for k in self.fiber(h.target())?.iter() {
                    if r.contains(&tup_map(h, &self.tau[k])?) {
                        keys.insert(k.clone());
                    }
                }
                (h.target().clone(), keys)
            }
        };
        Ok((list, Arc::new(keys)))
    }

    fn flow_operand(&self, expected: &TypeList, a: &Formula) -> Result<BTreeSet<Tuple>> {
        self.schema.check_list(expected)?;
        let (la, ea) = self.eval_typed(a)?;
        if &la != expected {
            return Err(Error::TypeMismatch(format!(
                "flow expects a formula over {expected} but found one over {la}"
            )));
        }
        Ok(self.image(&ea))
    }

    /// `R(φ) = τ(eval φ)`.
    pub fn relation_interp(&self, phi: &Formula) -> Result<TupleRelation> {
        let (list, keys) = self.eval_typed(phi)?;
        Ok(TupleRelation {
            type_list: list,
            tuples: self.image(&keys),
        })
    }

    /// The keyed table of `φ`: its extent with `τ` restricted to it.
    pub fn table_interp(&self, phi: &Formula) -> Result<Table> {
        let (list, keys) = self.eval_typed(phi)?;
        Ok(Table {
            type_list: list,
            rows: keys.iter().map(|k| (k.clone(), self.tau[k].clone())).collect(),
        })
    }

    pub fn satisfies_sequent(&self, q: &Sequent) -> Result<bool> {
        let (ll, el) = self.eval_typed(&q.lhs)?;
        let (lr, er) = self.eval_typed(&q.rhs)?;
        if ll != lr {
            return Err(Error::TypeMismatch(format!("sequent joins formulas over {ll} and {lr}")));
        }
        Ok(el.is_subset(&er))
    }

    /// `eval(Σ_h φ) ⊆ eval(φ′)`.
    pub fn satisfies_constraint(&self, c: &Constraint) -> Result<bool> {
        self.satisfies_sequent(&c.as_sequent())
    }

    /// `eval(φ) ⊆ eval(h*φ′)`.
    pub fn satisfies_constraint_adjoint(&self, c: &Constraint) -> Result<bool> {
        self.satisfies_sequent(&c.as_adjoint_sequent())
    }

    /// `∃_h(R(φ)) ⊆ R(φ′)` on relation images.
    pub fn flow_image_included(&self, c: &Constraint) -> Result<bool> {
        let premise = self.relation_interp(&c.premise)?;
        let conclusion = self.relation_interp(&c.conclusion)?;
        let image: BTreeSet<Tuple> = match &c.along {
            None => premise.tuples,
            Some(h) => premise.tuples.iter().map(|t| tup_map(h, t)).collect::<Result<_>>()?,
        };
        Ok(image.is_subset(&conclusion.tuples))
    }

    /// A key function from the `Σ_h φ` table to the `φ′` table preserving
    /// tuples, if one exists. Keys map to themselves when possible.
    pub fn constraint_key_map(&self, c: &Constraint) -> Result<Option<BTreeMap<Key, Key>>> {
        let q = c.as_sequent();
        let source = self.table_interp(&q.lhs)?;
        let target = self.table_interp(&q.rhs)?;
        let mut by_tuple: BTreeMap<&Tuple, &Key> = BTreeMap::new();
        for (k, t) in target.rows.iter().rev() {
            by_tuple.insert(t, k);
        }
        let mut map = BTreeMap::new();
        for (k, t) in &source.rows {
            let image = if target.rows.contains_key(k) {
                k
            } else {
                match by_tuple.get(t) {
                    Some(k2) => *k2,
                    None => return Ok(None),
                }
            };
            map.insert(k.clone(), image.clone());
        }
        Ok(Some(map))
    }
}

/// A keyed table: the tabular interpretation of a formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub type_list: TypeList,
    pub rows: BTreeMap<Key, Tuple>,
}

impl Table {
    /// The deduplicated rows, which equal the relation interpretation.
    pub fn image(&self) -> TupleRelation {
        TupleRelation {
            type_list: self.type_list.clone(),
            tuples: self.rows.values().cloned().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Every `(k, r)` with `k ⊨ r` but `τ(k)` not classified by `σ(r)`.
pub fn structure_validate(m: &Structure) -> Vec<StructureFinding> {
    let mut out = Vec::new();
    for (k, r) in m.relations.incidence() {
        let ok = m
            .schema
            .relations()
            .get(r)
            .is_some_and(|sig| list_holds(&m.entities, &m.tau[k], sig));
        if !ok {
            out.push(StructureFinding {
                key: k.clone(),
                relation: r.clone(),
            });
        }
    }
    out.sort_by(|a, b| (&a.key, &a.relation).cmp(&(&b.key, &b.relation)));
    out
}

/// `⟨r, k, f, g⟩ : M₂ ⇄ M₁` with `r: R₂ → R₁`, `k: K₁ → K₂`, `f: X₂ → X₁`
/// and `g: Y₁ → Y₂`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StructureMorphism {
    pub rel_map: BTreeMap<RelName, RelName>,
    pub key_map: BTreeMap<Key, Key>,
    pub type_map: BTreeMap<Sort, Sort>,
    pub token_map: BTreeMap<Token, Token>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StructureMorphismFinding {
    Schema(SchemaMorphismFinding),
    Entity(InfomorphismFinding),
    Relation(InfomorphismFinding),
    TupleSquare { key: Key },
}

impl fmt::Display for StructureMorphismFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Schema(x) => write!(f, "schema part: {x}"),
            Self::Entity(x) => write!(f, "entity part: {x}"),
            Self::Relation(x) => write!(f, "relation part: {x}"),
            Self::TupleSquare { key } => write!(f, "tuple of key `{key}` is not preserved"),
        }
    }
}

impl StructureMorphism {
    pub fn identity(m: &Structure) -> Self {
        StructureMorphism {
            rel_map: m.schema.relations().keys().map(|r| (r.clone(), r.clone())).collect(),
            key_map: m.keys().iter().map(|k| (k.clone(), k.clone())).collect(),
            type_map: m.entities.types().iter().map(|x| (x.clone(), x.clone())).collect(),
            token_map: m.entities.tokens().iter().map(|y| (y.clone(), y.clone())).collect(),
        }
    }

    /// A morphism that is the identity on relation and entity types.
    pub fn vertical(schema: &Schema, key_map: BTreeMap<Key, Key>, token_map: BTreeMap<Token, Token>) -> Self {
        let id = SchemaMorphism::identity(schema);
        StructureMorphism {
            rel_map: id.rel_map,
            key_map,
            type_map: id.type_map,
            token_map,
        }
    }

    pub fn schema_morphism(&self) -> SchemaMorphism {
        SchemaMorphism::new(self.rel_map.clone(), self.type_map.clone())
    }

    pub fn entity_infomorphism(&self) -> Infomorphism<Sort, Token> {
        Infomorphism::new(self.type_map.clone(), self.token_map.clone())
    }

    pub fn relation_infomorphism(&self) -> Infomorphism<RelName, Key> {
        Infomorphism::new(self.rel_map.clone(), self.key_map.clone())
    }

    /// Diagrammatic composite of `self : M₃ ⇄ M₂` and `next : M₂ ⇄ M₁`.
    pub fn then(&self, next: &StructureMorphism) -> Result<StructureMorphism> {
        let s = self.schema_morphism().then(&next.schema_morphism())?;
        let ent = self.entity_infomorphism().then(&next.entity_infomorphism())?;
        let rel = self.relation_infomorphism().then(&next.relation_infomorphism())?;
        Ok(StructureMorphism {
            rel_map: s.rel_map,
            key_map: rel.token_map,
            type_map: s.type_map,
            token_map: ent.token_map,
        })
    }

    pub fn is_vertical(&self) -> bool {
        self.rel_map.iter().all(|(a, b)| a == b) && self.type_map.iter().all(|(a, b)| a == b)
    }
}

/// Checks `h : m2 ⇄ m1`: both infomorphism conditions, the signature
/// square, the tuple square `τ₂(k(κ)) = g∘τ₁(κ)`, and totality.
pub fn structure_morphism_validate(h: &StructureMorphism, m2: &Structure, m1: &Structure) -> Vec<StructureMorphismFinding> {
    let mut out: Vec<StructureMorphismFinding> = schema_morphism_validate(&h.schema_morphism(), &m2.schema, &m1.schema)
        .into_iter()
        .map(StructureMorphismFinding::Schema)
        .collect();
    out.extend(
        h.entity_infomorphism()
            .validate(&m2.entities, &m1.entities)
            .into_iter()
            .map(StructureMorphismFinding::Entity),
    );
    out.extend(
        h.relation_infomorphism()
            .validate(&m2.relations, &m1.relations)
            .into_iter()
            .map(StructureMorphismFinding::Relation),
    );
    let ent = h.entity_infomorphism();
    for (k1, t1) in &m1.tau {
        let Some(k2) = h.key_map.get(k1) else { continue };
        let Some(t2) = m2.tau.get(k2) else { continue };
        match tuple_bridge(&ent, t1) {
            Ok(bridged) if &bridged == t2 => {}
            _ => out.push(StructureMorphismFinding::TupleSquare { key: k1.clone() }),
        }
    }
    out
}

/// The reduct of `m1` along `m : s2 → sch(m1)`, with its bridge
/// `⟨r, id_K, f, id_Y⟩ : reduct ⇄ m1`.
pub fn reduct(m: &SchemaMorphism, s2: Arc<Schema>, m1: &Structure) -> Result<(Structure, StructureMorphism)> {
    if let Some(finding) = schema_morphism_validate(m, &s2, &m1.schema).into_iter().next() {
        return Err(Error::InvalidMorphism(finding.to_string()));
    }
    let type_map: BTreeMap<Sort, Sort> = s2.sorts().iter().map(|x| (x.clone(), m.type_map[x].clone())).collect();
    let rel_map: BTreeMap<RelName, RelName> = s2
        .relations()
        .keys()
        .map(|r| (r.clone(), m.rel_map[r].clone()))
        .collect();
    let entities = inverse_image_classification(&type_map, &m1.entities)?;
    let relations = inverse_image_classification(&rel_map, &m1.relations)?;
    let reduct = Structure {
        schema: s2,
        entities,
        relations,
        tau: m1.tau.clone(),
        memo: Mutex::default(),
        fibers: Mutex::default(),
    };
    let bridge = StructureMorphism {
        rel_map,
        key_map: m1.keys().iter().map(|k| (k.clone(), k.clone())).collect(),
        type_map,
        token_map: m1.entities.tokens().iter().map(|y| (y.clone(), y.clone())).collect(),
    };
    Ok((reduct, bridge))
}

/// True iff every sequent satisfied by `m2` is satisfied by `m1`.
pub fn intent_order_holds<'a>(m2: &Structure, m1: &Structure, sequents: impl IntoIterator<Item = &'a Sequent>) -> Result<bool> {
    if m2.schema != m1.schema {
        return Err(Error::TypeMismatch("structures are over different schemas".into()));
    }
    for q in sequents {
        if m2.satisfies_sequent(q)? && !m1.satisfies_sequent(q)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The first sequent satisfied by `m2` but not by `m1`, if any.
pub fn intent_order_witness<'a>(
    m2: &Structure,
    m1: &Structure,
    sequents: impl IntoIterator<Item = &'a Sequent>,
) -> Result<Option<Sequent>> {
    if m2.schema != m1.schema {
        return Err(Error::TypeMismatch("structures are over different schemas".into()));
    }
    for q in sequents {
        if m2.satisfies_sequent(q)? && !m1.satisfies_sequent(q)? {
            return Ok(Some(q.clone()));
        }
    }
    Ok(None)
}

/// Checks that `infer_typelist` accepts `φ` over the structure's schema.
pub fn typecheck(m: &Structure, phi: &Formula) -> Result<TypeList> {
    infer_typelist(&m.schema, phi)
}
