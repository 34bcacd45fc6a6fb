//! Type lists, classifications, infomorphisms, tuples and the three flow
//! operators on tuple relations.
//!
//! Arities are finite sets of named indices rather than ordinals, and tuples
//! are maps keyed by index, so two tuples are equal exactly when they agree
//! on every index.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::{Hash, Hasher};

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::name::{Index, Sort, Token};

/// A sort-labeled finite index set `⟨I, s⟩` used as a relational arity.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TypeList {
    sorts: BTreeMap<Index, Sort>,
}

impl TypeList {
    pub fn empty() -> Self {
        TypeList::default()
    }

    /// Builds a type list, rejecting repeated indices.
    pub fn new<I, S>(entries: impl IntoIterator<Item = (I, S)>) -> Result<Self>
    where
        I: Into<Index>,
        S: Into<Sort>,
    {
        let mut sorts = BTreeMap::new();
        for (i, s) in entries {
            let i = i.into();
            if sorts.insert(i.clone(), s.into()).is_some() {
                return Err(Error::invalid("type list", format!("index `{i}` repeated")));
            }
        }
        Ok(TypeList { sorts })
    }

    /// Infallible constructor for literal lists; panics on a repeated index.
    pub fn of(entries: &[(&str, &str)]) -> Self {
        TypeList::new(entries.iter().copied()).expect("type list literal with repeated index")
    }

    pub fn sort(&self, index: &Index) -> Option<&Sort> {
        self.sorts.get(index)
    }

    pub fn contains(&self, index: &Index) -> bool {
        self.sorts.contains_key(index)
    }

    pub fn arity(&self) -> impl Iterator<Item = &Index> + '_ {
        self.sorts.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Index, &Sort)> + '_ {
        self.sorts.iter()
    }

    pub fn len(&self) -> usize {
        self.sorts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorts.is_empty()
    }

    pub fn sorts_used(&self) -> BTreeSet<Sort> {
        self.sorts.values().cloned().collect()
    }

    pub(crate) fn same_arity(&self, other_arity: impl Iterator<Item = Index>) -> bool {
        self.sorts.keys().cloned().eq(other_arity)
    }

    pub(crate) fn arity_string(&self) -> String {
        join_display(self.sorts.keys())
    }
}

impl fmt::Display for TypeList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (n, (i, s)) in self.sorts.iter().enumerate() {
            if n > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{i}:{s}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for TypeList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// An arity function `h: I′ → I` between type lists with `h·s = s′`.
///
/// Equality, ordering and hashing ignore the optional `label`, which only
/// records the name a morphism was declared under so that printed formulas
/// can refer to it.
#[derive(Clone, Serialize, Deserialize)]
pub struct TypeListMorphism {
    source: TypeList,
    target: TypeList,
    map: BTreeMap<Index, Index>,
    #[serde(skip)]
    label: Option<String>,
}

impl PartialEq for TypeListMorphism {
    fn eq(&self, other: &Self) -> bool {
        self.source == other.source && self.target == other.target && self.map == other.map
    }
}

impl Eq for TypeListMorphism {}

impl PartialOrd for TypeListMorphism {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TypeListMorphism {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (&self.source, &self.target, &self.map).cmp(&(&other.source, &other.target, &other.map))
    }
}

impl Hash for TypeListMorphism {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.source.hash(state);
        self.target.hash(state);
        self.map.hash(state);
    }
}

impl TypeListMorphism {
    /// Checks totality, that every image lies in the target, and the sort
    /// condition `s(h(i′)) = s′(i′)`.
    pub fn new(source: TypeList, target: TypeList, map: BTreeMap<Index, Index>) -> Result<Self> {
        for i in source.arity() {
            let Some(j) = map.get(i) else {
                return Err(Error::InvalidMorphism(format!("index `{i}` of {source} is unmapped")));
            };
            let Some(tsort) = target.sort(j) else {
                return Err(Error::InvalidMorphism(format!("`{i}` maps to `{j}`, which is not in {target}")));
            };
            let ssort = source.sort(i).expect("source index");
            if ssort != tsort {
                return Err(Error::InvalidMorphism(format!(
                    "`{i}` has sort `{ssort}` but its image `{j}` has sort `{tsort}`"
                )));
            }
        }
        if let Some(extra) = map.keys().find(|i| !source.contains(i)) {
            return Err(Error::InvalidMorphism(format!("`{extra}` is not an index of {source}")));
        }
        Ok(TypeListMorphism {
            source,
            target,
            map,
            label: None,
        })
    }

    /// Convenience constructor from string pairs.
    pub fn from_pairs(source: TypeList, target: TypeList, pairs: &[(&str, &str)]) -> Result<Self> {
        let map = pairs.iter().map(|(a, b)| (Index::new(a), Index::new(b))).collect();
        TypeListMorphism::new(source, target, map)
    }

    pub fn identity(list: &TypeList) -> Self {
        let map = list.arity().map(|i| (i.clone(), i.clone())).collect();
        TypeListMorphism {
            source: list.clone(),
            target: list.clone(),
            map,
            label: None,
        }
    }

    /// The inclusion of a sub-list, which must agree with `sup` on shared indices.
    pub fn inclusion(sub: &TypeList, sup: &TypeList) -> Result<Self> {
        let map = sub.arity().map(|i| (i.clone(), i.clone())).collect();
        TypeListMorphism::new(sub.clone(), sup.clone(), map)
    }

    pub fn source(&self) -> &TypeList {
        &self.source
    }

    pub fn target(&self) -> &TypeList {
        &self.target
    }

    pub fn map(&self) -> &BTreeMap<Index, Index> {
        &self.map
    }

    pub fn apply(&self, i: &Index) -> Option<&Index> {
        self.map.get(i)
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn without_label(mut self) -> Self {
        self.label = None;
        self
    }

    pub fn is_identity(&self) -> bool {
        self.source == self.target && self.map.iter().all(|(a, b)| a == b)
    }

    /// Diagrammatic composite: first `self`, then `next`.
    pub fn then(&self, next: &TypeListMorphism) -> Result<TypeListMorphism> {
        if self.target != next.source {
            return Err(Error::CompositionMismatch(format!(
                "target {} differs from source {}",
                self.target, next.source
            )));
        }
        let map = self
            .map
            .iter()
            .map(|(i, j)| (i.clone(), next.map[j].clone()))
            .collect();
        Ok(TypeListMorphism {
            source: self.source.clone(),
            target: next.target.clone(),
            map,
            label: None,
        })
    }

    /// Re-sorts both endpoints along a type function, keeping the arity map.
    pub fn resort(&self, f: &BTreeMap<Sort, Sort>) -> Result<TypeListMorphism> {
        Ok(TypeListMorphism {
            source: sum_along(f, &self.source)?,
            target: sum_along(f, &self.target)?,
            map: self.map.clone(),
            label: None,
        })
    }
}

impl fmt::Display for TypeListMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} <", self.source, self.target)?;
        for (n, (a, b)) in self.map.iter().enumerate() {
            if n > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}->{b}")?;
        }
        f.write_str(">")
    }
}

impl fmt::Debug for TypeListMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A classification `⟨X, Y, ⊨⟩`: types, tokens and an incidence relation.
///
/// Used both for entity classifications (sorts over tokens) and for the
/// relation classification of a structure (relation types over keys).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification<X: Ord, Y: Ord> {
    types: BTreeSet<X>,
    tokens: BTreeSet<Y>,
    extents: BTreeMap<X, BTreeSet<Y>>,
}

pub type EntityClassification = Classification<Sort, Token>;

impl<X, Y> Classification<X, Y>
where
    X: Ord + Clone + fmt::Display,
    Y: Ord + Clone + fmt::Display,
{
    pub fn new(
        types: impl IntoIterator<Item = X>,
        tokens: impl IntoIterator<Item = Y>,
        incidence: impl IntoIterator<Item = (Y, X)>,
    ) -> Result<Self> {
        let types: BTreeSet<X> = types.into_iter().collect();
        let tokens: BTreeSet<Y> = tokens.into_iter().collect();
        let mut extents: BTreeMap<X, BTreeSet<Y>> =
            types.iter().map(|x| (x.clone(), BTreeSet::new())).collect();
        for (y, x) in incidence {
            if !tokens.contains(&y) {
                return Err(Error::invalid("classification", format!("undeclared token `{y}`")));
            }
            match extents.get_mut(&x) {
                Some(ext) => {
                    ext.insert(y);
                }
                None => return Err(Error::invalid("classification", format!("undeclared type `{x}`"))),
            }
        }
        Ok(Classification {
            types,
            tokens,
            extents,
        })
    }

    pub fn types(&self) -> &BTreeSet<X> {
        &self.types
    }

    pub fn tokens(&self) -> &BTreeSet<Y> {
        &self.tokens
    }

    pub fn holds(&self, token: &Y, ty: &X) -> bool {
        self.extents.get(ty).is_some_and(|e| e.contains(token))
    }

    /// Tokens classified by `ty`; empty for an undeclared type.
    pub fn extent(&self, ty: &X) -> &BTreeSet<Y> {
        static_empty::<Y>(self.extents.get(ty))
    }

    pub fn intent(&self, token: &Y) -> BTreeSet<X> {
        self.extents
            .iter()
            .filter(|(_, ext)| ext.contains(token))
            .map(|(x, _)| x.clone())
            .collect()
    }

    pub fn incidence(&self) -> impl Iterator<Item = (&Y, &X)> + '_ {
        self.extents.iter().flat_map(|(x, ext)| ext.iter().map(move |y| (y, x)))
    }

    pub fn incidence_len(&self) -> usize {
        self.extents.values().map(BTreeSet::len).sum()
    }
}

fn static_empty<Y: Ord>(found: Option<&BTreeSet<Y>>) -> &BTreeSet<Y> {
    found.unwrap_or(const { &BTreeSet::new() })
}

/// An infomorphism `⟨f, g⟩ : C₂ ⇄ C₁` with `f: X₂ → X₁` on types and
/// `g: Y₁ → Y₂` on tokens, satisfying `y₁ ⊨₁ f(x₂)` iff `g(y₁) ⊨₂ x₂`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Infomorphism<X: Ord, Y: Ord> {
    pub type_map: BTreeMap<X, X>,
    pub token_map: BTreeMap<Y, Y>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InfomorphismFinding {
    UnmappedType(String),
    TypeOutsideCodomain { ty: String, image: String },
    UnmappedToken(String),
    TokenOutsideCodomain { token: String, image: String },
    Condition { token: String, ty: String },
}

impl fmt::Display for InfomorphismFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfomorphismFinding::UnmappedType(x) => write!(f, "type `{x}` is unmapped"),
            InfomorphismFinding::TypeOutsideCodomain { ty, image } => {
                write!(f, "type `{ty}` maps to `{image}`, which is not a type of the target")
            }
            InfomorphismFinding::UnmappedToken(y) => write!(f, "token `{y}` is unmapped"),
            InfomorphismFinding::TokenOutsideCodomain { token, image } => {
                write!(f, "token `{token}` maps to `{image}`, which is not a token of the source")
            }
            InfomorphismFinding::Condition { token, ty } => {
                write!(f, "infomorphism condition fails at token `{token}`, type `{ty}`")
            }
        }
    }
}

impl<X, Y> Infomorphism<X, Y>
where
    X: Ord + Clone + fmt::Display,
    Y: Ord + Clone + fmt::Display,
{
    pub fn new(type_map: BTreeMap<X, X>, token_map: BTreeMap<Y, Y>) -> Self {
        Infomorphism { type_map, token_map }
    }

    pub fn identity(c: &Classification<X, Y>) -> Self {
        Infomorphism {
            type_map: c.types().iter().map(|x| (x.clone(), x.clone())).collect(),
            token_map: c.tokens().iter().map(|y| (y.clone(), y.clone())).collect(),
        }
    }

    /// Validates `self : c2 ⇄ c1`. Empty iff valid.
    pub fn validate(&self, c2: &Classification<X, Y>, c1: &Classification<X, Y>) -> Vec<InfomorphismFinding> {
        let mut findings = Vec::new();
        for x2 in c2.types() {
            match self.type_map.get(x2) {
                None => findings.push(InfomorphismFinding::UnmappedType(x2.to_string())),
                Some(x1) if !c1.types().contains(x1) => findings.push(InfomorphismFinding::TypeOutsideCodomain {
                    ty: x2.to_string(),
                    image: x1.to_string(),
                }),
                _ => {}
            }
        }
        for y1 in c1.tokens() {
            match self.token_map.get(y1) {
                None => findings.push(InfomorphismFinding::UnmappedToken(y1.to_string())),
                Some(y2) if !c2.tokens().contains(y2) => findings.push(InfomorphismFinding::TokenOutsideCodomain {
                    token: y1.to_string(),
                    image: y2.to_string(),
                }),
                _ => {}
            }
        }
        if !findings.is_empty() {
            return findings;
        }
        for y1 in c1.tokens() {
            let y2 = &self.token_map[y1];
            for x2 in c2.types() {
                let x1 = &self.type_map[x2];
                if c1.holds(y1, x1) != c2.holds(y2, x2) {
                    findings.push(InfomorphismFinding::Condition {
                        token: y1.to_string(),
                        ty: x2.to_string(),
                    });
                }
            }
        }
        findings
    }

    /// Diagrammatic composite of `self : C₃ ⇄ C₂` and `next : C₂ ⇄ C₁`.
    pub fn then(&self, next: &Infomorphism<X, Y>) -> Result<Infomorphism<X, Y>> {
        let type_map = self
            .type_map
            .iter()
            .map(|(x3, x2)| {
                next.type_map
                    .get(x2)
                    .map(|x1| (x3.clone(), x1.clone()))
                    .ok_or_else(|| Error::CompositionMismatch(format!("type `{x2}` unmapped")))
            })
            .collect::<Result<_>>()?;
        let token_map = next
            .token_map
            .iter()
            .map(|(y1, y2)| {
                self.token_map
                    .get(y2)
                    .map(|y3| (y1.clone(), y3.clone()))
                    .ok_or_else(|| Error::CompositionMismatch(format!("token `{y2}` unmapped")))
            })
            .collect::<Result<_>>()?;
        Ok(Infomorphism { type_map, token_map })
    }
}

/// A tuple `⟨J, t⟩`: a total assignment of tokens to the indices of its arity.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tuple {
    values: BTreeMap<Index, Token>,
}

impl Tuple {
    pub fn empty() -> Self {
        Tuple::default()
    }

    pub fn new<I, T>(entries: impl IntoIterator<Item = (I, T)>) -> Self
    where
        I: Into<Index>,
        T: Into<Token>,
    {
        Tuple {
            values: entries.into_iter().map(|(i, t)| (i.into(), t.into())).collect(),
        }
    }

    pub fn of(entries: &[(&str, &str)]) -> Self {
        Tuple::new(entries.iter().copied())
    }

    pub fn get(&self, index: &Index) -> Option<&Token> {
        self.values.get(index)
    }

    pub fn arity(&self) -> impl Iterator<Item = &Index> + '_ {
        self.values.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Index, &Token)> + '_ {
        self.values.iter()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = &Token> + '_ {
        self.values.values()
    }

    pub(crate) fn arity_string(&self) -> String {
        join_display(self.values.keys())
    }
}

impl FromIterator<(Index, Token)> for Tuple {
    fn from_iter<T: IntoIterator<Item = (Index, Token)>>(iter: T) -> Self {
        Tuple {
            values: iter.into_iter().collect(),
        }
    }
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (n, (i, t)) in self.values.iter().enumerate() {
            if n > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{i}:{t}")?;
        }
        f.write_str(")")
    }
}

impl fmt::Debug for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A set of tuples over a fixed type list.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TupleRelation {
    pub type_list: TypeList,
    pub tuples: BTreeSet<Tuple>,
}

impl TupleRelation {
    pub fn empty(type_list: TypeList) -> Self {
        TupleRelation {
            type_list,
            tuples: BTreeSet::new(),
        }
    }

    /// Builds a relation, checking that every tuple is classified by the list.
    pub fn new(e: &EntityClassification, type_list: TypeList, tuples: impl IntoIterator<Item = Tuple>) -> Result<Self> {
        let tuples: BTreeSet<Tuple> = tuples.into_iter().collect();
        if let Some(bad) = tuples.iter().find(|t| !list_holds(e, t, &type_list)) {
            return Err(Error::invalid(
                "tuple relation",
                format!("tuple {bad} is not classified by {type_list}"),
            ));
        }
        Ok(TupleRelation { type_list, tuples })
    }

    pub fn contains(&self, t: &Tuple) -> bool {
        self.tuples.contains(t)
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn is_subset(&self, other: &TupleRelation) -> bool {
        self.tuples.is_subset(&other.tuples)
    }

    pub fn intersection(&self, other: &TupleRelation) -> TupleRelation {
        TupleRelation {
            type_list: self.type_list.clone(),
            tuples: self.tuples.intersection(&other.tuples).cloned().collect(),
        }
    }
}

/// `⟨J, t⟩ ⊨ ⟨I, s⟩`: equal arities and every value classified by its sort.
pub fn list_holds(e: &EntityClassification, t: &Tuple, list: &TypeList) -> bool {
    t.len() == list.len()
        && list
            .iter()
            .all(|(i, s)| t.get(i).is_some_and(|y| e.holds(y, s)))
}

fn check_sorts(e: &EntityClassification, list: &TypeList) -> Result<()> {
    match list.iter().find(|(_, s)| !e.types().contains(*s)) {
        Some((_, s)) => Err(Error::UnknownSort(s.clone())),
        None => Ok(()),
    }
}

/// The extent of a type list: every tuple it classifies.
pub fn tup(e: &EntityClassification, list: &TypeList) -> Result<TupleRelation> {
    tup_with_cap(e, list, Limits::global().max_tuples)
}

pub fn tup_with_cap(e: &EntityClassification, list: &TypeList, cap: usize) -> Result<TupleRelation> {
    check_sorts(e, list)?;
    let mut size: usize = 1;
    for (_, s) in list.iter() {
        size = size.saturating_mul(e.extent(s).len());
    }
    if size > cap {
        return Err(Error::CapacityExceeded {
            what: "tuple enumeration",
            limit: cap,
        });
    }
    let fixed = Tuple::empty();
    let free: Vec<(Index, Sort)> = list.iter().map(|(i, s)| (i.clone(), s.clone())).collect();
    let mut tuples = BTreeSet::new();
    extend_assignments(e, &fixed, &free, &mut |t| {
        tuples.insert(t);
    });
    Ok(TupleRelation {
        type_list: list.clone(),
        tuples,
    })
}

/// Calls `sink` with every extension of `fixed` by an assignment of the
/// `free` indices to tokens in the extents of their sorts.
fn extend_assignments(
    e: &EntityClassification,
    fixed: &Tuple,
    free: &[(Index, Sort)],
    sink: &mut dyn FnMut(Tuple),
) {
    fn go(
        e: &EntityClassification,
        current: &mut BTreeMap<Index, Token>,
        free: &[(Index, Sort)],
        sink: &mut dyn FnMut(Tuple),
    ) {
        match free.split_first() {
            None => sink(Tuple {
                values: current.clone(),
            }),
            Some(((i, s), rest)) => {
                for y in e.extent(s) {
                    current.insert(i.clone(), y.clone());
                    go(e, current, rest, sink);
                }
                current.remove(i);
            }
        }
    }
    let mut current = fixed.values.clone();
    go(e, &mut current, free, sink);
}

/// Precomposition `t ↦ h·t`, sending a tuple over the target of `h` to a
/// tuple over its source.
pub fn tup_map(h: &TypeListMorphism, t: &Tuple) -> Result<Tuple> {
    if !h.target().same_arity(t.arity().cloned()) {
        return Err(Error::ArityMismatch {
            expected: h.target().arity_string(),
            found: t.arity_string(),
        });
    }
    Ok(h.map()
        .iter()
        .map(|(i_src, i_tgt)| (i_src.clone(), t.values[i_tgt].clone()))
        .collect())
}

/// All `t ∈ tup(target(h))` with `tup_map(h, t) = image`.
///
/// Empty when `image` is not in the range of `tup_map(h)`, in particular when
/// it assigns different tokens to two indices identified by `h`.
pub fn preimages(e: &EntityClassification, h: &TypeListMorphism, image: &Tuple) -> Result<Vec<Tuple>> {
    if !h.source().same_arity(image.arity().cloned()) {
        return Err(Error::ArityMismatch {
            expected: h.source().arity_string(),
            found: image.arity_string(),
        });
    }
    check_sorts(e, h.target())?;
    let mut fixed: BTreeMap<Index, Token> = BTreeMap::new();
    for (i_src, i_tgt) in h.map() {
        let y = &image.values[i_src];
        if !e.holds(y, h.target().sort(i_tgt).expect("target index")) {
            return Ok(Vec::new());
        }
        match fixed.get(i_tgt) {
            Some(prev) if prev != y => return Ok(Vec::new()),
            _ => {
                fixed.insert(i_tgt.clone(), y.clone());
            }
        }
    }
    let free: Vec<(Index, Sort)> = h
        .target()
        .iter()
        .filter(|(i, _)| !fixed.contains_key(*i))
        .map(|(i, s)| (i.clone(), s.clone()))
        .collect();
    let mut size: usize = 1;
    for (_, s) in &free {
        size = size.saturating_mul(e.extent(s).len());
    }
    let cap = Limits::global().max_tuples;
    if size > cap {
        return Err(Error::CapacityExceeded {
            what: "preimage enumeration",
            limit: cap,
        });
    }
    let mut out = Vec::new();
    extend_assignments(e, &Tuple { values: fixed }, &free, &mut |t| out.push(t));
    Ok(out)
}

/// The three flow operators along a tuple map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FlowMode {
    /// Direct image `∃`.
    Exists,
    /// Universal image `∀`.
    Forall,
    /// Inverse image.
    Inverse,
}

/// Flow along an arbitrary tuple map `tup(domain) → tup(codomain)`.
///
/// `Exists` and `Forall` take a relation over `domain` to one over
/// `codomain`; `Inverse` goes the other way.
pub fn flow_along(
    e: &EntityClassification,
    domain: &TypeList,
    codomain: &TypeList,
    map: &dyn Fn(&Tuple) -> Result<Tuple>,
    mode: FlowMode,
    relation: &TupleRelation,
) -> Result<TupleRelation> {
    let expected = match mode {
        FlowMode::Exists | FlowMode::Forall => domain,
        FlowMode::Inverse => codomain,
    };
    if &relation.type_list != expected {
        return Err(Error::ArityMismatch {
            expected: expected.to_string(),
            found: relation.type_list.to_string(),
        });
    }
    match mode {
        FlowMode::Exists => {
            let tuples = relation.tuples.iter().map(map).collect::<Result<_>>()?;
            Ok(TupleRelation {
                type_list: codomain.clone(),
                tuples,
            })
        }
        FlowMode::Forall => {
            let mut rejected = BTreeSet::new();
            for t in tup(e, domain)?.tuples {
                if !relation.contains(&t) {
                    rejected.insert(map(&t)?);
                }
            }
            let tuples = tup(e, codomain)?
                .tuples
                .into_iter()
                .filter(|t| !rejected.contains(t))
                .collect();
            Ok(TupleRelation {
                type_list: codomain.clone(),
                tuples,
            })
        }
        FlowMode::Inverse => {
            let mut tuples = BTreeSet::new();
            for t in tup(e, domain)?.tuples {
                if relation.contains(&map(&t)?) {
                    tuples.insert(t);
                }
            }
            Ok(TupleRelation {
                type_list: domain.clone(),
                tuples,
            })
        }
    }
}

/// Flow along a type-list morphism `h: ⟨I′,s′⟩ → ⟨I,s⟩`, whose tuple map
/// runs `tup(I,s) → tup(I′,s′)`.
pub fn flow(e: &EntityClassification, h: &TypeListMorphism, mode: FlowMode, relation: &TupleRelation) -> Result<TupleRelation> {
    flow_along(e, h.target(), h.source(), &|t| tup_map(h, t), mode, relation)
}

/// `Σ_f`: relabels the sorts of a type list along a type function.
pub fn sum_along(f: &BTreeMap<Sort, Sort>, list: &TypeList) -> Result<TypeList> {
    let sorts = list
        .iter()
        .map(|(i, s)| {
            f.get(s)
                .map(|s1| (i.clone(), s1.clone()))
                .ok_or_else(|| Error::UnknownSort(s.clone()))
        })
        .collect::<Result<_>>()?;
    Ok(TypeList { sorts })
}

/// The inverse image of `c1` along a type map: types are the map's domain,
/// tokens are unchanged, and `y ⊨ x₂` iff `y ⊨₁ map(x₂)`.
pub fn inverse_image_classification<X, Y>(map: &BTreeMap<X, X>, c1: &Classification<X, Y>) -> Result<Classification<X, Y>>
where
    X: Ord + Clone + fmt::Display,
    Y: Ord + Clone + fmt::Display,
{
    if let Some(x1) = map.values().find(|x1| !c1.types().contains(*x1)) {
        return Err(Error::UnknownType(x1.to_string()));
    }
    let extents = map
        .iter()
        .map(|(x2, x1)| (x2.clone(), c1.extent(x1).clone()))
        .collect();
    Ok(Classification {
        types: map.keys().cloned().collect(),
        tokens: c1.tokens().clone(),
        extents,
    })
}

/// Pointwise postcomposition of a tuple with the token map of an infomorphism.
pub fn tuple_bridge(m: &Infomorphism<Sort, Token>, t: &Tuple) -> Result<Tuple> {
    t.iter()
        .map(|(i, y)| {
            m.token_map
                .get(y)
                .map(|y2| (i.clone(), y2.clone()))
                .ok_or_else(|| Error::UnknownToken(y.clone()))
        })
        .collect()
}

/// The fibered sum of a span of type lists, with its two injections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pushout {
    pub list: TypeList,
    pub left: TypeListMorphism,
    pub right: TypeListMorphism,
}

/// Fibered sum `(I₁ ⊔ I₂)/~` with `h1(i) ~ h2(i)` for every shared index `i`.
///
/// The legs must have sources of equal arity. Each class is named after one
/// of its members (left members first); names that would collide get a
/// `_1`/`_2` suffix by side.
pub fn typelist_pushout(h1: &TypeListMorphism, h2: &TypeListMorphism) -> Result<Pushout> {
    if !h1.source().same_arity(h2.source().arity().cloned()) {
        return Err(Error::ArityMismatch {
            expected: h1.source().arity_string(),
            found: h2.source().arity_string(),
        });
    }
    let left: Vec<(&Index, &Sort)> = h1.target().iter().collect();
    let right: Vec<(&Index, &Sort)> = h2.target().iter().collect();
    let pos_left: BTreeMap<&Index, usize> = left.iter().enumerate().map(|(n, (i, _))| (*i, n)).collect();
    let pos_right: BTreeMap<&Index, usize> = right
        .iter()
        .enumerate()
        .map(|(n, (i, _))| (*i, left.len() + n))
        .collect();
    let sort_of = |n: usize| if n < left.len() { left[n].1 } else { right[n - left.len()].1 };
    let name_of = |n: usize| if n < left.len() { left[n].0 } else { right[n - left.len()].0 };

    let total = left.len() + right.len();
    let mut uf = UnionFind::<usize>::new(total);
    for i in h1.source().arity() {
        let a = pos_left[h1.apply(i).expect("total")];
        let b = pos_right[h2.apply(i).expect("total")];
        let (sa, sb) = (sort_of(a), sort_of(b));
        if sa != sb {
            return Err(Error::SortClash {
                index: i.to_string(),
                left: sa.clone(),
                right: sb.clone(),
            });
        }
        uf.union(a, b);
    }

    // Classes in order of their first member; candidate name from that member.
    let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for n in 0..total {
        classes.entry(uf.find(n)).or_default().push(n);
    }
    let mut ordered: Vec<Vec<usize>> = classes.into_values().collect();
    ordered.sort_by_key(|members| members[0]);
    let candidates: Vec<(String, bool)> = ordered
        .iter()
        .map(|members| (name_of(members[0]).to_string(), members[0] < left.len()))
        .collect();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for (c, _) in &candidates {
        *counts.entry(c.as_str()).or_default() += 1;
    }
    let mut used: BTreeSet<String> = BTreeSet::new();
    let mut class_name: Vec<Index> = Vec::with_capacity(ordered.len());
    for (cand, from_left) in &candidates {
        let mut name = if counts[cand.as_str()] > 1 {
            format!("{cand}_{}", if *from_left { 1 } else { 2 })
        } else {
            cand.clone()
        };
        let mut bump = 2;
        while used.contains(&name) || (counts[cand.as_str()] > 1 && counts.contains_key(name.as_str())) {
            name = format!("{cand}_{bump}");
            bump += 1;
        }
        used.insert(name.clone());
        class_name.push(Index::new(name));
    }
    let mut class_of = vec![0usize; total];
    for (c, members) in ordered.iter().enumerate() {
        for &n in members {
            class_of[n] = c;
        }
    }
    let list = TypeList {
        sorts: ordered
            .iter()
            .enumerate()
            .map(|(c, members)| (class_name[c].clone(), sort_of(members[0]).clone()))
            .collect(),
    };
    let leg = |side: &[(&Index, &Sort)], offset: usize, target_list: &TypeList| -> Result<TypeListMorphism> {
        let map = side
            .iter()
            .enumerate()
            .map(|(n, (i, _))| ((*i).clone(), class_name[class_of[offset + n]].clone()))
            .collect();
        TypeListMorphism::new(target_list.clone(), list.clone(), map)
    };
    Ok(Pushout {
        left: leg(&left, 0, h1.target())?,
        right: leg(&right, left.len(), h2.target())?,
        list: list.clone(),
    })
}

fn join_display<T: fmt::Display>(items: impl Iterator<Item = T>) -> String {
    items.map(|i| i.to_string()).collect::<Vec<_>>().join(",")
}
