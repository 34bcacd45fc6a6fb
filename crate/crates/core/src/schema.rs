//! Relational schemas `⟨R, σ, X⟩` and schema morphisms `⟨r, f⟩`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::kernel::{sum_along, TypeList};
use crate::name::{RelName, Sort};

/// Entity types, relation types, and a signature for every relation type.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Schema {
    sorts: BTreeSet<Sort>,
    relations: BTreeMap<RelName, TypeList>,
}

/// One problem found by [`schema_validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SchemaFinding {
    UnknownSort { relation: RelName, sort: Sort },
}

impl fmt::Display for SchemaFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemaFinding::UnknownSort { relation, sort } => {
                write!(f, "relation `{relation}` uses undeclared sort `{sort}`")
            }
        }
    }
}

impl Schema {
    /// Builds a schema without checking signatures; see [`schema_validate`]
    /// and [`Schema::checked`].
    pub fn new(sorts: impl IntoIterator<Item = Sort>, relations: impl IntoIterator<Item = (RelName, TypeList)>) -> Self {
        Schema {
            sorts: sorts.into_iter().collect(),
            relations: relations.into_iter().collect(),
        }
    }

    /// Like [`Schema::new`] but fails on the first ill-sorted signature.
    pub fn checked(sorts: impl IntoIterator<Item = Sort>, relations: impl IntoIterator<Item = (RelName, TypeList)>) -> Result<Self> {
        let s = Schema::new(sorts, relations);
        match schema_validate(&s).into_iter().next() {
            Some(SchemaFinding::UnknownSort { sort, .. }) => Err(Error::UnknownSort(sort)),
            None => Ok(s),
        }
    }

    pub fn sorts(&self) -> &BTreeSet<Sort> {
        &self.sorts
    }

    pub fn relations(&self) -> &BTreeMap<RelName, TypeList> {
        &self.relations
    }

    pub fn has_sort(&self, s: &Sort) -> bool {
        self.sorts.contains(s)
    }

    pub fn signature(&self, r: &RelName) -> Result<&TypeList> {
        self.relations.get(r).ok_or_else(|| Error::UnknownRelation(r.clone()))
    }

    /// Fails with `UnknownSort` if `list` uses a sort outside `X`.
    pub fn check_list(&self, list: &TypeList) -> Result<()> {
        match list.iter().find(|(_, s)| !self.sorts.contains(*s)) {
            Some((_, s)) => Err(Error::UnknownSort(s.clone())),
            None => Ok(()),
        }
    }
}

/// Every relation whose signature mentions an undeclared sort.
pub fn schema_validate(s: &Schema) -> Vec<SchemaFinding> {
    let mut out = Vec::new();
    for (r, list) in &s.relations {
        for sort in list.sorts_used() {
            if !s.sorts.contains(&sort) {
                out.push(SchemaFinding::UnknownSort {
                    relation: r.clone(),
                    sort,
                });
            }
        }
    }
    out
}

/// A schema morphism `⟨r, f⟩ : S₂ → S₁` with `r: R₂ → R₁` and `f: X₂ → X₁`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SchemaMorphism {
    pub rel_map: BTreeMap<RelName, RelName>,
    pub type_map: BTreeMap<Sort, Sort>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SchemaMorphismFinding {
    UnmappedRelation(RelName),
    RelationOutsideTarget { relation: RelName, image: RelName },
    UnmappedSort(Sort),
    SortOutsideTarget { sort: Sort, image: Sort },
    Signature { relation: RelName, expected: TypeList, found: TypeList },
}

impl fmt::Display for SchemaMorphismFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UnmappedRelation(r) => write!(f, "relation `{r}` is unmapped"),
            Self::RelationOutsideTarget { relation, image } => {
                write!(f, "relation `{relation}` maps to `{image}`, which is not in the target schema")
            }
            Self::UnmappedSort(s) => write!(f, "sort `{s}` is unmapped"),
            Self::SortOutsideTarget { sort, image } => {
                write!(f, "sort `{sort}` maps to `{image}`, which is not in the target schema")
            }
            Self::Signature {
                relation,
                expected,
                found,
            } => write!(
                f,
                "signature of `{relation}` translates to {expected} but its image has signature {found}"
            ),
        }
    }
}

impl SchemaMorphism {
    pub fn new(rel_map: BTreeMap<RelName, RelName>, type_map: BTreeMap<Sort, Sort>) -> Self {
        SchemaMorphism { rel_map, type_map }
    }

    pub fn identity(s: &Schema) -> Self {
        SchemaMorphism {
            rel_map: s.relations.keys().map(|r| (r.clone(), r.clone())).collect(),
            type_map: s.sorts.iter().map(|x| (x.clone(), x.clone())).collect(),
        }
    }

    pub fn rel(&self, r: &RelName) -> Result<&RelName> {
        self.rel_map.get(r).ok_or_else(|| Error::UnknownRelation(r.clone()))
    }

    pub fn sort(&self, s: &Sort) -> Result<&Sort> {
        self.type_map.get(s).ok_or_else(|| Error::UnknownSort(s.clone()))
    }

    /// `Σ_f` on type lists.
    pub fn list(&self, list: &TypeList) -> Result<TypeList> {
        sum_along(&self.type_map, list)
    }

    /// Diagrammatic composite of `self : S₃ → S₂` and `next : S₂ → S₁`.
    pub fn then(&self, next: &SchemaMorphism) -> Result<SchemaMorphism> {
        let rel_map = self
            .rel_map
            .iter()
            .map(|(a, b)| match next.rel_map.get(b) {
                Some(c) => Ok((a.clone(), c.clone())),
                None => Err(Error::CompositionMismatch(format!("relation `{b}` is not in the domain of the second morphism"))),
            })
            .collect::<Result<_>>()?;
        let type_map = self
            .type_map
            .iter()
            .map(|(a, b)| match next.type_map.get(b) {
                Some(c) => Ok((a.clone(), c.clone())),
                None => Err(Error::CompositionMismatch(format!("sort `{b}` is not in the domain of the second morphism"))),
            })
            .collect::<Result<_>>()?;
        Ok(SchemaMorphism { rel_map, type_map })
    }
}

/// Checks totality and `σ₁(r(ρ)) = Σ_f(σ₂(ρ))` for `m : s2 → s1`.
pub fn schema_morphism_validate(m: &SchemaMorphism, s2: &Schema, s1: &Schema) -> Vec<SchemaMorphismFinding> {
    let mut out = Vec::new();
    for x in &s2.sorts {
        match m.type_map.get(x) {
            None => out.push(SchemaMorphismFinding::UnmappedSort(x.clone())),
            Some(y) if !s1.sorts.contains(y) => out.push(SchemaMorphismFinding::SortOutsideTarget {
                sort: x.clone(),
                image: y.clone(),
            }),
            _ => {}
        }
    }
    for (rel, sig2) in &s2.relations {
        let Some(image) = m.rel_map.get(rel) else {
            out.push(SchemaMorphismFinding::UnmappedRelation(rel.clone()));
            continue;
        };
        let Some(sig1) = s1.relations.get(image) else {
            out.push(SchemaMorphismFinding::RelationOutsideTarget {
                relation: rel.clone(),
                image: image.clone(),
            });
            continue;
        };
        // An unmapped sort is already reported above.
        if let Ok(expected) = m.list(sig2) {
            if &expected != sig1 {
                out.push(SchemaMorphismFinding::Signature {
                    relation: rel.clone(),
                    expected,
                    found: sig1.clone(),
                });
            }
        }
    }
    out
}

/// Composes `m1 : S₃ → S₂` with `m2 : S₂ → S₁`, revalidating against the schemas.
pub fn schema_morphism_compose(m1: &SchemaMorphism, m2: &SchemaMorphism, s3: &Schema, s1: &Schema) -> Result<SchemaMorphism> {
    let m = m1.then(m2)?;
    if let Some(finding) = schema_morphism_validate(&m, s3, s1).into_iter().next() {
        return Err(Error::CompositionMismatch(finding.to_string()));
    }
    Ok(m)
}
