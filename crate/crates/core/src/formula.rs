//! Formulas over a schema, type inference, translation along schema
//! morphisms, sequents and constraints.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernel::{TypeList, TypeListMorphism};
use crate::name::RelName;
use crate::schema::{Schema, SchemaMorphism};

/// A formula. Flow operators carry their type-list morphism by value.
///
/// `SumFlow(h, φ)` and `ProdFlow(h, φ)` move `φ` from the target fiber of
/// `h` to its source fiber; `Subst(h, φ)` moves the other way.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(RelName),
    Top(TypeList),
    Bottom(TypeList),
    Meet(Arc<Formula>, Arc<Formula>),
    Join(Arc<Formula>, Arc<Formula>),
    Impl(Arc<Formula>, Arc<Formula>),
    Diff(Arc<Formula>, Arc<Formula>),
    Neg(Arc<Formula>),
    SumFlow(Arc<TypeListMorphism>, Arc<Formula>),
    ProdFlow(Arc<TypeListMorphism>, Arc<Formula>),
    Subst(Arc<TypeListMorphism>, Arc<Formula>),
}

impl Formula {
    pub fn atom(r: impl Into<RelName>) -> Self {
        Formula::Atom(r.into())
    }

    pub fn top(list: TypeList) -> Self {
        Formula::Top(list)
    }

    pub fn bottom(list: TypeList) -> Self {
        Formula::Bottom(list)
    }

    pub fn meet(a: Formula, b: Formula) -> Self {
        Formula::Meet(Arc::new(a), Arc::new(b))
    }

    pub fn join(a: Formula, b: Formula) -> Self {
        Formula::Join(Arc::new(a), Arc::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Impl(Arc::new(a), Arc::new(b))
    }

    pub fn diff(a: Formula, b: Formula) -> Self {
        Formula::Diff(Arc::new(a), Arc::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Self {
        Formula::Neg(Arc::new(a))
    }

    pub fn exists(h: TypeListMorphism, a: Formula) -> Self {
        Formula::SumFlow(Arc::new(h), Arc::new(a))
    }

    pub fn forall(h: TypeListMorphism, a: Formula) -> Self {
        Formula::ProdFlow(Arc::new(h), Arc::new(a))
    }

    pub fn subst(h: TypeListMorphism, a: Formula) -> Self {
        Formula::Subst(Arc::new(h), Arc::new(a))
    }

    /// Nesting depth; atoms, top and bottom have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Top(_) | Formula::Bottom(_) => 0,
            Formula::Meet(a, b) | Formula::Join(a, b) | Formula::Impl(a, b) | Formula::Diff(a, b) => {
                1 + a.depth().max(b.depth())
            }
            Formula::Neg(a) | Formula::SumFlow(_, a) | Formula::ProdFlow(_, a) | Formula::Subst(_, a) => 1 + a.depth(),
        }
    }

    /// Immediate subformulas.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom(_) | Formula::Top(_) | Formula::Bottom(_) => Vec::new(),
            Formula::Meet(a, b) | Formula::Join(a, b) | Formula::Impl(a, b) | Formula::Diff(a, b) => vec![a, b],
            Formula::Neg(a) | Formula::SumFlow(_, a) | Formula::ProdFlow(_, a) | Formula::Subst(_, a) => vec![a],
        }
    }

    /// All subformulas, including `self`.
    pub fn subformulas(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            if out.insert(f.clone()) {
                stack.extend(f.children());
            }
        }
        out
    }

    /// The flow morphism, if this is a flow formula.
    pub fn flow_morphism(&self) -> Option<&TypeListMorphism> {
        match self {
            Formula::SumFlow(h, _) | Formula::ProdFlow(h, _) | Formula::Subst(h, _) => Some(h),
            _ => None,
        }
    }

    /// Relation types mentioned anywhere in the formula.
    pub fn relations(&self) -> BTreeSet<RelName> {
        self.subformulas()
            .into_iter()
            .filter_map(|f| match f {
                Formula::Atom(r) => Some(r),
                _ => None,
            })
            .collect()
    }
}

fn mismatch(op: &str, left: &TypeList, right: &TypeList) -> Error {
    Error::TypeMismatch(format!("{op} joins formulas over {left} and {right}"))
}

/// `σ̂(φ)`: the type list (fiber) of a formula.
pub fn infer_typelist(s: &Schema, phi: &Formula) -> Result<TypeList> {
    match phi {
        Formula::Atom(r) => s.signature(r).cloned(),
        Formula::Top(l) | Formula::Bottom(l) => {
            s.check_list(l)?;
            Ok(l.clone())
        }
        Formula::Meet(a, b) | Formula::Join(a, b) | Formula::Impl(a, b) | Formula::Diff(a, b) => {
            let la = infer_typelist(s, a)?;
            let lb = infer_typelist(s, b)?;
            if la != lb {
                let op = match phi {
                    Formula::Meet(..) => "meet",
                    Formula::Join(..) => "join",
                    Formula::Impl(..) => "implication",
                    _ => "difference",
                };
                return Err(mismatch(op, &la, &lb));
            }
            Ok(la)
        }
        Formula::Neg(a) => infer_typelist(s, a),
        Formula::SumFlow(h, a) | Formula::ProdFlow(h, a) => {
            s.check_list(h.source())?;
            s.check_list(h.target())?;
            let la = infer_typelist(s, a)?;
            if &la != h.target() {
                return Err(Error::TypeMismatch(format!(
                    "flow along {h} expects a formula over {} but found one over {la}",
                    h.target()
                )));
            }
            Ok(h.source().clone())
        }
        Formula::Subst(h, a) => {
            s.check_list(h.source())?;
            s.check_list(h.target())?;
            let la = infer_typelist(s, a)?;
            if &la != h.source() {
                return Err(Error::TypeMismatch(format!(
                    "substitution along {h} expects a formula over {} but found one over {la}",
                    h.source()
                )));
            }
            Ok(h.target().clone())
        }
    }
}

/// `r̂(φ)`: atoms renamed along `r`, fibers and flow morphisms re-sorted along `f`.
pub fn translate(m: &SchemaMorphism, phi: &Formula) -> Result<Formula> {
    let go = |f: &Arc<Formula>| translate(m, f).map(Arc::new);
    let flow = |h: &Arc<TypeListMorphism>| h.resort(&m.type_map).map(Arc::new);
    Ok(match phi {
        Formula::Atom(r) => Formula::Atom(m.rel(r)?.clone()),
        Formula::Top(l) => Formula::Top(m.list(l)?),
        Formula::Bottom(l) => Formula::Bottom(m.list(l)?),
        Formula::Meet(a, b) => Formula::Meet(go(a)?, go(b)?),
        Formula::Join(a, b) => Formula::Join(go(a)?, go(b)?),
        Formula::Impl(a, b) => Formula::Impl(go(a)?, go(b)?),
        Formula::Diff(a, b) => Formula::Diff(go(a)?, go(b)?),
        Formula::Neg(a) => Formula::Neg(go(a)?),
        Formula::SumFlow(h, a) => Formula::SumFlow(flow(h)?, go(a)?),
        Formula::ProdFlow(h, a) => Formula::ProdFlow(flow(h)?, go(a)?),
        Formula::Subst(h, a) => Formula::Subst(flow(h)?, go(a)?),
    })
}

/// A formula paired with its type list.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexedFormula {
    pub type_list: TypeList,
    pub formula: Formula,
}

impl IndexedFormula {
    pub fn new(s: &Schema, formula: Formula) -> Result<Self> {
        Ok(IndexedFormula {
            type_list: infer_typelist(s, &formula)?,
            formula,
        })
    }
}

/// `lhs ⊢ rhs` within a single fiber.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sequent {
    pub lhs: Formula,
    pub rhs: Formula,
}

impl Sequent {
    pub fn new(lhs: Formula, rhs: Formula) -> Self {
        Sequent { lhs, rhs }
    }

    /// Checks both sides share a fiber and returns it.
    pub fn typecheck(&self, s: &Schema) -> Result<TypeList> {
        let l = infer_typelist(s, &self.lhs)?;
        let r = infer_typelist(s, &self.rhs)?;
        if l != r {
            return Err(mismatch("sequent", &l, &r));
        }
        Ok(l)
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} |- {}", self.lhs, self.rhs)
    }
}

impl fmt::Debug for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A constraint along `h: ⟨I′,s′⟩ → ⟨I,s⟩`: a premise over `⟨I,s⟩` and a
/// conclusion over `⟨I′,s′⟩`, read as `Σ_h(premise) ⊢ conclusion`.
///
/// Without `along` it is a plain sequent in one fiber.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constraint {
    pub along: Option<Arc<TypeListMorphism>>,
    pub premise: Formula,
    pub conclusion: Formula,
}

impl Constraint {
    pub fn sequent(premise: Formula, conclusion: Formula) -> Self {
        Constraint {
            along: None,
            premise,
            conclusion,
        }
    }

    pub fn along(h: TypeListMorphism, premise: Formula, conclusion: Formula) -> Self {
        Constraint {
            along: Some(Arc::new(h)),
            premise,
            conclusion,
        }
    }

    /// `Σ_h(premise) ⊢ conclusion`.
    pub fn as_sequent(&self) -> Sequent {
        match &self.along {
            None => Sequent::new(self.premise.clone(), self.conclusion.clone()),
            Some(h) => Sequent::new(
                Formula::SumFlow(h.clone(), Arc::new(self.premise.clone())),
                self.conclusion.clone(),
            ),
        }
    }

    /// `premise ⊢ h*(conclusion)`.
    pub fn as_adjoint_sequent(&self) -> Sequent {
        match &self.along {
            None => Sequent::new(self.premise.clone(), self.conclusion.clone()),
            Some(h) => Sequent::new(
                self.premise.clone(),
                Formula::Subst(h.clone(), Arc::new(self.conclusion.clone())),
            ),
        }
    }

    pub fn typecheck(&self, s: &Schema) -> Result<()> {
        self.as_sequent().typecheck(s).map(|_| ())
    }

    /// Every formula the constraint mentions, with subformulas.
    pub fn formulas(&self) -> BTreeSet<Formula> {
        let seq = self.as_sequent();
        let mut out = seq.lhs.subformulas();
        out.extend(seq.rhs.subformulas());
        out
    }
}

impl From<Sequent> for Constraint {
    fn from(q: Sequent) -> Self {
        Constraint::sequent(q.lhs, q.rhs)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.along {
            None => write!(f, "{} |- {}", self.premise, self.conclusion),
            Some(h) => {
                write!(f, "{} |-[", self.premise)?;
                crate::syntax::write_morphism_ref(f, h)?;
                write!(f, "] {}", self.conclusion)
            }
        }
    }
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Translates both formulas and re-sorts the constraint's morphism.
pub fn translate_constraint(m: &SchemaMorphism, c: &Constraint) -> Result<Constraint> {
    Ok(Constraint {
        along: match &c.along {
            None => None,
            Some(h) => Some(Arc::new(h.resort(&m.type_map)?)),
        },
        premise: translate(m, &c.premise)?,
        conclusion: translate(m, &c.conclusion)?,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::kernel::tests::sigma_go;
    use crate::name::Sort;
    use crate::schema::tests::s_go;
    use std::collections::BTreeMap;

    pub(crate) fn dest_incl() -> TypeListMorphism {
        TypeListMorphism::inclusion(&TypeList::of(&[("dest", "City")]), &sigma_go()).unwrap()
    }

    pub(crate) fn rename() -> SchemaMorphism {
        SchemaMorphism::new(
            BTreeMap::from([(RelName::new("Go"), RelName::new("Travel"))]),
            [("Person", "Agent"), ("City", "Place"), ("Bus", "Vehicle")]
                .map(|(a, b)| (Sort::new(a), Sort::new(b)))
                .into(),
        )
    }

    #[test]
    fn infer_examples() {
        let s = s_go();
        assert_eq!(infer_typelist(&s, &Formula::atom("Go")).unwrap(), sigma_go());
        let m = Formula::meet(Formula::atom("Go"), Formula::top(sigma_go()));
        assert_eq!(infer_typelist(&s, &m).unwrap(), sigma_go());
        let ex = Formula::exists(dest_incl(), Formula::atom("Go"));
        assert_eq!(infer_typelist(&s, &ex).unwrap(), TypeList::of(&[("dest", "City")]));
    }

    #[test]
    fn infer_rejects() {
        let s = s_go();
        let bad = Formula::meet(Formula::atom("Go"), Formula::top(TypeList::of(&[("dest", "City")])));
        assert!(matches!(infer_typelist(&s, &bad), Err(Error::TypeMismatch(_))));
        assert!(matches!(infer_typelist(&s, &Formula::atom("Fly")), Err(Error::UnknownRelation(_))));
        let wrong = Formula::subst(dest_incl(), Formula::atom("Go"));
        assert!(matches!(infer_typelist(&s, &wrong), Err(Error::TypeMismatch(_))));
    }

    #[test]
    fn translate_examples() {
        let s = s_go();
        let id = SchemaMorphism::identity(&s);
        let phi = Formula::exists(dest_incl(), Formula::meet(Formula::atom("Go"), Formula::atom("Go")));
        assert_eq!(translate(&id, &phi).unwrap(), phi);

        let m = rename();
        assert_eq!(translate(&m, &Formula::atom("Go")).unwrap(), Formula::atom("Travel"));
        let h2 = TypeListMorphism::inclusion(
            &TypeList::of(&[("dest", "Place")]),
            &TypeList::of(&[("agnt", "Agent"), ("dest", "Place"), ("inst", "Vehicle")]),
        )
        .unwrap();
        assert_eq!(
            translate(&m, &phi).unwrap(),
            Formula::exists(h2, Formula::meet(Formula::atom("Travel"), Formula::atom("Travel")))
        );
    }

    #[test]
    fn translation_commutes_with_typing() {
        let s2 = s_go();
        let m = rename();
        let s1 = Schema::new(
            ["Agent", "Place", "Vehicle"].map(Sort::new),
            [(
                RelName::new("Travel"),
                TypeList::of(&[("agnt", "Agent"), ("dest", "Place"), ("inst", "Vehicle")]),
            )],
        );
        let phi = Formula::forall(dest_incl(), Formula::implies(Formula::atom("Go"), Formula::bottom(sigma_go())));
        let l2 = infer_typelist(&s2, &phi).unwrap();
        let l1 = infer_typelist(&s1, &translate(&m, &phi).unwrap()).unwrap();
        assert_eq!(l1, m.list(&l2).unwrap());
    }

    #[test]
    fn constraint_readings() {
        let c = Constraint::along(dest_incl(), Formula::atom("Go"), Formula::top(TypeList::of(&[("dest", "City")])));
        let q = c.as_sequent();
        assert!(matches!(q.lhs, Formula::SumFlow(..)));
        let a = c.as_adjoint_sequent();
        assert!(matches!(a.rhs, Formula::Subst(..)));
        c.typecheck(&s_go()).unwrap();
        let t = translate_constraint(&SchemaMorphism::identity(&s_go()), &c).unwrap();
        assert_eq!(t, c);
    }

    #[test]
    fn depth_and_subformulas() {
        let phi = Formula::not(Formula::meet(Formula::atom("Go"), Formula::atom("Go")));
        assert_eq!(phi.depth(), 2);
        assert_eq!(phi.subformulas().len(), 3);
    }
}
