//! Operator domains, terms and term vectors, finite algebras, equations,
//! and flow along term vectors.
//!
//! An algebra's carrier for a sort is that sort's extent in the entity
//! classification, so the interpretation of a variable-only term vector is
//! exactly the tuple map of the corresponding type-list morphism.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::kernel::{
    flow_along, sum_along, tup, tuple_bridge, EntityClassification, FlowMode, Infomorphism, InfomorphismFinding,
    Tuple, TupleRelation, TypeList, TypeListMorphism,
};
use crate::limits::Limits;
use crate::name::{Index, Sort, Symbol, Token};
use crate::structure::Structure;

/// Result sort and argument signature of an operator symbol.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpSig {
    pub result: Sort,
    pub args: TypeList,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OperatorDomain {
    sorts: BTreeSet<Sort>,
    symbols: BTreeMap<Symbol, OpSig>,
}

impl OperatorDomain {
    pub fn new(sorts: impl IntoIterator<Item = Sort>, symbols: impl IntoIterator<Item = (Symbol, OpSig)>) -> Result<Self> {
        let sorts: BTreeSet<Sort> = sorts.into_iter().collect();
        let symbols: BTreeMap<Symbol, OpSig> = symbols.into_iter().collect();
        for sig in symbols.values() {
            if !sorts.contains(&sig.result) {
                return Err(Error::UnknownSort(sig.result.clone()));
            }
            if let Some((_, s)) = sig.args.iter().find(|(_, s)| !sorts.contains(*s)) {
                return Err(Error::UnknownSort(s.clone()));
            }
        }
        Ok(OperatorDomain { sorts, symbols })
    }

    pub fn sorts(&self) -> &BTreeSet<Sort> {
        &self.sorts
    }

    pub fn symbols(&self) -> &BTreeMap<Symbol, OpSig> {
        &self.symbols
    }

    pub fn symbol(&self, e: &Symbol) -> Result<&OpSig> {
        self.symbols.get(e).ok_or_else(|| Error::UnknownSymbol(e.clone()))
    }
}

/// A variable of the context, or a symbol applied to named arguments.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Index),
    App(Symbol, BTreeMap<Index, Term>),
}

impl Term {
    pub fn var(i: impl Into<Index>) -> Self {
        Term::Var(i.into())
    }

    pub fn constant(e: impl Into<Symbol>) -> Self {
        Term::App(e.into(), BTreeMap::new())
    }

    pub fn app(e: impl Into<Symbol>, args: impl IntoIterator<Item = (Index, Term)>) -> Self {
        Term::App(e.into(), args.into_iter().collect())
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => 1 + args.values().map(Term::depth).max().unwrap_or(0),
        }
    }

    fn substitute(&self, env: &BTreeMap<Index, Term>) -> Term {
        match self {
            Term::Var(i) => env[i].clone(),
            Term::App(e, args) => Term::App(e.clone(), args.iter().map(|(k, t)| (k.clone(), t.substitute(env))).collect()),
        }
    }
}

/// The sort of `t` in `context`.
pub fn term_typecheck(o: &OperatorDomain, context: &TypeList, t: &Term) -> Result<Sort> {
    let cap = Limits::global().max_term_depth;
    if t.depth() > cap {
        return Err(Error::DepthExceeded(cap));
    }
    typecheck_inner(o, context, t)
}

fn typecheck_inner(o: &OperatorDomain, context: &TypeList, t: &Term) -> Result<Sort> {
    match t {
        Term::Var(i) => context
            .sort(i)
            .cloned()
            .ok_or_else(|| Error::SortError(format!("variable `{i}` is not in context {context}"))),
        Term::App(e, args) => {
            let sig = o.symbol(e)?;
            if !sig.args.same_arity(args.keys().cloned()) {
                return Err(Error::SortError(format!(
                    "`{e}` expects arguments {{{}}}, found {{{}}}",
                    sig.args.arity_string(),
                    args.keys().map(|k| k.to_string()).collect::<Vec<_>>().join(",")
                )));
            }
            for (slot, arg) in args {
                let got = typecheck_inner(o, context, arg)?;
                let want = sig.args.sort(slot).expect("same arity");
                if &got != want {
                    return Err(Error::SortError(format!(
                        "argument `{slot}` of `{e}` has sort `{got}` but `{want}` is required"
                    )));
                }
            }
            Ok(sig.result.clone())
        }
    }
}

/// A term vector `⟨I′,s′⟩ ⇁ ⟨I,s⟩`: for each index of `source`, a term in
/// the context `context` of the matching sort. It generalizes a type-list
/// morphism `source → context`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TermVector {
    source: TypeList,
    context: TypeList,
    terms: BTreeMap<Index, Term>,
}

impl TermVector {
    pub fn new(o: &OperatorDomain, source: TypeList, context: TypeList, terms: BTreeMap<Index, Term>) -> Result<Self> {
        if !source.same_arity(terms.keys().cloned()) {
            return Err(Error::SortError(format!(
                "term vector over {source} has terms for {{{}}}",
                terms.keys().map(|k| k.to_string()).collect::<Vec<_>>().join(",")
            )));
        }
        for (i, t) in &terms {
            let got = term_typecheck(o, &context, t)?;
            let want = source.sort(i).expect("same arity");
            if &got != want {
                return Err(Error::SortError(format!("term at `{i}` has sort `{got}` but `{want}` is required")));
            }
        }
        Ok(TermVector { source, context, terms })
    }

    pub fn from_morphism(h: &TypeListMorphism) -> Self {
        TermVector {
            source: h.source().clone(),
            context: h.target().clone(),
            terms: h.map().iter().map(|(a, b)| (a.clone(), Term::Var(b.clone()))).collect(),
        }
    }

    pub fn source(&self) -> &TypeList {
        &self.source
    }

    pub fn context(&self) -> &TypeList {
        &self.context
    }

    pub fn terms(&self) -> &BTreeMap<Index, Term> {
        &self.terms
    }

    /// The underlying type-list morphism when every term is a variable.
    pub fn as_morphism(&self) -> Option<TypeListMorphism> {
        let map = self
            .terms
            .iter()
            .map(|(i, t)| match t {
                Term::Var(j) => Some((i.clone(), j.clone())),
                Term::App(..) => None,
            })
            .collect::<Option<_>>()?;
        TypeListMorphism::new(self.source.clone(), self.context.clone(), map).ok()
    }

    /// Substitution: `self : A ⇁ B` followed by `next : B ⇁ C` gives `A ⇁ C`.
    pub fn then(&self, next: &TermVector) -> Result<TermVector> {
        if self.context != next.source {
            return Err(Error::CompositionMismatch(format!(
                "context {} differs from source {}",
                self.context, next.source
            )));
        }
        Ok(TermVector {
            source: self.source.clone(),
            context: next.context.clone(),
            terms: self.terms.iter().map(|(i, t)| (i.clone(), t.substitute(&next.terms))).collect(),
        })
    }
}

/// A finite algebra whose carriers are the extents of an entity classification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Algebra {
    entities: EntityClassification,
    domain: OperatorDomain,
    ops: BTreeMap<Symbol, BTreeMap<Tuple, Token>>,
}

impl Algebra {
    /// Each operation must be total on the tuples of its signature and land
    /// in the carrier of its result sort.
    pub fn new(
        entities: EntityClassification,
        domain: OperatorDomain,
        ops: BTreeMap<Symbol, BTreeMap<Tuple, Token>>,
    ) -> Result<Self> {
        if entities.types() != domain.sorts() {
            return Err(Error::invalid("algebra", "entity types differ from the operator domain's sorts"));
        }
        if let Some(e) = ops.keys().find(|e| !domain.symbols.contains_key(*e)) {
            return Err(Error::UnknownSymbol(e.clone()));
        }
        for (e, sig) in &domain.symbols {
            let table = ops.get(e);
            for t in tup(&entities, &sig.args)?.tuples {
                let Some(y) = table.and_then(|tb| tb.get(&t)) else {
                    return Err(Error::invalid("algebra", format!("`{e}` is undefined at {t}")));
                };
                if !entities.holds(y, &sig.result) {
                    return Err(Error::invalid(
                        "algebra",
                        format!("`{e}` sends {t} to `{y}`, outside the carrier of `{}`", sig.result),
                    ));
                }
            }
            if let Some(tb) = table {
                if let Some(t) = tb.keys().find(|t| !crate::kernel::list_holds(&entities, t, &sig.args)) {
                    return Err(Error::invalid("algebra", format!("`{e}` is defined at ill-typed argument {t}")));
                }
            }
        }
        Ok(Algebra { entities, domain, ops })
    }

    pub fn entities(&self) -> &EntityClassification {
        &self.entities
    }

    pub fn domain(&self) -> &OperatorDomain {
        &self.domain
    }

    pub fn ops(&self) -> &BTreeMap<Symbol, BTreeMap<Tuple, Token>> {
        &self.ops
    }

    /// `δ_e(t)`.
    pub fn apply(&self, e: &Symbol, args: &Tuple) -> Result<Token> {
        self.ops
            .get(e)
            .and_then(|tb| tb.get(args))
            .cloned()
            .ok_or_else(|| Error::SortError(format!("`{e}` is undefined at {args}")))
    }
}

/// Evaluates `t` at `env ∈ tup(context)`.
pub fn eval_term(a: &Algebra, context: &TypeList, t: &Term, env: &Tuple) -> Result<Token> {
    term_typecheck(&a.domain, context, t)?;
    if !crate::kernel::list_holds(&a.entities, env, context) {
        return Err(Error::SortError(format!("environment {env} is not classified by {context}")));
    }
    Ok(eval_unchecked(a, t, env))
}

fn eval_unchecked(a: &Algebra, t: &Term, env: &Tuple) -> Token {
    match t {
        Term::Var(i) => env.get(i).expect("typechecked variable").clone(),
        Term::App(e, args) => {
            let inner: Tuple = args.iter().map(|(k, s)| (k.clone(), eval_unchecked(a, s, env))).collect();
            a.ops[e][&inner].clone()
        }
    }
}

/// `A*(tv)` at `env`: a tuple over the vector's source.
pub fn eval_vector(a: &Algebra, tv: &TermVector, env: &Tuple) -> Result<Tuple> {
    if !crate::kernel::list_holds(&a.entities, env, &tv.context) {
        return Err(Error::SortError(format!("environment {env} is not classified by {}", tv.context)));
    }
    for t in tv.terms.values() {
        term_typecheck(&a.domain, &tv.context, t)?;
    }
    Ok(tv.terms.iter().map(|(i, t)| (i.clone(), eval_unchecked(a, t, env))).collect())
}

/// A parallel pair of term vectors with shared endpoints.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Equation {
    pub lhs: TermVector,
    pub rhs: TermVector,
}

impl Equation {
    pub fn new(lhs: TermVector, rhs: TermVector) -> Result<Self> {
        if lhs.source != rhs.source || lhs.context != rhs.context {
            return Err(Error::SortError("equation sides have different endpoints".into()));
        }
        Ok(Equation { lhs, rhs })
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = |tv: &TermVector| {
            tv.terms
                .iter()
                .map(|(i, t)| format!("{i}: {t}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        write!(f, "<{}> = <{}>", side(&self.lhs), side(&self.rhs))
    }
}

/// True iff both sides agree at every environment.
pub fn satisfies_equation(a: &Algebra, eq: &Equation) -> Result<bool> {
    for env in tup(&a.entities, &eq.lhs.context)?.tuples {
        if eval_vector(a, &eq.lhs, &env)? != eval_vector(a, &eq.rhs, &env)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `⟨f, ω⟩ : O₂ → O₁`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OperatorDomainMorphism {
    pub type_map: BTreeMap<Sort, Sort>,
    pub symbol_map: BTreeMap<Symbol, Symbol>,
}

impl OperatorDomainMorphism {
    pub fn identity(o: &OperatorDomain) -> Self {
        OperatorDomainMorphism {
            type_map: o.sorts.iter().map(|x| (x.clone(), x.clone())).collect(),
            symbol_map: o.symbols.keys().map(|e| (e.clone(), e.clone())).collect(),
        }
    }

    /// Every problem with `self : o2 → o1`; empty iff valid.
    pub fn validate(&self, o2: &OperatorDomain, o1: &OperatorDomain) -> Vec<String> {
        let mut out = Vec::new();
        for x in &o2.sorts {
            match self.type_map.get(x) {
                None => out.push(format!("sort `{x}` is unmapped")),
                Some(y) if !o1.sorts.contains(y) => out.push(format!("sort `{x}` maps outside the target")),
                _ => {}
            }
        }
        for (e, sig2) in &o2.symbols {
            let Some(e1) = self.symbol_map.get(e) else {
                out.push(format!("symbol `{e}` is unmapped"));
                continue;
            };
            let Some(sig1) = o1.symbols.get(e1) else {
                out.push(format!("symbol `{e}` maps to unknown `{e1}`"));
                continue;
            };
            if self.type_map.get(&sig2.result) != Some(&sig1.result) {
                out.push(format!("result sort of `{e}` is not preserved by `{e1}`"));
            }
            match sum_along(&self.type_map, &sig2.args) {
                Ok(args) if args == sig1.args => {}
                _ => out.push(format!("signature of `{e}` is not preserved by `{e1}`")),
            }
        }
        out
    }
}

/// Symbols renamed along `ω`; variables unchanged.
pub fn translate_term(m: &OperatorDomainMorphism, t: &Term) -> Result<Term> {
    match t {
        Term::Var(i) => Ok(Term::Var(i.clone())),
        Term::App(e, args) => {
            let e1 = m.symbol_map.get(e).ok_or_else(|| Error::UnknownSymbol(e.clone()))?;
            let args = args
                .iter()
                .map(|(k, s)| Ok((k.clone(), translate_term(m, s)?)))
                .collect::<Result<_>>()?;
            Ok(Term::App(e1.clone(), args))
        }
    }
}

pub fn translate_vector(m: &OperatorDomainMorphism, tv: &TermVector) -> Result<TermVector> {
    Ok(TermVector {
        source: sum_along(&m.type_map, &tv.source)?,
        context: sum_along(&m.type_map, &tv.context)?,
        terms: tv
            .terms
            .iter()
            .map(|(i, t)| Ok((i.clone(), translate_term(m, t)?)))
            .collect::<Result<_>>()?,
    })
}

/// Kernel flow with `A*(tv) : tup(context) → tup(source)` as the tuple map.
pub fn flow_along_term(a: &Algebra, tv: &TermVector, mode: FlowMode, relation: &TupleRelation) -> Result<TupleRelation> {
    for t in tv.terms.values() {
        term_typecheck(&a.domain, &tv.context, t)?;
    }
    flow_along(
        &a.entities,
        &tv.context,
        &tv.source,
        &|env| Ok(tv.terms.iter().map(|(i, t)| (i.clone(), eval_unchecked(a, t, env))).collect()),
        mode,
        relation,
    )
}

/// A structure and an algebra over the same entity classification.
#[derive(Clone, Debug)]
pub struct FolStructure {
    structure: Structure,
    algebra: Algebra,
}

impl FolStructure {
    pub fn new(structure: Structure, algebra: Algebra) -> Result<Self> {
        if structure.entities() != algebra.entities() {
            return Err(Error::invalid(
                "first-order structure",
                "structure and algebra have different entity classifications",
            ));
        }
        Ok(FolStructure { structure, algebra })
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn algebra(&self) -> &Algebra {
        &self.algebra
    }
}

/// `Σ_tv(premise) ⊢ conclusion`, where `premise` is over the vector's
/// context and `conclusion` over its source: every key of the source fiber
/// whose tuple lies in the direct image of `R(premise)` under `A*(tv)`
/// satisfies `conclusion`.
pub fn fol_satisfies_constraint(fm: &FolStructure, premise: &Formula, tv: &TermVector, conclusion: &Formula) -> Result<bool> {
    let m = &fm.structure;
    let r = m.relation_interp(premise)?;
    if r.type_list != tv.context {
        return Err(Error::TypeMismatch(format!(
            "premise is over {} but the term vector's context is {}",
            r.type_list, tv.context
        )));
    }
    let (lc, ec) = m.eval_typed(conclusion)?;
    if lc != tv.source {
        return Err(Error::TypeMismatch(format!(
            "conclusion is over {lc} but the term vector's source is {}",
            tv.source
        )));
    }
    let image = flow_along_term(&fm.algebra, tv, FlowMode::Exists, &r)?;
    for k in m.fiber(&tv.source)?.iter() {
        if image.contains(&m.tau()[k]) && !ec.contains(k) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `⟨f, ω⟩` on operator domains with a token map `g: Y₁ → Y₂` for `A₂ ⇄ A₁`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlgebraHom {
    pub morphism: OperatorDomainMorphism,
    pub token_map: BTreeMap<Token, Token>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlgebraHomFinding {
    Domain(String),
    Entity(InfomorphismFinding),
    Square { symbol: Symbol, args: Tuple },
}

impl fmt::Display for AlgebraHomFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Domain(s) => write!(f, "operator domain: {s}"),
            Self::Entity(x) => write!(f, "entities: {x}"),
            Self::Square { symbol, args } => write!(f, "`{symbol}` does not commute at {args}"),
        }
    }
}

/// Checks `g(δ₁_{ω(e)}(t)) = δ₂_e(g∘t)` for every symbol and argument tuple.
pub fn algebra_hom_validate(h: &AlgebraHom, a2: &Algebra, a1: &Algebra) -> Vec<AlgebraHomFinding> {
    let mut out: Vec<AlgebraHomFinding> = h
        .morphism
        .validate(&a2.domain, &a1.domain)
        .into_iter()
        .map(AlgebraHomFinding::Domain)
        .collect();
    let info = Infomorphism::new(h.morphism.type_map.clone(), h.token_map.clone());
    out.extend(info.validate(&a2.entities, &a1.entities).into_iter().map(AlgebraHomFinding::Entity));
    if !out.is_empty() {
        return out;
    }
    for (e, sig2) in &a2.domain.symbols {
        let e1 = &h.morphism.symbol_map[e];
        let args1 = &a1.domain.symbols[e1].args;
        let Ok(all) = tup(&a1.entities, args1) else {
            out.push(AlgebraHomFinding::Domain(format!("cannot enumerate arguments of `{e1}`")));
            continue;
        };
        for t1 in all.tuples {
            let Ok(t2) = tuple_bridge(&info, &t1) else { continue };
            let lhs = h.token_map.get(&a1.ops[e1][&t1]);
            let rhs = a2.ops.get(e).and_then(|tb| tb.get(&t2));
            if lhs.is_none() || lhs != rhs {
                out.push(AlgebraHomFinding::Square {
                    symbol: e.clone(),
                    args: t1.clone(),
                });
            }
        }
        let _ = sig2;
    }
    out
}

/// An operator domain with a finite set of equations.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EquationalPresentation {
    pub domain: OperatorDomain,
    pub equations: Vec<Equation>,
}

/// Checks that every equation of `p2`, translated along `m`, holds in the
/// witness algebra for `p1`. Fails with `UnsoundWitness` when the witness
/// does not satisfy `p1` itself. Returns the equations that fail.
pub fn presentation_morphism_validate(
    m: &OperatorDomainMorphism,
    p2: &EquationalPresentation,
    p1: &EquationalPresentation,
    witness: &Algebra,
) -> Result<Vec<Equation>> {
    if witness.domain != p1.domain {
        return Err(Error::UnsoundWitness("witness is over a different operator domain".into()));
    }
    for eq in &p1.equations {
        if !satisfies_equation(witness, eq)? {
            return Err(Error::UnsoundWitness(eq.to_string()));
        }
    }
    let problems = m.validate(&p2.domain, &p1.domain);
    if let Some(p) = problems.into_iter().next() {
        return Err(Error::InvalidMorphism(p));
    }
    let mut failures = Vec::new();
    for eq in &p2.equations {
        let translated = Equation::new(translate_vector(m, &eq.lhs)?, translate_vector(m, &eq.rhs)?)?;
        if !satisfies_equation(witness, &translated)? {
            failures.push(eq.clone());
        }
    }
    Ok(failures)
}
