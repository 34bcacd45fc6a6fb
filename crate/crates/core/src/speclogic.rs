//! Specifications, logics, bounded formula universes and the consequence
//! closure.
//!
//! Derivability is computed as a least fixpoint over a finite
//! [`FormulaUniverse`]: a formula universe fixes a depth bound and a pool of
//! type-list morphisms, and every rule is instantiated only with formulas
//! the universe contains. The derivability relation is kept as one bit
//! matrix per fiber.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::formula::{infer_typelist, translate_constraint, Constraint, Formula, Sequent};
use crate::kernel::{TypeList, TypeListMorphism};
use crate::limits::Limits;
use crate::schema::{Schema, SchemaMorphism};
use crate::structure::Structure;

/// A schema with a finite set of constraints over it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Specification {
    schema: Arc<Schema>,
    constraints: BTreeSet<Constraint>,
}

impl Specification {
    pub fn new(schema: Arc<Schema>, constraints: impl IntoIterator<Item = Constraint>) -> Result<Self> {
        let constraints: BTreeSet<Constraint> = constraints.into_iter().collect();
        for c in &constraints {
            c.typecheck(&schema)?;
        }
        Ok(Specification { schema, constraints })
    }

    pub fn empty(schema: Arc<Schema>) -> Self {
        Specification {
            schema,
            constraints: BTreeSet::new(),
        }
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn constraints(&self) -> &BTreeSet<Constraint> {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }
}

/// A structure and a specification over the same schema.
#[derive(Clone, Debug)]
pub struct Logic {
    structure: Structure,
    spec: Specification,
}

impl Logic {
    pub fn new(structure: Structure, spec: Specification) -> Result<Self> {
        if structure.schema() != spec.schema().as_ref() {
            return Err(Error::TypeMismatch("structure and specification use different schemas".into()));
        }
        Ok(Logic { structure, spec })
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn spec(&self) -> &Specification {
        &self.spec
    }
}

/// Which formula constructors a universe may use beyond atoms, top and bottom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Connectives {
    pub meet: bool,
    pub join: bool,
    pub neg: bool,
    pub implication: bool,
    pub difference: bool,
    pub exists: bool,
    pub forall: bool,
    pub subst: bool,
}

impl Default for Connectives {
    fn default() -> Self {
        Connectives::all()
    }
}

impl Connectives {
    pub fn all() -> Self {
        Connectives {
            meet: true,
            join: true,
            neg: true,
            implication: true,
            difference: true,
            exists: true,
            forall: true,
            subst: true,
        }
    }

    pub fn none() -> Self {
        Connectives {
            meet: false,
            join: false,
            neg: false,
            implication: false,
            difference: false,
            exists: false,
            forall: false,
            subst: false,
        }
    }

    /// Parses names such as `meet`, `join`, `neg`, `impl`, `diff`, `exists`,
    /// `forall`, `subst`.
    pub fn from_names<'a>(names: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut c = Connectives::none();
        for n in names {
            match n {
                "meet" => c.meet = true,
                "join" => c.join = true,
                "neg" => c.neg = true,
                "impl" => c.implication = true,
                "diff" => c.difference = true,
                "exists" => c.exists = true,
                "forall" => c.forall = true,
                "subst" => c.subst = true,
                other => return Err(Error::UnknownName {
                    kind: "connective",
                    name: other.to_string(),
                }),
            }
        }
        Ok(c)
    }

    pub fn names(&self) -> Vec<&'static str> {
        let all = [
            (self.meet, "meet"),
            (self.join, "join"),
            (self.neg, "neg"),
            (self.implication, "impl"),
            (self.difference, "diff"),
            (self.exists, "exists"),
            (self.forall, "forall"),
            (self.subst, "subst"),
        ];
        all.into_iter().filter(|(on, _)| *on).map(|(_, n)| n).collect()
    }
}

/// Every well-typed formula up to a depth bound whose flows use only
/// morphisms of a fixed pool, closed under subformulas.
///
/// Fibers are the signatures of the schema's relations plus the endpoints
/// of the pool. Meets and joins are generated once per unordered pair of
/// operands.
#[derive(Clone, Debug)]
pub struct FormulaUniverse {
    schema: Arc<Schema>,
    depth: usize,
    pool: BTreeSet<TypeListMorphism>,
    connectives: Connectives,
    formulas: Vec<Formula>,
    types: Vec<TypeList>,
    index: HashMap<Formula, usize>,
}

impl FormulaUniverse {
    pub fn new(
        schema: Arc<Schema>,
        depth: usize,
        pool: impl IntoIterator<Item = TypeListMorphism>,
        connectives: Connectives,
    ) -> Result<Self> {
        FormulaUniverse::with_cap(schema, depth, pool, connectives, Limits::global().max_universe)
    }

    pub fn with_cap(
        schema: Arc<Schema>,
        depth: usize,
        pool: impl IntoIterator<Item = TypeListMorphism>,
        connectives: Connectives,
        cap: usize,
    ) -> Result<Self> {
        let pool: BTreeSet<TypeListMorphism> = pool.into_iter().map(TypeListMorphism::without_label).collect();
        for h in &pool {
            schema.check_list(h.source())?;
            schema.check_list(h.target())?;
        }
        let mut u = FormulaUniverse {
            schema,
            depth,
            pool,
            connectives,
            formulas: Vec::new(),
            types: Vec::new(),
            index: HashMap::new(),
        };
        u.generate(cap)?;
        Ok(u)
    }

    fn generate(&mut self, cap: usize) -> Result<()> {
        let mut fibers: BTreeSet<TypeList> = self.schema.relations().values().cloned().collect();
        for h in &self.pool {
            fibers.insert(h.source().clone());
            fibers.insert(h.target().clone());
        }
        // by_level[d][fiber] = formulas of exactly depth d in that fiber
        let mut by_level: Vec<BTreeMap<TypeList, Vec<Formula>>> = Vec::new();
        let mut level0: BTreeMap<TypeList, Vec<Formula>> = fibers.iter().map(|l| (l.clone(), Vec::new())).collect();
        for (r, l) in self.schema.relations() {
            level0.get_mut(l).expect("fiber").push(Formula::Atom(r.clone()));
        }
        for l in &fibers {
            let v = level0.get_mut(l).expect("fiber");
            v.push(Formula::Top(l.clone()));
            v.push(Formula::Bottom(l.clone()));
        }
        self.absorb(&level0, cap)?;
        by_level.push(level0);

        let c = self.connectives;
        for d in 1..=self.depth {
            let mut next: BTreeMap<TypeList, Vec<Formula>> = BTreeMap::new();
            let prev = &by_level[d - 1];
            for l in &fibers {
                let fresh = prev.get(l).map(Vec::as_slice).unwrap_or(&[]);
                let older: Vec<&Formula> = by_level[..d - 1]
                    .iter()
                    .flat_map(|lvl| lvl.get(l).into_iter().flatten())
                    .collect();
                let out = next.entry(l.clone()).or_default();
                let push = |f: Formula, out: &mut Vec<Formula>| -> Result<()> {
                    out.push(f);
                    if self.formulas.len() + out.len() > cap {
                        return Err(Error::CapacityExceeded {
                            what: "formula universe",
                            limit: cap,
                        });
                    }
                    Ok(())
                };
                if c.neg {
                    for a in fresh {
                        push(Formula::not(a.clone()), out)?;
                    }
                }
                // Pairs with at least one operand of depth d-1.
                let mut pairs: Vec<(&Formula, &Formula)> = Vec::new();
                for (n, a) in fresh.iter().enumerate() {
                    for b in &fresh[n..] {
                        pairs.push((a, b));
                    }
                    for b in &older {
                        pairs.push((a, b));
                    }
                }
                for (a, b) in pairs {
                    let same = a == b;
                    if c.meet {
                        push(Formula::meet(a.clone(), b.clone()), out)?;
                    }
                    if c.join {
                        push(Formula::join(a.clone(), b.clone()), out)?;
                    }
                    for (x, y) in [(a, b), (b, a)].into_iter().take(if same { 1 } else { 2 }) {
                        if c.implication {
                            push(Formula::implies(x.clone(), y.clone()), out)?;
                        }
                        if c.difference {
                            push(Formula::diff(x.clone(), y.clone()), out)?;
                        }
                    }
                }
            }
            for h in &self.pool {
                for (enabled, kind) in [(c.exists, 0), (c.forall, 1)] {
                    if !enabled {
                        continue;
                    }
                    for a in prev.get(h.target()).into_iter().flatten() {
                        let f = if kind == 0 {
                            Formula::exists(h.clone(), a.clone())
                        } else {
                            Formula::forall(h.clone(), a.clone())
                        };
                        next.entry(h.source().clone()).or_default().push(f);
                    }
                }
                if c.subst {
                    for a in prev.get(h.source()).into_iter().flatten() {
                        next.entry(h.target().clone())
                            .or_default()
                            .push(Formula::subst(h.clone(), a.clone()));
                    }
                }
            }
            self.absorb(&next, cap)?;
            by_level.push(next);
        }
        Ok(())
    }

    fn absorb(&mut self, level: &BTreeMap<TypeList, Vec<Formula>>, cap: usize) -> Result<()> {
        for (l, fs) in level {
            for f in fs {
                self.insert(f.clone(), l.clone(), cap)?;
            }
        }
        Ok(())
    }

    fn insert(&mut self, f: Formula, l: TypeList, cap: usize) -> Result<bool> {
        if self.index.contains_key(&f) {
            return Ok(false);
        }
        if self.formulas.len() >= cap {
            return Err(Error::CapacityExceeded {
                what: "formula universe",
                limit: cap,
            });
        }
        self.index.insert(f.clone(), self.formulas.len());
        self.formulas.push(f);
        self.types.push(l);
        Ok(true)
    }

    /// Adds formulas together with all their subformulas.
    pub fn extend(&mut self, extra: impl IntoIterator<Item = Formula>) -> Result<()> {
        let cap = Limits::global().max_universe;
        for f in extra {
            let mut subs: Vec<Formula> = f.subformulas().into_iter().collect();
            subs.sort_by_key(Formula::depth);
            for g in subs {
                if !self.index.contains_key(&g) {
                    let l = infer_typelist(&self.schema, &g)?;
                    self.insert(g, l, cap)?;
                }
            }
        }
        Ok(())
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn pool(&self) -> &BTreeSet<TypeListMorphism> {
        &self.pool
    }

    pub fn connectives(&self) -> Connectives {
        self.connectives
    }

    pub fn formulas(&self) -> &[Formula] {
        &self.formulas
    }

    pub fn len(&self) -> usize {
        self.formulas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.formulas.is_empty()
    }

    pub fn contains(&self, f: &Formula) -> bool {
        self.index.contains_key(f)
    }

    pub fn type_of(&self, f: &Formula) -> Option<&TypeList> {
        self.index.get(f).map(|&i| &self.types[i])
    }

    /// Formulas grouped by fiber, in generation order.
    pub fn by_fiber(&self) -> BTreeMap<TypeList, Vec<&Formula>> {
        let mut out: BTreeMap<TypeList, Vec<&Formula>> = BTreeMap::new();
        for (f, l) in self.formulas.iter().zip(&self.types) {
            out.entry(l.clone()).or_default().push(f);
        }
        out
    }

    /// Every sequent between two formulas of the same fiber.
    pub fn sequents(&self) -> impl Iterator<Item = Sequent> + '_ {
        let fibers = self.by_fiber();
        fibers.into_values().flat_map(|fs| {
            let fs: Vec<Formula> = fs.into_iter().cloned().collect();
            let n = fs.len();
            (0..n * n).map(move |x| Sequent::new(fs[x / n].clone(), fs[x % n].clone()))
        })
    }

    pub fn sequent_count(&self) -> usize {
        self.by_fiber().values().map(|v| v.len() * v.len()).sum()
    }
}

/// Which inference rules the closure applies.
///
/// The default set is sound for every structure: preorder, fiber lattice
/// rules with classical negation, difference, residuation, top and bottom,
/// and monotonicity of the three flows. Adding the adjunction rules for
/// flows (`Σ_h ⊣ h* ⊣ Π_h` transposition) is sound only on structures whose
/// keys are exactly the tuples they name.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RuleSet {
    pub adjunction: bool,
}

impl RuleSet {
    pub fn sound() -> Self {
        RuleSet { adjunction: false }
    }

    pub fn with_adjunction() -> Self {
        RuleSet { adjunction: true }
    }
}

/// The derivability relation on a formula universe.
#[derive(Clone, Debug)]
pub struct Consequence {
    universe: FormulaUniverse,
    fiber_of: Vec<usize>,
    local: Vec<usize>,
    members: Vec<Vec<usize>>,
    rows: Vec<FixedBitSet>,
}

#[derive(Default)]
struct Shapes {
    meets: Vec<(usize, usize, usize)>,
    joins: Vec<(usize, usize, usize)>,
    impls: Vec<(usize, usize, usize)>,
    diffs: Vec<(usize, usize, usize)>,
    negs: Vec<(usize, usize)>,
    // (node, morphism id, operand)
    sums: Vec<(usize, usize, usize)>,
    prods: Vec<(usize, usize, usize)>,
    substs: Vec<(usize, usize, usize)>,
    meet_of: HashMap<(usize, usize), usize>,
    join_of: HashMap<(usize, usize), usize>,
    neg_of: HashMap<usize, usize>,
    sum_of: HashMap<(usize, usize), usize>,
    prod_of: HashMap<(usize, usize), usize>,
    subst_of: HashMap<(usize, usize), usize>,
    top_of: HashMap<usize, usize>,
    bottom_of: HashMap<usize, usize>,
}

impl Shapes {
    fn meet(&self, a: usize, b: usize) -> Option<usize> {
        self.meet_of.get(&(a, b)).or_else(|| self.meet_of.get(&(b, a))).copied()
    }

    fn join(&self, a: usize, b: usize) -> Option<usize> {
        self.join_of.get(&(a, b)).or_else(|| self.join_of.get(&(b, a))).copied()
    }
}

impl Consequence {
    fn add(&mut self, i: usize, j: usize) -> bool {
        debug_assert_eq!(self.fiber_of[i], self.fiber_of[j]);
        let bit = self.local[j];
        if self.rows[i].contains(bit) {
            false
        } else {
            self.rows[i].insert(bit);
            true
        }
    }

    fn has(&self, i: usize, j: usize) -> bool {
        self.fiber_of[i] == self.fiber_of[j] && self.rows[i].contains(self.local[j])
    }

    fn row_members(&self, i: usize) -> Vec<usize> {
        let fiber = &self.members[self.fiber_of[i]];
        self.rows[i].ones().map(|b| fiber[b]).collect()
    }

    pub fn universe(&self) -> &FormulaUniverse {
        &self.universe
    }

    /// True iff `q` is derivable; false when either side is outside the universe.
    pub fn derives(&self, q: &Sequent) -> bool {
        match (self.universe.index.get(&q.lhs), self.universe.index.get(&q.rhs)) {
            (Some(&i), Some(&j)) => self.has(i, j),
            _ => false,
        }
    }

    /// Derivability of the sequent reading `Σ_h(premise) ⊢ conclusion`.
    pub fn derives_constraint(&self, c: &Constraint) -> bool {
        self.derives(&c.as_sequent())
    }

    /// Every derivable sequent, in a deterministic order.
    pub fn sequents(&self) -> impl Iterator<Item = Sequent> + '_ {
        (0..self.rows.len()).flat_map(move |i| {
            self.row_members(i)
                .into_iter()
                .map(move |j| Sequent::new(self.universe.formulas[i].clone(), self.universe.formulas[j].clone()))
        })
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones(..)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Derivable sequents whose two sides differ and whose left side is not
    /// a bottom and right side not a top.
    pub fn nontrivial(&self) -> impl Iterator<Item = Sequent> + '_ {
        self.sequents().filter(|q| {
            q.lhs != q.rhs && !matches!(q.lhs, Formula::Bottom(_)) && !matches!(q.rhs, Formula::Top(_))
        })
    }
}

/// The closure of `spec` over `universe` under the default sound rules.
pub fn consequence(spec: &Specification, universe: &FormulaUniverse) -> Result<Consequence> {
    consequence_with(spec, universe, RuleSet::sound(), std::iter::empty())
}

/// The closure of `spec` over `universe`, extended by the formulas of the
/// specification and of `queries`, under the given rules.
pub fn consequence_with<'a>(
    spec: &Specification,
    universe: &FormulaUniverse,
    rules: RuleSet,
    queries: impl IntoIterator<Item = &'a Constraint>,
) -> Result<Consequence> {
    if spec.schema() != universe.schema() && spec.schema().as_ref() != universe.schema().as_ref() {
        return Err(Error::TypeMismatch("specification and universe use different schemas".into()));
    }
    let mut u = universe.clone();
    u.extend(spec.constraints().iter().flat_map(|c| c.formulas()))?;
    let queries: Vec<&Constraint> = queries.into_iter().collect();
    for q in &queries {
        q.typecheck(u.schema())?;
    }
    u.extend(queries.iter().flat_map(|c| c.formulas()))?;

    let mut fiber_ids: BTreeMap<TypeList, usize> = BTreeMap::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut fiber_of = Vec::with_capacity(u.len());
    let mut local = Vec::with_capacity(u.len());
    for (i, l) in u.types.iter().enumerate() {
        let id = *fiber_ids.entry(l.clone()).or_insert_with(|| {
            members.push(Vec::new());
            members.len() - 1
        });
        fiber_of.push(id);
        local.push(members[id].len());
        members[id].push(i);
    }
    let rows = (0..u.len())
        .map(|i| FixedBitSet::with_capacity(members[fiber_of[i]].len()))
        .collect();

    let mut morphisms: BTreeMap<TypeListMorphism, usize> = BTreeMap::new();
    let mut shapes = Shapes::default();
    for (i, f) in u.formulas.iter().enumerate() {
        let id = |g: &Formula| u.index[g];
        let mut mid = |h: &TypeListMorphism| {
            let n = morphisms.len();
            *morphisms.entry(h.clone().without_label()).or_insert(n)
        };
        match f {
            Formula::Meet(a, b) => {
                shapes.meets.push((i, id(a), id(b)));
                shapes.meet_of.insert((id(a), id(b)), i);
            }
            Formula::Join(a, b) => {
                shapes.joins.push((i, id(a), id(b)));
                shapes.join_of.insert((id(a), id(b)), i);
            }
            Formula::Impl(a, b) => shapes.impls.push((i, id(a), id(b))),
            Formula::Diff(a, b) => shapes.diffs.push((i, id(a), id(b))),
            Formula::Neg(a) => {
                shapes.negs.push((i, id(a)));
                shapes.neg_of.insert(id(a), i);
            }
            Formula::SumFlow(h, a) => {
                let m = mid(h);
                shapes.sums.push((i, m, id(a)));
                shapes.sum_of.insert((m, id(a)), i);
            }
            Formula::ProdFlow(h, a) => {
                let m = mid(h);
                shapes.prods.push((i, m, id(a)));
                shapes.prod_of.insert((m, id(a)), i);
            }
            Formula::Subst(h, a) => {
                let m = mid(h);
                shapes.substs.push((i, m, id(a)));
                shapes.subst_of.insert((m, id(a)), i);
            }
            Formula::Top(_) => {
                shapes.top_of.insert(fiber_of[i], i);
            }
            Formula::Bottom(_) => {
                shapes.bottom_of.insert(fiber_of[i], i);
            }
            Formula::Atom(_) => {}
        }
    }

    let mut c = Consequence {
        universe: u,
        fiber_of,
        local,
        members,
        rows,
    };
    axioms(&mut c, &shapes, spec);
    loop {
        let mut changed = transitive_closure(&mut c);
        changed |= apply_rules(&mut c, &shapes, rules);
        if !changed {
            break;
        }
    }
    Ok(c)
}

fn axioms(c: &mut Consequence, s: &Shapes, spec: &Specification) {
    for i in 0..c.rows.len() {
        c.add(i, i);
        let f = c.fiber_of[i];
        if let Some(&b) = s.bottom_of.get(&f) {
            c.add(b, i);
        }
        if let Some(&t) = s.top_of.get(&f) {
            c.add(i, t);
        }
    }
    for &(m, a, b) in &s.meets {
        c.add(m, a);
        c.add(m, b);
    }
    for &(j, a, b) in &s.joins {
        c.add(a, j);
        c.add(b, j);
    }
    for &(n1, a) in &s.negs {
        if let Some(&n2) = s.neg_of.get(&n1) {
            c.add(n2, a);
            c.add(a, n2);
        }
        let f = c.fiber_of[a];
        if let (Some(m), Some(&bot)) = (s.meet(a, n1), s.bottom_of.get(&f)) {
            c.add(m, bot);
        }
        if let (Some(j), Some(&top)) = (s.join(a, n1), s.top_of.get(&f)) {
            c.add(top, j);
        }
    }
    for &(d, a, b) in &s.diffs {
        c.add(d, a);
        if let Some(&nb) = s.neg_of.get(&b) {
            c.add(d, nb);
            if let Some(m) = s.meet(a, nb) {
                c.add(m, d);
            }
        }
        if let (Some(m), Some(&bot)) = (s.meet(d, b), s.bottom_of.get(&c.fiber_of[d])) {
            c.add(m, bot);
        }
        if let Some(j) = s.join(d, b) {
            c.add(a, j);
        }
    }
    for k in spec.constraints() {
        let q = k.as_sequent();
        let i = c.universe.index[&q.lhs];
        let j = c.universe.index[&q.rhs];
        c.add(i, j);
    }
}

fn transitive_closure(c: &mut Consequence) -> bool {
    let mut changed = false;
    for fiber in 0..c.members.len() {
        let ids = c.members[fiber].clone();
        for (kb, &k) in ids.iter().enumerate() {
            let row_k = c.rows[k].clone();
            for &i in &ids {
                if i != k && c.rows[i].contains(kb) {
                    let before = c.rows[i].count_ones(..);
                    c.rows[i].union_with(&row_k);
                    changed |= c.rows[i].count_ones(..) != before;
                }
            }
        }
    }
    changed
}

fn apply_rules(c: &mut Consequence, s: &Shapes, rules: RuleSet) -> bool {
    let mut changed = false;
    // Meet introduction.
    for &(m, a, b) in &s.meets {
        for i in c.members[c.fiber_of[m]].clone() {
            if c.has(i, a) && c.has(i, b) {
                changed |= c.add(i, m);
            }
        }
    }
    // Join elimination.
    for &(j, a, b) in &s.joins {
        let mut both = c.rows[a].clone();
        both.intersect_with(&c.rows[b]);
        let before = c.rows[j].count_ones(..);
        c.rows[j].union_with(&both);
        changed |= c.rows[j].count_ones(..) != before;
    }
    // Residuation: χ ∧ a ⊢ b iff χ ⊢ a → b.
    for &(p, a, b) in &s.impls {
        for i in c.members[c.fiber_of[p]].clone() {
            if let Some(m) = s.meet(i, a) {
                if c.has(m, b) {
                    changed |= c.add(i, p);
                }
                if c.has(i, p) {
                    changed |= c.add(m, b);
                }
            }
        }
    }
    // Difference introduction: χ ⊢ a and χ ⊢ ¬b give χ ⊢ a \ b.
    for &(d, a, b) in &s.diffs {
        if let Some(&nb) = s.neg_of.get(&b) {
            for i in c.members[c.fiber_of[d]].clone() {
                if c.has(i, a) && c.has(i, nb) {
                    changed |= c.add(i, d);
                }
            }
        }
    }
    // Contraposition.
    for &(na, a) in &s.negs {
        for b in c.row_members(a) {
            if let Some(&nb) = s.neg_of.get(&b) {
                changed |= c.add(nb, na);
            }
        }
    }
    // Monotonicity of the flows.
    for (nodes, lookup) in [(&s.sums, &s.sum_of), (&s.prods, &s.prod_of), (&s.substs, &s.subst_of)] {
        for &(x, h, a) in nodes {
            for b in c.row_members(a) {
                if let Some(&y) = lookup.get(&(h, b)) {
                    changed |= c.add(x, y);
                }
            }
        }
    }
    if rules.adjunction {
        // Σ_h a ⊢ ψ iff a ⊢ h*ψ.
        for &(x, h, a) in &s.sums {
            for psi in c.row_members(x) {
                if let Some(&u) = s.subst_of.get(&(h, psi)) {
                    changed |= c.add(a, u);
                }
            }
        }
        for &(u, h, psi) in &s.substs {
            for phi in c.members[c.fiber_of[u]].clone() {
                if c.has(phi, u) {
                    if let Some(&x) = s.sum_of.get(&(h, phi)) {
                        changed |= c.add(x, psi);
                    }
                }
            }
        }
        // h*a ⊢ ψ iff a ⊢ Π_h ψ.
        for &(u, h, a) in &s.substs {
            for psi in c.row_members(u) {
                if let Some(&p) = s.prod_of.get(&(h, psi)) {
                    changed |= c.add(a, p);
                }
            }
        }
        for &(p, h, psi) in &s.prods {
            for phi in c.members[c.fiber_of[p]].clone() {
                if c.has(phi, p) {
                    if let Some(&u) = s.subst_of.get(&(h, phi)) {
                        changed |= c.add(u, psi);
                    }
                }
            }
        }
    }
    changed
}

/// Alias of [`Structure::satisfies_constraint`].
pub fn semantic_entails(m: &Structure, c: &Constraint) -> Result<bool> {
    m.satisfies_constraint(c)
}

/// Constraints of `t2` whose translation along `m` is not derivable from
/// `t1` within `u1`.
pub fn spec_morphism_validate(
    m: &SchemaMorphism,
    t2: &Specification,
    t1: &Specification,
    u1: &FormulaUniverse,
) -> Result<Vec<Constraint>> {
    let translated: Vec<(Constraint, Constraint)> = t2
        .constraints()
        .iter()
        .map(|c| Ok((c.clone(), translate_constraint(m, c)?)))
        .collect::<Result<_>>()?;
    let closure = consequence_with(t1, u1, RuleSet::sound(), translated.iter().map(|(_, t)| t))?;
    Ok(translated
        .into_iter()
        .filter(|(_, t)| !closure.derives_constraint(t))
        .map(|(c, _)| c)
        .collect())
}

/// Constraints of the logic's specification its structure does not satisfy.
pub fn soundness_check(l: &Logic) -> Result<Vec<Constraint>> {
    let mut out = Vec::new();
    for c in l.spec.constraints() {
        if !l.structure.satisfies_constraint(c)? {
            out.push(c.clone());
        }
    }
    Ok(out)
}

impl fmt::Display for Specification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.constraints {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}
