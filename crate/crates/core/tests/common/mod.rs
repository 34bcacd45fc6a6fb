//! Random generators and an independent evaluator shared by the
//! integration tests.

#![allow(dead_code)]

pub mod oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use fole::formula::{Constraint, Formula};
use fole::kernel::{list_holds, Classification, EntityClassification, Tuple, TypeList, TypeListMorphism};
use fole::schema::{Schema, SchemaMorphism};
use fole::structure::{Structure, StructureMorphism};
use fole::{Index, Key, RelName, Sort, Token};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub const INDICES: [&str; 3] = ["a", "b", "c"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Size bounds for random schemas and structures.
#[derive(Clone, Copy, Debug)]
pub struct Bounds {
    pub sorts: usize,
    pub tokens: usize,
    pub relations: usize,
    pub keys: usize,
    pub arity: usize,
}

pub const SMALL: Bounds = Bounds {
    sorts: 4,
    tokens: 5,
    relations: 3,
    keys: 6,
    arity: 2,
};

fn random_list(rng: &mut impl Rng, sorts: &[Sort], max_arity: usize) -> TypeList {
    let n = rng.gen_range(1..=max_arity.min(INDICES.len()));
    TypeList::new(INDICES[..n].iter().map(|i| (*i, sorts.choose(rng).unwrap().clone()))).unwrap()
}

pub fn schema(rng: &mut impl Rng, b: Bounds) -> Schema {
    let sorts: Vec<Sort> = (0..rng.gen_range(1..=b.sorts)).map(|i| Sort::new(format!("X{i}"))).collect();
    let rels: Vec<(RelName, TypeList)> = (0..rng.gen_range(1..=b.relations))
        .map(|i| (RelName::new(format!("R{i}")), random_list(rng, &sorts, b.arity)))
        .collect();
    Schema::new(sorts, rels)
}

/// Every sort-preserving index map from `source` into `target`.
pub fn all_morphisms(source: &TypeList, target: &TypeList) -> Vec<TypeListMorphism> {
    let src: Vec<(&Index, &Sort)> = source.iter().collect();
    let mut out = Vec::new();
    let mut current: Vec<Index> = Vec::new();
    fn go(
        src: &[(&Index, &Sort)],
        target: &TypeList,
        source: &TypeList,
        current: &mut Vec<Index>,
        out: &mut Vec<TypeListMorphism>,
    ) {
        if current.len() == src.len() {
            let map = src.iter().map(|(i, _)| (*i).clone()).zip(current.iter().cloned()).collect();
            out.push(TypeListMorphism::new(source.clone(), target.clone(), map).unwrap());
            return;
        }
        let want = src[current.len()].1;
        for (j, s) in target.iter() {
            if s == want {
                current.push(j.clone());
                go(src, target, source, current, out);
                current.pop();
            }
        }
    }
    go(&src, target, source, &mut current, &mut out);
    out
}

/// Sub-lists of a list, including the empty one.
pub fn sublists(list: &TypeList) -> Vec<TypeList> {
    let entries: Vec<(&Index, &Sort)> = list.iter().collect();
    (0u32..(1 << entries.len()))
        .map(|mask| {
            TypeList::new(
                entries
                    .iter()
                    .enumerate()
                    .filter(|(n, _)| mask & (1 << n) != 0)
                    .map(|(_, (i, s))| ((*i).clone(), (*s).clone())),
            )
            .unwrap()
        })
        .collect()
}

/// A handful of type-list morphisms between relation signatures and their
/// sub-lists, including non-injective ones when available.
pub fn pool(rng: &mut impl Rng, s: &Schema, max: usize) -> Vec<TypeListMorphism> {
    let mut lists: BTreeSet<TypeList> = BTreeSet::new();
    for l in s.relations().values() {
        lists.extend(sublists(l));
    }
    let lists: Vec<TypeList> = lists.into_iter().collect();
    let sigs: Vec<&TypeList> = s.relations().values().collect();
    let mut candidates = Vec::new();
    for target in &sigs {
        for source in &lists {
            candidates.extend(all_morphisms(source, target));
        }
    }
    for source in &sigs {
        for target in &lists {
            if !target.is_empty() {
                candidates.extend(all_morphisms(source, target));
            }
        }
    }
    candidates.sort();
    candidates.dedup();
    candidates.shuffle(rng);
    candidates.truncate(max);
    candidates.sort();
    candidates
}

/// The type lists reachable as formula types: signatures and pool endpoints.
pub fn fibers(s: &Schema, pool: &[TypeListMorphism]) -> Vec<TypeList> {
    let mut out: BTreeSet<TypeList> = s.relations().values().cloned().collect();
    for h in pool {
        out.insert(h.source().clone());
        out.insert(h.target().clone());
    }
    out.into_iter().collect()
}

/// A random formula of type `list` and depth at most `depth`.
pub fn formula(rng: &mut impl Rng, s: &Schema, pool: &[TypeListMorphism], list: &TypeList, depth: usize) -> Formula {
    let atoms: Vec<&RelName> = s.relations().iter().filter(|(_, l)| *l == list).map(|(r, _)| r).collect();
    let leaf = |rng: &mut dyn rand::RngCore| -> Formula {
        let roll = rng.gen_range(0..10);
        if !atoms.is_empty() && roll < 7 {
            Formula::Atom((*atoms.choose(rng).unwrap()).clone())
        } else if roll < 9 {
            Formula::Top(list.clone())
        } else {
            Formula::Bottom(list.clone())
        }
    };
    if depth == 0 || rng.gen_bool(0.25) {
        return leaf(rng);
    }
    let d = depth - 1;
    let into: Vec<&TypeListMorphism> = pool.iter().filter(|h| h.source() == list).collect();
    let out_of: Vec<&TypeListMorphism> = pool.iter().filter(|h| h.target() == list).collect();
    loop {
        match rng.gen_range(0..9) {
            0 => return Formula::not(formula(rng, s, pool, list, d)),
            1 => return Formula::meet(formula(rng, s, pool, list, d), formula(rng, s, pool, list, d)),
            2 => return Formula::join(formula(rng, s, pool, list, d), formula(rng, s, pool, list, d)),
            3 => return Formula::implies(formula(rng, s, pool, list, d), formula(rng, s, pool, list, d)),
            4 => return Formula::diff(formula(rng, s, pool, list, d), formula(rng, s, pool, list, d)),
            5 | 6 if !into.is_empty() => {
                let h = (*into.choose(rng).unwrap()).clone();
                let body = formula(rng, s, pool, h.target(), d);
                return if rng.gen_bool(0.5) {
                    Formula::exists(h, body)
                } else {
                    Formula::forall(h, body)
                };
            }
            7 | 8 if !out_of.is_empty() => {
                let h = (*out_of.choose(rng).unwrap()).clone();
                let body = formula(rng, s, pool, h.source(), d);
                return Formula::subst(h, body);
            }
            _ => continue,
        }
    }
}

/// A random constraint: a plain sequent or one along a pool morphism.
pub fn constraint(rng: &mut impl Rng, s: &Schema, pool: &[TypeListMorphism], depth: usize) -> Constraint {
    if !pool.is_empty() && rng.gen_bool(0.4) {
        let h = pool.choose(rng).unwrap().clone();
        let premise = formula(rng, s, pool, h.target(), depth);
        let conclusion = formula(rng, s, pool, h.source(), depth);
        Constraint::along(h, premise, conclusion)
    } else {
        let lists = fibers(s, pool);
        let l = lists.choose(rng).unwrap();
        Constraint::sequent(formula(rng, s, pool, l, depth), formula(rng, s, pool, l, depth))
    }
}

pub fn entities(rng: &mut impl Rng, s: &Schema, tokens: usize) -> EntityClassification {
    let ys: Vec<Token> = (0..rng.gen_range(1..=tokens)).map(|i| Token::new(format!("y{i}"))).collect();
    let mut inc = Vec::new();
    for y in &ys {
        for x in s.sorts() {
            if rng.gen_bool(0.5) {
                inc.push((y.clone(), x.clone()));
            }
        }
    }
    Classification::new(s.sorts().iter().cloned(), ys, inc).unwrap()
}

/// A tuple over `list` using tokens of the right sort where possible.
fn tuple_over(rng: &mut impl Rng, e: &EntityClassification, list: &TypeList) -> Tuple {
    let all: Vec<&Token> = e.tokens().iter().collect();
    Tuple::new(list.iter().map(|(i, x)| {
        let ext: Vec<&Token> = e.extent(x).iter().collect();
        let y = if !ext.is_empty() && rng.gen_bool(0.9) {
            *ext.choose(rng).unwrap()
        } else {
            *all.choose(rng).unwrap()
        };
        (i.clone(), y.clone())
    }))
}

/// Relations a key may belong to: those whose signature classifies its tuple.
fn fitting<'a>(s: &'a Schema, e: &EntityClassification, t: &Tuple) -> Vec<&'a RelName> {
    s.relations()
        .iter()
        .filter(|(_, l)| list_holds(e, t, l))
        .map(|(r, _)| r)
        .collect()
}

pub fn structure_with(rng: &mut impl Rng, s: Arc<Schema>, e: EntityClassification, keys: usize, extra: &[TypeList]) -> Structure {
    let mut lists: Vec<TypeList> = s.relations().values().cloned().collect();
    lists.extend(extra.iter().cloned());
    let mut tau = BTreeMap::new();
    let mut inc = Vec::new();
    for n in 0..rng.gen_range(0..=keys) {
        let k = Key::new(format!("k{n}"));
        let list = lists.choose(rng).unwrap().clone();
        let t = tuple_over(rng, &e, &list);
        for r in fitting(&s, &e, &t) {
            if rng.gen_bool(0.6) {
                inc.push((k.clone(), r.clone()));
            }
        }
        tau.insert(k, t);
    }
    Structure::new(s, e, tau, inc).unwrap()
}

pub fn structure(rng: &mut impl Rng, s: Arc<Schema>, b: Bounds, extra: &[TypeList]) -> Structure {
    let e = entities(rng, &s, b.tokens);
    structure_with(rng, s, e, b.keys, extra)
}

/// A schema `S2` with a valid morphism `S2 -> s1`. Sorts of `s1` get one
/// or two preimages and several relations may share an image.
pub fn schema_morphism_into(rng: &mut impl Rng, s1: &Schema, max_relations: usize) -> (Schema, SchemaMorphism) {
    let mut type_map = BTreeMap::new();
    let mut pre: BTreeMap<Sort, Vec<Sort>> = BTreeMap::new();
    let mut n = 0;
    for x in s1.sorts() {
        for _ in 0..rng.gen_range(1..=2) {
            let z = Sort::new(format!("Z{n}"));
            n += 1;
            type_map.insert(z.clone(), x.clone());
            pre.entry(x.clone()).or_default().push(z);
        }
    }
    // an unused sort in S2 as well, sometimes
    if rng.gen_bool(0.3) {
        let x = s1.sorts().iter().next().unwrap().clone();
        let z = Sort::new(format!("Z{n}"));
        type_map.insert(z.clone(), x.clone());
        pre.entry(x).or_default().push(z);
    }
    let targets: Vec<(&RelName, &TypeList)> = s1.relations().iter().collect();
    let mut rel_map = BTreeMap::new();
    let mut rels = Vec::new();
    for j in 0..rng.gen_range(1..=max_relations) {
        let (r1, l1) = targets.choose(rng).unwrap();
        let l2 = TypeList::new(l1.iter().map(|(i, x)| (i.clone(), pre[x].choose(rng).unwrap().clone()))).unwrap();
        let q = RelName::new(format!("Q{j}"));
        rel_map.insert(q.clone(), (*r1).clone());
        rels.push((q, l2));
    }
    let s2 = Schema::new(type_map.keys().cloned(), rels);
    (s2, SchemaMorphism::new(rel_map, type_map))
}

/// A vertical morphism `m2 ⇄ m1` where `m1` is built from `m2` along a
/// random key map `K1 -> K2` and token map `Y1 -> Y2`. With `faithful`,
/// the key map is onto and the token map is a bijection.
pub fn vertical_from(rng: &mut impl Rng, m2: &Structure, max_keys: usize, faithful: bool) -> (Structure, StructureMorphism) {
    let e2 = m2.entities();
    // Y1: copies of Y2 tokens; every token used by a key gets at least one copy.
    let used: BTreeSet<&Token> = m2.tau().values().flat_map(|t| t.values()).collect();
    let mut copies: BTreeMap<Token, Vec<Token>> = BTreeMap::new();
    let mut token_map = BTreeMap::new();
    let mut inc = Vec::new();
    let mut n = 0;
    for y in e2.tokens() {
        let count = if faithful {
            1
        } else if used.contains(y) {
            rng.gen_range(1..=2)
        } else {
            rng.gen_range(0..=1)
        };
        for _ in 0..count {
            let y1 = Token::new(format!("u{n}"));
            n += 1;
            for x in e2.intent(y) {
                inc.push((y1.clone(), x));
            }
            token_map.insert(y1.clone(), y.clone());
            copies.entry(y.clone()).or_default().push(y1);
        }
    }
    let e1 = Classification::new(e2.types().iter().cloned(), token_map.keys().cloned(), inc).unwrap();
    let k2s: Vec<&Key> = m2.keys().iter().collect();
    let mut tau = BTreeMap::new();
    let mut key_map = BTreeMap::new();
    let mut rel_inc = Vec::new();
    if !k2s.is_empty() {
        let extra = rng.gen_range(0..=max_keys);
        let total = if faithful { k2s.len() + extra } else { extra };
        for j in 0..total {
            let k2 = if faithful && j < k2s.len() { k2s[j] } else { *k2s.choose(rng).unwrap() };
            let k1 = Key::new(format!("j{j}"));
            let t = Tuple::new(m2.tau()[k2].iter().map(|(i, y)| (i.clone(), copies[y].choose(rng).unwrap().clone())));
            for r in m2.relations().intent(k2) {
                rel_inc.push((k1.clone(), r));
            }
            tau.insert(k1.clone(), t);
            key_map.insert(k1, k2.clone());
        }
    }
    let m1 = Structure::new(m2.schema_arc().clone(), e1, tau, rel_inc).unwrap();
    let h = StructureMorphism::vertical(m2.schema(), key_map, token_map);
    (m1, h)
}

pub fn is_surjective<A: Ord, B: Ord + Clone>(map: &BTreeMap<A, B>, codomain: &BTreeSet<B>) -> bool {
    let image: BTreeSet<&B> = map.values().collect();
    codomain.iter().all(|b| image.contains(b))
}

pub fn is_injective<A: Ord, B: Ord>(map: &BTreeMap<A, B>) -> bool {
    let image: BTreeSet<&B> = map.values().collect();
    image.len() == map.len()
}
