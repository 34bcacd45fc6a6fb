//! A deliberately naive evaluator: plain recursion over keys with no
//! caching, its own typing check and its own tuple enumeration.

use std::collections::{BTreeMap, BTreeSet};

use fole::formula::Formula;
use fole::kernel::{Tuple, TypeList, TypeListMorphism};
use fole::structure::Structure;
use fole::{Index, Key, Token};

fn typed(m: &Structure, t: &Tuple, list: &TypeList) -> bool {
    let idx: Vec<&Index> = t.arity().collect();
    let want: Vec<&Index> = list.arity().collect();
    idx == want
        && list
            .iter()
            .all(|(i, x)| m.entities().holds(t.get(i).unwrap(), x))
}

fn fiber(m: &Structure, list: &TypeList) -> BTreeSet<Key> {
    m.tau()
        .iter()
        .filter(|(_, t)| typed(m, t, list))
        .map(|(k, _)| k.clone())
        .collect()
}

/// Every tuple over `list` built from tokens of the right sort.
fn all_tuples(m: &Structure, list: &TypeList) -> Vec<Tuple> {
    let mut acc: Vec<BTreeMap<Index, Token>> = vec![BTreeMap::new()];
    for (i, x) in list.iter() {
        let mut next = Vec::new();
        for partial in &acc {
            for y in m.entities().tokens() {
                if m.entities().holds(y, x) {
                    let mut p = partial.clone();
                    p.insert(i.clone(), y.clone());
                    next.push(p);
                }
            }
        }
        acc = next;
    }
    acc.into_iter().map(Tuple::new).collect()
}

/// `t ∘ h`: reads each source index of `h` off the target-indexed tuple.
fn restrict(h: &TypeListMorphism, t: &Tuple) -> Tuple {
    Tuple::new(h.map().iter().map(|(i, j)| (i.clone(), t.get(j).unwrap().clone())))
}

pub fn type_of(m: &Structure, phi: &Formula) -> TypeList {
    match phi {
        Formula::Atom(r) => m.schema().relations()[r].clone(),
        Formula::Top(l) | Formula::Bottom(l) => l.clone(),
        Formula::Meet(a, _) | Formula::Join(a, _) | Formula::Impl(a, _) | Formula::Diff(a, _) | Formula::Neg(a) => {
            type_of(m, a)
        }
        Formula::SumFlow(h, _) | Formula::ProdFlow(h, _) => h.source().clone(),
        Formula::Subst(h, _) => h.target().clone(),
    }
}

fn image(m: &Structure, keys: &BTreeSet<Key>) -> BTreeSet<Tuple> {
    keys.iter().map(|k| m.tau()[k].clone()).collect()
}

pub fn eval(m: &Structure, phi: &Formula) -> BTreeSet<Key> {
    let list = type_of(m, phi);
    let fib = fiber(m, &list);
    match phi {
        Formula::Atom(r) => fib
            .into_iter()
            .filter(|k| m.relations().holds(k, r))
            .collect(),
        Formula::Top(_) => fib,
        Formula::Bottom(_) => BTreeSet::new(),
        Formula::Meet(a, b) => {
            let (x, y) = (eval(m, a), eval(m, b));
            fib.into_iter().filter(|k| x.contains(k) && y.contains(k)).collect()
        }
        Formula::Join(a, b) => {
            let (x, y) = (eval(m, a), eval(m, b));
            fib.into_iter().filter(|k| x.contains(k) || y.contains(k)).collect()
        }
        Formula::Impl(a, b) => {
            let (x, y) = (eval(m, a), eval(m, b));
            fib.into_iter().filter(|k| !x.contains(k) || y.contains(k)).collect()
        }
        Formula::Diff(a, b) => {
            let (x, y) = (eval(m, a), eval(m, b));
            fib.into_iter().filter(|k| x.contains(k) && !y.contains(k)).collect()
        }
        Formula::Neg(a) => {
            let x = eval(m, a);
            fib.into_iter().filter(|k| !x.contains(k)).collect()
        }
        Formula::SumFlow(h, a) => {
            let rel = image(m, &eval(m, a));
            fib.into_iter()
                .filter(|k| rel.iter().any(|t| restrict(h, t) == m.tau()[k]))
                .collect()
        }
        Formula::ProdFlow(h, a) => {
            let rel = image(m, &eval(m, a));
            let candidates = all_tuples(m, h.target());
            fib.into_iter()
                .filter(|k| {
                    candidates
                        .iter()
                        .filter(|t| restrict(h, t) == m.tau()[k])
                        .all(|t| rel.contains(t))
                })
                .collect()
        }
        Formula::Subst(h, a) => {
            let rel = image(m, &eval(m, a));
            fib.into_iter()
                .filter(|k| rel.contains(&restrict(h, &m.tau()[k])))
                .collect()
        }
    }
}
