//! Property tests over randomly generated schemas, structures and formulas.
//! Each case draws a seed and builds its inputs with the shared generators.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use common::{Bounds, SMALL};
use fole::algebra::{eval_vector, satisfies_equation, Algebra, Equation, OpSig, OperatorDomain, Term, TermVector};
use fole::database::{db_morphism_of, db_of_logic};
use fole::formula::{infer_typelist, translate, Constraint, Formula};
use fole::kernel::{inverse_image_classification, tup, tup_map, Classification, TypeList};
use fole::schema::{schema_morphism_validate, SchemaMorphism};
use fole::speclogic::{consequence, spec_morphism_validate, Connectives, FormulaUniverse, Logic, Specification};
use fole::structure::{reduct, structure_validate, Structure, StructureMorphism};
use fole::system::{channel_covers, fusion, sum_system, Channel, DistributedSystem, InformationSystem, ShapeGraph};
use fole::workspace::{write_schema, write_spec, write_structure, SchemaDef, SpecDef, Workspace};
use fole::{EdgeId, NodeId, Sort, Symbol, Token};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

const TINY: Bounds = Bounds {
    sorts: 2,
    tokens: 3,
    relations: 2,
    keys: 4,
    arity: 2,
};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn tup_map_is_contravariantly_functorial(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let s = common::schema(&mut rng, SMALL);
        let e = common::entities(&mut rng, &s, 4);
        let sorts: Vec<Sort> = s.sorts().iter().cloned().collect();
        let list = |rng: &mut rand_chacha::ChaCha8Rng| {
            let n = rng.gen_range(0..=3);
            TypeList::new(common::INDICES[..n].iter().map(|i| (*i, sorts.choose(rng).unwrap().clone()))).unwrap()
        };
        let (l1, l2, l3) = (list(&mut rng), list(&mut rng), list(&mut rng));
        let h1s = common::all_morphisms(&l1, &l2);
        let h2s = common::all_morphisms(&l2, &l3);
        prop_assume!(!h1s.is_empty() && !h2s.is_empty());
        let h1 = h1s.choose(&mut rng).unwrap();
        let h2 = h2s.choose(&mut rng).unwrap();
        let composite = h1.then(h2).unwrap();
        for t in tup(&e, &l3).unwrap().tuples {
            let stepwise = tup_map(h1, &tup_map(h2, &t).unwrap()).unwrap();
            prop_assert_eq!(tup_map(&composite, &t).unwrap(), stepwise);
        }
    }

    #[test]
    fn tup_size_is_the_product_of_extents(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let s = common::schema(&mut rng, Bounds { arity: 3, ..SMALL });
        let e = common::entities(&mut rng, &s, 5);
        for l in s.relations().values() {
            let expected: usize = l.iter().map(|(_, x)| e.extent(x).len()).product();
            prop_assert_eq!(tup(&e, l).unwrap().len(), expected);
        }
    }

    #[test]
    fn inverse_images_compose(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let s = common::schema(&mut rng, SMALL);
        let c = common::entities(&mut rng, &s, 5);
        let x1: Vec<Sort> = s.sorts().iter().cloned().collect();
        let id: BTreeMap<Sort, Sort> = x1.iter().map(|x| (x.clone(), x.clone())).collect();
        prop_assert_eq!(inverse_image_classification(&id, &c).unwrap(), c.clone());
        let b: BTreeMap<Sort, Sort> =
            (0..3).map(|n| (Sort::new(format!("V{n}")), x1.choose(&mut rng).unwrap().clone())).collect();
        let x2: Vec<Sort> = b.keys().cloned().collect();
        let a: BTreeMap<Sort, Sort> =
            (0..3).map(|n| (Sort::new(format!("W{n}")), x2.choose(&mut rng).unwrap().clone())).collect();
        let ab: BTreeMap<Sort, Sort> = a.iter().map(|(w, v)| (w.clone(), b[v].clone())).collect();
        let stepwise = inverse_image_classification(&a, &inverse_image_classification(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(stepwise, inverse_image_classification(&ab, &c).unwrap());
    }

    #[test]
    fn schema_morphisms_validate_and_compose(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let s1 = common::schema(&mut rng, SMALL);
        let (s2, m21) = common::schema_morphism_into(&mut rng, &s1, 3);
        let (s3, m32) = common::schema_morphism_into(&mut rng, &s2, 3);
        prop_assert!(schema_morphism_validate(&m21, &s2, &s1).is_empty());
        for (r, l) in s2.relations() {
            prop_assert_eq!(&m21.list(l).unwrap(), &s1.relations()[&m21.rel_map[r]]);
        }
        let m31 = m32.then(&m21).unwrap();
        prop_assert!(schema_morphism_validate(&m31, &s3, &s1).is_empty());
    }

    #[test]
    fn translation_is_natural_and_functorial(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let s1 = common::schema(&mut rng, SMALL);
        let (s2, m21) = common::schema_morphism_into(&mut rng, &s1, 3);
        let (s3, m32) = common::schema_morphism_into(&mut rng, &s2, 3);
        let pool = common::pool(&mut rng, &s3, 3);
        let lists = common::fibers(&s3, &pool);
        let l = lists.choose(&mut rng).unwrap();
        let phi = common::formula(&mut rng, &s3, &pool, l, 3);
        let t2 = translate(&m32, &phi).unwrap();
        prop_assert_eq!(infer_typelist(&s2, &t2).unwrap(), m32.list(&infer_typelist(&s3, &phi).unwrap()).unwrap());
        let composite = translate(&m32.then(&m21).unwrap(), &phi).unwrap();
        prop_assert_eq!(composite, translate(&m21, &t2).unwrap());
        prop_assert_eq!(translate(&SchemaMorphism::identity(&s3), &phi).unwrap(), phi);
        for r in s3.relations().keys() {
            prop_assert_eq!(translate(&m32, &Formula::atom(r.clone())).unwrap(), Formula::atom(m32.rel_map[r].clone()));
        }
    }

    #[test]
    fn connectives_follow_the_fiber_lattice(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let s = Arc::new(common::schema(&mut rng, SMALL));
        let pool = common::pool(&mut rng, &s, 3);
        let lists = common::fibers(&s, &pool);
        let m = common::structure(&mut rng, s.clone(), SMALL, &lists);
        let l = lists.choose(&mut rng).unwrap();
        let a = common::formula(&mut rng, &s, &pool, l, 2);
        let b = common::formula(&mut rng, &s, &pool, l, 2);
        let fiber = m.fiber(l).unwrap();
        let (ea, eb) = (m.eval(&a).unwrap(), m.eval(&b).unwrap());
        let meet: BTreeSet<_> = ea.intersection(&eb).cloned().collect();
        let join: BTreeSet<_> = ea.union(&eb).cloned().collect();
        let diff: BTreeSet<_> = ea.difference(&eb).cloned().collect();
        let imp: BTreeSet<_> = fiber.iter().filter(|k| !ea.contains(*k) || eb.contains(*k)).cloned().collect();
        prop_assert_eq!(&*m.eval(&Formula::meet(a.clone(), b.clone())).unwrap(), &meet);
        prop_assert_eq!(&*m.eval(&Formula::join(a.clone(), b.clone())).unwrap(), &join);
        prop_assert_eq!(&*m.eval(&Formula::diff(a.clone(), b.clone())).unwrap(), &diff);
        prop_assert_eq!(&*m.eval(&Formula::implies(a.clone(), b.clone())).unwrap(), &imp);
        prop_assert_eq!(m.eval(&Formula::not(Formula::not(a.clone()))).unwrap(), ea.clone());
        prop_assert!(ea.is_subset(&fiber));
    }

    #[test]
    fn memoization_is_invisible(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let s = Arc::new(common::schema(&mut rng, SMALL));
        let pool = common::pool(&mut rng, &s, 3);
        let lists = common::fibers(&s, &pool);
        let m = common::structure(&mut rng, s.clone(), SMALL, &lists);
        let phis: Vec<Formula> = (0..6)
            .map(|_| {
                let l = lists.choose(&mut rng).unwrap();
                common::formula(&mut rng, &s, &pool, l, 3)
            })
            .collect();
        let warm: Vec<_> = phis.iter().map(|p| m.eval(p).unwrap()).collect();
        for (p, w) in phis.iter().zip(&warm).rev() {
            let fresh = Structure::new(s.clone(), m.entities().clone(), m.tau().clone(), m.relations().incidence().map(|(k, r)| (k.clone(), r.clone()))).unwrap();
            prop_assert_eq!(&fresh.eval(p).unwrap(), w);
        }
    }

    #[test]
    fn reducts_keep_the_structure_condition(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let s1 = Arc::new(common::schema(&mut rng, SMALL));
        let (s2, m) = common::schema_morphism_into(&mut rng, &s1, 3);
        let m1 = common::structure(&mut rng, s1, SMALL, &[]);
        prop_assert!(structure_validate(&m1).is_empty());
        let (m2, h) = reduct(&m, Arc::new(s2), &m1).unwrap();
        prop_assert!(structure_validate(&m2).is_empty());
        prop_assert!(fole::structure::structure_morphism_validate(&h, &m2, &m1).is_empty());
    }
}

/// A single-sorted algebra with one unary and one binary operation given
/// by random tables.
fn random_algebra(rng: &mut impl Rng) -> Algebra {
    let x = Sort::new("X");
    let tokens: Vec<Token> = (0..rng.gen_range(1..=3)).map(|n| Token::new(format!("y{n}"))).collect();
    let e = Classification::new([x.clone()], tokens.clone(), tokens.iter().map(|y| (y.clone(), x.clone()))).unwrap();
    let unary = TypeList::of(&[("a", "X")]);
    let binary = TypeList::of(&[("a", "X"), ("b", "X")]);
    let domain = OperatorDomain::new(
        [x.clone()],
        [
            (Symbol::new("f"), OpSig { args: unary.clone(), result: x.clone() }),
            (Symbol::new("g"), OpSig { args: binary.clone(), result: x.clone() }),
        ],
    )
    .unwrap();
    let mut ops = BTreeMap::new();
    for (name, sig) in [("f", &unary), ("g", &binary)] {
        let table = tup(&e, sig)
            .unwrap()
            .tuples
            .into_iter()
            .map(|t| (t, tokens.choose(rng).unwrap().clone()))
            .collect();
        ops.insert(Symbol::new(name), table);
    }
    Algebra::new(e, domain, ops).unwrap()
}

fn random_term(rng: &mut impl Rng, context: &[&str], depth: usize) -> Term {
    if depth == 0 {
        return Term::var(*context.choose(rng).unwrap());
    }
    match rng.gen_range(0..3) {
        0 => Term::var(*context.choose(rng).unwrap()),
        1 => Term::app("f", [("a".into(), random_term(rng, context, depth - 1))]),
        _ => Term::app(
            "g",
            [
                ("a".into(), random_term(rng, context, depth - 1)),
                ("b".into(), random_term(rng, context, depth - 1)),
            ],
        ),
    }
}

fn x_list(indices: &[&str]) -> TypeList {
    TypeList::new(indices.iter().map(|i| (*i, "X"))).unwrap()
}

fn random_vector(rng: &mut impl Rng, a: &Algebra, source: &[&str], context: &[&str]) -> TermVector {
    let terms = source.iter().map(|i| ((*i).into(), random_term(rng, context, 2))).collect();
    TermVector::new(a.domain(), x_list(source), x_list(context), terms).unwrap()
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn term_vectors_compose_by_substitution(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let a = random_algebra(&mut rng);
        let tv1 = random_vector(&mut rng, &a, &["a", "b"], &["a", "b", "c"]);
        let tv2 = random_vector(&mut rng, &a, &["a", "b", "c"], &["a"]);
        let composite = tv1.then(&tv2).unwrap();
        for env in tup(a.entities(), composite.context()).unwrap().tuples {
            let stepwise = eval_vector(&a, &tv1, &eval_vector(&a, &tv2, &env).unwrap()).unwrap();
            prop_assert_eq!(eval_vector(&a, &composite, &env).unwrap(), stepwise);
        }
    }

    #[test]
    fn variable_vectors_evaluate_as_tuple_maps(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let a = random_algebra(&mut rng);
        let (l1, l2) = (x_list(&["a", "b"]), x_list(&["a", "b", "c"]));
        let h = common::all_morphisms(&l1, &l2).choose(&mut rng).unwrap().clone();
        let tv = TermVector::from_morphism(&h);
        for env in tup(a.entities(), &l2).unwrap().tuples {
            prop_assert_eq!(eval_vector(&a, &tv, &env).unwrap(), tup_map(&h, &env).unwrap());
        }
    }

    #[test]
    fn equations_survive_identity_translation(seed in any::<u64>()) {
        use fole::algebra::{translate_vector, OperatorDomainMorphism};
        let mut rng = common::rng(seed);
        let a = random_algebra(&mut rng);
        let lhs = random_vector(&mut rng, &a, &["a"], &["a", "b"]);
        let rhs = random_vector(&mut rng, &a, &["a"], &["a", "b"]);
        let eq = Equation::new(lhs.clone(), rhs.clone()).unwrap();
        let id = OperatorDomainMorphism::identity(a.domain());
        let moved = Equation::new(translate_vector(&id, &lhs).unwrap(), translate_vector(&id, &rhs).unwrap()).unwrap();
        prop_assert_eq!(satisfies_equation(&a, &eq).unwrap(), satisfies_equation(&a, &moved).unwrap());
    }
}

fn random_spec(rng: &mut impl Rng, m: &Structure, pool: &[fole::kernel::TypeListMorphism], n: usize) -> Specification {
    let s = m.schema_arc();
    let cs: Vec<Constraint> = (0..n).map(|_| common::constraint(rng, s, pool, 1)).collect();
    Specification::new(s.clone(), cs).unwrap()
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn consequence_is_monotone_and_idempotent(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let s = Arc::new(common::schema(&mut rng, TINY));
        let pool = common::pool(&mut rng, &s, 1);
        let m = common::structure(&mut rng, s.clone(), TINY, &[]);
        let small = random_spec(&mut rng, &m, &pool, 2);
        let more: Vec<Constraint> = small
            .constraints()
            .iter()
            .cloned()
            .chain(random_spec(&mut rng, &m, &pool, 2).constraints().iter().cloned())
            .collect();
        let large = Specification::new(s.clone(), more).unwrap();
        let mut u = FormulaUniverse::new(s.clone(), 1, pool, Connectives::all()).unwrap();
        u.extend(large.constraints().iter().flat_map(|c| c.formulas())).unwrap();
        let c_small = consequence(&small, &u).unwrap();
        let c_large = consequence(&large, &u).unwrap();
        for q in c_small.sequents() {
            prop_assert!(c_large.derives(&q));
        }
        let closed = Specification::new(s.clone(), c_small.sequents().map(Constraint::from)).unwrap();
        let again = consequence(&closed, &u).unwrap();
        prop_assert_eq!(again.len(), c_small.len());
    }

    #[test]
    fn identity_spec_morphisms_validate(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let s = Arc::new(common::schema(&mut rng, TINY));
        let pool = common::pool(&mut rng, &s, 1);
        let m = common::structure(&mut rng, s.clone(), TINY, &[]);
        let t = random_spec(&mut rng, &m, &pool, 3);
        let u = FormulaUniverse::new(s.clone(), 1, pool, Connectives::all()).unwrap();
        prop_assert!(spec_morphism_validate(&SchemaMorphism::identity(&s), &t, &t, &u).unwrap().is_empty());
    }

    #[test]
    fn sum_channels_cover(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let s = Arc::new(common::schema(&mut rng, TINY));
        let m2 = common::structure(&mut rng, s.clone(), TINY, &[]);
        let faithful = rng.gen_bool(0.5);
        let (m1, h) = common::vertical_from(&mut rng, &m2, 3, faithful);
        let (n1, n2) = (NodeId::new("n1"), NodeId::new("n2"));
        let e = EdgeId::new("e");
        let shape = ShapeGraph::new([n1.clone(), n2.clone()], [(e.clone(), n2.clone(), n1.clone())]).unwrap();
        let d = DistributedSystem::new(
            shape,
            [(n1, m1), (n2, m2)].into_iter().collect(),
            [(e, h)].into_iter().collect(),
        )
        .unwrap();
        let ch = sum_system(&d).unwrap();
        prop_assert!(channel_covers(&ch, &d).unwrap());
    }

    #[test]
    fn single_node_fusion_is_consequence(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let s = Arc::new(common::schema(&mut rng, TINY));
        let pool = common::pool(&mut rng, &s, 1);
        let m = common::structure(&mut rng, s.clone(), TINY, &[]);
        let t = random_spec(&mut rng, &m, &pool, 2);
        let mut u = FormulaUniverse::new(s.clone(), 1, pool, Connectives::all()).unwrap();
        u.extend(t.constraints().iter().flat_map(|c| c.formulas())).unwrap();
        let n = NodeId::new("n");
        let shape = ShapeGraph::new([n.clone()], []).unwrap();
        let sys = InformationSystem::new(
            shape,
            [(n.clone(), Logic::new(m.clone(), t.clone()).unwrap())].into_iter().collect(),
            BTreeMap::new(),
        )
        .unwrap();
        let ch = Channel::new(m.clone(), [(n, StructureMorphism::identity(&m))].into_iter().collect());
        let fused = fusion(&sys, &ch, &u).unwrap();
        let direct = consequence(&t, &u).unwrap();
        let a: BTreeSet<_> = fused.consequence.sequents().collect();
        let b: BTreeSet<_> = direct.sequents().collect();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn identity_database_morphisms_exist(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let s = Arc::new(common::schema(&mut rng, TINY));
        let pool = common::pool(&mut rng, &s, 1);
        let m = common::structure(&mut rng, s.clone(), TINY, &common::fibers(&s, &pool));
        let t = Specification::empty(s.clone());
        let u = FormulaUniverse::new(s.clone(), 1, pool, Connectives::all()).unwrap();
        let db = db_of_logic(&Logic::new(m.clone(), t).unwrap(), &u).unwrap();
        let dm = db_morphism_of(&StructureMorphism::identity(&m), &db, &db).unwrap();
        for (phi, kappa) in &dm.kappa {
            prop_assert_eq!(&dm.formula_map[phi], phi);
            prop_assert!(kappa.iter().all(|(k1, k2)| k1 == k2));
        }
        for group in db.equivalence_classes() {
            let first = m.relation_interp(group[0]).unwrap();
            for f in &group[1..] {
                prop_assert_eq!(&m.relation_interp(f).unwrap(), &first);
            }
        }
    }

    #[test]
    fn workspace_text_round_trips(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let s = Arc::new(common::schema(&mut rng, SMALL));
        let pool = common::pool(&mut rng, &s, 2);
        let m = common::structure(&mut rng, s.clone(), SMALL, &common::fibers(&s, &pool));
        let t = random_spec(&mut rng, &m, &pool, 3);
        let ops = OperatorDomain::new(s.sorts().iter().cloned(), []).unwrap();
        let mut text = write_schema("S", &SchemaDef { schema: s.clone(), ops }).unwrap();
        text.push_str(&write_structure("M", "S", &m, None).unwrap());
        text.push_str(&write_spec("T", &SpecDef { schema: "S".into(), spec: t.clone() }).unwrap());
        let ws = Workspace::from_str(&text).unwrap();
        prop_assert_eq!(&*ws.schemas["S"].schema, &*s);
        prop_assert_eq!(&ws.structures["M"].structure, &m);
        prop_assert_eq!(&ws.specs["T"].spec, &t);
        let printed = ws.to_text().unwrap();
        let reloaded = Workspace::from_str(&printed).unwrap();
        prop_assert_eq!(reloaded.to_text().unwrap(), printed);
    }
}
