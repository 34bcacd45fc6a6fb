//! Information systems, channels, fusion and system consequence.
//!
//! An edge `e: i → j` carries a structure morphism `M_i ⇄ M_j`, so its
//! schema part runs `S_i → S_j` and its key part `K_j → K_i`. A channel
//! component `γ_i : M_i ⇄ core` follows the same convention. The channel
//! covers the system when `γ_i = m_e ; γ_j` for every edge, composing
//! diagrammatically.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result};
use crate::formula::{translate, translate_constraint, Constraint, Sequent};
use crate::kernel::{Classification, Tuple};
use crate::limits::Limits;
use crate::name::{EdgeId, Key, NodeId, RelName, Sort, Token};
use crate::schema::{Schema, SchemaMorphism};
use crate::speclogic::{consequence, spec_morphism_validate, Consequence, FormulaUniverse, Logic, Specification};
use crate::structure::{structure_morphism_validate, Structure, StructureMorphism, StructureMorphismFinding};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ShapeGraph {
    nodes: BTreeSet<NodeId>,
    edges: BTreeMap<EdgeId, (NodeId, NodeId)>,
}

impl ShapeGraph {
    pub fn new(
        nodes: impl IntoIterator<Item = NodeId>,
        edges: impl IntoIterator<Item = (EdgeId, NodeId, NodeId)>,
    ) -> Result<Self> {
        let nodes: BTreeSet<NodeId> = nodes.into_iter().collect();
        let mut out = BTreeMap::new();
        for (e, i, j) in edges {
            for n in [&i, &j] {
                if !nodes.contains(n) {
                    return Err(Error::UnknownName {
                        kind: "node",
                        name: n.to_string(),
                    });
                }
            }
            if out.insert(e.clone(), (i, j)).is_some() {
                return Err(Error::invalid("shape", format!("duplicate edge `{e}`")));
            }
        }
        Ok(ShapeGraph { nodes, edges: out })
    }

    pub fn nodes(&self) -> &BTreeSet<NodeId> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeMap<EdgeId, (NodeId, NodeId)> {
        &self.edges
    }
}

/// A diagram of structures and structure morphisms.
#[derive(Clone, Debug)]
pub struct DistributedSystem {
    pub shape: ShapeGraph,
    pub structures: BTreeMap<NodeId, Structure>,
    pub morphisms: BTreeMap<EdgeId, StructureMorphism>,
}

impl DistributedSystem {
    pub fn new(
        shape: ShapeGraph,
        structures: BTreeMap<NodeId, Structure>,
        morphisms: BTreeMap<EdgeId, StructureMorphism>,
    ) -> Result<Self> {
        if structures.keys().collect::<BTreeSet<_>>() != shape.nodes.iter().collect() {
            return Err(Error::ShapeMismatch("structures do not match the nodes".into()));
        }
        if morphisms.keys().collect::<BTreeSet<_>>() != shape.edges.keys().collect() {
            return Err(Error::ShapeMismatch("morphisms do not match the edges".into()));
        }
        for (e, (i, j)) in &shape.edges {
            if let Some(f) = structure_morphism_validate(&morphisms[e], &structures[i], &structures[j])
                .into_iter()
                .next()
            {
                return Err(Error::InvalidMorphism(format!("edge `{e}`: {f}")));
            }
        }
        Ok(DistributedSystem {
            shape,
            structures,
            morphisms,
        })
    }
}

/// A diagram of logics whose links are structure morphisms; each link's
/// schema part doubles as the specification morphism.
#[derive(Clone, Debug)]
pub struct InformationSystem {
    pub shape: ShapeGraph,
    pub logics: BTreeMap<NodeId, Logic>,
    pub links: BTreeMap<EdgeId, StructureMorphism>,
}

impl InformationSystem {
    /// Checks endpoints and the structure part of every link. The
    /// specification part needs a universe; see [`InformationSystem::link_findings`].
    pub fn new(
        shape: ShapeGraph,
        logics: BTreeMap<NodeId, Logic>,
        links: BTreeMap<EdgeId, StructureMorphism>,
    ) -> Result<Self> {
        let structures = logics.iter().map(|(n, l)| (n.clone(), l.structure().clone())).collect();
        DistributedSystem::new(shape.clone(), structures, links.clone())?;
        Ok(InformationSystem { shape, logics, links })
    }

    /// Constraints of `T_i` whose translation along `e: i → j` is not
    /// derivable from `T_j` within `universes[j]`.
    pub fn link_findings(
        &self,
        universes: &BTreeMap<NodeId, FormulaUniverse>,
    ) -> Result<Vec<(EdgeId, Constraint)>> {
        let mut out = Vec::new();
        for (e, (i, j)) in &self.shape.edges {
            let u = universes.get(j).ok_or_else(|| Error::UnknownName {
                kind: "universe for node",
                name: j.to_string(),
            })?;
            let m = self.links[e].schema_morphism();
            for c in spec_morphism_validate(&m, self.logics[i].spec(), self.logics[j].spec(), u)? {
                out.push((e.clone(), c));
            }
        }
        Ok(out)
    }
}

pub fn underlying(l: &InformationSystem) -> DistributedSystem {
    DistributedSystem {
        shape: l.shape.clone(),
        structures: l.logics.iter().map(|(n, g)| (n.clone(), g.structure().clone())).collect(),
        morphisms: l.links.clone(),
    }
}

#[derive(Clone, Debug)]
pub struct Channel {
    pub core: Structure,
    pub components: BTreeMap<NodeId, StructureMorphism>,
}

impl Channel {
    pub fn new(core: Structure, components: BTreeMap<NodeId, StructureMorphism>) -> Self {
        Channel { core, components }
    }

    /// Validation findings for each component `γ_i : M_i ⇄ core`.
    pub fn validate(&self, d: &DistributedSystem) -> Result<Vec<(NodeId, StructureMorphismFinding)>> {
        check_shape(self, d)?;
        let mut out = Vec::new();
        for (n, g) in &self.components {
            for f in structure_morphism_validate(g, &d.structures[n], &self.core) {
                out.push((n.clone(), f));
            }
        }
        Ok(out)
    }
}

fn check_shape(ch: &Channel, d: &DistributedSystem) -> Result<()> {
    if ch.components.keys().collect::<BTreeSet<_>>() != d.shape.nodes.iter().collect() {
        return Err(Error::ShapeMismatch("channel components do not match the nodes".into()));
    }
    Ok(())
}

/// True iff `γ_i = m_e ; γ_j` for every edge `e: i → j`.
pub fn channel_covers(ch: &Channel, d: &DistributedSystem) -> Result<bool> {
    check_shape(ch, d)?;
    for (e, (i, j)) in &d.shape.edges {
        match d.morphisms[e].then(&ch.components[j]) {
            Ok(c) if c == ch.components[i] => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// Names quotient classes: a class keeps its name when no other class
/// shares it, otherwise it is qualified by its representative's node.
fn name_classes<T: Ord + Clone + AsRef<str>>(items: &[(NodeId, T)], uf: &mut UnionFind<usize>) -> Vec<String> {
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for ix in 0..items.len() {
        members.entry(uf.find(ix)).or_default().push(ix);
    }
    let mut name_use: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();
    for (root, ms) in &members {
        for &m in ms {
            name_use.entry(items[m].1.as_ref()).or_default().insert(*root);
        }
    }
    let mut out = vec![String::new(); items.len()];
    for ms in members.values() {
        let rep = &items[ms[0]];
        let unambiguous = ms.iter().all(|&m| items[m].1.as_ref() == rep.1.as_ref()) && name_use[rep.1.as_ref()].len() == 1;
        let name = if unambiguous {
            rep.1.as_ref().to_string()
        } else {
            format!("{}_{}", rep.0, rep.1.as_ref())
        };
        for &m in ms {
            out[m] = name.clone();
        }
    }
    out
}

/// All families `(x_n)` with `x_n ∈ choices[n]` such that for every
/// constraint `(i, j, map)` the map sends `x_j` to `x_i`.
fn compatible_families<T: Ord + Clone>(
    nodes: &[NodeId],
    choices: &[Vec<T>],
    constraints: &[(usize, usize, &BTreeMap<T, T>)],
    cap: usize,
    what: &'static str,
) -> Result<Vec<Vec<T>>> {
    let mut out = Vec::new();
    let mut current: Vec<T> = Vec::with_capacity(nodes.len());
    fn go<T: Ord + Clone>(
        current: &mut Vec<T>,
        choices: &[Vec<T>],
        constraints: &[(usize, usize, &BTreeMap<T, T>)],
        out: &mut Vec<Vec<T>>,
        cap: usize,
        what: &'static str,
    ) -> Result<()> {
        let n = current.len();
        if n == choices.len() {
            if out.len() >= cap {
                return Err(Error::CapacityExceeded { what, limit: cap });
            }
            out.push(current.clone());
            return Ok(());
        }
        for x in &choices[n] {
            current.push(x.clone());
            let ok = constraints.iter().all(|&(i, j, m)| {
                if i.max(j) != n {
                    return true;
                }
                m.get(&current[j]) == Some(&current[i])
            });
            if ok {
                go(current, choices, constraints, out, cap, what)?;
            }
            current.pop();
        }
        Ok(())
    }
    go(&mut current, choices, constraints, &mut out, cap, what)?;
    Ok(out)
}

fn family_name(nodes: &[NodeId], family: &[impl AsRef<str>]) -> String {
    if let Some(first) = family.first() {
        if family.iter().all(|x| x.as_ref() == first.as_ref()) {
            return first.as_ref().to_string();
        }
    }
    let parts: Vec<String> = nodes.iter().zip(family).map(|(n, x)| format!("{n}={}", x.as_ref())).collect();
    format!("({})", parts.join(","))
}

/// The sum channel: types and relation types are identified along the
/// edges; tokens and keys are the compatible families.
pub fn sum_system(d: &DistributedSystem) -> Result<Channel> {
    sum_system_with_cap(d, Limits::global().max_families)
}

pub fn sum_system_with_cap(d: &DistributedSystem, cap: usize) -> Result<Channel> {
    let nodes: Vec<NodeId> = d.shape.nodes.iter().cloned().collect();
    let pos: BTreeMap<&NodeId, usize> = nodes.iter().enumerate().map(|(p, n)| (n, p)).collect();

    // Sorts and relation types: disjoint union, then union-find along edges.
    let mut sorts: Vec<(NodeId, Sort)> = Vec::new();
    let mut rels: Vec<(NodeId, RelName)> = Vec::new();
    for n in &nodes {
        let s = d.structures[n].schema();
        sorts.extend(s.sorts().iter().map(|x| (n.clone(), x.clone())));
        rels.extend(s.relations().keys().map(|r| (n.clone(), r.clone())));
    }
    let sort_ix: BTreeMap<(NodeId, Sort), usize> = sorts.iter().cloned().enumerate().map(|(p, k)| (k, p)).collect();
    let rel_ix: BTreeMap<(NodeId, RelName), usize> = rels.iter().cloned().enumerate().map(|(p, k)| (k, p)).collect();
    let mut sort_uf = UnionFind::new(sorts.len());
    let mut rel_uf = UnionFind::new(rels.len());
    for (e, (i, j)) in &d.shape.edges {
        let m = &d.morphisms[e];
        for (x, y) in &m.type_map {
            sort_uf.union(sort_ix[&(i.clone(), x.clone())], sort_ix[&(j.clone(), y.clone())]);
        }
        for (x, y) in &m.rel_map {
            rel_uf.union(rel_ix[&(i.clone(), x.clone())], rel_ix[&(j.clone(), y.clone())]);
        }
    }
    let sort_names = name_classes(&sorts, &mut sort_uf);
    let rel_names = name_classes(&rels, &mut rel_uf);
    let rep_of = |uf: &mut UnionFind<usize>, len: usize| -> BTreeMap<usize, usize> {
        let mut reps = BTreeMap::new();
        for ix in 0..len {
            reps.entry(uf.find(ix)).or_insert(ix);
        }
        reps
    };
    let sort_reps = rep_of(&mut sort_uf, sorts.len());
    let rel_reps = rep_of(&mut rel_uf, rels.len());

    let core_sorts: BTreeSet<Sort> = sort_names.iter().map(Sort::new).collect();
    let sort_class = |n: &NodeId, x: &Sort| Sort::new(&sort_names[sort_ix[&(n.clone(), x.clone())]]);
    let mut core_relations = BTreeMap::new();
    for &rep in rel_reps.values() {
        let (n, r) = &rels[rep];
        let sig = d.structures[n].schema().signature(r)?;
        let f: BTreeMap<Sort, Sort> = sig.sorts_used().iter().map(|x| (x.clone(), sort_class(n, x))).collect();
        let list = crate::kernel::sum_along(&f, sig)?;
        core_relations.insert(RelName::new(&rel_names[rep]), list);
    }
    let core_schema = Arc::new(Schema::checked(core_sorts, core_relations)?);

    // Token and key families.
    let token_choices: Vec<Vec<Token>> = nodes
        .iter()
        .map(|n| d.structures[n].entities().tokens().iter().cloned().collect())
        .collect();
    let key_choices: Vec<Vec<Key>> = nodes.iter().map(|n| d.structures[n].keys().iter().cloned().collect()).collect();
    let token_constraints: Vec<(usize, usize, &BTreeMap<Token, Token>)> = d
        .shape
        .edges
        .iter()
        .map(|(e, (i, j))| (pos[i], pos[j], &d.morphisms[e].token_map))
        .collect();
    let key_constraints: Vec<(usize, usize, &BTreeMap<Key, Key>)> = d
        .shape
        .edges
        .iter()
        .map(|(e, (i, j))| (pos[i], pos[j], &d.morphisms[e].key_map))
        .collect();
    let token_families = compatible_families(&nodes, &token_choices, &token_constraints, cap, "token families")?;
    let key_families = compatible_families(&nodes, &key_choices, &key_constraints, cap, "key families")?;
    let token_family_names: BTreeMap<Vec<Token>, Token> = token_families
        .iter()
        .map(|f| (f.clone(), Token::new(family_name(&nodes, f))))
        .collect();

    let mut entity_incidence = Vec::new();
    for (fam, name) in &token_family_names {
        for &rep in sort_reps.values() {
            let (n, x) = &sorts[rep];
            if d.structures[n].entities().holds(&fam[pos[n]], x) {
                entity_incidence.push((name.clone(), Sort::new(&sort_names[rep])));
            }
        }
    }
    let entities = Classification::new(
        core_schema.sorts().iter().cloned(),
        token_family_names.values().cloned(),
        entity_incidence,
    )?;

    let mut tau = BTreeMap::new();
    let mut key_family_names: BTreeMap<Vec<Key>, Key> = BTreeMap::new();
    for fam in &key_families {
        let tuples: Vec<&Tuple> = nodes.iter().zip(fam).map(|(n, k)| &d.structures[n].tau()[k]).collect();
        let Some(first) = tuples.first() else {
            let name = Key::new(family_name(&nodes, fam));
            key_family_names.insert(fam.clone(), name.clone());
            tau.insert(name, Tuple::empty());
            continue;
        };
        if !tuples.iter().all(|t| t.arity().eq(first.arity())) {
            continue;
        }
        let mut entries = Vec::new();
        let mut complete = true;
        for ix in first.arity() {
            let comp: Vec<Token> = tuples.iter().map(|t| t.get(ix).expect("same arity").clone()).collect();
            match token_family_names.get(&comp) {
                Some(y) => entries.push((ix.clone(), y.clone())),
                None => complete = false,
            }
        }
        if !complete {
            continue;
        }
        let name = Key::new(family_name(&nodes, fam));
        key_family_names.insert(fam.clone(), name.clone());
        tau.insert(name, Tuple::new(entries));
    }
    let mut rel_incidence = Vec::new();
    for (fam, name) in &key_family_names {
        for &rep in rel_reps.values() {
            let (n, r) = &rels[rep];
            if d.structures[n].relations().holds(&fam[pos[n]], r) {
                rel_incidence.push((name.clone(), RelName::new(&rel_names[rep])));
            }
        }
    }
    let core = Structure::new(core_schema, entities, tau, rel_incidence)?;

    let mut components = BTreeMap::new();
    for (p, n) in nodes.iter().enumerate() {
        let s = d.structures[n].schema();
        components.insert(
            n.clone(),
            StructureMorphism {
                rel_map: s
                    .relations()
                    .keys()
                    .map(|r| (r.clone(), RelName::new(&rel_names[rel_ix[&(n.clone(), r.clone())]])))
                    .collect(),
                key_map: key_family_names.iter().map(|(f, k)| (k.clone(), f[p].clone())).collect(),
                type_map: s.sorts().iter().map(|x| (x.clone(), sort_class(n, x))).collect(),
                token_map: token_family_names.iter().map(|(f, y)| (y.clone(), f[p].clone())).collect(),
            },
        );
    }
    Ok(Channel { core, components })
}

/// Every constraint of `lg`'s specification translated along `γ`'s schema part.
pub fn direct_flow(lg: &Logic, gamma: &StructureMorphism, core: &Schema) -> Result<Specification> {
    let m = gamma.schema_morphism();
    if let Some(f) = crate::schema::schema_morphism_validate(&m, lg.structure().schema(), core).into_iter().next() {
        return Err(Error::InvalidMorphism(f.to_string()));
    }
    let cs = lg
        .spec()
        .constraints()
        .iter()
        .map(|c| translate_constraint(&m, c))
        .collect::<Result<Vec<_>>>()?;
    Specification::new(Arc::new(core.clone()), cs)
}

/// The fused logic at the core and its closure.
#[derive(Clone, Debug)]
pub struct Fusion {
    pub logic: Logic,
    pub consequence: Consequence,
}

/// Closure of the union of direct flows over a core universe.
pub fn fusion(s: &InformationSystem, ch: &Channel, u: &FormulaUniverse) -> Result<Fusion> {
    if !channel_covers(ch, &underlying(s))? {
        return Err(Error::NotCovering("some edge triangle does not commute".into()));
    }
    let core_schema = ch.core.schema_arc().clone();
    let mut all = Vec::new();
    for (n, l) in &s.logics {
        all.extend(direct_flow(l, &ch.components[n], &core_schema)?.constraints().iter().cloned());
    }
    let flowed = Specification::new(core_schema.clone(), all)?;
    let closure = consequence(&flowed, u)?;
    let spec = Specification::new(core_schema, closure.sequents().map(Constraint::from))?;
    Ok(Fusion {
        logic: Logic::new(ch.core.clone(), spec)?,
        consequence: closure,
    })
}

/// Pulls the fused consequence back to each node: the sequents over the
/// node's universe whose translation is derivable at the core. Each node
/// universe is extended by its own specification's formulas, and the core
/// universe by the translations of all node formulas.
pub fn system_consequence(
    s: &InformationSystem,
    ch: &Channel,
    universes: &BTreeMap<NodeId, FormulaUniverse>,
    core_universe: &FormulaUniverse,
) -> Result<BTreeMap<NodeId, Specification>> {
    let mut core_u = core_universe.clone();
    let mut node_us = BTreeMap::new();
    for (n, l) in &s.logics {
        let mut u = universes
            .get(n)
            .ok_or_else(|| Error::UnknownName {
                kind: "universe for node",
                name: n.to_string(),
            })?
            .clone();
        u.extend(l.spec().constraints().iter().flat_map(|c| c.formulas()))?;
        let m = ch
            .components
            .get(n)
            .ok_or_else(|| Error::ShapeMismatch(format!("no channel component for node `{n}`")))?
            .schema_morphism();
        let translated = u.formulas().iter().map(|f| translate(&m, f)).collect::<Result<Vec<_>>>()?;
        core_u.extend(translated)?;
        node_us.insert(n.clone(), (u, m));
    }
    let fused = fusion(s, ch, &core_u)?;
    let mut out = BTreeMap::new();
    for (n, (u, m)) in node_us {
        let mut derived = Vec::new();
        for fs in u.by_fiber().values() {
            let images: Vec<_> = fs.iter().map(|f| translate(&m, f)).collect::<Result<_>>()?;
            for (a, ta) in fs.iter().zip(&images) {
                for (b, tb) in fs.iter().zip(&images) {
                    if fused.consequence.derives(&Sequent::new(ta.clone(), tb.clone())) {
                        derived.push(Constraint::sequent((*a).clone(), (*b).clone()));
                    }
                }
            }
        }
        let schema = s.logics[&n].spec().schema().clone();
        out.insert(n, Specification::new(schema, derived)?);
    }
    Ok(out)
}

/// Schema morphism of a component, validated against its endpoints.
pub fn component_schema_morphism(gamma: &StructureMorphism, node: &Schema, core: &Schema) -> Result<SchemaMorphism> {
    let m = gamma.schema_morphism();
    match crate::schema::schema_morphism_validate(&m, node, core).into_iter().next() {
        Some(f) => Err(Error::InvalidMorphism(f.to_string())),
        None => Ok(m),
    }
}
