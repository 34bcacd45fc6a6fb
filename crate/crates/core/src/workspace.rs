//! The declarative text format: loading and printing named objects.
//!
//! A workspace file is a sequence of sections. Every statement occupies one
//! line; `#` starts a comment. See `docs/format.md` for the grammar.
//!
//! ```text
//! schema S_go
//!   sort Person City Bus
//!   rel Go(agnt: Person, dest: City, inst: Bus)
//!   op John : Person
//! end
//!
//! structure M_go : S_go
//!   token john jane : Person
//!   token boston : City
//!   token bus1 : Bus
//!   key k1 : Go (agnt: john, dest: boston, inst: bus1)
//!   def John = john
//! end
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::algebra::{Algebra, OpSig, OperatorDomain};
use crate::error::{Error, Result};
use crate::kernel::{Classification, EntityClassification, Tuple, TypeList, TypeListMorphism};
use crate::name::{EdgeId, Key, NodeId, RelName, Sort, Symbol, Token};
use crate::schema::{schema_morphism_validate, schema_validate, Schema, SchemaMorphism};
use crate::speclogic::{Connectives, FormulaUniverse, Logic, Specification};
use crate::structure::{structure_morphism_validate, Structure, StructureMorphism};
use crate::syntax::{is_ident, Parser, Scope, Tok};
use crate::system::{Channel, InformationSystem, ShapeGraph};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaDef {
    pub schema: Arc<Schema>,
    pub ops: OperatorDomain,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureDef {
    pub schema: String,
    pub structure: Structure,
    /// Present when the schema declares operator symbols.
    pub algebra: Option<Algebra>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecDef {
    pub schema: String,
    pub spec: Specification,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemaMorphismDef {
    pub source: String,
    pub target: String,
    pub morphism: SchemaMorphism,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructureMorphismDef {
    pub source: String,
    pub target: String,
    pub morphism: StructureMorphism,
}

#[derive(Clone, Debug)]
pub struct UniverseDef {
    pub schema: String,
    pub depth: usize,
    pub pool: Vec<String>,
    pub connectives: Connectives,
    pub universe: FormulaUniverse,
}

impl PartialEq for UniverseDef {
    fn eq(&self, other: &Self) -> bool {
        (&self.schema, self.depth, &self.pool, self.connectives)
            == (&other.schema, other.depth, &other.pool, other.connectives)
    }
}

#[derive(Clone, Debug)]
pub struct SystemDef {
    /// Node name to structure name and optional specification name.
    pub nodes: BTreeMap<NodeId, (String, Option<String>)>,
    /// Edge name to endpoints and structure-morphism name.
    pub edges: BTreeMap<EdgeId, (NodeId, NodeId, String)>,
    /// Core structure name and per-node component names.
    pub channel: Option<(String, BTreeMap<NodeId, String>)>,
    pub system: InformationSystem,
    pub explicit_channel: Option<Channel>,
}

impl PartialEq for SystemDef {
    fn eq(&self, other: &Self) -> bool {
        (&self.nodes, &self.edges, &self.channel) == (&other.nodes, &other.edges, &other.channel)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kind {
    Schema,
    Classification,
    Structure,
    Spec,
    ListMorphism,
    SchemaMorphism,
    StructureMorphism,
    Universe,
    System,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Schema => "schema",
            Kind::Classification => "classification",
            Kind::Structure => "structure",
            Kind::Spec => "spec",
            Kind::ListMorphism => "list morphism",
            Kind::SchemaMorphism => "schema morphism",
            Kind::StructureMorphism => "structure morphism",
            Kind::Universe => "universe",
            Kind::System => "system",
        }
    }
}

/// Named objects loaded from one or more files. Names are unique across
/// all kinds.
#[derive(Clone, Debug, Default)]
pub struct Workspace {
    pub schemas: BTreeMap<String, SchemaDef>,
    pub classifications: BTreeMap<String, EntityClassification>,
    pub structures: BTreeMap<String, StructureDef>,
    pub specs: BTreeMap<String, SpecDef>,
    pub list_morphisms: BTreeMap<String, TypeListMorphism>,
    pub schema_morphisms: BTreeMap<String, SchemaMorphismDef>,
    pub structure_morphisms: BTreeMap<String, StructureMorphismDef>,
    pub universes: BTreeMap<String, UniverseDef>,
    pub systems: BTreeMap<String, SystemDef>,
    kinds: BTreeMap<String, Kind>,
    order: Vec<String>,
    origins: BTreeMap<String, PathBuf>,
    loaded: BTreeSet<PathBuf>,
}

struct Line<'t> {
    number: usize,
    text: &'t str,
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn in_file(path: &Path, e: Error) -> Error {
    match e {
        Error::InFile { .. } => e,
        other => Error::InFile {
            path: path.display().to_string(),
            source: Box::new(other),
        },
    }
}

impl Workspace {
    pub fn new() -> Self {
        Workspace::default()
    }

    /// Loads a file and everything it includes. Files already loaded are
    /// skipped.
    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let canonical = fs::canonicalize(path).map_err(|e| in_file(path, e.into()))?;
        if !self.loaded.insert(canonical.clone()) {
            return Ok(());
        }
        let text = fs::read_to_string(&canonical).map_err(|e| in_file(path, e.into()))?;
        let base = canonical.parent().map(Path::to_path_buf).unwrap_or_default();
        self.load_text(&text, Some(&base), Some(&canonical)).map_err(|e| in_file(path, e))
    }

    /// Parses `text`. Includes are resolved against `base`.
    pub fn load_str(&mut self, text: &str) -> Result<()> {
        self.load_text(text, None, None)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn from_str(text: &str) -> Result<Self> {
        let mut w = Workspace::new();
        w.load_str(text)?;
        Ok(w)
    }

    fn load_text(&mut self, text: &str, base: Option<&Path>, origin: Option<&Path>) -> Result<()> {
        let lines: Vec<Line> = text
            .lines()
            .enumerate()
            .map(|(n, t)| Line { number: n + 1, text: t })
            .filter(|l| {
                let t = l.text.trim_start();
                !t.is_empty() && !t.starts_with('#')
            })
            .collect();
        let mut pos = 0;
        while pos < lines.len() {
            let line = &lines[pos];
            let mut p = Parser::at(line.text, line.number, 1, Scope::default())?;
            let kw = p.ident()?;
            pos += 1;
            let header_line = line.number;
            let name = match kw.as_str() {
                "include" => {
                    let file = p.string()?;
                    p.finish()?;
                    let Some(base) = base else {
                        return Err(syntax(header_line, 1, "include is only allowed in files"));
                    };
                    self.load_file(&base.join(file))?;
                    continue;
                }
                "morphism" => {
                    let name = p.ident()?;
                    p.expect(&Tok::Colon)?;
                    let flavor = p.ident()?;
                    match flavor.as_str() {
                        "list" => {
                            self.claim(&name, Kind::ListMorphism, header_line)?;
                            let h = p.inline_morphism()?;
                            p.finish()?;
                            self.list_morphisms.insert(name.clone(), h);
                            self.note(&name, origin);
                            continue;
                        }
                        "schema" | "structure" => {
                            let source = p.ident()?;
                            p.expect(&Tok::Arrow)?;
                            let target = p.ident()?;
                            p.finish()?;
                            let body = section_body(&lines, &mut pos, header_line)?;
                            if flavor == "schema" {
                                self.schema_morphism_section(&name, source, target, &body, header_line)?;
                            } else {
                                self.structure_morphism_section(&name, source, target, &body, header_line)?;
                            }
                            name
                        }
                        other => {
                            return Err(syntax(
                                header_line,
                                1,
                                format!("unknown morphism flavor `{other}`; expected list, schema or structure"),
                            ))
                        }
                    }
                }
                "schema" | "classification" | "system" => {
                    let name = p.ident()?;
                    p.finish()?;
                    let body = section_body(&lines, &mut pos, header_line)?;
                    match kw.as_str() {
                        "schema" => self.schema_section(&name, &body, header_line)?,
                        "classification" => self.classification_section(&name, &body, header_line)?,
                        _ => self.system_section(&name, &body, header_line)?,
                    }
                    name
                }
                "structure" | "spec" | "universe" => {
                    let name = p.ident()?;
                    p.expect(&Tok::Colon)?;
                    let schema = p.ident()?;
                    p.finish()?;
                    let body = section_body(&lines, &mut pos, header_line)?;
                    match kw.as_str() {
                        "structure" => self.structure_section(&name, schema, &body, header_line)?,
                        "spec" => self.spec_section(&name, schema, &body, header_line)?,
                        _ => self.universe_section(&name, schema, &body, header_line)?,
                    }
                    name
                }
                other => return Err(syntax(header_line, 1, format!("unknown section `{other}`"))),
            };
            self.note(&name, origin);
        }
        Ok(())
    }

    fn parser<'a>(&'a self, line: &Line, scope: Scope<'a>) -> Result<Parser<'a>> {
        Parser::at(line.text, line.number, 1, scope)
    }

    fn note(&mut self, name: &str, origin: Option<&Path>) {
        if let Some(o) = origin {
            self.origins.insert(name.to_string(), o.to_path_buf());
        }
    }

    fn claim(&mut self, name: &str, kind: Kind, line: usize) -> Result<()> {
        if let Some(k) = self.kinds.get(name) {
            return Err(syntax(line, 1, format!("`{name}` is already defined as a {}", k.as_str())));
        }
        self.kinds.insert(name.to_string(), kind);
        self.order.push(name.to_string());
        Ok(())
    }

    fn schema_def(&self, name: &str, line: usize) -> Result<&SchemaDef> {
        self.schemas
            .get(name)
            .ok_or_else(|| syntax(line, 1, format!("unknown schema `{name}`")))
    }

    fn schema_section(&mut self, name: &str, body: &[&Line], header: usize) -> Result<()> {
        self.claim(name, Kind::Schema, header)?;
        let mut sorts = Vec::new();
        let mut relations: Vec<(RelName, TypeList)> = Vec::new();
        let mut ops: Vec<(Symbol, OpSig)> = Vec::new();
        for line in body {
            let mut p = self.parser(line, Scope::default())?;
            let kw = p.ident()?;
            match kw.as_str() {
                "sort" => {
                    while !p.at_end() {
                        sorts.push(Sort::new(p.ident()?));
                    }
                }
                "rel" => {
                    let r = RelName::new(p.ident()?);
                    let list = paren_list(&mut p)?;
                    if relations.iter().any(|(q, _)| *q == r) {
                        return Err(p.error(format!("relation type `{r}` declared twice")));
                    }
                    relations.push((r, list));
                }
                "op" => {
                    let e = Symbol::new(p.ident()?);
                    let args = if p.peek() == &Tok::LParen {
                        paren_list(&mut p)?
                    } else {
                        TypeList::empty()
                    };
                    p.expect(&Tok::Colon)?;
                    let result = Sort::new(p.ident()?);
                    ops.push((e, OpSig { result, args }));
                }
                other => return Err(syntax(line.number, 1, format!("unknown schema statement `{other}`"))),
            }
            p.finish()?;
        }
        let schema = Schema::new(sorts.clone(), relations);
        if let Some(f) = schema_validate(&schema).into_iter().next() {
            return Err(syntax(header, 1, f.to_string()));
        }
        let ops = OperatorDomain::new(sorts, ops).map_err(|e| syntax(header, 1, e.to_string()))?;
        self.schemas.insert(
            name.to_string(),
            SchemaDef {
                schema: Arc::new(schema),
                ops,
            },
        );
        Ok(())
    }

    fn token_line(p: &mut Parser, incidence: &mut Vec<(Token, Sort)>, tokens: &mut BTreeSet<Token>) -> Result<()> {
        let mut names = Vec::new();
        while let Tok::Ident(_) = p.peek() {
            names.push(Token::new(p.ident()?));
        }
        if names.is_empty() {
            return Err(p.error("expected token names"));
        }
        let mut types = Vec::new();
        if p.eat(&Tok::Colon) {
            while !p.at_end() {
                types.push(Sort::new(p.ident()?));
            }
        }
        for y in names {
            for x in &types {
                incidence.push((y.clone(), x.clone()));
            }
            tokens.insert(y);
        }
        Ok(())
    }

    fn classification_section(&mut self, name: &str, body: &[&Line], header: usize) -> Result<()> {
        self.claim(name, Kind::Classification, header)?;
        let mut types = BTreeSet::new();
        let mut tokens = BTreeSet::new();
        let mut incidence = Vec::new();
        for line in body {
            let mut p = self.parser(line, Scope::default())?;
            match p.ident()?.as_str() {
                "type" => {
                    while !p.at_end() {
                        types.insert(Sort::new(p.ident()?));
                    }
                }
                "token" => Self::token_line(&mut p, &mut incidence, &mut tokens)?,
                other => return Err(syntax(line.number, 1, format!("unknown classification statement `{other}`"))),
            }
            p.finish()?;
        }
        let c = Classification::new(types, tokens, incidence).map_err(|e| syntax(header, 1, e.to_string()))?;
        self.classifications.insert(name.to_string(), c);
        Ok(())
    }

    fn structure_section(&mut self, name: &str, schema: String, body: &[&Line], header: usize) -> Result<()> {
        self.claim(name, Kind::Structure, header)?;
        let def = self.schema_def(&schema, header)?.clone();
        let mut tokens = BTreeSet::new();
        let mut incidence_e = Vec::new();
        let mut tau = BTreeMap::new();
        let mut incidence_r = Vec::new();
        let mut defs: BTreeMap<Symbol, BTreeMap<Tuple, Token>> = BTreeMap::new();
        for line in body {
            let mut p = self.parser(line, Scope::default())?;
            match p.ident()?.as_str() {
                "entities" => {
                    let c = p.ident()?;
                    let e = self
                        .classifications
                        .get(&c)
                        .ok_or_else(|| p.error(format!("unknown classification `{c}`")))?;
                    tokens.extend(e.tokens().iter().cloned());
                    incidence_e.extend(e.incidence().map(|(y, x)| (y.clone(), x.clone())));
                }
                "token" => Self::token_line(&mut p, &mut incidence_e, &mut tokens)?,
                "key" => {
                    let k = Key::new(p.ident()?);
                    if p.eat(&Tok::Colon) {
                        while let Tok::Ident(_) = p.peek() {
                            incidence_r.push((k.clone(), RelName::new(p.ident()?)));
                        }
                    }
                    let t = p.tuple()?;
                    if tau.insert(k.clone(), t).is_some() {
                        return Err(p.error(format!("key `{k}` declared twice")));
                    }
                }
                "def" => {
                    let e = Symbol::new(p.ident()?);
                    let args = if p.peek() == &Tok::LParen { p.tuple()? } else { Tuple::empty() };
                    p.expect(&Tok::Eq)?;
                    let y = Token::new(p.ident()?);
                    defs.entry(e).or_default().insert(args, y);
                }
                other => return Err(syntax(line.number, 1, format!("unknown structure statement `{other}`"))),
            }
            p.finish()?;
        }
        let at = |e: Error| syntax(header, 1, e.to_string());
        let entities = Classification::new(def.schema.sorts().iter().cloned(), tokens, incidence_e).map_err(at)?;
        let structure = Structure::new(def.schema.clone(), entities.clone(), tau, incidence_r).map_err(at)?;
        let algebra = if def.ops.symbols().is_empty() && defs.is_empty() {
            None
        } else {
            Some(Algebra::new(entities, def.ops.clone(), defs).map_err(at)?)
        };
        self.structures.insert(
            name.to_string(),
            StructureDef {
                schema,
                structure,
                algebra,
            },
        );
        Ok(())
    }

    fn spec_section(&mut self, name: &str, schema: String, body: &[&Line], header: usize) -> Result<()> {
        self.claim(name, Kind::Spec, header)?;
        let s = self.schema_def(&schema, header)?.schema.clone();
        let mut constraints = Vec::new();
        for line in body {
            let mut p = self.parser(line, Scope::new(Some(&s), Some(&self.list_morphisms)))?;
            let c = p.constraint()?;
            p.finish()?;
            c.typecheck(&s).map_err(|e| syntax(line.number, 1, e.to_string()))?;
            constraints.push(c);
        }
        let spec = Specification::new(s, constraints)?;
        self.specs.insert(name.to_string(), SpecDef { schema, spec });
        Ok(())
    }

    fn schema_morphism_section(
        &mut self,
        name: &str,
        source: String,
        target: String,
        body: &[&Line],
        header: usize,
    ) -> Result<()> {
        self.claim(name, Kind::SchemaMorphism, header)?;
        let s2 = self.schema_def(&source, header)?.schema.clone();
        let s1 = self.schema_def(&target, header)?.schema.clone();
        let mut rel_map = BTreeMap::new();
        let mut type_map = BTreeMap::new();
        for line in body {
            let mut p = self.parser(line, Scope::default())?;
            match p.ident()?.as_str() {
                "rel" => {
                    let (a, b) = arrow_pair(&mut p)?;
                    rel_map.insert(RelName::new(a), RelName::new(b));
                }
                "sort" => {
                    let (a, b) = arrow_pair(&mut p)?;
                    type_map.insert(Sort::new(a), Sort::new(b));
                }
                "identity" => {
                    for r in s2.relations().keys() {
                        rel_map.entry(r.clone()).or_insert_with(|| r.clone());
                    }
                    for x in s2.sorts() {
                        type_map.entry(x.clone()).or_insert_with(|| x.clone());
                    }
                }
                other => return Err(syntax(line.number, 1, format!("unknown schema morphism statement `{other}`"))),
            }
            p.finish()?;
        }
        let m = SchemaMorphism::new(rel_map, type_map);
        if let Some(f) = schema_morphism_validate(&m, &s2, &s1).into_iter().next() {
            return Err(syntax(header, 1, f.to_string()));
        }
        self.schema_morphisms.insert(
            name.to_string(),
            SchemaMorphismDef {
                source,
                target,
                morphism: m,
            },
        );
        Ok(())
    }

    fn structure_morphism_section(
        &mut self,
        name: &str,
        source: String,
        target: String,
        body: &[&Line],
        header: usize,
    ) -> Result<()> {
        self.claim(name, Kind::StructureMorphism, header)?;
        let unknown = |n: &str| syntax(header, 1, format!("unknown structure `{n}`"));
        let m2 = self.structures.get(&source).ok_or_else(|| unknown(&source))?.structure.clone();
        let m1 = self.structures.get(&target).ok_or_else(|| unknown(&target))?.structure.clone();
        let mut h = StructureMorphism::default();
        for line in body {
            let mut p = self.parser(line, Scope::default())?;
            match p.ident()?.as_str() {
                "rel" => {
                    let (a, b) = arrow_pair(&mut p)?;
                    h.rel_map.insert(RelName::new(a), RelName::new(b));
                }
                "sort" => {
                    let (a, b) = arrow_pair(&mut p)?;
                    h.type_map.insert(Sort::new(a), Sort::new(b));
                }
                "key" => {
                    let (a, b) = arrow_pair(&mut p)?;
                    h.key_map.insert(Key::new(a), Key::new(b));
                }
                "token" => {
                    let (a, b) = arrow_pair(&mut p)?;
                    h.token_map.insert(Token::new(a), Token::new(b));
                }
                "identity" => {
                    for r in m2.schema().relations().keys() {
                        h.rel_map.entry(r.clone()).or_insert_with(|| r.clone());
                    }
                    for x in m2.schema().sorts() {
                        h.type_map.entry(x.clone()).or_insert_with(|| x.clone());
                    }
                    for k in m1.keys() {
                        h.key_map.entry(k.clone()).or_insert_with(|| k.clone());
                    }
                    for y in m1.entities().tokens() {
                        h.token_map.entry(y.clone()).or_insert_with(|| y.clone());
                    }
                }
                other => {
                    return Err(syntax(
                        line.number,
                        1,
                        format!("unknown structure morphism statement `{other}`"),
                    ))
                }
            }
            p.finish()?;
        }
        if let Some(f) = structure_morphism_validate(&h, &m2, &m1).into_iter().next() {
            return Err(syntax(header, 1, f.to_string()));
        }
        self.structure_morphisms.insert(
            name.to_string(),
            StructureMorphismDef {
                source,
                target,
                morphism: h,
            },
        );
        Ok(())
    }

    fn universe_section(&mut self, name: &str, schema: String, body: &[&Line], header: usize) -> Result<()> {
        self.claim(name, Kind::Universe, header)?;
        let s = self.schema_def(&schema, header)?.schema.clone();
        let mut depth = None;
        let mut pool = Vec::new();
        let mut connectives = Connectives::all();
        for line in body {
            let mut p = self.parser(line, Scope::default())?;
            match p.ident()?.as_str() {
                "depth" => depth = Some(p.number()?),
                "pool" => {
                    while !p.at_end() {
                        let h = p.ident()?;
                        if !self.list_morphisms.contains_key(&h) {
                            return Err(p.error(format!("unknown type-list morphism `{h}`")));
                        }
                        pool.push(h);
                    }
                }
                "connectives" => {
                    let mut names = Vec::new();
                    while !p.at_end() {
                        names.push(p.ident()?);
                    }
                    connectives = Connectives::from_names(names.iter().map(String::as_str))
                        .map_err(|e| syntax(line.number, 1, e.to_string()))?;
                }
                other => return Err(syntax(line.number, 1, format!("unknown universe statement `{other}`"))),
            }
            p.finish()?;
        }
        let depth = depth.ok_or_else(|| syntax(header, 1, "universe needs a `depth` line"))?;
        let universe = self.build_universe(&s, depth, &pool, connectives)?;
        self.universes.insert(
            name.to_string(),
            UniverseDef {
                schema,
                depth,
                pool,
                connectives,
                universe,
            },
        );
        Ok(())
    }

    /// Builds a universe over `schema` from named pool morphisms.
    pub fn build_universe(
        &self,
        schema: &Arc<Schema>,
        depth: usize,
        pool: &[String],
        connectives: Connectives,
    ) -> Result<FormulaUniverse> {
        let morphisms = pool
            .iter()
            .map(|h| {
                self.list_morphisms.get(h).cloned().ok_or_else(|| Error::UnknownName {
                    kind: "type-list morphism",
                    name: h.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        FormulaUniverse::new(schema.clone(), depth, morphisms, connectives)
    }

    fn system_section(&mut self, name: &str, body: &[&Line], header: usize) -> Result<()> {
        self.claim(name, Kind::System, header)?;
        let mut nodes = BTreeMap::new();
        let mut edges = BTreeMap::new();
        let mut core = None;
        let mut components = BTreeMap::new();
        for line in body {
            let mut p = self.parser(line, Scope::default())?;
            match p.ident()?.as_str() {
                "node" => {
                    let n = NodeId::new(p.ident()?);
                    p.expect(&Tok::Eq)?;
                    let m = p.ident()?;
                    let t = if p.at_end() { None } else { Some(p.ident()?) };
                    nodes.insert(n, (m, t));
                }
                "edge" => {
                    let e = EdgeId::new(p.ident()?);
                    p.expect(&Tok::Colon)?;
                    let i = NodeId::new(p.ident()?);
                    p.expect(&Tok::Arrow)?;
                    let j = NodeId::new(p.ident()?);
                    p.expect(&Tok::Eq)?;
                    edges.insert(e, (i, j, p.ident()?));
                }
                "core" => core = Some(p.ident()?),
                "channel" => {
                    let n = NodeId::new(p.ident()?);
                    p.expect(&Tok::Eq)?;
                    components.insert(n, p.ident()?);
                }
                other => return Err(syntax(line.number, 1, format!("unknown system statement `{other}`"))),
            }
            p.finish()?;
        }
        let at = |e: Error| syntax(header, 1, e.to_string());
        let mut logics = BTreeMap::new();
        for (n, (m, t)) in &nodes {
            let sd = self
                .structures
                .get(m)
                .ok_or_else(|| at(Error::UnknownName { kind: "structure", name: m.clone() }))?;
            let spec = match t {
                Some(t) => {
                    let d = self
                        .specs
                        .get(t)
                        .ok_or_else(|| at(Error::UnknownName { kind: "spec", name: t.clone() }))?;
                    d.spec.clone()
                }
                None => Specification::empty(sd.structure.schema_arc().clone()),
            };
            logics.insert(n.clone(), Logic::new(sd.structure.clone(), spec).map_err(at)?);
        }
        let mut links = BTreeMap::new();
        for (e, (_, _, h)) in &edges {
            let d = self
                .structure_morphisms
                .get(h)
                .ok_or_else(|| at(Error::UnknownName { kind: "structure morphism", name: h.clone() }))?;
            links.insert(e.clone(), d.morphism.clone());
        }
        let shape = ShapeGraph::new(
            nodes.keys().cloned(),
            edges.iter().map(|(e, (i, j, _))| (e.clone(), i.clone(), j.clone())),
        )
        .map_err(at)?;
        let system = InformationSystem::new(shape, logics, links).map_err(at)?;
        let (channel, explicit_channel) = match core {
            None if components.is_empty() => (None, None),
            None => return Err(syntax(header, 1, "channel components need a `core` line")),
            Some(c) => {
                let core_s = self
                    .structures
                    .get(&c)
                    .ok_or_else(|| at(Error::UnknownName { kind: "structure", name: c.clone() }))?
                    .structure
                    .clone();
                let mut comps = BTreeMap::new();
                for (n, g) in &components {
                    let d = self
                        .structure_morphisms
                        .get(g)
                        .ok_or_else(|| at(Error::UnknownName { kind: "structure morphism", name: g.clone() }))?;
                    comps.insert(n.clone(), d.morphism.clone());
                }
                (Some((c, components)), Some(Channel::new(core_s, comps)))
            }
        };
        self.systems.insert(
            name.to_string(),
            SystemDef {
                nodes,
                edges,
                channel,
                system,
                explicit_channel,
            },
        );
        Ok(())
    }

    pub fn kind_of(&self, name: &str) -> Option<Kind> {
        self.kinds.get(name).copied()
    }

    /// Names in definition order.
    pub fn names(&self) -> &[String] {
        &self.order
    }

    pub fn origin(&self, name: &str) -> Option<&Path> {
        self.origins.get(name).map(PathBuf::as_path)
    }

    /// The single object of `kind` defined in `file`, or the one named.
    pub fn select(&self, kind: Kind, file: Option<&Path>, name: Option<&str>) -> Result<String> {
        if let Some(n) = name {
            return match self.kinds.get(n) {
                Some(k) if *k == kind => Ok(n.to_string()),
                Some(k) => Err(Error::invalid(
                    "reference",
                    format!("`{n}` is a {}, not a {}", k.as_str(), kind.as_str()),
                )),
                None => Err(Error::UnknownName {
                    kind: kind.as_str(),
                    name: n.to_string(),
                }),
            };
        }
        let canonical = file.and_then(|f| fs::canonicalize(f).ok());
        let candidates: Vec<&String> = self
            .order
            .iter()
            .filter(|n| self.kinds[*n] == kind)
            .filter(|n| canonical.is_none() || self.origins.get(*n) == canonical.as_ref())
            .collect();
        match candidates.as_slice() {
            [one] => Ok((*one).clone()),
            [] => Err(Error::invalid("reference", format!("no {} found", kind.as_str()))),
            _ => Err(Error::invalid(
                "reference",
                format!("several {}s found; select one with PATH#NAME", kind.as_str()),
            )),
        }
    }

    /// Scope for parsing formulas over a schema, with every named list morphism.
    pub fn scope<'a>(&'a self, schema: &'a Schema) -> Scope<'a> {
        Scope::new(Some(schema), Some(&self.list_morphisms))
    }

    /// Prints every object in definition order; the result reloads to an
    /// equal workspace.
    pub fn to_text(&self) -> Result<String> {
        let mut out = String::new();
        for name in &self.order {
            if !out.is_empty() {
                out.push('\n');
            }
            match self.kinds[name] {
                Kind::Schema => out += &write_schema(name, &self.schemas[name])?,
                Kind::Classification => out += &write_classification(name, &self.classifications[name])?,
                Kind::Structure => {
                    let d = &self.structures[name];
                    out += &write_structure(name, &d.schema, &d.structure, d.algebra.as_ref())?;
                }
                Kind::Spec => out += &write_spec(name, &self.specs[name])?,
                Kind::ListMorphism => out += &write_list_morphism(name, &self.list_morphisms[name])?,
                Kind::SchemaMorphism => out += &write_schema_morphism(name, &self.schema_morphisms[name])?,
                Kind::StructureMorphism => out += &write_structure_morphism(name, &self.structure_morphisms[name])?,
                Kind::Universe => out += &write_universe(name, &self.universes[name])?,
                Kind::System => out += &write_system(name, &self.systems[name])?,
            }
        }
        Ok(out)
    }
}

/// Lines up to the matching `end`, which is consumed.
fn section_body<'l, 't>(lines: &'l [Line<'t>], pos: &mut usize, header: usize) -> Result<Vec<&'l Line<'t>>> {
    let mut body = Vec::new();
    while *pos < lines.len() {
        let line = &lines[*pos];
        *pos += 1;
        if line.text.split('#').next().unwrap_or("").trim() == "end" {
            return Ok(body);
        }
        body.push(line);
    }
    Err(syntax(header, 1, "section is missing its `end`"))
}

/// `(i: S, j: T)`.
fn paren_list(p: &mut Parser) -> Result<TypeList> {
    p.expect(&Tok::LParen)?;
    let mut entries: Vec<(String, String)> = Vec::new();
    if !p.eat(&Tok::RParen) {
        loop {
            let i = p.ident()?;
            p.expect(&Tok::Colon)?;
            let s = p.ident()?;
            if entries.iter().any(|(j, _)| *j == i) {
                return Err(p.error(format!("index `{i}` repeated")));
            }
            entries.push((i, s));
            if p.eat(&Tok::RParen) {
                break;
            }
            p.expect(&Tok::Comma)?;
        }
    }
    TypeList::new(entries)
}

fn arrow_pair(p: &mut Parser) -> Result<(String, String)> {
    let a = p.ident()?;
    p.expect(&Tok::Arrow)?;
    let b = p.ident()?;
    Ok((a, b))
}

fn check_ident(what: &str, s: &str) -> Result<()> {
    if is_ident(s) && !matches!(s, "end" | "top" | "bot" | "exists" | "forall" | "subst") {
        Ok(())
    } else {
        Err(Error::invalid("name", format!("{what} `{s}` cannot be written as an identifier")))
    }
}

fn paren_list_text(list: &TypeList) -> Result<String> {
    let parts = list
        .iter()
        .map(|(i, s)| {
            check_ident("index", i.as_str())?;
            check_ident("sort", s.as_str())?;
            Ok(format!("{i}: {s}"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(format!("({})", parts.join(", ")))
}

fn tuple_text(t: &Tuple) -> Result<String> {
    let parts = t
        .iter()
        .map(|(i, y)| {
            check_ident("index", i.as_str())?;
            check_ident("token", y.as_str())?;
            Ok(format!("{i}: {y}"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(format!("({})", parts.join(", ")))
}

pub fn write_schema(name: &str, d: &SchemaDef) -> Result<String> {
    check_ident("schema", name)?;
    let mut out = format!("schema {name}\n");
    if !d.schema.sorts().is_empty() {
        for x in d.schema.sorts() {
            check_ident("sort", x.as_str())?;
        }
        let sorts: Vec<&str> = d.schema.sorts().iter().map(Sort::as_str).collect();
        writeln!(out, "  sort {}", sorts.join(" ")).expect("string write");
    }
    for (r, l) in d.schema.relations() {
        check_ident("relation type", r.as_str())?;
        writeln!(out, "  rel {r}{}", paren_list_text(l)?).expect("string write");
    }
    for (e, sig) in d.ops.symbols() {
        check_ident("operator", e.as_str())?;
        if sig.args.is_empty() {
            writeln!(out, "  op {e} : {}", sig.result).expect("string write");
        } else {
            writeln!(out, "  op {e}{} : {}", paren_list_text(&sig.args)?, sig.result).expect("string write");
        }
    }
    out += "end\n";
    Ok(out)
}

fn write_tokens(out: &mut String, e: &EntityClassification) -> Result<()> {
    // Group tokens by their exact intent so each line reads `token ... : types`.
    let mut by_intent: BTreeMap<Vec<Sort>, Vec<&Token>> = BTreeMap::new();
    for y in e.tokens() {
        check_ident("token", y.as_str())?;
        by_intent.entry(e.intent(y).into_iter().collect()).or_default().push(y);
    }
    for (types, ys) in by_intent {
        let ys: Vec<&str> = ys.iter().map(|y| y.as_str()).collect();
        if types.is_empty() {
            writeln!(out, "  token {}", ys.join(" ")).expect("string write");
        } else {
            let ts: Vec<&str> = types.iter().map(Sort::as_str).collect();
            writeln!(out, "  token {} : {}", ys.join(" "), ts.join(" ")).expect("string write");
        }
    }
    Ok(())
}

pub fn write_classification(name: &str, e: &EntityClassification) -> Result<String> {
    check_ident("classification", name)?;
    let mut out = format!("classification {name}\n");
    if !e.types().is_empty() {
        for x in e.types() {
            check_ident("type", x.as_str())?;
        }
        let ts: Vec<&str> = e.types().iter().map(Sort::as_str).collect();
        writeln!(out, "  type {}", ts.join(" ")).expect("string write");
    }
    write_tokens(&mut out, e)?;
    out += "end\n";
    Ok(out)
}

pub fn write_structure(name: &str, schema: &str, m: &Structure, algebra: Option<&Algebra>) -> Result<String> {
    check_ident("structure", name)?;
    let mut out = format!("structure {name} : {schema}\n");
    write_tokens(&mut out, m.entities())?;
    for (k, t) in m.tau() {
        check_ident("key", k.as_str())?;
        let rels: Vec<String> = m.relations().intent(k).into_iter().map(|r| r.to_string()).collect();
        if rels.is_empty() {
            writeln!(out, "  key {k} {}", tuple_text(t)?).expect("string write");
        } else {
            writeln!(out, "  key {k} : {} {}", rels.join(" "), tuple_text(t)?).expect("string write");
        }
    }
    if let Some(a) = algebra {
        for (e, table) in a.ops() {
            for (args, y) in table {
                if args.is_empty() {
                    writeln!(out, "  def {e} = {y}").expect("string write");
                } else {
                    writeln!(out, "  def {e}{} = {y}", tuple_text(args)?).expect("string write");
                }
            }
        }
    }
    out += "end\n";
    Ok(out)
}

pub fn write_spec(name: &str, d: &SpecDef) -> Result<String> {
    check_ident("spec", name)?;
    let mut out = format!("spec {name} : {}\n", d.schema);
    for c in d.spec.constraints() {
        writeln!(out, "  {c}").expect("string write");
    }
    out += "end\n";
    Ok(out)
}

pub fn write_list_morphism(name: &str, h: &TypeListMorphism) -> Result<String> {
    check_ident("morphism", name)?;
    Ok(format!("morphism {name} : list {}\n", h.clone().without_label()))
}

pub fn write_schema_morphism(name: &str, d: &SchemaMorphismDef) -> Result<String> {
    check_ident("morphism", name)?;
    let mut out = format!("morphism {name} : schema {} -> {}\n", d.source, d.target);
    for (a, b) in &d.morphism.rel_map {
        writeln!(out, "  rel {a} -> {b}").expect("string write");
    }
    for (a, b) in &d.morphism.type_map {
        writeln!(out, "  sort {a} -> {b}").expect("string write");
    }
    out += "end\n";
    Ok(out)
}

pub fn write_structure_morphism(name: &str, d: &StructureMorphismDef) -> Result<String> {
    check_ident("morphism", name)?;
    let mut out = format!("morphism {name} : structure {} -> {}\n", d.source, d.target);
    let h = &d.morphism;
    for (a, b) in &h.rel_map {
        writeln!(out, "  rel {a} -> {b}").expect("string write");
    }
    for (a, b) in &h.type_map {
        writeln!(out, "  sort {a} -> {b}").expect("string write");
    }
    for (a, b) in &h.key_map {
        writeln!(out, "  key {a} -> {b}").expect("string write");
    }
    for (a, b) in &h.token_map {
        writeln!(out, "  token {a} -> {b}").expect("string write");
    }
    out += "end\n";
    Ok(out)
}

pub fn write_universe(name: &str, d: &UniverseDef) -> Result<String> {
    check_ident("universe", name)?;
    let mut out = format!("universe {name} : {}\n  depth {}\n", d.schema, d.depth);
    if !d.pool.is_empty() {
        writeln!(out, "  pool {}", d.pool.join(" ")).expect("string write");
    }
    if d.connectives != Connectives::all() {
        writeln!(out, "  connectives {}", d.connectives.names().join(" ")).expect("string write");
    }
    out += "end\n";
    Ok(out)
}

pub fn write_system(name: &str, d: &SystemDef) -> Result<String> {
    check_ident("system", name)?;
    let mut out = format!("system {name}\n");
    for (n, (m, t)) in &d.nodes {
        match t {
            Some(t) => writeln!(out, "  node {n} = {m} {t}"),
            None => writeln!(out, "  node {n} = {m}"),
        }
        .expect("string write");
    }
    for (e, (i, j, h)) in &d.edges {
        writeln!(out, "  edge {e} : {i} -> {j} = {h}").expect("string write");
    }
    if let Some((core, comps)) = &d.channel {
        writeln!(out, "  core {core}").expect("string write");
        for (n, g) in comps {
            writeln!(out, "  channel {n} = {g}").expect("string write");
        }
    }
    out += "end\n";
    Ok(out)
}

/// Parses a type-list morphism that is either named in the workspace or
/// written inline.
pub fn parse_morphism_ref(w: &Workspace, text: &str) -> Result<TypeListMorphism> {
    crate::syntax::parse_morphism(text, Scope::new(None, Some(&w.list_morphisms)))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::formula::Formula;

    pub(crate) const GO: &str = r#"
# John is going to Boston by bus.
schema S_go
  sort Person City Bus
  rel Go(agnt: Person, dest: City, inst: Bus)
  op John : Person
  op Boston : City
end

morphism dest : list {dest: City} -> {agnt: Person, dest: City, inst: Bus} <dest -> dest>

structure M_go : S_go
  token john jane : Person
  token boston : City
  token bus1 : Bus
  key k1 : Go (agnt: john, dest: boston, inst: bus1)
  key k2 (agnt: jane, dest: boston, inst: bus1)
  def John = john
  def Boston = boston
end

spec T_go : S_go
  Go |- top[Go]
  Go |-[dest] top[{dest: City}]
end

universe U : S_go
  depth 1
  pool dest
  connectives meet neg exists
end
"#;

    #[test]
    fn loads_cg_fixture() {
        let w = Workspace::from_str(GO).unwrap();
        let m = &w.structures["M_go"];
        assert_eq!(m.structure.keys().len(), 2);
        assert_eq!(m.structure.eval(&Formula::atom("Go")).unwrap().len(), 1);
        assert!(m.algebra.is_some());
        assert_eq!(w.specs["T_go"].spec.len(), 2);
        assert!(w.universes["U"].universe.len() > 5);
        assert_eq!(w.select(Kind::Structure, None, None).unwrap(), "M_go");
    }

    #[test]
    fn round_trip() {
        let w = Workspace::from_str(GO).unwrap();
        let text = w.to_text().unwrap();
        let w2 = Workspace::from_str(&text).unwrap();
        assert_eq!(w.schemas, w2.schemas);
        assert_eq!(w.structures, w2.structures);
        assert_eq!(w.specs, w2.specs);
        assert_eq!(w.list_morphisms, w2.list_morphisms);
        assert_eq!(w.universes, w2.universes);
        assert_eq!(w2.to_text().unwrap(), text);
    }

    #[test]
    fn errors_carry_positions() {
        let bad = "schema S\n  sort A\n  rel R(x: A\nend\n";
        match Workspace::from_str(bad) {
            Err(Error::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let dup = "schema S\nend\nschema S\nend\n";
        assert!(matches!(Workspace::from_str(dup), Err(Error::Syntax { line: 3, .. })));
        let open = "schema S\n  sort A\n";
        assert!(matches!(Workspace::from_str(open), Err(Error::Syntax { line: 1, .. })));
        let unknown_rel = "schema S\n  sort A\nend\nspec T : S\n  Nope |- Nope\nend\n";
        assert!(matches!(Workspace::from_str(unknown_rel), Err(Error::Syntax { line: 5, .. })));
    }

    #[test]
    fn morphism_sections() {
        let text = format!(
            "{GO}\nschema S_travel\n  sort Agent Place Vehicle\n  rel Travel(agnt: Agent, dest: Place, inst: Vehicle)\nend\n\
             morphism rn : schema S_go -> S_travel\n  rel Go -> Travel\n  sort Person -> Agent\n  sort City -> Place\n  sort Bus -> Vehicle\nend\n\
             morphism idm : structure M_go -> M_go\n  identity\nend\n"
        );
        let w = Workspace::from_str(&text).unwrap();
        assert_eq!(w.schema_morphisms["rn"].morphism.rel_map.len(), 1);
        assert!(w.structure_morphisms["idm"].morphism == StructureMorphism::identity(&w.structures["M_go"].structure));
        let again = Workspace::from_str(&w.to_text().unwrap()).unwrap();
        assert_eq!(again.schema_morphisms, w.schema_morphisms);
        assert_eq!(again.structure_morphisms, w.structure_morphisms);
    }
}
