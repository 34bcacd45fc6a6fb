//! Command dispatcher behind the `fole` binary.
//!
//! Object references take three forms: `NAME` (looked up among every file
//! loaded for the invocation), `PATH#NAME`, or `PATH` when the file defines
//! exactly one object of the expected kind.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser as ClapParser, Subcommand};

use crate::database::{db_of_logic, export};
use crate::error::{Error, Result};
use crate::formula::{translate, translate_constraint};
use crate::name::NodeId;
use crate::schema::{Schema, SchemaMorphism};
use crate::speclogic::{consequence, soundness_check, Connectives, FormulaUniverse, Logic};
use crate::structure::{reduct, Structure};
use crate::syntax::{parse_constraint, parse_formula};
use crate::system::{sum_system, system_consequence, underlying};
use crate::workspace::{parse_morphism_ref, write_structure, Kind, Workspace};

#[derive(ClapParser, Debug)]
#[command(name = "fole", version, about = "Evaluate and reason over typed first-order structures")]
struct Cli {
    /// Extra workspace files to load before resolving references.
    #[arg(long = "load", global = true, value_name = "FILE")]
    load: Vec<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct UniverseArgs {
    /// Named universe; replaces --depth/--pool/--connectives.
    #[arg(long, conflicts_with_all = ["depth", "pool", "connectives"])]
    universe: Option<String>,
    /// Maximum connective nesting.
    #[arg(long, required_unless_present = "universe")]
    depth: Option<usize>,
    /// Type-list morphisms for the flow connectives, by name or inline.
    #[arg(long, num_args = 0.., value_delimiter = ',', required_unless_present = "universe")]
    pool: Option<Vec<String>>,
    /// Connectives to enumerate (default: all).
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    connectives: Option<Vec<String>>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load files and report every object defined.
    Validate { files: Vec<PathBuf> },
    /// Print the keyed table of a formula.
    Eval {
        #[arg(long)]
        structure: String,
        #[arg(long)]
        formula: String,
    },
    /// Check each constraint of a specification against a structure.
    Check {
        #[arg(long)]
        structure: String,
        #[arg(long)]
        spec: String,
    },
    /// Translate a formula or constraint along a schema morphism.
    Translate {
        #[arg(long)]
        morphism: String,
        #[arg(long, conflicts_with = "constraint", required_unless_present = "constraint")]
        formula: Option<String>,
        #[arg(long)]
        constraint: Option<String>,
    },
    /// Print the reduct of a structure along a schema morphism.
    Reduct {
        #[arg(long)]
        morphism: String,
        #[arg(long)]
        structure: String,
        #[arg(long)]
        name: Option<String>,
    },
    /// Close a specification over a bounded formula universe.
    Consequence {
        #[arg(long)]
        spec: String,
        #[command(flatten)]
        universe: UniverseArgs,
        /// Include reflexive and other trivially derivable sequents.
        #[arg(long)]
        all: bool,
        /// Only report whether this constraint is derivable.
        #[arg(long)]
        query: Option<String>,
    },
    /// Report constraints of a specification the structure fails.
    Sound {
        #[arg(long)]
        structure: String,
        #[arg(long)]
        spec: String,
    },
    /// Fuse a system through its channel and report what each node gains.
    Fuse {
        #[arg(long)]
        system: String,
        #[command(flatten)]
        universe: UniverseArgs,
    },
    /// Write the database of a logic as CSV tables and a JSON manifest.
    Export {
        #[arg(long)]
        structure: String,
        #[arg(long)]
        spec: String,
        #[command(flatten)]
        universe: UniverseArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare satisfaction in a reduct with satisfaction of translations.
    ProveInvariance {
        #[arg(long)]
        morphism: String,
        #[arg(long)]
        structure: String,
        #[arg(long)]
        spec: String,
    },
}

/// Runs the command line and returns the exit code: 0 for success or
/// true, 1 for false or a violation, 2 for usage and input errors.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut session = Session {
        workspace: Workspace::new(),
        out: Vec::new(),
    };
    let result = session.dispatch(cli);
    let _ = out.write_all(&session.out);
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::UnsoundLogic(_) | Error::ConditionViolated { .. } => 1,
                _ => 2,
            }
        }
    }
}

struct Session {
    workspace: Workspace,
    out: Vec<u8>,
}

macro_rules! say {
    ($s:expr, $($arg:tt)*) => {
        writeln!($s.out, $($arg)*).expect("write to buffer")
    };
}

impl Session {
    fn dispatch(&mut self, cli: Cli) -> Result<bool> {
        for f in &cli.load {
            self.workspace.load_file(f)?;
        }
        match cli.command {
            Command::Validate { files } => self.validate(&files),
            Command::Eval { structure, formula } => self.eval(&structure, &formula),
            Command::Check { structure, spec } => self.check(&structure, &spec),
            Command::Translate {
                morphism,
                formula,
                constraint,
            } => self.translate(&morphism, formula.as_deref(), constraint.as_deref()),
            Command::Reduct {
                morphism,
                structure,
                name,
            } => self.reduct(&morphism, &structure, name.as_deref()),
            Command::Consequence {
                spec,
                universe,
                all,
                query,
            } => self.consequence(&spec, &universe, all, query.as_deref()),
            Command::Sound { structure, spec } => self.sound(&structure, &spec),
            Command::Fuse { system, universe } => self.fuse(&system, &universe),
            Command::Export {
                structure,
                spec,
                universe,
                out,
            } => self.export(&structure, &spec, &universe, &out),
            Command::ProveInvariance {
                morphism,
                structure,
                spec,
            } => self.prove_invariance(&morphism, &structure, &spec),
        }
    }

    /// Loads whatever file the reference names and resolves it.
    fn resolve(&mut self, kind: Kind, reference: &str) -> Result<String> {
        let (path, name) = match reference.split_once('#') {
            Some((p, n)) => (Some(PathBuf::from(p)), Some(n)),
            None if Path::new(reference).is_file() => (Some(PathBuf::from(reference)), None),
            None => (None, Some(reference)),
        };
        if let Some(p) = &path {
            self.workspace.load_file(p)?;
        }
        self.workspace.select(kind, path.as_deref(), name)
    }

    fn structure(&mut self, reference: &str) -> Result<(String, Structure)> {
        let name = self.resolve(Kind::Structure, reference)?;
        Ok((name.clone(), self.workspace.structures[&name].structure.clone()))
    }

    fn logic(&mut self, structure: &str, spec: &str) -> Result<Logic> {
        let (_, m) = self.structure(structure)?;
        let t = self.resolve(Kind::Spec, spec)?;
        Logic::new(m, self.workspace.specs[&t].spec.clone())
    }

    /// A schema morphism named directly, or the schema part of a structure
    /// morphism. Returns source and target schema names.
    fn schema_morphism(&mut self, reference: &str) -> Result<(SchemaMorphism, String, String)> {
        match self.resolve(Kind::SchemaMorphism, reference) {
            Ok(n) => {
                let d = &self.workspace.schema_morphisms[&n];
                Ok((d.morphism.clone(), d.source.clone(), d.target.clone()))
            }
            Err(first) => match self.resolve(Kind::StructureMorphism, reference) {
                Ok(n) => {
                    let d = &self.workspace.structure_morphisms[&n];
                    let ws = &self.workspace;
                    Ok((
                        d.morphism.schema_morphism(),
                        ws.structures[&d.source].schema.clone(),
                        ws.structures[&d.target].schema.clone(),
                    ))
                }
                Err(_) => Err(first),
            },
        }
    }

    fn schema(&self, name: &str) -> Arc<Schema> {
        self.workspace.schemas[name].schema.clone()
    }

    fn universe(&mut self, schema: &Arc<Schema>, args: &UniverseArgs) -> Result<FormulaUniverse> {
        if let Some(u) = &args.universe {
            let n = self.resolve(Kind::Universe, u)?;
            let d = &self.workspace.universes[&n];
            if d.universe.schema() != schema {
                return Err(Error::invalid("universe", format!("`{n}` is over a different schema")));
            }
            return Ok(d.universe.clone());
        }
        let (depth, connectives) = self.universe_shape(args)?;
        let pool = self.pool(args)?;
        FormulaUniverse::new(schema.clone(), depth, pool, connectives)
    }

    fn universe_shape(&self, args: &UniverseArgs) -> Result<(usize, Connectives)> {
        let depth = args.depth.ok_or_else(|| Error::invalid("usage", "--depth is required"))?;
        let connectives = match &args.connectives {
            Some(names) => Connectives::from_names(names.iter().map(String::as_str))?,
            None => Connectives::all(),
        };
        Ok((depth, connectives))
    }

    fn pool(&self, args: &UniverseArgs) -> Result<Vec<crate::kernel::TypeListMorphism>> {
        args.pool
            .iter()
            .flatten()
            .filter(|p| !p.trim().is_empty())
            .map(|p| parse_morphism_ref(&self.workspace, p))
            .collect()
    }

    fn validate(&mut self, files: &[PathBuf]) -> Result<bool> {
        if files.is_empty() && self.workspace.names().is_empty() {
            return Err(Error::invalid("usage", "no files given"));
        }
        for f in files {
            self.workspace.load_file(f)?;
        }
        for name in self.workspace.names().to_vec() {
            let kind = self.workspace.kind_of(&name).expect("named object");
            say!(self, "ok {} {name}", kind.as_str());
        }
        say!(self, "{} object(s) valid", self.workspace.names().len());
        Ok(true)
    }

    fn eval(&mut self, structure: &str, formula: &str) -> Result<bool> {
        let (_, m) = self.structure(structure)?;
        let phi = parse_formula(formula, self.workspace.scope(m.schema()))?;
        let table = m.table_interp(&phi)?;
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["_key".to_string()];
        header.extend(table.type_list.arity().map(|i| i.to_string()));
        w.write_record(&header)?;
        for (k, t) in &table.rows {
            let mut record = vec![k.to_string()];
            record.extend(t.values().map(|y| y.to_string()));
            w.write_record(&record)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        self.out.extend_from_slice(&bytes);
        say!(self, "({} row{})", table.len(), if table.len() == 1 { "" } else { "s" });
        Ok(true)
    }

    fn check(&mut self, structure: &str, spec: &str) -> Result<bool> {
        let l = self.logic(structure, spec)?;
        let mut all = true;
        for c in l.spec().constraints() {
            let ok = l.structure().satisfies_constraint(c)?;
            all &= ok;
            say!(self, "{} {c}", if ok { "ok  " } else { "FAIL" });
        }
        say!(self, "{}", if all { "satisfied" } else { "violated" });
        Ok(all)
    }

    fn translate(&mut self, morphism: &str, formula: Option<&str>, constraint: Option<&str>) -> Result<bool> {
        let (m, source, _) = self.schema_morphism(morphism)?;
        let s2 = self.schema(&source);
        let scope = self.workspace.scope(&s2);
        let text = match (formula, constraint) {
            (Some(f), _) => translate(&m, &parse_formula(f, scope)?)?.to_string(),
            (None, Some(c)) => {
                let c = parse_constraint(c, scope)?;
                c.typecheck(&s2)?;
                translate_constraint(&m, &c)?.to_string()
            }
            (None, None) => return Err(Error::invalid("usage", "give --formula or --constraint")),
        };
        say!(self, "{text}");
        Ok(true)
    }

    fn reduct(&mut self, morphism: &str, structure: &str, name: Option<&str>) -> Result<bool> {
        let (m, source, target) = self.schema_morphism(morphism)?;
        let (mname, m1) = self.structure(structure)?;
        if self.workspace.structures[&mname].schema != target {
            return Err(Error::invalid(
                "reduct",
                format!("structure `{mname}` is not over the morphism's target schema `{target}`"),
            ));
        }
        let (m2, _) = reduct(&m, self.schema(&source), &m1)?;
        let name = name.map(str::to_string).unwrap_or_else(|| format!("{mname}_reduct"));
        let text = write_structure(&name, &source, &m2, None)?;
        self.out.extend_from_slice(text.as_bytes());
        Ok(true)
    }

    fn consequence(&mut self, spec: &str, args: &UniverseArgs, all: bool, query: Option<&str>) -> Result<bool> {
        let t = self.resolve(Kind::Spec, spec)?;
        let spec = self.workspace.specs[&t].spec.clone();
        let mut u = self.universe(spec.schema(), args)?;
        if let Some(q) = query {
            let c = parse_constraint(q, self.workspace.scope(spec.schema()))?;
            c.typecheck(spec.schema())?;
            u.extend(c.formulas())?;
            let closure = consequence(&spec, &u)?;
            let yes = closure.derives_constraint(&c);
            say!(self, "{} {c}", if yes { "derivable" } else { "not derivable" });
            return Ok(yes);
        }
        let closure = consequence(&spec, &u)?;
        let lines: Vec<String> = if all {
            closure.sequents().map(|q| q.to_string()).collect()
        } else {
            closure.nontrivial().map(|q| q.to_string()).collect()
        };
        for l in &lines {
            say!(self, "{l}");
        }
        say!(
            self,
            "({} sequent(s) over {} formula(s))",
            lines.len(),
            closure.universe().len()
        );
        Ok(true)
    }

    fn sound(&mut self, structure: &str, spec: &str) -> Result<bool> {
        let l = self.logic(structure, spec)?;
        let failed = soundness_check(&l)?;
        for c in &failed {
            say!(self, "unsatisfied {c}");
        }
        say!(self, "{}", if failed.is_empty() { "sound" } else { "unsound" });
        Ok(failed.is_empty())
    }

    fn fuse(&mut self, system: &str, args: &UniverseArgs) -> Result<bool> {
        if args.universe.is_some() {
            return Err(Error::invalid("usage", "fuse takes --depth and --pool, not --universe"));
        }
        let n = self.resolve(Kind::System, system)?;
        let def = self.workspace.systems[&n].clone();
        let s = &def.system;
        let channel = match def.explicit_channel {
            Some(ch) => ch,
            None => sum_system(&underlying(s))?,
        };
        let (depth, connectives) = self.universe_shape(args)?;
        let pool = self.pool(args)?;
        // Each universe keeps the pool morphisms whose lists exist in its schema.
        let fitting = |schema: &Schema| {
            pool.iter()
                .filter(|h| schema.check_list(h.source()).is_ok() && schema.check_list(h.target()).is_ok())
                .cloned()
                .collect::<Vec<_>>()
        };
        let mut universes = BTreeMap::new();
        for (node, l) in &s.logics {
            let schema = l.spec().schema().clone();
            let u = FormulaUniverse::new(schema.clone(), depth, fitting(&schema), connectives)?;
            universes.insert(node.clone(), u);
        }
        let core_schema = channel.core.schema_arc().clone();
        let core_u = FormulaUniverse::new(core_schema.clone(), depth, fitting(&core_schema), connectives)?;
        let derived = system_consequence(s, &channel, &universes, &core_u)?;
        for (node, spec) in &derived {
            let own = self.own_consequence(node, &universes, s)?;
            let foreign: Vec<_> = spec
                .constraints()
                .iter()
                .filter(|c| !own.derives_constraint(c))
                .collect();
            say!(
                self,
                "node {node}: {} derivable, {} foreign",
                spec.len(),
                foreign.len()
            );
            for c in foreign {
                say!(self, "  {c}");
            }
        }
        Ok(true)
    }

    fn own_consequence(
        &self,
        node: &NodeId,
        universes: &BTreeMap<NodeId, FormulaUniverse>,
        s: &crate::system::InformationSystem,
    ) -> Result<crate::speclogic::Consequence> {
        let l = &s.logics[node];
        let mut u = universes[node].clone();
        u.extend(l.spec().constraints().iter().flat_map(|c| c.formulas()))?;
        consequence(l.spec(), &u)
    }

    fn export(&mut self, structure: &str, spec: &str, args: &UniverseArgs, dir: &Path) -> Result<bool> {
        let l = self.logic(structure, spec)?;
        let u = self.universe(l.spec().schema(), args)?;
        let db = db_of_logic(&l, &u)?;
        let written = export(&db, dir)?;
        for p in &written {
            say!(self, "wrote {}", p.display());
        }
        say!(self, "({} table(s))", db.tables().len());
        Ok(true)
    }

    fn prove_invariance(&mut self, morphism: &str, structure: &str, spec: &str) -> Result<bool> {
        let (m, source, target) = self.schema_morphism(morphism)?;
        let (mname, m1) = self.structure(structure)?;
        let t = self.resolve(Kind::Spec, spec)?;
        let sd = self.workspace.specs[&t].clone();
        if self.workspace.structures[&mname].schema != target || sd.schema != source {
            return Err(Error::invalid(
                "prove-invariance",
                format!("need a structure over `{target}` and a spec over `{source}`"),
            ));
        }
        let (m2, _) = reduct(&m, self.schema(&source), &m1)?;
        let mut all = true;
        for c in sd.spec.constraints() {
            let left = m2.satisfies_constraint(c)?;
            let tc = translate_constraint(&m, c)?;
            let right = m1.satisfies_constraint(&tc)?;
            let agree = left == right;
            all &= agree;
            say!(
                self,
                "{} {c}  reduct={left} translated={right}",
                if agree { "agree   " } else { "MISMATCH" }
            );
        }
        say!(self, "{}", if all { "invariant" } else { "not invariant" });
        Ok(all)
    }
}

/// Entry point used by the binary.
pub fn main_with_args() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
