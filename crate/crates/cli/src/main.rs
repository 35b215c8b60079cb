//! `msync`: drive a synchronization project from the shell.

mod show;

use std::collections::BTreeSet;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use msync_core::persist::{load_project, save_project};
use msync_core::render::{render, Format};
use msync_core::sync::{apply_changeset, resolve_decision, resolve_script, ChangeSet, DecisionResolution, ScriptedResolution};
use msync_core::{ElaborationLink, Error, Project, RequirementFile, Side};
use serde::Deserialize;

const EXIT_USAGE: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_CONFORMANCE: u8 = 3;
const EXIT_NOT_SYNCHRONIZED: u8 = 4;
const EXIT_PENDING: u8 = 5;

#[derive(Parser)]
#[command(name = "msync", version, about = "Use Case / Activity model synchronization")]
struct Cli {
    /// Project file.
    #[arg(long, short = 'p', global = true, env = "MSYNC_PROJECT", default_value = "msync.json")]
    project: PathBuf,

    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create a new project file.
    Init {
        name: String,
        #[arg(long)]
        system: String,
        /// Overwrite an existing file.
        #[arg(long)]
        force: bool,
    },
    /// Requirement sets.
    #[command(subcommand)]
    Req(ReqCommand),
    /// Interpret requirements into the Use Case (alpha) model or complete
    /// the Activity (beta) skeleton.
    Interpret {
        #[arg(value_enum)]
        side: SideArg,
    },
    /// Derive the Activity skeleton and trace links from the Use Case model.
    Transform,
    /// Set elaboration links and classify the requirement dependency.
    Dependency {
        #[arg(long)]
        links: PathBuf,
    },
    /// Check composition and synchronization; exit 0 only when both pass
    /// and no decision is pending.
    Verify,
    /// Change sets.
    #[command(subcommand)]
    Change(ChangeCommand),
    /// The decision queue.
    #[command(subcommand)]
    Decisions(DecisionsCommand),
    /// Adjacency and trace matrices.
    #[command(subcommand)]
    Matrix(MatrixCommand),
    /// Render a model as DOT or PlantUML.
    Render {
        #[arg(value_enum)]
        side: SideArg,
        #[arg(long, value_enum, default_value = "dot")]
        format: FormatArg,
        /// Output file; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Serve the project over HTTP.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
    },
}

#[derive(Subcommand)]
enum ReqCommand {
    /// Parse and store a requirement file.
    Add {
        #[arg(long = "set", value_enum)]
        side: SideArg,
        #[arg(long)]
        file: PathBuf,
    },
}

#[derive(Subcommand)]
enum ChangeCommand {
    /// Apply a change set atomically and propagate it.
    Apply {
        #[arg(long)]
        file: PathBuf,
    },
}

#[derive(Subcommand)]
enum DecisionsCommand {
    /// Show pending decisions with their candidates.
    List,
    /// Answer one decision, or replay a decision file.
    Resolve(ResolveArgs),
}

#[derive(Args)]
struct ResolveArgs {
    #[arg(long, required_unless_present = "script", conflicts_with = "script", requires = "choose")]
    id: Option<u64>,
    /// Candidate key or 1-based position.
    #[arg(long)]
    choose: Option<String>,
    /// Label for a newly created element.
    #[arg(long)]
    label: Option<String>,
    /// Fail if the project has moved past this revision.
    #[arg(long)]
    expected_revision: Option<u64>,
    /// Decision file: a list of {request_kind, subject_tag, choose, label?}.
    #[arg(long)]
    script: Option<PathBuf>,
}

#[derive(Subcommand)]
enum MatrixCommand {
    Show {
        #[arg(value_enum)]
        which: MatrixArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Alpha,
    Beta,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Alpha => Side::Alpha,
            SideArg::Beta => Side::Beta,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Dot,
    #[value(alias = "puml")]
    Plantuml,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Dot => Format::Dot,
            FormatArg::Plantuml => Format::Plantuml,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MatrixArg {
    N,
    M,
    Q,
}

/// A links file is either a bare list or `{"links": [...]}`.
#[derive(Deserialize)]
#[serde(untagged)]
enum LinksFile {
    List(Vec<ElaborationLink>),
    Object { links: Vec<ElaborationLink> },
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    serde_json::from_str(&read(path)?)
        .map_err(Error::from)
        .with_context(|| format!("in {}", path.display()))
}

fn load(path: &Path) -> anyhow::Result<Project> {
    load_project(path).with_context(|| format!("cannot load project {}", path.display()))
}

fn save(project: &Project, path: &Path) -> anyhow::Result<()> {
    save_project(project, path).with_context(|| format!("cannot save project {}", path.display()))
}

/// Load, mutate, save.
fn update<T>(path: &Path, f: impl FnOnce(&mut Project) -> msync_core::Result<T>) -> anyhow::Result<(Project, T)> {
    let mut project = load(path)?;
    let out = f(&mut project)?;
    save(&project, path)?;
    Ok((project, out))
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let path = cli.project.as_path();
    let json = cli.json;
    match cli.command {
        Command::Init { name, system, force } => {
            if path.exists() && !force {
                bail!("{} already exists (use --force to overwrite)", path.display());
            }
            save(&Project::new(name, system), path)?;
            println!("created {}", path.display());
        }
        Command::Req(ReqCommand::Add { side, file }) => {
            let input: RequirementFile = read_json(&file)?;
            let (p, ()) = update(path, |p| p.add_requirements(side.into(), &input))?;
            let set = match Side::from(side) {
                Side::Alpha => p.w_alpha.as_ref(),
                Side::Beta => p.w_beta.as_ref(),
            };
            println!("stored {} requirements as {}", set.map_or(0, |s| s.len()), Side::from(side));
        }
        Command::Interpret { side } => {
            let (p, issued) = update(path, |p| match side {
                SideArg::Alpha => p.interpret_alpha().map(|()| Vec::new()),
                SideArg::Beta => p.interpret_beta(),
            })?;
            let model = p.model(side.into());
            println!(
                "{}: {} entities, {} relations",
                Side::from(side),
                model.entities().count(),
                model.relations().count()
            );
            if !issued.is_empty() {
                println!("{} decision(s) pending", issued.len());
            }
        }
        Command::Transform => {
            let (p, ()) = update(path, Project::transform)?;
            println!(
                "beta skeleton: {} entities, {} trace links",
                p.model_beta.entities().count(),
                p.q_links.len()
            );
        }
        Command::Dependency { links } => {
            let links = match read_json::<LinksFile>(&links)? {
                LinksFile::List(l) | LinksFile::Object { links: l } => l,
            };
            let set: BTreeSet<ElaborationLink> = links.into_iter().collect();
            let (_, dep) = update(path, |p| p.set_links(set))?;
            if json {
                show::json(&dep)?;
            } else {
                println!("{:?} ({} links)", dep.kind, dep.links.len());
            }
        }
        Command::Verify => {
            let p = load(path)?;
            let v = p.verify()?;
            if json {
                show::json(&v)?;
            } else {
                show::verification(&v);
            }
            if !v.synchronized() {
                return Ok(EXIT_NOT_SYNCHRONIZED);
            }
            if v.pending > 0 {
                return Ok(EXIT_PENDING);
            }
        }
        Command::Change(ChangeCommand::Apply { file }) => {
            let changes = ChangeSet::from_json(&read(&file)?).with_context(|| format!("in {}", file.display()))?;
            let (p, report) = update(path, |p| apply_changeset(p, &changes))?;
            show::report(&report, json)?;
            if !json {
                show::decisions(p.pending());
            }
        }
        Command::Decisions(DecisionsCommand::List) => {
            let p = load(path)?;
            if json {
                show::json(&p.pending())?;
            } else {
                show::decisions(p.pending());
            }
        }
        Command::Decisions(DecisionsCommand::Resolve(args)) => {
            let (p, reports) = match (args.script, args.id, args.choose) {
                (Some(script), _, _) => {
                    let script: Vec<ScriptedResolution> = read_json(&script)?;
                    update(path, |p| resolve_script(p, &script))?
                }
                (None, Some(id), Some(choose)) => {
                    let resolution = DecisionResolution {
                        request: id,
                        choose,
                        label: args.label,
                        expected_revision: args.expected_revision,
                    };
                    update(path, |p| resolve_decision(p, &resolution).map(|r| vec![r]))?
                }
                _ => bail!("give --id with --choose, or --script"),
            };
            for r in &reports {
                show::report(r, json)?;
            }
            if !json {
                show::decisions(p.pending());
            }
        }
        Command::Matrix(MatrixCommand::Show { which }) => {
            let p = load(path)?;
            let (n, m) = (p.n_matrix(), p.m_matrix());
            let grid = match which {
                MatrixArg::N => n.to_grid(),
                MatrixArg::M => m.to_grid(),
                MatrixArg::Q => p.q_links.to_grid(&n, &m),
            };
            if json {
                show::json(&grid)?;
            } else {
                print!("{}", grid.to_text());
            }
        }
        Command::Render { side, format, output } => {
            let p = load(path)?;
            let text = render(p.model(side.into()), format.into());
            match output {
                Some(out) => fs::write(&out, text).with_context(|| format!("cannot write {}", out.display()))?,
                None => print!("{text}"),
            }
        }
        Command::Serve { port, host } => {
            let state = msync_service::AppState::open(path.to_path_buf())
                .with_context(|| format!("cannot load project {}", path.display()))?;
            let addr = SocketAddr::new(host, port);
            let runtime = tokio::runtime::Runtime::new()?;
            eprintln!("serving {} on http://{addr}", path.display());
            runtime.block_on(msync_service::serve(state, addr))?;
        }
    }
    Ok(0)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<Error>()) {
        Some(e) if e.is_parse() => EXIT_PARSE,
        Some(e) if e.is_conformance() => EXIT_CONFORMANCE,
        _ => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
