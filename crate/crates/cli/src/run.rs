use std::path::PathBuf;
use std::time::Instant;

use pentamol::field::Side;
use pentamol::hamiltonian::{Engine, StateSpace};
use pentamol::spectra::{
    convergence_study, count_vibrational, find_wells, manifold_vs_full, run_scan_with, trimol_limit_check, ScanMode, ScanPlan, ScanResult,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{curve_rows, observable_rows, plot_script, prepare_dir, write_curves, write_observables, write_text, write_toml};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    ScanSymmetric,
    ScanAsymGap,
    ScanAsymR1,
    Convergence,
    Wells,
    TrimolCheck,
    FieldCheck,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::ScanSymmetric => "scan-symmetric",
            Subcommand::ScanAsymGap => "scan-asym-gap",
            Subcommand::ScanAsymR1 => "scan-asym-r1",
            Subcommand::Convergence => "convergence",
            Subcommand::Wells => "wells",
            Subcommand::TrimolCheck => "trimol-check",
            Subcommand::FieldCheck => "field-check",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockMeta {
    pub m_j: i32,
    pub dim: usize,
    pub points: usize,
    pub flagged_steps: usize,
    pub max_residual: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Metadata {
    pub run_id: String,
    pub subcommand: String,
    pub code_version: String,
    pub unix_time: u64,
    pub elapsed_seconds: f64,
    pub files: Vec<String>,
    pub blocks: Vec<BlockMeta>,
    pub config: RunConfig,
}

#[derive(Debug, Clone)]
pub struct ResultBundle {
    pub run_id: String,
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub metadata: Metadata,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WellRow {
    pub m_j: i32,
    pub curve_id: usize,
    pub label: String,
    pub outermost: bool,
    pub r_min: f64,
    pub e_min: f64,
    pub depth: f64,
    pub left_r: f64,
    pub left_e: f64,
    pub right_r: f64,
    pub right_e: f64,
    pub levels: usize,
    pub level_energies: Vec<f64>,
    pub resolution_warning: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WellsFile {
    pub run_id: String,
    pub reduced_mass: f64,
    pub wells: Vec<WellRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceEntry {
    pub m_j: i32,
    pub kind: String,
    pub r: f64,
    pub curve: usize,
    pub reference: String,
    pub candidate: String,
    pub e_reference: f64,
    pub e_candidate: f64,
    pub relative: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceFile {
    pub run_id: String,
    pub max_relative_n_max: f64,
    pub max_relative_s_state: Option<f64>,
    pub n_max_converged: bool,
    pub s_state_converged: Option<bool>,
    pub rows: Vec<ConvergenceEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrimolEntry {
    pub m_j: i32,
    pub r1: f64,
    pub r2: f64,
    pub threshold: f64,
    pub max_residual: f64,
    pub passed: bool,
    pub pentamol: Vec<f64>,
    pub trimol: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrimolFile {
    pub run_id: String,
    pub checks: Vec<TrimolEntry>,
}

/// Stable id of a run: hash of the subcommand and every setting that can
/// change the numbers.
pub fn run_id(sub: Subcommand, config: &RunConfig) -> String {
    let mut c = config.clone();
    c.output_dir = PathBuf::new();
    c.cache_dir = None;
    c.threads = 0;
    let mut h = Sha256::new();
    h.update(sub.name().as_bytes());
    h.update(env!("CARGO_PKG_VERSION").as_bytes());
    h.update(c.to_toml().as_bytes());
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

struct Ctx<'a> {
    config: &'a RunConfig,
    dir: PathBuf,
    run_id: String,
    files: Vec<PathBuf>,
    blocks: Vec<BlockMeta>,
}

impl Ctx<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.files.push(p.clone());
        p
    }

    fn engine(&self, space: StateSpace) -> Result<Engine, CliError> {
        Engine::new(space, self.config.molecules()?, self.config.engine_options()).map_err(CliError::hamiltonian("building the Hamiltonian"))
    }

    fn scan(&mut self, mode: ScanMode, radii: Vec<f64>, m_j: i32) -> Result<ScanResult, CliError> {
        let t = Instant::now();
        let engine = self.engine(self.config.state_space(m_j))?;
        let mut plan = ScanPlan::new(mode, radii, engine.space().clone(), *engine.molecules(), self.config.scan.curves);
        plan.overlap_threshold = self.config.scan.overlap_threshold;
        let scan = run_scan_with(&engine, &plan).map_err(CliError::spectra(format!("scan at M_J = {m_j}")))?;
        self.blocks.push(BlockMeta {
            m_j,
            dim: scan.dim,
            points: scan.points.len(),
            flagged_steps: scan.curves.iter().map(|c| c.flags.len()).sum(),
            max_residual: scan.points.iter().map(|p| p.max_residual).fold(0.0, f64::max),
            seconds: t.elapsed().as_secs_f64(),
        });
        let stem = format!("curves_mj{m_j}");
        let curves = self.path(&format!("{stem}.csv"));
        write_curves(&curves, &curve_rows(&scan))?;
        let obs = self.path(&format!("observables_mj{m_j}.csv"));
        write_observables(&obs, &observable_rows(&scan))?;
        let script = self.path(&format!("plot_{stem}.py"));
        write_text(&script, &plot_script(&format!("{stem}.csv"), &format!("M_J = {m_j}")))?;
        Ok(scan)
    }
}

fn well_rows(scan: &ScanResult, m_j: i32, mu: f64) -> Result<Vec<WellRow>, CliError> {
    let radii: Vec<f64> = scan.points.iter().map(|p| p.r).collect();
    let mut out = Vec::new();
    if radii.len() < 5 {
        return Ok(out);
    }
    for (c, curve) in scan.curves.iter().enumerate() {
        let wells = find_wells(&radii, &curve.energies).map_err(CliError::spectra("well search"))?;
        let outer = wells.iter().map(|w| w.r_min).fold(f64::NEG_INFINITY, f64::max);
        for w in &wells {
            let v = count_vibrational(&radii, &curve.energies, w, mu).map_err(CliError::spectra("vibrational levels"))?;
            out.push(WellRow {
                m_j,
                curve_id: c,
                label: curve.label.as_ref().map(|l| l.to_string()).unwrap_or_default(),
                outermost: w.r_min == outer,
                r_min: w.r_min,
                e_min: w.e_min,
                depth: w.depth,
                left_r: w.left.0,
                left_e: w.left.1,
                right_r: w.right.0,
                right_e: w.right.1,
                levels: v.count,
                level_energies: v.energies,
                resolution_warning: v.resolution_warning,
            });
        }
    }
    Ok(out)
}

pub fn run(sub: Subcommand, config: &RunConfig) -> Result<ResultBundle, CliError> {
    config.validate()?;
    let started = Instant::now();
    let dir = prepare_dir(&config.output_dir)?;
    let id = run_id(sub, config);
    let mut ctx = Ctx { config, dir: dir.clone(), run_id: id.clone(), files: Vec::new(), blocks: Vec::new() };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(config.threads).build().map_err(|e| CliError::Config(format!("threads: {e}")))?;
    pool.install(|| execute(sub, &mut ctx))?;

    let meta_path = dir.join("metadata.toml");
    let mut files: Vec<String> =
        ctx.files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    files.push("metadata.toml".into());
    let metadata = Metadata {
        run_id: id.clone(),
        subcommand: sub.name().to_string(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        unix_time: std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        elapsed_seconds: started.elapsed().as_secs_f64(),
        files,
        blocks: ctx.blocks,
        config: config.clone(),
    };
    write_toml(&meta_path, &metadata)?;
    ctx.files.push(meta_path);
    Ok(ResultBundle { run_id: id, dir, files: ctx.files, metadata })
}

fn execute(sub: Subcommand, ctx: &mut Ctx) -> Result<(), CliError> {
    let config = ctx.config;
    match sub {
        Subcommand::ScanSymmetric | Subcommand::ScanAsymGap | Subcommand::ScanAsymR1 => {
            let mode = match sub {
                Subcommand::ScanSymmetric => ScanMode::Symmetric,
                Subcommand::ScanAsymGap => ScanMode::FixedGap { gap: config.scan.gap },
                _ => ScanMode::FixedR1 { r1: config.scan.r1 },
            };
            for &m in &config.space.m_j {
                ctx.scan(mode, config.scan_radii(), m)?;
            }
        }
        Subcommand::Wells => {
            let mut rows = Vec::new();
            for &m in &config.space.m_j {
                let scan = ctx.scan(ScanMode::Symmetric, config.scan_radii(), m)?;
                rows.extend(well_rows(&scan, m, config.wells.reduced_mass)?);
            }
            let path = ctx.path("wells.toml");
            write_toml(&path, &WellsFile { run_id: ctx.run_id.clone(), reduced_mass: config.wells.reduced_mass, wells: rows })?;
        }
        Subcommand::Convergence => {
            let c = &config.convergence;
            let radii = if c.radii.is_empty() { config.scan_radii() } else { c.radii.clone() };
            let mols = config.molecules()?;
            let opts = config.engine_options();
            let mut rows = Vec::new();
            let (mut max_n, mut max_s) = (0.0f64, None::<f64>);
            for &m in &config.space.m_j {
                let space = config.state_space(m);
                let t = convergence_study(&space, &c.n_max_ladder, mols, &opts, ScanMode::Symmetric, &radii, c.curves)
                    .map_err(CliError::spectra(format!("N_max convergence at M_J = {m}")))?;
                max_n = max_n.max(t.max_relative());
                rows.extend(t.rows.into_iter().map(|r| entry(m, "n_max", r)));
                if space.s_state.is_some() && space.include_manifold {
                    let space = StateSpace { n_max: c.n_max_ladder[0], ..space };
                    let t = manifold_vs_full(&space, mols, &opts, ScanMode::Symmetric, &radii, c.curves)
                        .map_err(CliError::spectra(format!("s-state comparison at M_J = {m}")))?;
                    max_s = Some(max_s.unwrap_or(0.0).max(t.max_relative()));
                    rows.extend(t.rows.into_iter().map(|r| entry(m, "s_state", r)));
                }
            }
            let file = ConvergenceFile {
                run_id: ctx.run_id.clone(),
                max_relative_n_max: max_n,
                max_relative_s_state: max_s,
                n_max_converged: max_n < c.max_relative,
                s_state_converged: max_s.map(|v| v < c.max_relative_s_state),
                rows,
            };
            let path = ctx.path("convergence.toml");
            write_toml(&path, &file)?;
        }
        Subcommand::TrimolCheck => {
            let mut checks = Vec::new();
            for &m in &config.space.m_j {
                let scan = ctx.scan(ScanMode::FixedR1 { r1: config.scan.r1 }, config.trimol_radii(), m)?;
                let r = trimol_limit_check(&scan, &config.engine_options(), config.trimol.threshold)
                    .map_err(CliError::spectra(format!("TriMol reference at M_J = {m}")))?;
                checks.push(TrimolEntry {
                    m_j: m,
                    r1: r.r1,
                    r2: r.r2,
                    threshold: r.threshold,
                    max_residual: r.max_residual(),
                    passed: r.passed(),
                    pentamol: r.pentamol,
                    trimol: r.trimol,
                });
            }
            let path = ctx.path("trimol.toml");
            write_toml(&path, &TrimolFile { run_id: ctx.run_id.clone(), checks })?;
        }
        Subcommand::FieldCheck => {
            let space = StateSpace { n_max: 0, ..config.state_space(0) };
            let engine = ctx.engine(space)?;
            let r = config.field_check.r;
            let states: Vec<_> = engine.space().electron_states().into_iter().filter(|e| e.m == 0).collect();
            let path = ctx.path("field_check.csv");
            let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::Write { path: path.clone(), source: std::io::Error::other(e) })?;
            let werr = |e: csv::Error| CliError::Write { path: path.clone(), source: std::io::Error::other(e) };
            w.write_record(["R_bohr", "n1", "l1", "n2", "l2", "abs_FZ_au"]).map_err(werr)?;
            for a in &states {
                for b in &states {
                    let v = engine.electron_field(0, r, Side::Plus, a, b).map_err(CliError::hamiltonian("field matrix elements"))?;
                    w.write_record([r.to_string(), a.n.to_string(), a.l.to_string(), b.n.to_string(), b.l.to_string(), v.abs().to_string()])
                        .map_err(werr)?;
                }
            }
            w.flush().map_err(|source| CliError::Write { path: path.clone(), source })?;
        }
    }
    Ok(())
}

fn entry(m_j: i32, kind: &str, r: pentamol::spectra::ConvergenceRow) -> ConvergenceEntry {
    ConvergenceEntry {
        m_j,
        kind: kind.to_string(),
        r: r.r,
        curve: r.curve,
        reference: r.reference,
        candidate: r.candidate,
        e_reference: r.e_reference,
        e_candidate: r.e_candidate,
        relative: r.relative,
    }
}
