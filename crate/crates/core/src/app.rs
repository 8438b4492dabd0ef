//! Run orchestration: configuration, report emission, and a disk cache
//! for the expensive Gelfand-Graev decompositions. The CLI binary is a
//! thin wrapper over this module.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::algebra::{is_supported_prime, C64};
use crate::gamma::{verify_instance, GammaReport, Instance};
use crate::group::{group_order, GroupData};
use crate::models::Tower;
use crate::spectra::{decompose, GGSpace, IrrepComponent};
use crate::{Error, Result, DEFAULT_ORDER_CAP, DEFAULT_TOL};

pub const SCHEMA_VERSION: u32 = 1;
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable overriding the cache root.
pub const CACHE_ENV: &str = "GAMMA_FINITE_CACHE";

/// Builds whose Gelfand-Graev dimension exceeds this need --allow-slow.
pub const SLOW_DIM_THRESHOLD: usize = 300;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Suite {
    Fast,
    Full,
}

/// The (q, n) pairs of a suite tier.
pub fn suite_pairs(suite: Suite) -> Vec<(u8, usize)> {
    match suite {
        Suite::Fast => vec![(3, 2), (2, 3)],
        Suite::Full => vec![(3, 2), (2, 3), (5, 2)],
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub q: u8,
    pub n: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub cache_dir: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub allow_slow: bool,
    pub psi_conjugate: bool,
}

impl RunConfig {
    pub fn new(q: u8, n: usize) -> Self {
        Self {
            q,
            n,
            seed: 0,
            tolerance: DEFAULT_TOL,
            cache_dir: None,
            out: None,
            allow_slow: false,
            psi_conjugate: false,
        }
    }

    pub fn direction(&self) -> i8 {
        if self.psi_conjugate {
            -1
        } else {
            1
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !is_supported_prime(u64::from(self.q)) {
            return Err(Error::UnsupportedField(u64::from(self.q)));
        }
        if self.n < 2 {
            return Err(Error::RankMismatch {
                expected: 2,
                got: self.n,
            });
        }
        if self.tolerance <= 0.0 {
            return Err(Error::Cache("tolerance must be positive".into()));
        }
        let order = group_order(self.n, self.q);
        if order > DEFAULT_ORDER_CAP {
            return Err(Error::BudgetExceeded {
                order,
                cap: DEFAULT_ORDER_CAP,
            });
        }
        let u_order = (0..self.n * (self.n - 1) / 2).fold(1u128, |a, _| a * u128::from(self.q));
        let gg_dim = (order / u_order) as usize;
        if gg_dim > SLOW_DIM_THRESHOLD && !self.allow_slow {
            return Err(Error::BudgetExceeded {
                order,
                cap: DEFAULT_ORDER_CAP,
            });
        }
        Ok(())
    }

    fn cache_root(&self) -> Option<PathBuf> {
        if let Some(dir) = &self.cache_dir {
            return Some(dir.clone());
        }
        std::env::var_os(CACHE_ENV).map(PathBuf::from)
    }
}

// ---------------------------------------------------------------------
// cache

#[derive(Serialize, Deserialize)]
struct CachedComponent {
    id: usize,
    dim: usize,
    cuspidal: bool,
    central_character: Vec<[f64; 2]>,
    /// Row-major flattening of the (space_dim × dim) basis.
    basis: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct CachePayload {
    n: usize,
    q: u8,
    direction: i8,
    seed: u64,
    space_dim: usize,
    components: Vec<CachedComponent>,
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    schema_version: u32,
    checksum: String,
    payload: String,
}

fn cache_file_name(n: usize, q: u8, direction: i8, seed: u64) -> String {
    let d = if direction == 1 { "p" } else { "m" };
    format!("components_n{n}_q{q}_{d}_s{seed}.json")
}

fn components_to_payload(
    n: usize,
    q: u8,
    direction: i8,
    seed: u64,
    comps: &[IrrepComponent],
    space_dim: usize,
) -> CachePayload {
    CachePayload {
        n,
        q,
        direction,
        seed,
        space_dim,
        components: comps
            .iter()
            .map(|c| CachedComponent {
                id: c.id,
                dim: c.dim,
                cuspidal: c.cuspidal,
                central_character: c.central_character.iter().map(|z| [z.re, z.im]).collect(),
                basis: c
                    .basis
                    .row_iter()
                    .flat_map(|row| row.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
                    .collect(),
            })
            .collect(),
    }
}

fn payload_to_components(p: &CachePayload) -> Vec<IrrepComponent> {
    p.components
        .iter()
        .map(|c| {
            let basis = DMatrix::<C64>::from_fn(p.space_dim, c.dim, |i, j| {
                let [re, im] = c.basis[i * c.dim + j];
                C64::new(re, im)
            });
            IrrepComponent {
                id: c.id,
                n: p.n,
                q: p.q,
                direction: p.direction,
                dim: c.dim,
                basis,
                cuspidal: c.cuspidal,
                central_character: c
                    .central_character
                    .iter()
                    .map(|&[re, im]| C64::new(re, im))
                    .collect(),
            }
        })
        .collect()
}

fn io_err(context: &str, path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        context: format!("{context} {}", path.display()),
        source,
    }
}

/// Write a decomposition to the cache atomically (temp file + rename).
pub fn cache_save(
    dir: &Path,
    n: usize,
    q: u8,
    direction: i8,
    seed: u64,
    comps: &[IrrepComponent],
    space_dim: usize,
) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| io_err("creating cache dir", dir, e))?;
    let payload = serde_json::to_string(&components_to_payload(
        n, q, direction, seed, comps, space_dim,
    ))
    .expect("serializable payload");
    let checksum = hex::encode(Sha256::digest(payload.as_bytes()));
    let file = CacheFile {
        schema_version: SCHEMA_VERSION,
        checksum,
        payload,
    };
    let path = dir.join(cache_file_name(n, q, direction, seed));
    let tmp = dir.join(format!("{}.tmp", cache_file_name(n, q, direction, seed)));
    fs::write(&tmp, serde_json::to_vec(&file).expect("serializable"))
        .map_err(|e| io_err("writing cache file", &tmp, e))?;
    fs::rename(&tmp, &path).map_err(|e| io_err("renaming cache file", &path, e))?;
    Ok(path)
}

/// Load a decomposition from the cache. Any validation failure
/// (truncation, checksum or version mismatch, wrong key) returns
/// Ok(None): the caller rebuilds instead of failing.
pub fn cache_load(
    dir: &Path,
    n: usize,
    q: u8,
    direction: i8,
    seed: u64,
) -> Result<Option<Vec<IrrepComponent>>> {
    let path = dir.join(cache_file_name(n, q, direction, seed));
    let bytes = match fs::read(&path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(io_err("reading cache file", &path, e)),
    };
    let Ok(file) = serde_json::from_slice::<CacheFile>(&bytes) else {
        eprintln!("warning: cache file {} is corrupt; rebuilding", path.display());
        return Ok(None);
    };
    if file.schema_version != SCHEMA_VERSION {
        eprintln!(
            "warning: cache file {} has schema {} (want {}); rebuilding",
            path.display(),
            file.schema_version,
            SCHEMA_VERSION
        );
        return Ok(None);
    }
    if hex::encode(Sha256::digest(file.payload.as_bytes())) != file.checksum {
        eprintln!(
            "warning: cache file {} failed its checksum; rebuilding",
            path.display()
        );
        return Ok(None);
    }
    let Ok(payload) = serde_json::from_str::<CachePayload>(&file.payload) else {
        eprintln!("warning: cache payload in {} is corrupt; rebuilding", path.display());
        return Ok(None);
    };
    if payload.n != n || payload.q != q || payload.direction != direction || payload.seed != seed {
        return Ok(None);
    }
    Ok(Some(payload_to_components(&payload)))
}

/// Decompose ind_U^G θ at one rank, consulting the cache when a root is
/// configured.
fn decompose_cached(
    cfg: &RunConfig,
    data: Arc<GroupData>,
    rank: usize,
    direction: i8,
    seed: u64,
) -> Result<Vec<IrrepComponent>> {
    if let Some(root) = cfg.cache_root() {
        if let Some(comps) = cache_load(&root, rank, cfg.q, direction, seed)? {
            return Ok(comps);
        }
    }
    let gg = GGSpace::build(data, direction)?;
    let comps = decompose(&gg, seed)?;
    if let Some(root) = cfg.cache_root() {
        cache_save(&root, rank, cfg.q, direction, seed, &comps, gg.dim())?;
    }
    Ok(comps)
}

pub fn build_instance(cfg: &RunConfig) -> Result<Instance> {
    cfg.validate()?;
    let tower = Tower::new(cfg.q, cfg.n, DEFAULT_ORDER_CAP)?;
    let dir = cfg.direction();
    let upper = decompose_cached(cfg, tower.upper.clone(), cfg.n, dir, cfg.seed)?;
    let lower = decompose_cached(
        cfg,
        tower.lower.clone(),
        cfg.n - 1,
        dir,
        cfg.seed.wrapping_add(1),
    )?;
    Instance::from_components(tower, dir, upper, lower)
}

// ---------------------------------------------------------------------
// reports

#[derive(Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub artifact_version: String,
    pub q: u8,
    pub n: usize,
    pub psi: String,
    pub seed: u64,
    pub tolerance: f64,
    pub pair_count: usize,
    pub failures: usize,
    pub records: Vec<GammaReport>,
}

#[derive(Serialize, Deserialize)]
pub struct ComponentRecord {
    pub rank: usize,
    pub id: usize,
    pub dim: usize,
    pub cuspidal: bool,
    pub central_character: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
pub struct TableReport {
    pub schema_version: u32,
    pub artifact_version: String,
    pub q: u8,
    pub n: usize,
    pub psi: String,
    pub seed: u64,
    pub components: Vec<ComponentRecord>,
    pub records: Vec<GammaReport>,
}

fn component_records(comps: &[IrrepComponent], rank: usize) -> Vec<ComponentRecord> {
    comps
        .iter()
        .map(|c| ComponentRecord {
            rank,
            id: c.id,
            dim: c.dim,
            cuspidal: c.cuspidal,
            central_character: c.central_character.iter().map(|z| [z.re, z.im]).collect(),
        })
        .collect()
}

pub struct RunOutcome {
    /// Serialized report (pretty JSON, trailing newline).
    pub report: String,
    /// Number of (π, τ) pairs exceeding the tolerance.
    pub failures: usize,
}

pub fn run_verify(cfg: &RunConfig) -> Result<RunOutcome> {
    let inst = build_instance(cfg)?;
    let records = verify_instance(&inst, cfg.tolerance)?;
    let failures = records
        .iter()
        .filter(|r| r.abs_diff >= cfg.tolerance)
        .count();
    let report = VerifyReport {
        schema_version: SCHEMA_VERSION,
        artifact_version: ARTIFACT_VERSION.to_string(),
        q: cfg.q,
        n: cfg.n,
        psi: inst.psi_descriptor(),
        seed: cfg.seed,
        tolerance: cfg.tolerance,
        pair_count: records.len(),
        failures,
        records,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("serializable report");
    text.push('\n');
    write_out(cfg, &text)?;
    Ok(RunOutcome {
        report: text,
        failures,
    })
}

pub fn run_table(cfg: &RunConfig) -> Result<RunOutcome> {
    let inst = build_instance(cfg)?;
    let records = verify_instance(&inst, cfg.tolerance)?;
    let failures = records
        .iter()
        .filter(|r| r.abs_diff >= cfg.tolerance)
        .count();
    let mut components = component_records(&inst.components_upper, cfg.n);
    components.extend(component_records(&inst.components_lower, cfg.n - 1));
    let report = TableReport {
        schema_version: SCHEMA_VERSION,
        artifact_version: ARTIFACT_VERSION.to_string(),
        q: cfg.q,
        n: cfg.n,
        psi: inst.psi_descriptor(),
        seed: cfg.seed,
        components,
        records,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("serializable report");
    text.push('\n');
    write_out(cfg, &text)?;
    Ok(RunOutcome {
        report: text,
        failures,
    })
}

/// The `decompose` subcommand: component inventory of one rank (no
/// gamma computation), populating the cache as a side effect.
pub fn run_decompose(cfg: &RunConfig) -> Result<RunOutcome> {
    if !is_supported_prime(u64::from(cfg.q)) {
        return Err(Error::UnsupportedField(u64::from(cfg.q)));
    }
    // rank 1 is allowed here, unlike verify
    let order = group_order(cfg.n, cfg.q);
    if order > DEFAULT_ORDER_CAP {
        return Err(Error::BudgetExceeded {
            order,
            cap: DEFAULT_ORDER_CAP,
        });
    }
    let data = Arc::new(GroupData::new(cfg.n, cfg.q, DEFAULT_ORDER_CAP)?);
    let dir = cfg.direction();
    let gg = GGSpace::build(data.clone(), dir)?;
    if gg.dim() > SLOW_DIM_THRESHOLD && !cfg.allow_slow {
        return Err(Error::BudgetExceeded {
            order,
            cap: DEFAULT_ORDER_CAP,
        });
    }
    let comps = decompose_cached(cfg, data, cfg.n, dir, cfg.seed)?;
    #[derive(Serialize)]
    struct DecomposeReport {
        schema_version: u32,
        artifact_version: String,
        q: u8,
        n: usize,
        psi: String,
        seed: u64,
        space_dim: usize,
        components: Vec<ComponentRecord>,
    }
    let report = DecomposeReport {
        schema_version: SCHEMA_VERSION,
        artifact_version: ARTIFACT_VERSION.to_string(),
        q: cfg.q,
        n: cfg.n,
        psi: if dir == 1 {
            "exp(2*pi*i*x/q)".into()
        } else {
            "exp(-2*pi*i*x/q)".into()
        },
        seed: cfg.seed,
        space_dim: gg.dim(),
        components: component_records(&comps, cfg.n),
    };
    let mut text = serde_json::to_string_pretty(&report).expect("serializable report");
    text.push('\n');
    write_out(cfg, &text)?;
    Ok(RunOutcome {
        report: text,
        failures: 0,
    })
}

fn write_out(cfg: &RunConfig, text: &str) -> Result<()> {
    if let Some(path) = &cfg.out {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent).map_err(|e| io_err("creating output dir", parent, e))?;
            }
        }
        fs::write(path, text).map_err(|e| io_err("writing report", path, e))?;
    }
    Ok(())
}
