//! C ABI for the neurolsys simulator.
//!
//! Objects cross the boundary as opaque handles created by `nls_*_new`
//! style constructors and released with the matching `nls_*_free`.
//! Every fallible call returns an [`NlsStatus`]; on failure a message is
//! available from [`nls_last_error_message`] on the same thread.
//! Strings returned by the library must be released with
//! [`nls_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use neurolsys::animat::DeathCause;
use neurolsys::evolution::{evaluate_member, evolve, GenerationStats, Population};
use neurolsys::genome::lsys::{genotype_gene_count, ls_proof_stats, LsysGenotype};
use neurolsys::genome::matrix::MatrixGenotype;
use neurolsys::genome::{Encoding, Genotype};
use neurolsys::harness::RunConfig;
use neurolsys::rng::{stream, Purpose};
use neurolsys::world::{World, WorldType};
use neurolsys::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ParseError = 3,
    ConfigError = 4,
    RuntimeError = 5,
    IoError = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlsWorldType {
    Open = 0,
    RoundedBarrier1 = 1,
    Maze = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlsEncoding {
    Matrix = 0,
    Lsys = 1,
    MatrixLsg = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlsDeathCause {
    LifeSpan = 0,
    Starved = 1,
    WorldEmpty = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NlsProofStats {
    pub i: u32,
    pub symbols: u64,
    pub terminals: u64,
    pub neurons: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlsLifeResult {
    pub fitness: u32,
    pub clicks_lived: u32,
    pub death_cause: NlsDeathCause,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NlsGenerationStats {
    pub generation: u64,
    pub max_food: u32,
    pub mean_food: f64,
    pub best_ever: u32,
    pub starved: u32,
    pub mean_clicks: f64,
}

/// A world template: terrain only, food is scattered per life.
pub struct NlsWorld(World);

pub struct NlsGenotype(Genotype);

/// The result of an evolutionary run: per-generation stats and the last
/// evaluated population.
pub struct NlsRun {
    stats: Vec<GenerationStats>,
    population: Population,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn status_of(error: &Error) -> NlsStatus {
    match error {
        Error::Parse { .. } => NlsStatus::ParseError,
        Error::Config(_) => NlsStatus::ConfigError,
        Error::Io(_) => NlsStatus::IoError,
        Error::InvalidNeuronCount(_)
        | Error::InvalidParam(_)
        | Error::WorldTooSmall { .. }
        | Error::SizeMismatch(..) => NlsStatus::InvalidArgument,
        _ => NlsStatus::RuntimeError,
    }
}

struct Failure(NlsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(NlsStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NlsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            NlsStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            NlsStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(NlsStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn to_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(NlsStatus::RuntimeError, "text contains NUL".into()))
}

fn world_type(t: NlsWorldType) -> WorldType {
    match t {
        NlsWorldType::Open => WorldType::Open,
        NlsWorldType::RoundedBarrier1 => WorldType::RoundedBarrier1,
        NlsWorldType::Maze => WorldType::Maze,
    }
}

fn encoding(e: NlsEncoding) -> Encoding {
    match e {
        NlsEncoding::Matrix => Encoding::Matrix,
        NlsEncoding::Lsys => Encoding::Lsys,
        NlsEncoding::MatrixLsg => Encoding::MatrixLsg,
    }
}

fn stats_to_c(s: &GenerationStats) -> NlsGenerationStats {
    NlsGenerationStats {
        generation: s.generation,
        max_food: s.max_food,
        mean_food: s.mean_food,
        best_ever: s.best_ever,
        starved: s.starved,
        mean_clicks: s.mean_clicks,
    }
}

unsafe fn config_from(text: *const c_char) -> Result<RunConfig, Failure> {
    if text.is_null() {
        return Ok(RunConfig::default());
    }
    Ok(RunConfig::parse(read_str(text, "config")?)?)
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn nls_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by the library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn nls_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nls_world_generate(
    kind: NlsWorldType,
    width: usize,
    height: usize,
    layout_seed: u64,
    out: *mut *mut NlsWorld,
) -> NlsStatus {
    guard(|| {
        let world = World::generate(world_type(kind), width, height, layout_seed)?;
        write_out(out, Box::into_raw(Box::new(NlsWorld(world))), "out")
    })
}

/// Parses a world file.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nls_world_parse(text: *const c_char, out: *mut *mut NlsWorld) -> NlsStatus {
    guard(|| {
        let world = World::parse(read_str(text, "text")?)?;
        write_out(out, Box::into_raw(Box::new(NlsWorld(world))), "out")
    })
}

/// # Safety
/// `world` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nls_world_to_text(world: *const NlsWorld, out: *mut *mut c_char) -> NlsStatus {
    guard(|| {
        let world = world.as_ref().ok_or_else(|| null("world"))?;
        write_out(out, to_c_string(world.0.to_text())?, "out")
    })
}

/// # Safety
/// `world` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nls_world_open_count(world: *const NlsWorld, out: *mut usize) -> NlsStatus {
    guard(|| {
        let world = world.as_ref().ok_or_else(|| null("world"))?;
        write_out(out, world.0.open_count(), "out")
    })
}

/// # Safety
/// `world` must come from this library and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn nls_world_free(world: *mut NlsWorld) {
    if !world.is_null() {
        drop(Box::from_raw(world));
    }
}

/// A random genotype with default generation parameters. MatrixLSG
/// returns the matrix form of a random Lsys genotype.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nls_genotype_random(
    kind: NlsEncoding,
    neurons: usize,
    seed: u64,
    out: *mut *mut NlsGenotype,
) -> NlsStatus {
    guard(|| {
        let params = RunConfig::default().ga.genotype;
        let mut rng = stream(seed, 0, 0, Purpose::Init);
        let genotype = match encoding(kind) {
            Encoding::Matrix => Genotype::Matrix(MatrixGenotype::random(neurons, &params, &mut rng)?),
            Encoding::Lsys => Genotype::Lsys(LsysGenotype::random(neurons, &params, &mut rng)?),
            Encoding::MatrixLsg => Genotype::Matrix(LsysGenotype::random(neurons, &params, &mut rng)?.to_matrix()),
        };
        write_out(out, Box::into_raw(Box::new(NlsGenotype(genotype))), "out")
    })
}

/// Parses either genotype format; the header line decides which.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nls_genotype_parse(text: *const c_char, out: *mut *mut NlsGenotype) -> NlsStatus {
    guard(|| {
        let text = read_str(text, "text")?;
        let genotype = if text.trim_start().starts_with("MATRIX") {
            Genotype::Matrix(MatrixGenotype::parse(text)?)
        } else {
            Genotype::Lsys(LsysGenotype::parse(text)?.1)
        };
        write_out(out, Box::into_raw(Box::new(NlsGenotype(genotype))), "out")
    })
}

/// # Safety
/// `genotype` must be a live handle, `name` NULL or a NUL-terminated
/// string, and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nls_genotype_to_text(
    genotype: *const NlsGenotype,
    name: *const c_char,
    out: *mut *mut c_char,
) -> NlsStatus {
    guard(|| {
        let genotype = genotype.as_ref().ok_or_else(|| null("genotype"))?;
        let name = if name.is_null() {
            "genotype"
        } else {
            read_str(name, "name")?
        };
        write_out(out, to_c_string(genotype.0.to_text(name))?, "out")
    })
}

/// # Safety
/// `genotype` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nls_genotype_gene_count(genotype: *const NlsGenotype, out: *mut usize) -> NlsStatus {
    guard(|| {
        let genotype = genotype.as_ref().ok_or_else(|| null("genotype"))?;
        write_out(out, genotype.0.gene_count(), "out")
    })
}

/// # Safety
/// `genotype` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nls_genotype_neurons(genotype: *const NlsGenotype, out: *mut usize) -> NlsStatus {
    guard(|| {
        let genotype = genotype.as_ref().ok_or_else(|| null("genotype"))?;
        write_out(out, genotype.0.n(), "out")
    })
}

/// # Safety
/// `genotype` must come from this library and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn nls_genotype_free(genotype: *mut NlsGenotype) {
    if !genotype.is_null() {
        drop(Box::from_raw(genotype));
    }
}

/// Lsys genotype size for `neurons` neurons.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nls_lsys_gene_count(neurons: usize, out: *mut usize) -> NlsStatus {
    guard(|| write_out(out, genotype_gene_count(neurons)?, "out"))
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nls_proof_stats(i: u32, out: *mut NlsProofStats) -> NlsStatus {
    guard(|| {
        let s = ls_proof_stats(i)?;
        let stats = NlsProofStats {
            i: s.i,
            symbols: s.symbols,
            terminals: s.terminals,
            neurons: s.neurons,
        };
        write_out(out, stats, "out")
    })
}

/// Lives one animat with the streams of member `index` in `generation`.
/// `config` is NULL for defaults or `key = value` text.
///
/// # Safety
/// Handles must be live, `config` NULL or NUL-terminated, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nls_live(
    world: *const NlsWorld,
    genotype: *const NlsGenotype,
    config: *const c_char,
    run_seed: u64,
    generation: u64,
    index: usize,
    out: *mut NlsLifeResult,
) -> NlsStatus {
    guard(|| {
        let world = world.as_ref().ok_or_else(|| null("world"))?;
        let genotype = genotype.as_ref().ok_or_else(|| null("genotype"))?;
        let config = config_from(config)?;
        let life = evaluate_member(&genotype.0, &world.0, &config.ga, run_seed, generation, index)?;
        let result = NlsLifeResult {
            fitness: life.fitness,
            clicks_lived: life.clicks_lived,
            death_cause: match life.death_cause {
                DeathCause::LifeSpan => NlsDeathCause::LifeSpan,
                DeathCause::Starved => NlsDeathCause::Starved,
                DeathCause::WorldEmpty => NlsDeathCause::WorldEmpty,
            },
        };
        write_out(out, result, "out")
    })
}

/// Evolves a fresh random population in `world`. Population size, neuron
/// count and all other parameters come from `config` (NULL for defaults).
///
/// # Safety
/// `world` must be live, `config` NULL or NUL-terminated, `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nls_run_evolution(
    world: *const NlsWorld,
    kind: NlsEncoding,
    config: *const c_char,
    generations: u64,
    seed: u64,
    out: *mut *mut NlsRun,
) -> NlsStatus {
    guard(|| {
        let world = world.as_ref().ok_or_else(|| null("world"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let config = config_from(config)?;
        let population = Population::random(encoding(kind), &config.ga, seed)?;
        let outcome = evolve(population, &world.0, generations, &config.ga, seed, |_| {})?;
        let run = NlsRun {
            stats: outcome.stats,
            population: outcome.population,
        };
        write_out(out, Box::into_raw(Box::new(run)), "out")
    })
}

/// # Safety
/// `run` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nls_run_generations(run: *const NlsRun, out: *mut usize) -> NlsStatus {
    guard(|| {
        let run = run.as_ref().ok_or_else(|| null("run"))?;
        write_out(out, run.stats.len(), "out")
    })
}

/// Stats of the generation at zero-based position `index`.
///
/// # Safety
/// `run` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nls_run_stats(run: *const NlsRun, index: usize, out: *mut NlsGenerationStats) -> NlsStatus {
    guard(|| {
        let run = run.as_ref().ok_or_else(|| null("run"))?;
        let stats = run.stats.get(index).ok_or_else(|| {
            Failure(
                NlsStatus::InvalidArgument,
                format!("generation index {index} out of range ({})", run.stats.len()),
            )
        })?;
        write_out(out, stats_to_c(stats), "out")
    })
}

/// Snapshot text of the run's final population.
///
/// # Safety
/// `run` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nls_run_population_text(run: *const NlsRun, out: *mut *mut c_char) -> NlsStatus {
    guard(|| {
        let run = run.as_ref().ok_or_else(|| null("run"))?;
        write_out(out, to_c_string(run.population.to_text())?, "out")
    })
}

/// # Safety
/// `run` must come from this library and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn nls_run_free(run: *mut NlsRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}
