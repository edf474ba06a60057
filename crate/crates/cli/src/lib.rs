//! Orchestration for the `mixzone` binary: configuration, simulation
//! artifacts and the verification suites.

pub mod config;
pub mod output;
pub mod simulate;
pub mod verify;

/// Exit status for a scientific-condition failure.
pub const EXIT_FAILURE: i32 = 1;
/// Exit status for bad configuration or arguments.
pub const EXIT_USAGE: i32 = 2;

/// Cap the rayon pool from `MIX_THREADS`; unset or empty leaves the default.
pub fn init_threads_from_env() -> Result<Option<usize>, String> {
    let raw = match std::env::var("MIX_THREADS") {
        Ok(v) if !v.trim().is_empty() => v,
        _ => return Ok(None),
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("MIX_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())?;
    Ok(Some(n))
}
