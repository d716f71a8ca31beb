//! Seed derivation.
//!
//! A single `u64` master seed fans out into per-purpose sub-seeds by hashing
//! a path of counters with SplitMix64. LFSR seeds are then chosen as
//! distinct, well-separated positions on the register orbit, so no two
//! generators in one set replay the same sequence at a small lag.

use crate::error::{Error, Result};
use crate::lfsr::{AnySource, IidSource, Lfsr, SourceKind};

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash `master` together with a path of counters into a sub-seed.
pub fn derive(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Allocate `count` LFSRs of `width` bits at distinct orbit phases.
///
/// Phases are drawn pseudo-randomly from `seed`; a candidate is rejected if
/// it lies within `min_sep` steps (circularly) of an already chosen phase.
/// `min_sep` is `width` when the orbit has room for it and shrinks towards 1
/// otherwise. More generators than nonzero states is an error.
pub fn allocate_lfsrs(width: u32, count: usize, seed: u64) -> Result<Vec<Lfsr>> {
    let period = (1u64 << width) - 1;
    if count as u64 > period {
        return Err(Error::Config(format!(
            "{count} generators exceed the {period} distinct states of a {width}-bit LFSR"
        )));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let room = period / (2 * count as u64);
    let min_sep = room.clamp(1, width as u64);

    // orbit[p] = state at phase p
    let mut orbit = Vec::with_capacity(period as usize);
    let mut lfsr = Lfsr::new(width, 1)?;
    for _ in 0..period {
        orbit.push(lfsr.next_value());
    }

    let mut taken = vec![false; period as usize];
    let mut chosen = Vec::with_capacity(count);
    let mut counter = 0u64;
    let mut sep = min_sep;
    while chosen.len() < count {
        let mut found = None;
        // bounded random probing, then relax separation
        for _ in 0..256 {
            let phase = derive(seed, &[counter]) % period;
            counter += 1;
            let clear = (0..sep).all(|d| {
                !taken[((phase + d) % period) as usize]
                    && !taken[((phase + period - d) % period) as usize]
            });
            if clear {
                found = Some(phase);
                break;
            }
        }
        match found {
            Some(phase) => {
                taken[phase as usize] = true;
                chosen.push(Lfsr::new(width, orbit[phase as usize])?);
            }
            None if sep > 1 => sep -= 1,
            None => {
                // deterministic fallback: first free phase
                let phase = taken.iter().position(|t| !t).expect("count <= period");
                taken[phase] = true;
                chosen.push(Lfsr::new(width, orbit[phase])?);
            }
        }
    }
    Ok(chosen)
}

/// `count` sources of the requested kind, seeded from `seed`.
pub fn sources(kind: SourceKind, width: u32, count: usize, seed: u64) -> Result<Vec<AnySource>> {
    match kind {
        SourceKind::Lfsr => Ok(allocate_lfsrs(width, count, seed)?
            .into_iter()
            .map(AnySource::Lfsr)
            .collect()),
        SourceKind::Iid => Ok((0..count as u64)
            .map(|k| AnySource::Iid(IidSource::new(width, derive(seed, &[k]))))
            .collect()),
    }
}
