//! Known-answer self-test. Every vector is embedded, so no external files
//! are needed.

use std::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::feistel::{FeistelBox, SkipState, WordWidth};
use crate::known::{self, FEISTEL_TRACE, RG_KATS};
use crate::modmath::{generator_sqrt_rule, is_quadratic_residue, SafePrime};
use crate::prime_table::IndexSet;
use crate::prng::{Mode, Prng};
use crate::rg::{reduction_bound, reduction_traced, rg_generate, RgParams};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "ok  " } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &'static str, result: Result<String, String>) -> Check {
    match result {
        Ok(detail) => Check {
            name,
            passed: true,
            detail,
        },
        Err(detail) => Check {
            name,
            passed: false,
            detail,
        },
    }
}

fn expect_eq<T: PartialEq + fmt::Debug>(what: &str, got: T, want: T) -> Result<String, String> {
    if got == want {
        Ok(format!("{what} = {got:?}"))
    } else {
        Err(format!("{what}: got {got:?}, expected {want:?}"))
    }
}

fn feistel_trace(e2: u64) -> Result<String, String> {
    let t = FEISTEL_TRACE;
    let width = WordWidth::new(t.k).map_err(|e| e.to_string())?;
    let fb = FeistelBox::new(width, t.rounds, e2).map_err(|e| e.to_string())?;
    let p = SafePrime::from_u64(t.skip_prime).map_err(|e| e.to_string())?;
    let mut skip = SkipState::new(&BigUint::from(t.skip_start), &p, &BigUint::from(t.skip_generator))
        .map_err(|e| e.to_string())?;
    let out = fb.apply(t.input, t.modulus, &mut skip).map_err(|e| e.to_string())?;
    expect_eq("f(179) and w2", (out, skip.value() as u64), (t.output, t.skip_end))
}

fn core_kat(e1: u64, e2: u64) -> Result<String, String> {
    let params = known::toy_params_with(e1, e2).map_err(|e| e.to_string())?;
    let table = known::toy_table();
    let idx = IndexSet::new(known::KAT_INDEXES.to_vec(), &table).map_err(|e| e.to_string())?;
    let mut g = Prng::new(&params, &table, known::KAT_SEED, idx).map_err(|e| e.to_string())?;
    let words = g.generate(known::KAT_WORDS.len()).map_err(|e| e.to_string())?;
    expect_eq("first words", words.words(), &known::KAT_WORDS[..])?;
    expect_eq(
        "refreshed indexes",
        g.state().indexes().as_slice(),
        &known::KAT_REFRESHED_INDEXES[..],
    )
}

fn rg_kats() -> Result<String, String> {
    for kat in RG_KATS {
        let p = SafePrime::from_u64(kat.p).map_err(|e| e.to_string())?;
        let params = RgParams::new(p, BigUint::from(kat.g), kat.l, Mode::Test).map_err(|e| e.to_string())?;
        let out = rg_generate(BigUint::from(kat.seed), &params, kat.outputs.len()).map_err(|e| e.to_string())?;
        let values: Vec<u64> = out.iter().map(|h| h.value.to_u64().unwrap_or(u64::MAX)).collect();
        expect_eq("rg outputs", values.as_slice(), kat.outputs)?;
    }
    Ok(format!("{} vectors", RG_KATS.len()))
}

fn reduction_identities() -> Result<String, String> {
    let mut checked = 0;
    for (p, l) in [(23u64, 1u32), (1019, 2), (1019, 3), (2039, 3)] {
        let p = SafePrime::from_u64(p).map_err(|e| e.to_string())?;
        let g = generator_sqrt_rule(&p).map_err(|e| e.to_string())?;
        let params = RgParams::new(p.clone(), g, l, Mode::Test).map_err(|e| e.to_string())?;
        let bound = reduction_bound(&params).to_u64().unwrap_or(u64::MAX);
        for x in (0..bound).step_by((bound as usize / 16).max(1)) {
            let tr = reduction_traced(&BigUint::from(x), &params).map_err(|e| e.to_string())?;
            let power = tr.result().modpow(&BigUint::from(1u64 << l), p.value());
            if power != tr.x1 {
                return Err(format!("p = {p}, l = {l}, x = {x}: root^(2^l) = {power}, x1 = {}", tr.x1));
            }
            for root in &tr.roots[..tr.roots.len().saturating_sub(1)] {
                if !is_quadratic_residue(root, p.value()).map_err(|e| e.to_string())? {
                    return Err(format!("p = {p}, l = {l}, x = {x}: intermediate {root} is not a square"));
                }
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} inputs"))
}

/// Runs every known-answer check with the given exponents; the vectors were
/// recorded with `e1 = 17`, `e2 = 9`.
pub fn run(e1: u64, e2: u64) -> SelftestReport {
    SelftestReport {
        checks: vec![
            check("feistel trace", feistel_trace(e2)),
            check("core KAT", core_kat(e1, e2)),
            check("rg KAT", rg_kats()),
            check("reduction", reduction_identities()),
        ],
    }
}
