//! Quick consistency checks of the kernels against dense references and
//! physical invariants.

use std::f64::consts::LN_2;

use qaoae_core::entanglement::{
    bipartition_for, contiguous_bipartition, gap_ratios, schmidt_spectrum, spectrum_blocks, von_neumann_entropy,
    BipartitionPolicy,
};
use qaoae_core::graph::{generate, maxcut_bruteforce};
use qaoae_core::optimize::sample_initial_angles;
use qaoae_core::oracle;
use qaoae_core::seed::{derive_seed, rng_from_seed};
use qaoae_core::simulator::{build_cost_diagonal, cost_expectation, run_annealing, run_qaoa};
use qaoae_core::{GraphKind, QaoaAngles};
use rand::Rng;

use crate::{CliError, CliResult};

type Check = fn() -> qaoae_core::Result<Result<String, String>>;

const KINDS: [GraphKind; 3] = [GraphKind::Linear, GraphKind::Regular3, GraphKind::Complete];

fn random_instance(seed: u64, max_n: usize, max_p: usize) -> qaoae_core::Result<(qaoae_core::Graph, QaoaAngles)> {
    let mut rng = rng_from_seed(seed);
    let kind = KINDS[rng.random_range(0..3)];
    let n = match kind {
        GraphKind::Regular3 => 4 + 2 * rng.random_range(0..=(max_n - 4) / 2),
        _ => rng.random_range(2..=max_n),
    };
    let g = generate(kind, n, rng.random())?;
    let angles = sample_initial_angles(rng.random_range(1..=max_p), rng.random())?;
    Ok((g, angles))
}

fn oracle_equivalence() -> qaoae_core::Result<Result<String, String>> {
    let mut worst = 0.0f64;
    for case in 0..100 {
        let (g, angles) = random_instance(derive_seed(1, &[case]), 4, 3)?;
        let fast = run_qaoa(&g, &angles)?;
        let dense = oracle::qaoa_state(&g, &angles);
        let dev = fast.amplitudes().iter().zip(dense.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        worst = worst.max(dev);
    }
    let detail = format!("100 cases, max deviation {worst:.2e}");
    Ok(if worst < 1e-10 { Ok(detail) } else { Err(detail) })
}

fn state_invariants() -> qaoae_core::Result<Result<String, String>> {
    for case in 0..20 {
        let (g, angles) = random_instance(derive_seed(2, &[case]), 10, 6)?;
        let n = g.n_vertices();
        let state = run_qaoa(&g, &angles)?;
        if (state.norm_sqr() - 1.0).abs() > 1e-12 {
            return Ok(Err(format!("norm drift {:.2e}", state.norm_sqr() - 1.0)));
        }
        if state.z2_asymmetry() > 1e-12 {
            return Ok(Err(format!("Z2 asymmetry {:.2e}", state.z2_asymmetry())));
        }
        if n % 2 == 1 {
            continue;
        }
        let part = bipartition_for(BipartitionPolicy::Random, n, case)?;
        let s = von_neumann_entropy(&schmidt_spectrum(&state, &part)?);
        let s_bar = von_neumann_entropy(&schmidt_spectrum(&state, &part.complement())?);
        if s < -1e-12 || s > n as f64 / 2.0 * LN_2 + 1e-12 {
            return Ok(Err(format!("entropy {s} out of bounds at N={n}")));
        }
        if (s - s_bar).abs() > 1e-10 {
            return Ok(Err(format!("A/B entropies differ: {s} vs {s_bar}")));
        }
    }
    Ok(Ok("norm, Z2 symmetry, entropy bounds, A/B symmetry on 20 circuits".into()))
}

fn light_cone() -> qaoae_core::Result<Result<String, String>> {
    for case in 0..10u64 {
        let g = generate(GraphKind::Linear, 10, case)?;
        let part = contiguous_bipartition(10)?;
        for p in 1..=3 {
            let state = run_qaoa(&g, &sample_initial_angles(p, derive_seed(case, &[p as u64]))?)?;
            let s = von_neumann_entropy(&schmidt_spectrum(&state, &part)?);
            if s > 2.0 * p as f64 * LN_2 + 1e-10 {
                return Ok(Err(format!("S={s} exceeds the light-cone bound at p={p}")));
            }
        }
    }
    Ok(Ok("S <= 2p ln2 on linear chains, p <= 3".into()))
}

fn spectra() -> qaoae_core::Result<Result<String, String>> {
    for case in 0..10u64 {
        let g = generate(GraphKind::Complete, 8, case)?;
        let state = run_qaoa(&g, &sample_initial_angles(6, case)?)?;
        let part = bipartition_for(BipartitionPolicy::Random, 8, case)?;
        let full = schmidt_spectrum(&state, &part)?;
        let union = spectrum_blocks(&state, &part)?.union();
        let dev = full.values().iter().zip(union.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if full.len() != union.len() || dev > 1e-10 {
            return Ok(Err(format!("block union deviates by {dev:.2e}")));
        }
        if let Ok(r) = gap_ratios(&full, 1e-14) {
            if r.iter().any(|r| !(0.0..=1.0).contains(r)) {
                return Ok(Err("gap ratio outside [0, 1]".into()));
            }
        }
    }
    Ok(Ok("block union equals full spectrum; ratios in [0, 1]".into()))
}

fn variational_bound() -> qaoae_core::Result<Result<String, String>> {
    for case in 0..20 {
        let (g, angles) = random_instance(derive_seed(3, &[case]), 10, 5)?;
        let (min, _) = maxcut_bruteforce(&g)?;
        let cost = cost_expectation(&run_qaoa(&g, &angles)?, &build_cost_diagonal(&g)?)?;
        if cost < min - 1e-9 {
            return Ok(Err(format!("<C>={cost} below the minimum {min}")));
        }
    }
    Ok(Ok("<C> >= brute-force minimum on 20 circuits".into()))
}

fn annealing_start() -> qaoae_core::Result<Result<String, String>> {
    let g = generate(GraphKind::Regular3, 8, 5)?;
    let part = bipartition_for(BipartitionPolicy::Random, 8, 5)?;
    let mut first = None;
    let mut err = None;
    run_annealing(&g, 2.0, 0.1, |t, state| {
        if first.is_none() {
            match schmidt_spectrum(state, &part) {
                Ok(spec) => first = Some((t, von_neumann_entropy(&spec))),
                Err(e) => err = Some(e),
            }
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    Ok(match first {
        Some((t, s)) if t == 0.0 && s.abs() < 1e-12 => Ok("S(t=0) = 0".into()),
        other => Err(format!("first observation {other:?}")),
    })
}

pub fn run() -> CliResult<()> {
    let checks: [(&str, Check); 6] = [
        ("oracle equivalence", oracle_equivalence),
        ("state invariants", state_invariants),
        ("light cone", light_cone),
        ("spectrum blocks", spectra),
        ("variational bound", variational_bound),
        ("annealing start", annealing_start),
    ];
    let mut failures = 0;
    println!("{:<20} {:<6} detail", "check", "result");
    for (name, check) in checks {
        let (status, detail) = match check() {
            Ok(Ok(d)) => ("pass", d),
            Ok(Err(d)) => ("FAIL", d),
            Err(e) => ("FAIL", e.to_string()),
        };
        if status != "pass" {
            failures += 1;
        }
        println!("{name:<20} {status:<6} {detail}");
    }
    if failures > 0 {
        return Err(CliError::Runtime(format!("{failures} self-test check(s) failed")));
    }
    Ok(())
}
