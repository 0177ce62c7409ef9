//! The algebraic steady state against long-time integration of the master
//! equation written directly in operator form.

mod common;

use common::{relax, Model, Params, M3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thermal_transistor::{steady_state, assemble, BathSpec, Baths, SystemSpec, Variant};

const MATCH_TOLERANCE: f64 = 1e-6;

fn library_state(p: &Params) -> (M3, Vec<f64>) {
    let spec = SystemSpec::new(p.eps1, p.eps2, p.delta).unwrap();
    let baths = Baths::new(
        BathSpec::emitter(p.temperature[0], p.gamma[0]).unwrap(),
        BathSpec::collector(p.temperature[1], p.gamma[1]).unwrap(),
        BathSpec::base(p.temperature[2], p.gamma[2], p.gamma0).unwrap(),
    )
    .unwrap();
    let variant = if p.interference { Variant::PartialSecular } else { Variant::Secular };
    let l = assemble(&spec, &baths, variant);
    let ss = steady_state(&l).unwrap();
    let fluxes = thermal_transistor::thermo::flux_trace(&l, &ss.rho).unwrap();
    (*ss.rho.local().entries(), vec![fluxes.emitter, fluxes.collector, fluxes.base])
}

fn compare(p: &Params) {
    let model = Model::new(p);
    let relaxed = relax(&model, 1e-12, 1e5);
    assert!(relaxed.derivative < 1e-12, "not relaxed by t = {}: {:e}", relaxed.time, relaxed.derivative);
    let (rho, fluxes) = library_state(p);
    let gap = (rho - relaxed.rho).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(gap < MATCH_TOLERANCE, "{p:?}: state differs by {gap:e}");
    let scale = fluxes.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for bath in 0..3 {
        let reference = model.heat(bath, &relaxed.rho);
        assert!(
            (reference - fluxes[bath]).abs() <= 1e-5 * scale.max(1e-12),
            "{p:?}: bath {bath} current {} vs {reference}",
            fluxes[bath]
        );
    }
}

fn reference(t_b: f64, interference: bool) -> Params {
    Params {
        eps1: 10.0,
        eps2: 7.0,
        delta: 1.0,
        temperature: [1.0 / 0.003, 1.0 / 0.15, t_b],
        gamma: [1.0, 1.0, 1.0],
        gamma0: 1.0,
        interference,
    }
}

#[test]
fn reference_point_matches_time_evolution() {
    for interference in [true, false] {
        compare(&reference(1.0 / 0.015, interference));
    }
}

#[test]
fn random_points_match_time_evolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0de);
    for _ in 0..12 {
        let p = Params {
            eps1: rng.gen_range(2.0..15.0),
            eps2: rng.gen_range(2.0..15.0),
            delta: rng.gen_range(0.3..2.0),
            temperature: [rng.gen_range(3.0..400.0), rng.gen_range(3.0..400.0), rng.gen_range(3.0..400.0)],
            gamma: [rng.gen_range(0.2..2.0), rng.gen_range(0.2..2.0), rng.gen_range(0.2..2.0)],
            gamma0: rng.gen_range(0.0..2.0),
            interference: rng.gen_bool(0.75),
        };
        compare(&p);
    }
}
