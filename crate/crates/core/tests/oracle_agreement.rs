//! Randomized agreement suite: the spectral verdict against the
//! finite-difference PBH referee on 1-D configurations, plus the pinned
//! configurations where the two criteria have something real to disagree
//! about. Disagreements are only tolerated when the guard-band diagnostic
//! already declared the oracle inconclusive.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use outstab_core::oracle::{discretize, guard_band, pbh_output_stab_check, PbhTolerances};
use outstab_core::{
    analyze_modes, enumerate_clusters, stabilizability_verdict, Device, Domain, KReading,
    ModeMatrices, Profile, QuadratureSettings, Role, Zone,
};

const RTOL: f64 = 1e-10;
const ZTOL: f64 = 1e-9;

fn spectral_verdict(domain: &Domain, k: f64, actuators: &[Device], sensors: &[Device]) -> bool {
    let quad = QuadratureSettings::default();
    let clusters = enumerate_clusters(domain, k, 1, 1e-9, ZTOL).unwrap();
    let mms: Vec<ModeMatrices> = clusters
        .iter()
        .map(|c| ModeMatrices::assemble(c, actuators, sensors, domain, &quad).unwrap())
        .collect();
    let analyses = analyze_modes(&clusters, &mms, RTOL).unwrap();
    stabilizability_verdict(&clusters, &analyses, ZTOL, KReading::Refined, actuators.len())
        .unwrap()
        .verdict_refined
}

struct OracleRun {
    stabilizable: bool,
    conclusive: bool,
}

fn oracle_verdict(
    domain: &Domain,
    k: f64,
    actuators: &[Device],
    sensors: &[Device],
    resolution: &[usize],
) -> OracleRun {
    let sys = discretize(domain, k, actuators, sensors, resolution).unwrap();
    let eig = sys.eigendecompose().unwrap();
    let outcome = pbh_output_stab_check(&sys, &eig, &PbhTolerances::default());
    let band = guard_band(&sys, &eig, ZTOL);
    OracleRun {
        stabilizable: outcome.stabilizable,
        conclusive: band.conclusive,
    }
}

fn constant(role: Role, c: f64, d: f64, label: String) -> Device {
    Device::new(
        role,
        Zone::interval(c, d).unwrap(),
        Profile::Constant { value: 1.0 },
        label,
    )
}

#[test]
fn randomized_interval_configurations_agree() {
    let domain = Domain::interval(1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut conclusive = 0;
    let mut inconclusive = 0;
    for trial in 0..15 {
        let k = rng.gen_range(0.0..60.0);
        let n_act = rng.gen_range(1..=3);
        let slot = 1.0 / n_act as f64;
        let actuators: Vec<Device> = (0..n_act)
            .map(|i| {
                let lo = i as f64 * slot;
                let c = lo + rng.gen_range(0.02..0.45) * slot;
                let d = c + rng.gen_range(0.1..0.5) * slot;
                constant(Role::Actuator, c, d, format!("act{i}"))
            })
            .collect();
        let sensors: Vec<Device> = (0..rng.gen_range(1..=2))
            .map(|i| {
                let c: f64 = rng.gen_range(0.0..0.7);
                let d = c + rng.gen_range(0.1..f64::min(1.0 - c, 0.9));
                constant(Role::Sensor, c, d, format!("sen{i}"))
            })
            .collect();
        let spectral = spectral_verdict(&domain, k, &actuators, &sensors);
        let oracle = oracle_verdict(&domain, k, &actuators, &sensors, &[511]);
        if oracle.conclusive {
            conclusive += 1;
            assert_eq!(
                spectral, oracle.stabilizable,
                "trial {trial}: spectral {spectral} vs oracle {} at k = {k}",
                oracle.stabilizable
            );
        } else {
            inconclusive += 1;
        }
    }
    assert!(
        conclusive >= 10,
        "too few conclusive trials ({conclusive} conclusive, {inconclusive} inconclusive)"
    );
}

#[test]
fn sine_actuator_counterexample_agrees_on_not_stabilizable() {
    let domain = Domain::interval(1.0).unwrap();
    let actuators = [Device::new(
        Role::Actuator,
        Zone::interval(0.0, 1.0).unwrap(),
        Profile::SineProduct {
            modes: vec![2],
            amplitude: 1.0,
        },
        "sin2".to_string(),
    )];
    let sensors = [constant(Role::Sensor, 0.0, 1.0, "sen".into())];
    let spectral = spectral_verdict(&domain, 50.0, &actuators, &sensors);
    let oracle = oracle_verdict(&domain, 50.0, &actuators, &sensors, &[511]);
    assert!(oracle.conclusive);
    assert!(!spectral);
    assert!(!oracle.stabilizable);
}

#[test]
fn mode_two_invisible_but_controllable_agrees_on_stabilizable() {
    // Constant actuator on (0, 0.5), full-domain sensor, k = 50: the even
    // mode is invisible to the sensor yet controllable; both criteria accept.
    let domain = Domain::interval(1.0).unwrap();
    let actuators = [constant(Role::Actuator, 0.0, 0.5, "act".into())];
    let sensors = [constant(Role::Sensor, 0.0, 1.0, "sen".into())];
    let spectral = spectral_verdict(&domain, 50.0, &actuators, &sensors);
    let oracle = oracle_verdict(&domain, 50.0, &actuators, &sensors, &[511]);
    assert!(oracle.conclusive);
    assert!(spectral);
    assert!(oracle.stabilizable);
}

#[test]
fn coarse_resolution_near_the_boundary_is_flagged_inconclusive() {
    // k just above π² leaves μ₁ ≈ 0.05; at 16 interior points the guard band
    // around the boundary swallows it, at 511 it does not.
    let domain = Domain::interval(1.0).unwrap();
    let k = std::f64::consts::PI.powi(2) + 0.05;
    let actuators = [constant(Role::Actuator, 0.1, 0.6, "act".into())];
    let sensors = [constant(Role::Sensor, 0.0, 1.0, "sen".into())];
    let coarse = oracle_verdict(&domain, k, &actuators, &sensors, &[16]);
    assert!(!coarse.conclusive);
    let fine = oracle_verdict(&domain, k, &actuators, &sensors, &[511]);
    assert!(fine.conclusive);
}
