mod common;

use common::oracle::{helium_like, OracleXc};
use eks_core::radial::GridSpec;
use eks_core::scf::{run_scf, ScfConfig};
use eks_core::xc::Functional;

const ORACLE_R_MAX: f64 = 20.0;
const ORACLE_STEP: f64 = 0.002;

fn library_energy(id: &str) -> f64 {
    let grid = GridSpec::default().build().unwrap();
    let config = ScfConfig { functional: Functional::from_id(id).unwrap(), ..ScfConfig::default() };
    let res = run_scf(&grid, &config).unwrap();
    assert!(res.converged, "{id}");
    res.energies.total
}

#[test]
fn oracle_is_converged_in_its_own_step() {
    let fine = helium_like(2.0, OracleXc::DiracPz81, ORACLE_R_MAX, ORACLE_STEP);
    let coarse = helium_like(2.0, OracleXc::DiracPz81, ORACLE_R_MAX, 2.0 * ORACLE_STEP);
    println!("oracle: {fine:?} / {coarse:?}");
    assert!((fine.energy - coarse.energy).abs() < 1e-4);
    assert!(fine.eigenvalue < 0.0);
}

#[test]
fn oracle_beats_the_scaled_hydrogenic_bound() {
    // Without xc, the best scaled 1s orbital has exponent z - 5/8 and energy
    // -(z - 5/8)^2; the self-consistent orbital can only do better. Dropping
    // the repulsion entirely gives -z^2, below any state.
    for z in [2.0, 20.0] {
        let r = helium_like(z, OracleXc::None, 20.0, 0.0005);
        let bound = -(z - 0.625f64).powi(2);
        assert!(r.energy < bound && r.energy > -z * z, "{z}: {r:?}");
    }
}

#[test]
fn helium_matches_the_oracle() {
    for (id, xc) in [("none", OracleXc::None), ("lda-x", OracleXc::Dirac), ("lda-x+pz81", OracleXc::DiracPz81)] {
        let oracle = helium_like(2.0, xc, ORACLE_R_MAX, ORACLE_STEP).energy;
        let got = library_energy(id);
        println!("{id}: library {got:.9}, oracle {oracle:.9}");
        assert!((got - oracle).abs() < 1e-3, "{id}: {got} vs {oracle}");
    }
}
