//! Lattice engine checks on small grids.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ktwb::lattice::checks::{em_check, length_check, mechanics_check, pc_check, scalar_check};
use ktwb::lattice::em::{gauss_free_state, gauss_residual, SpatialMetric};
use ktwb::lattice::pc::{random_generator, PcFields, PcSite};
use ktwb::lattice::{two_form_rank, Environment, Functional, LatticeError, LatticeGrid, LatticeModel, RANK_TOLERANCE};
use ktwb::pointlin::sample::point_checks;
use ktwb::theories;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn gradients_match_finite_differences() {
    let mut r = rng(3);
    let t = theories::builtin("em").unwrap();
    let model = LatticeModel::new(t.clone(), Environment::flat(&t)).unwrap();
    let gauss = model.constraint("A[0]").unwrap().raw.clone();
    // the Gauss density squared, so the gradient depends on the state
    let f = Functional::new("G2", &gauss * &gauss);
    let grid = LatticeGrid::new(3, 4, 0.5).unwrap();
    let mut s = model.zero_state(grid);
    s.values.iter_mut().for_each(|x| *x = r.gen_range(-1.0..1.0));
    let g = model.functional_gradient(&f, &s).unwrap();
    let eps = 1e-6;
    for _ in 0..20 {
        let k = r.gen_range(0..s.dim());
        let (mut up, mut down) = (s.clone(), s.clone());
        up.values[k] += eps;
        down.values[k] -= eps;
        let fd = (model.functional_value(&f, &up).unwrap() - model.functional_value(&f, &down).unwrap()) / (2.0 * eps);
        assert!((fd - g[k]).abs() < 1e-6 * g[k].abs().max(1.0), "slot {k}: {fd} vs {}", g[k]);
    }
}

#[test]
fn pc_rank_survives_rescaling() {
    let mut r = rng(5);
    let site = PcSite::new(-3.0).unwrap();
    for _ in 0..5 {
        let f = site.sample_on_surface(&mut r).unwrap();
        let base = site.two_form(&f).unwrap();
        let k = base.dim() - two_form_rank(&base, RANK_TOLERANCE);
        assert_eq!(k, 6);
        for scale in [1e-2, 10.0] {
            let mut g = f.clone();
            g.e.iter_mut().flatten().for_each(|x| *x *= scale);
            let m = site.two_form(&g).unwrap();
            let kg = m.dim() - two_form_rank(&m, RANK_TOLERANCE * scale * scale);
            assert_eq!(kg, 6, "scale {scale}");
        }
    }
}

#[test]
fn off_surface_states_are_refused() {
    let mut r = rng(7);
    let site = PcSite::new(-3.0).unwrap();
    let off = PcFields::de_sitter(2.0);
    let (c, c2) = (random_generator(&mut r, 1.0), random_generator(&mut r, 1.0));
    let mu = [1.0, 0.3, -0.2, 0.5];
    let err = site.coisotropy(&off, &c, &c2, &mu, 1e-6, 1e-6).unwrap_err();
    assert!(matches!(err, LatticeError::OffSurface { violation } if violation > 1.0));
    // with the guard lifted the threshold grows with the violation
    let rep = site.coisotropy(&off, &c, &c2, &mu, 1e-6, f64::INFINITY).unwrap();
    assert!(rep.threshold > 1e2);
}

#[test]
fn small_grid_em() {
    let e = em_check(&mut rng(11), 4, 5, 50).unwrap();
    assert!(e.gauge_a_error < 1e-10, "{e:?}");
    assert!(e.gauge_f0 < 1e-10);
    assert!(e.max_bracket < 1e-10);
    assert!(e.gauge_null_pairing < 1e-10);
    assert!(e.gauss_drift < 1e-12);
}

#[test]
fn gauss_free_states_satisfy_gauss() {
    let t = theories::builtin("em").unwrap();
    let model = LatticeModel::new(t.clone(), Environment::flat(&t)).unwrap();
    let grid = LatticeGrid::new(3, 5, 0.3).unwrap();
    let g = SpatialMetric::flat();
    let s = gauss_free_state(grid, model.layout.clone(), &g, &mut rng(13));
    assert!(gauss_residual(&s, &g).unwrap() < 1e-12);
}

#[test]
fn small_grid_scalar() {
    let s = scalar_check(&mut rng(17), 8, 2).unwrap();
    assert_eq!(s.rank, 16);
    assert_eq!(s.rank_deficit, 0);
    assert!(s.differences.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn pointwise_mechanics_and_length() {
    let m = mechanics_check(&mut rng(19), 5).unwrap();
    assert!(m.max_error < 1e-12);
    let l = length_check(&mut rng(23), 5).unwrap();
    assert_eq!((l.min_rank, l.max_rank), (4, 4));
    assert!(l.min_gap > 1e6);
    assert!(l.min_cosine > 1.0 - 1e-10);
}

#[test]
fn few_pc_states() {
    let p = pc_check(&mut rng(29), 3, 2, 1e-6).unwrap();
    assert_eq!((p.min_kernel_dim, p.max_kernel_dim), (6, 6));
    assert!(p.coisotropic);
    assert!(p.max_e_error < 1e-8);
    assert!(point_checks(&mut rng(31), 5).all_passed());
}

#[test]
fn gauge_fields_solve_at_many_boosted_states() {
    // the degenerate spectrum of the single-site form used to trip the solver
    let mut r = rng(37);
    let site = PcSite::new(-3.0).unwrap();
    for _ in 0..200 {
        let f = site.sample_on_surface(&mut r).unwrap();
        let g = site.gauge_field_check(&f, &random_generator(&mut r, 1.0)).unwrap();
        assert!(g.residual < 1e-10 && g.e_error < 1e-10, "{g:?}");
    }
}
