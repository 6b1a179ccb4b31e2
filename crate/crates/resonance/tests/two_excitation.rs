use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use resonance::two_excitation::{
    eval_d1, find_a0_zero, loop_a0_term, near_z12_term, trace_z02, trace_z12, BranchTag2, TwoExcitationContext,
};
use resonance::{eval_f, zeta_eigenvalue, Sheet, TwoLevelModel};

type C = Complex64;

fn g(w: C) -> C {
    (2.0 / PI).sqrt() * w / (1.0 + w * w)
}

/// Residue picked up when a path of q crosses the pole q = z − c of 1/f(z − q),
/// with the derivative of the sheet taken by central differences.
fn residue_oracle(ctx: &TwoExcitationContext, z: C, c: C, sheet: Sheet) -> C {
    let m = &ctx.model;
    let h = 1e-6 * (1.0 + c.norm());
    let d = (eval_f(m, c + h, sheet).unwrap() - eval_f(m, c - h, sheet).unwrap()) / (2.0 * h);
    let q = z - c;
    let g2 = g(q / m.mu) * g(q / m.mu);
    C::new(0.0, 4.0 * PI * m.lambda * m.lambda / m.mu) * g2 / ((z - 2.0 * q) * d)
}

fn close(z: C, r: C, rel: f64, abs: f64) -> bool {
    let ok = |a: f64, b: f64| (a - b).abs() <= (rel * b.abs()).max(abs);
    ok(z.re, r.re) && ok(z.im, r.im)
}

#[test]
fn table2_z02_column() {
    let grid = [0.0, 1e-4, 1e-3, 3e-3, 6e-3, 6.2e-3, 6.36e-3, 6.3662e-3];
    let reference = [-196.0, -185.5, -135.7, -69.8, -9.3, -6.6, -4.4, -4.328];
    let t = trace_z02(0.1, &grid).unwrap();
    assert_eq!(t.samples.len(), grid.len());
    for (s, r) in t.samples.iter().zip(reference) {
        let r = r * 1e-4;
        assert_eq!(s.z.im, 0.0);
        assert!((s.z.re - r).abs() <= 0.02 * r.abs(), "mu {}: {} vs {r}", s.mu, s.z.re);
    }
}

#[test]
fn unit_scale_two_excitation_resonances() {
    let z02 = trace_z02(0.1, &[1e-4, 3e-3, 7e-3, 0.1, 0.5, 1.0]).unwrap();
    let bridge = z02.samples.iter().find(|s| s.bridge).unwrap();
    assert_eq!(bridge.mu, 7e-3);
    assert!(bridge.z.re > 0.0 && bridge.z.im < 0.0 && bridge.z.norm() < 1e-3);
    assert!(close(z02.last().unwrap().z, C::new(0.216, -1.9), 0.02, 0.02));

    let z12 = trace_z12(0.1, &[0.0, 3e-4, 1e-2, 0.1, 0.5, 1.0]).unwrap();
    assert!((z12.samples[0].z.re - 1.01962).abs() < 1e-5);
    let last = z12.last().unwrap().z;
    assert!(close(last, C::new(1.043, -1.127), 0.02, 0.02), "{last}");
    let z11 = TwoExcitationContext::at(0.1, 1.0).unwrap().z11;
    assert!(last.im.abs() > 50.0 * z11.im.abs());

    for s in z02.samples.iter().chain(&z12.samples) {
        assert!(s.residual <= 1e-9, "mu {} residual {:e}", s.mu, s.residual);
    }
}

#[test]
fn real_zero_approaches_germ_as_scale_vanishes() {
    let grid = [1e-5, 3e-5, 1e-4, 3e-4, 1e-3];
    let t = trace_z02(0.1, &grid).unwrap();
    let germ = zeta_eigenvalue(0, 2, 0.1);
    let d: Vec<f64> = t.samples.iter().map(|s| (s.z - germ).norm()).collect();
    assert!(d.windows(2).all(|w| w[0] < w[1]), "{d:?}");
    assert!(d[0] < 5e-3);
    assert!(t.samples.iter().all(|s| s.residual <= 1e-9));
}

#[test]
fn rational_limit_at_zero_scale() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let lambda = rng.random_range(0.01..0.3);
        let ctx = TwoExcitationContext::new(TwoLevelModel::new(lambda, 0.0).unwrap(), C::default(), C::new(1.0, 0.0))
            .unwrap();
        let z = C::new(rng.random_range(-1.0..2.0), rng.random_range(0.1..1.0));
        let l2 = lambda * lambda;
        let exact = (z * (z - 1.0) - 2.0 * l2) / (z * (z - 1.0) - l2);
        let d = eval_d1(&ctx, z, BranchTag2::PrincipalReal).unwrap();
        assert!((d - exact).norm() <= 1e-12 * (1.0 + exact.norm()), "{z}");
    }
}

#[test]
fn loop_a0_difference_is_the_q0_residue() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for mu in [1e-4, 1e-3, 3e-3] {
        let ctx = TwoExcitationContext::at(0.1, mu).unwrap();
        for _ in 0..20 {
            let z = C::new(rng.random_range(-0.05..-1e-3), rng.random_range(-0.02..0.02));
            let a0 = eval_d1(&ctx, z, BranchTag2::LoopA0).unwrap();
            let p = eval_d1(&ctx, z, BranchTag2::PrincipalReal).unwrap();
            let term = loop_a0_term(&ctx, z).unwrap();
            assert!((a0 - p - term).norm() <= 1e-10 * (1.0 + term.norm()));
            let oracle = residue_oracle(&ctx, z, ctx.z01, ctx.z01_sheet);
            assert!((term - oracle).norm() <= 1e-7 * (1.0 + oracle.norm()), "{z}: {term} vs {oracle}");
        }
    }
}

#[test]
fn near_z12_difference_is_the_q1_residue() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for mu in [0.1, 1.0] {
        let ctx = TwoExcitationContext::at(0.1, mu).unwrap();
        for _ in 0..20 {
            let z = C::new(rng.random_range(0.05..2.0), rng.random_range(-2.0..-0.05));
            let near = eval_d1(&ctx, z, BranchTag2::LowerRightNearZ12).unwrap();
            let lower = eval_d1(&ctx, z, BranchTag2::LowerRight).unwrap();
            let term = near_z12_term(&ctx, z).unwrap();
            assert!((near - lower - term).norm() <= 1e-10 * (1.0 + term.norm()));
            let oracle = residue_oracle(&ctx, z, ctx.z11, Sheet::ContinuedPlus);
            assert!((term - oracle).norm() <= 1e-7 * (1.0 + oracle.norm()), "{z}: {term} vs {oracle}");
        }
    }
}

/// Across z₀,₁ + ℝ⁺ left of the origin, the defining integral jumps by the q₀ residue.
#[test]
fn principal_jump_across_shifted_cut() {
    for mu in [1e-4, 1e-3, 3e-3] {
        let ctx = TwoExcitationContext::at(0.1, mu).unwrap();
        for t in [0.2, 0.5, 0.8] {
            let x = ctx.z01.re * (1.0 - t);
            let above = eval_d1(&ctx, C::new(x, 1e-8), BranchTag2::PrincipalReal).unwrap();
            let below = eval_d1(&ctx, C::new(x, -1e-8), BranchTag2::PrincipalReal).unwrap();
            let term = loop_a0_term(&ctx, C::new(x, 0.0)).unwrap();
            assert!((above - below - term).norm() <= 1e-3 * term.norm(), "mu {mu} x {x}");
        }
    }
}

/// The defining integral is finite at z₀,₁: D⁽¹⁾ has a branch point there, not a pole.
#[test]
fn principal_bounded_at_z01() {
    let ctx = TwoExcitationContext::at(0.1, 1e-3).unwrap();
    let limit = eval_d1(&ctx, ctx.z01 + C::new(0.0, 1e-10), BranchTag2::PrincipalReal).unwrap();
    for angle in [0.3, 0.9, 1.6, 2.3, 3.1] {
        let z = ctx.z01 + C::from_polar(1e-6, angle);
        let d = eval_d1(&ctx, z, BranchTag2::PrincipalReal).unwrap();
        assert!((d - limit).norm() < 0.05 * limit.norm(), "{angle}");
    }
}

#[test]
fn lower_right_continues_across_positive_axis() {
    for mu in [0.1, 1.0] {
        let ctx = TwoExcitationContext::at(0.1, mu).unwrap();
        for x in [0.3, 0.5, 1.5, 2.5] {
            let gap = |d: f64| {
                let a = eval_d1(&ctx, C::new(x, d), BranchTag2::PrincipalReal).unwrap();
                let b = eval_d1(&ctx, C::new(x, -d), BranchTag2::LowerRight).unwrap();
                (a - b).norm()
            };
            let (coarse, fine) = (gap(1e-4), gap(1e-5));
            assert!(fine < 1e-5 && coarse > 5.0 * fine, "mu {mu} x {x}: {coarse:e} {fine:e}");
        }
    }
}

#[test]
fn loop_a0_zero_leaves_real_axis() {
    let ctx = TwoExcitationContext::at(0.1, 1e-3).unwrap();
    let r = find_a0_zero(&ctx, C::new(zeta_eigenvalue(0, 2, 0.1), 0.0)).unwrap();
    assert!(r.root.im.abs() > 1e-8, "{}", r.root);
    assert!(eval_d1(&ctx, r.root, BranchTag2::LoopA0).unwrap().norm() <= 1e-9);
}

#[test]
fn branch_regions_are_enforced() {
    let ctx = TwoExcitationContext::at(0.1, 1.0).unwrap();
    assert!(eval_d1(&ctx, C::new(0.5, -0.5), BranchTag2::PrincipalReal).is_err());
    assert!(eval_d1(&ctx, C::new(0.5, 0.5), BranchTag2::LowerRight).is_err());
    assert!(eval_d1(&ctx, C::new(0.5, -0.5), BranchTag2::LoopA0).is_err());
}
