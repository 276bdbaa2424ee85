use proptest::prelude::*;

use ifed::coupling::CouplingContext;
use ifed::fluid::{FluidParams, FluidSolver, FluidState};
use ifed::grid::{
    divergence, fill_pressure_ghosts, fill_velocity_ghosts, make_divfree, max_abs_divergence, momentum,
    pressure_gradient, Array2, Component, GridSpec, PressureGhosts, StaggeredField,
};
use ifed::harness::{run, BenchmarkConfig, Outcome, TimeSeries};
use ifed::kernels::{DeltaKernel, Kernel1D, KernelMode};
use ifed::lagrangian::{add_elastic_forces, LagrangianMesh, Material, QuadCache};
use ifed::poisson::PoissonSolver;

fn kernel_1d() -> impl Strategy<Value = Kernel1D> {
    prop_oneof![
        (3usize..=6).prop_map(|p| Kernel1D::ib(p).unwrap()),
        (1usize..=6).prop_map(|p| Kernel1D::bs(p).unwrap()),
    ]
}

fn kernel_mode() -> impl Strategy<Value = KernelMode> {
    prop_oneof![
        kernel_1d().prop_map(KernelMode::Isotropic),
        (2usize..=6)
            .prop_map(|n| KernelMode::composite(Kernel1D::bs(n).unwrap(), Kernel1D::bs(n - 1).unwrap()).unwrap()),
    ]
}

fn random_field(spec: &GridSpec, seed: u64) -> StaggeredField {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut u = spec.new_field();
    for c in Component::ALL {
        for (i, j) in u.comp(c).interior().collect::<Vec<_>>() {
            u.comp_mut(c)[(i, j)] = rng.random_range(-1.0..1.0);
        }
    }
    fill_velocity_ghosts(spec, &mut u, 0.0);
    u
}

fn random_cells(spec: &GridSpec, seed: u64) -> Array2 {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut p = spec.new_cell_array();
    for (i, j) in p.interior().collect::<Vec<_>>() {
        p[(i, j)] = rng.random_range(-1.0..1.0);
    }
    p
}

/// h² Σ over momentum unknowns.
fn face_dot(spec: &GridSpec, a: &StaggeredField, b: &StaggeredField) -> f64 {
    let mut s = 0.0;
    for c in Component::ALL {
        for (i, j) in a.comp(c).interior() {
            if spec.is_unknown(c, [i, j]) {
                s += a.comp(c)[(i, j)] * b.comp(c)[(i, j)];
            }
        }
    }
    s * spec.h * spec.h
}

fn cell_dot(a: &Array2, b: &Array2) -> f64 {
    a.interior().map(|(i, j)| a[(i, j)] * b[(i, j)]).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_partition_of_unity(k in kernel_1d(), x in 0.0f64..1.0) {
        let s: f64 = (-5i32..=6).map(|j| k.eval(x - j as f64)).sum();
        prop_assert!((s - 1.0).abs() < 1e-12, "{k}: {s}");
    }

    #[test]
    fn kernel_even(k in kernel_1d(), r in -4.0f64..4.0) {
        prop_assert!((k.eval(r) - k.eval(-r)).abs() <= 1e-15);
    }

    #[test]
    fn stencil_weights_sum_to_inverse_area(mode in kernel_mode(), x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let h = 1.0 / 16.0;
        let spec = GridSpec::periodic([16, 16], h, [0.0, 0.0], 4).unwrap();
        let delta = DeltaKernel::new(mode, h);
        for c in Component::ALL {
            let s = ifed::kernels::stencil(&delta, &spec, c, [x, y]).unwrap();
            let total: f64 = s.entries().map(|(_, w)| w).sum();
            prop_assert!((total * h * h - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn make_divfree_is_discretely_divergence_free(n in 8usize..=64, seed in any::<u64>()) {
        let spec = GridSpec::periodic([n, n], 1.0 / n as f64, [0.0, 0.0], 2).unwrap();
        let mut u = make_divfree(&spec, seed, 1.0).unwrap();
        fill_velocity_ghosts(&spec, &mut u, 0.0);
        let scale = u.max_abs() / spec.h;
        prop_assert!(max_abs_divergence(&spec, &u) <= 1e-13 * scale);
    }

    #[test]
    fn summation_by_parts(nx in 4usize..24, ny in 4usize..24, seed in any::<u64>()) {
        let spec = GridSpec::periodic([nx, ny], 0.1, [0.0, 0.0], 2).unwrap();
        let u = random_field(&spec, seed);
        let mut p = random_cells(&spec, seed ^ 1);
        fill_pressure_ghosts(&spec, &mut p, PressureGhosts::Pressure);
        let g = pressure_gradient(&spec, &p);
        let d = divergence(&spec, &u);
        let lhs = face_dot(&spec, &g, &u);
        let rhs = -cell_dot(&p, &d) * spec.h * spec.h;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(1.0));
    }

    #[test]
    fn periodic_laplacian_symmetric_nsd(nx in 4usize..24, ny in 4usize..24, seed in any::<u64>()) {
        let spec = GridSpec::periodic([nx, ny], 1.0 / nx as f64, [0.0, 0.0], 2).unwrap();
        let solver = PoissonSolver::new(&spec);
        let x = random_cells(&spec, seed);
        let y = random_cells(&spec, seed ^ 7);
        let lx = solver.apply_laplacian(&x);
        let ly = solver.apply_laplacian(&y);
        let (a, b) = (cell_dot(&lx, &y), cell_dot(&x, &ly));
        prop_assert!((a - b).abs() < 1e-12 * a.abs().max(1.0) * (nx * ny) as f64);
        prop_assert!(cell_dot(&lx, &x) <= 1e-12);
    }

    #[test]
    fn adjointness_and_force_total(mode in kernel_mode(), seed in any::<u64>(), m in 1usize..12) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let h = 1.0 / 12.0;
        let spec = GridSpec::periodic([12, 14], h, [0.3, -0.2], 4).unwrap();
        let ctx = CouplingContext::new(DeltaKernel::new(mode, h), spec.clone()).unwrap();
        let (lo, hi) = spec.domain();
        let x: Vec<[f64; 2]> = (0..m).map(|_| [rng.random_range(lo[0]..hi[0]), rng.random_range(lo[1]..hi[1])]).collect();
        let f: Vec<[f64; 2]> = (0..m).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
        let w: Vec<f64> = (0..m).map(|_| rng.random_range(0.01..0.1)).collect();
        let u = random_field(&spec, seed ^ 3);
        let mut sf = spec.new_field();
        ctx.spread(&w, &x, &f, &mut sf).unwrap();
        let mut ju = vec![[0.0; 2]; m];
        ctx.interpolate(&u, &x, &mut ju).unwrap();
        let lhs = face_dot(&spec, &sf, &u);
        let rhs: f64 = (0..m).map(|l| w[l] * (f[l][0] * ju[l][0] + f[l][1] * ju[l][1])).sum();
        let scale: f64 = (0..m).map(|l| w[l] * (f[l][0].abs() + f[l][1].abs())).sum();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        let mut ex = spec.new_field();
        ex.u.fill(1.0);
        let fx: f64 = (0..m).map(|l| w[l] * f[l][0]).sum();
        prop_assert!((face_dot(&spec, &sf, &ex) - fx).abs() <= 1e-12 * scale);
    }

    #[test]
    fn spread_is_translation_equivariant(mode in kernel_mode(), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let n = 16;
        let h = 0.0625;
        let spec = GridSpec::periodic([n, n], h, [0.0, 0.0], 4).unwrap();
        let ctx = CouplingContext::new(DeltaKernel::new(mode, h), spec.clone()).unwrap();
        // Positions on a dyadic lattice so that shifting by h is exact.
        let x: Vec<[f64; 2]> = (0..5)
            .map(|_| [rng.random_range(0..512) as f64 / 1024.0 + 0.25, rng.random_range(0..512) as f64 / 1024.0 + 0.25])
            .collect();
        let f: Vec<[f64; 2]> = (0..5).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
        let w = vec![0.01; 5];
        let shift: Vec<[f64; 2]> = x.iter().map(|p| [p[0] + h, p[1]]).collect();
        let mut a = spec.new_field();
        let mut b = spec.new_field();
        ctx.spread(&w, &x, &f, &mut a).unwrap();
        ctx.spread(&w, &shift, &f, &mut b).unwrap();
        for c in Component::ALL {
            for (i, j) in a.comp(c).interior() {
                if spec.is_unknown(c, [i, j]) {
                    let ii = (i + 1).rem_euclid(n as isize);
                    prop_assert_eq!(a.comp(c)[(i, j)].to_bits(), b.comp(c)[(ii, j)].to_bits());
                }
            }
        }
    }

    #[test]
    fn elastic_forces_have_zero_total_and_are_objective(
        seed in any::<u64>(),
        angle in 0.0f64..std::f64::consts::TAU,
        which in 0usize..3,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mesh = LagrangianMesh::rectangle([0.0, 0.0], [2.0, 1.0], [4, 3]).unwrap();
        let mat = match which {
            0 => Material::neo_hookean(10.0),
            1 => Material::neo_hookean(10.0).with_modified_invariants(true).with_stabilization(0.4),
            _ => Material::svk(10.0, 20.0),
        };
        let cache = QuadCache::new(&mesh).unwrap();
        let x: Vec<[f64; 2]> = mesh
            .nodes
            .iter()
            .map(|p| [1.1 * p[0] + 0.2 * p[1] + rng.random_range(-0.03..0.03), 0.9 * p[1] + rng.random_range(-0.03..0.03)])
            .collect();
        let mut f = vec![[0.0; 2]; x.len()];
        add_elastic_forces(&mesh, Some(&cache), &mat, &x, &mut f).unwrap();
        let scale: f64 = f.iter().zip(&mesh.weights).map(|(v, w)| (v[0].abs() + v[1].abs()) * w).sum();
        for a in 0..2 {
            let total: f64 = f.iter().zip(&mesh.weights).map(|(v, w)| v[a] * w).sum();
            prop_assert!(total.abs() <= 1e-10 * scale);
        }
        let (s, c) = angle.sin_cos();
        let rot = |p: [f64; 2]| [c * p[0] - s * p[1], s * p[0] + c * p[1]];
        let xr: Vec<[f64; 2]> = x.iter().map(|p| rot(*p)).collect();
        let mut fr = vec![[0.0; 2]; x.len()];
        add_elastic_forces(&mesh, Some(&cache), &mat, &xr, &mut fr).unwrap();
        let fmax = f.iter().map(|v| v[0].hypot(v[1])).fold(0.0, f64::max);
        for (a, b) in f.iter().zip(&fr) {
            let ra = rot(*a);
            prop_assert!((ra[0] - b[0]).hypot(ra[1] - b[1]) <= 1e-10 * fmax);
        }
    }

    #[test]
    fn load_ramp(t_load in 0.0f64..10.0, t in 0.0f64..20.0) {
        let mut cfg = BenchmarkConfig::from_toml(include_str!("../../../configs/block.toml")).unwrap();
        cfg.t_final = 100.0;
        cfg.t_load = t_load;
        let want = if t_load > 0.0 { (t / t_load).min(1.0) } else { 1.0 };
        prop_assert_eq!(cfg.ramp(t), want);
        prop_assert!((0.0..=1.0).contains(&cfg.ramp(t)));
    }

    #[test]
    fn time_series_t_strictly_increasing(ts in proptest::collection::vec(-1.0f64..1.0, 0..40)) {
        let mut s = TimeSeries::new(vec!["t".into(), "x".into()]);
        for t in ts {
            s.push(vec![t, 0.0]);
        }
        let t = s.column("t").unwrap();
        prop_assert!(t.windows(2).all(|w| w[1] > w[0]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    /// Zero net force on a periodic grid: the mean velocity does not drift.
    #[test]
    fn periodic_momentum_conserved(seed in any::<u64>()) {
        let spec = GridSpec::periodic([16, 16], 1.0 / 16.0, [0.0, 0.0], 2).unwrap();
        let solver = FluidSolver::new(spec.clone(), FluidParams::default()).unwrap();
        let mut u = make_divfree(&spec, seed, 0.5).unwrap();
        fill_velocity_ghosts(&spec, &mut u, 0.0);
        let mut st = FluidState::from_velocity(&spec, u, 0.0);
        let f = spec.new_field();
        let dt = 0.5 * solver.stable_dt(&st.u);
        for _ in 0..5 {
            let before = momentum(&spec, &st.u, 1.0);
            solver.step(&mut st, &f, dt).unwrap();
            let after = momentum(&spec, &st.u, 1.0);
            for a in 0..2 {
                prop_assert!((after[a] - before[a]).abs() <= 1e-12 * st.u.max_abs().max(1e-300));
            }
        }
        let scale = st.u.max_abs() / spec.h;
        prop_assert!(max_abs_divergence(&spec, &st.u) <= 1e-10 * scale);
    }
}

#[test]
fn poisson_manufactured_periodic() {
    let n = 32;
    let h = 1.0 / n as f64;
    let spec = GridSpec::periodic([n, n], h, [0.0, 0.0], 2).unwrap();
    let solver = PoissonSolver::new(&spec);
    let mut pstar = spec.new_cell_array();
    for (i, j) in pstar.interior().collect::<Vec<_>>() {
        let c = spec.cell_center(i, j);
        let tau = std::f64::consts::TAU;
        pstar[(i, j)] = (tau * c[0]).sin() * (2.0 * tau * c[1]).cos() + 0.3 * (tau * (c[0] + c[1])).cos();
    }
    let rhs = solver.apply_laplacian(&pstar);
    let mut phi = spec.new_cell_array();
    solver.solve(&rhs, &mut phi).unwrap();
    let mean = pstar.sum_interior() / (n * n) as f64;
    let err = pstar
        .interior()
        .map(|(i, j)| (phi[(i, j)] - (pstar[(i, j)] - mean)).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-9, "error {err}");
}

#[test]
fn poisson_fourier_symbol() {
    let n = 24;
    let h = 1.0 / n as f64;
    let spec = GridSpec::periodic([n, n], h, [0.0, 0.0], 2).unwrap();
    let solver = PoissonSolver::new(&spec);
    let tau = std::f64::consts::TAU;
    let mut rhs = spec.new_cell_array();
    for (i, j) in rhs.interior().collect::<Vec<_>>() {
        rhs[(i, j)] = (tau * spec.cell_center(i, j)[0]).cos();
    }
    let mut phi = spec.new_cell_array();
    solver.solve(&rhs, &mut phi).unwrap();
    let symbol = -(2.0 / (h * h)) * (1.0 - (tau * h).cos());
    let err = rhs
        .interior()
        .map(|(i, j)| (phi[(i, j)] - rhs[(i, j)] / symbol).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-9 / symbol.abs(), "error {err}");
}

#[test]
fn stable_dt_examples() {
    let h = 1.0 / 32.0;
    let spec = GridSpec::periodic([32, 32], h, [0.0, 0.0], 2).unwrap();
    let still = FluidSolver::new(
        spec.clone(),
        FluidParams {
            mu: 0.0,
            ..FluidParams::default()
        },
    )
    .unwrap();
    assert_eq!(still.stable_dt(&spec.new_field()), f64::INFINITY);
    let mut u = spec.new_field();
    u.u.fill(1.0);
    assert!((still.stable_dt(&u) - 1.0 / 64.0).abs() < 1e-15);
    let visc = FluidSolver::new(
        spec.clone(),
        FluidParams {
            mu: 0.5,
            ..FluidParams::default()
        },
    )
    .unwrap();
    let want = 0.25 / 1024.0 / 0.5;
    assert!((visc.stable_dt(&spec.new_field()) - want).abs() < 1e-15);
}

#[test]
fn horizontal_channel_refines_at_first_order() {
    // Max-norm speed error at least a quarter width from both plates.
    let error = |n: usize| {
        let mut cfg = BenchmarkConfig::from_toml(include_str!("../../../configs/channel.toml")).unwrap();
        cfg.kernel = "IB4".into();
        cfg.channel_angle = 0.0;
        cfg.n = n;
        cfg.t_load = 0.0;
        cfg.t_final = 1.0;
        let r = run(&cfg).unwrap();
        assert_eq!(r.outcome, Outcome::Completed);
        r.sim
            .channel_profile(0.5, 200)
            .unwrap()
            .iter()
            .filter(|p| p.s.min(1.0 - p.s) > 0.25)
            .map(|p| (p.speed - p.exact).abs())
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (error(16), error(32));
    let order = (coarse / fine).log2();
    assert!(
        order >= 1.0,
        "errors {coarse:.3e}, {fine:.3e}, observed order {order:.2}"
    );
}
