use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nsrom::cli::verify::unit_square;
use nsrom::fem::{assemble_linear_operators, random_field, trilinear_value, NonlinearForm};
use nsrom::io::archive::{decode_basis, decode_snapshots, encode_basis, encode_snapshots};
use nsrom::io::table::fmt_f64;
use nsrom::io::BasisArchive;
use nsrom::mesh::{identify_periodic, uniform_rect_mesh, Axis, Diagonal};
use nsrom::numerics::{dot, jacobi_svd, norm2, sym_eig, DenseMatrix};
use nsrom::pod::{build_pod_basis, Centering, SnapshotSet};
use nsrom::rom::assemble_rom_operators;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DenseMatrix> {
    prop::collection::vec(-1.0f64..1.0, rows * cols)
        .prop_map(move |d| DenseMatrix::from_row_major(rows, cols, d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rectangles_tile_their_area(nx in 1usize..9, ny in 1usize..9, lx in 0.1f64..3.0, ly in 0.1f64..3.0, alt in any::<bool>()) {
        let d = if alt { Diagonal::Alternating } else { Diagonal::Uniform };
        let m = uniform_rect_mesh(nx, ny, lx, ly, d).unwrap();
        prop_assert!((m.total_area() - lx * ly).abs() <= 1e-12 * lx * ly);
        let (v, e, f) = (m.num_vertices() as i64, m.num_edges() as i64, m.num_triangles() as i64);
        prop_assert_eq!(v - e + f, 1);
        prop_assert_eq!(m.hole_count(), 0);
    }

    #[test]
    fn periodic_identification_pairs_every_side_vertex(nx in 2usize..7, ny in 2usize..7) {
        let m = identify_periodic(uniform_rect_mesh(nx, ny, 1.0, 1.0, Diagonal::Alternating).unwrap(), Axis::X, None).unwrap();
        prop_assert_eq!(m.periodic_pairs().len(), ny + 1);
    }

    #[test]
    fn lu_solves_diagonally_dominant_systems(a in matrix(6, 6), b in prop::collection::vec(-1.0f64..1.0, 6)) {
        let mut a = a;
        for i in 0..6 {
            a[(i, i)] += 7.0;
        }
        let x = a.solve(&b).unwrap();
        let r: Vec<f64> = a.matvec(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
        prop_assert!(norm2(&r) <= 1e-12 * (1.0 + norm2(&b)));
    }

    #[test]
    fn eigenpairs_reconstruct_symmetric_matrices(a in matrix(5, 5)) {
        let s = a.matmul(&a.transpose());
        let e = sym_eig(&s).unwrap();
        for k in 0..5 {
            let v = e.vector(k);
            let sv = s.matvec(&v);
            for (x, y) in sv.iter().zip(&v) {
                prop_assert!((x - e.values[k] * y).abs() <= 1e-10 * (1.0 + s.max_abs()));
            }
        }
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn singular_values_reproduce_frobenius_norm(a in matrix(7, 4)) {
        let svd = jacobi_svd(&a).unwrap();
        let f2: f64 = svd.sigma.iter().map(|s| s * s).sum();
        prop_assert!((f2.sqrt() - a.frobenius_norm()).abs() <= 1e-12 * (1.0 + a.frobenius_norm()));
    }

    #[test]
    fn decimal_text_round_trips(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
    }

    #[test]
    fn snapshot_archives_round_trip(n in 1usize..20, cols in 0usize..5, seed in any::<u64>()) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let columns: Vec<Vec<f64>> = (0..cols).map(|_| (0..n).map(|_| rng.gen::<f64>() - 0.5).collect()).collect();
        let times: Vec<f64> = (0..cols).map(|k| 0.1 * k as f64).collect();
        let set = SnapshotSet::from_columns(n, times, columns).unwrap();
        let (back, meta) = decode_snapshots(&encode_snapshots(&set, "m")).unwrap();
        prop_assert_eq!(back, set);
        prop_assert_eq!(meta, "m");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn energy_neutral_forms_vanish(seed in any::<u64>()) {
        let s = unit_square(4).unwrap();
        let ops = assemble_linear_operators(&s, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (u, v) = (random_field(&s, &mut rng), random_field(&s, &mut rng));
        let scale = norm2(&ops.stiffness.matvec(&u)).max(1.0) * norm2(&v).powi(2);
        prop_assert!(trilinear_value(NonlinearForm::Skew, &s, &u, &v, &v).unwrap().abs() <= 1e-11 * scale);
        prop_assert!(trilinear_value(NonlinearForm::Rotational, &s, &u, &v, &v).unwrap().abs() <= 1e-11 * scale);
        let su = norm2(&ops.stiffness.matvec(&u)).max(1.0) * norm2(&u).powi(2);
        prop_assert!(trilinear_value(NonlinearForm::Emac, &s, &u, &u, &u).unwrap().abs() <= 1e-11 * su);
    }

    #[test]
    fn pod_bases_are_orthonormal_and_round_trip(m in 1usize..7, seed in any::<u64>(), centered in any::<bool>()) {
        let s = unit_square(3).unwrap();
        let ops = assemble_linear_operators(&s, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cols: Vec<Vec<f64>> = (0..m).map(|_| random_field(&s, &mut rng)).collect();
        let set = SnapshotSet::from_columns(s.n_velocity(), (0..m).map(|k| k as f64).collect(), cols).unwrap();
        let c = if centered { Centering::Mean } else { Centering::None };
        let b = match build_pod_basis(&set, &ops, c) {
            Ok(b) => b,
            Err(_) => { prop_assert!(centered && m == 1); return Ok(()); }
        };
        prop_assert_eq!(b.rank(), if centered { m - 1 } else { m });
        for i in 0..b.rank() {
            for j in 0..b.rank() {
                let g = ops.mass.bilinear(&b.modes[i], &b.modes[j]);
                let delta = if i == j { 1.0 } else { 0.0 };
                prop_assert!((g - delta).abs() <= 1e-10);
            }
        }
        let trace: f64 = b.eigenvalues.iter().sum();
        let mean = set.mean();
        let energy: f64 = set.columns().iter().map(|u| {
            let d: Vec<f64> = if centered { u.iter().zip(&mean).map(|(x, y)| x - y).collect() } else { u.clone() };
            ops.mass.bilinear(&d, &d)
        }).sum::<f64>() / m as f64;
        prop_assert!((trace - energy).abs() <= 1e-10 * energy.max(1e-300));
        let a = b.project(&ops.mass, b.rank(), set.column(0)).unwrap();
        let again = b.project(&ops.mass, b.rank(), &b.reconstruct(&a).unwrap()).unwrap();
        for (x, y) in a.iter().zip(&again) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
        let arch = BasisArchive { basis: b, reference: None, meta: String::new() };
        prop_assert_eq!(decode_basis(&encode_basis(&arch)).unwrap(), arch);
    }

    #[test]
    fn reduced_skew_and_emac_conserve_energy(seed in any::<u64>()) {
        use rand::Rng;
        let s = unit_square(3).unwrap();
        let ops = assemble_linear_operators(&s, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cols: Vec<Vec<f64>> = (0..4).map(|_| random_field(&s, &mut rng)).collect();
        let set = SnapshotSet::from_columns(s.n_velocity(), vec![0.0, 1.0, 2.0, 3.0], cols).unwrap();
        let b = build_pod_basis(&set, &ops, Centering::None).unwrap();
        for form in [NonlinearForm::Skew, NonlinearForm::Emac] {
            let rom = assemble_rom_operators(&b, 4, &s, &ops, form, 0.1, None).unwrap();
            let a: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            prop_assert!(dot(&a, &rom.nonlinear(&a)).abs() <= 1e-11 * rom.tensor_scale() * norm2(&a).powi(3));
        }
    }
}
