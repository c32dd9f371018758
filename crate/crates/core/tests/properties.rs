use l1lab::decomp::{padded_partition, snowflake_embed, DecompositionScheme, SnowflakeParams};
use l1lab::graph::{shortest_path_metric, Dyadic, Edge, WeightedGraph};
use l1lab::lower::{short_diagonal_relative, walsh_linear_distortion, LinearMap};
use l1lab::metric::{distortion_report, metric_from_points, snowflake, validate_metric, PointSet};
use l1lab::stable::{apply, sample_operator};
use proptest::prelude::*;

fn points(max_n: usize, d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-10.0f64..10.0, d), 2..max_n)
}

fn distinct(ps: &PointSet) -> bool {
    ps.find_duplicate().is_none()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn snowflake_of_a_metric_is_a_metric(rows in points(12, 3), p in 1.0f64..3.0, eps in 0.0f64..0.99) {
        let ps = PointSet::new(p, rows).unwrap();
        prop_assume!(distinct(&ps));
        let m = metric_from_points(&ps).unwrap();
        prop_assert!(validate_metric(&snowflake(&m, eps).unwrap()).is_empty());
    }

    #[test]
    fn short_diagonal_holds(
        q in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 4), 4),
        p in 1.01f64..=2.0,
    ) {
        let r = short_diagonal_relative(&q[0], &q[1], &q[2], &q[3], p).unwrap();
        prop_assert!(r >= -1e-12, "relative residual {r}");
    }

    #[test]
    fn stable_operator_is_linear(
        rows in points(6, 4),
        a in -3.0f64..3.0,
        seed in any::<u64>(),
    ) {
        let t = sample_operator(1.0, 4, 64, 0.5, seed).unwrap();
        let (x, y) = (&rows[0], &rows[1]);
        let combo: Vec<f64> = x.iter().zip(y).map(|(u, v)| a * u + v).collect();
        let tx = t.apply_vec(x).unwrap();
        let ty = t.apply_vec(y).unwrap();
        let tc = t.apply_vec(&combo).unwrap();
        let scale = tx.iter().chain(&ty).fold(1.0f64, |m, v| m.max(v.abs()));
        for k in 0..tc.len() {
            prop_assert!((tc[k] - (a * tx[k] + ty[k])).abs() <= 1e-9 * scale * (1.0 + a.abs()));
        }
        let ps = PointSet::new(1.0, rows.clone()).unwrap();
        let img = apply(&t, &ps).unwrap();
        prop_assert_eq!(img.row(0), &tx[..]);
    }

    #[test]
    fn distortion_ignores_image_scale(rows in points(10, 2), s in 0.01f64..100.0) {
        let ps = PointSet::new(2.0, rows).unwrap();
        prop_assume!(distinct(&ps));
        let m = metric_from_points(&ps).unwrap();
        let stretched: Vec<Vec<f64>> = ps.rows().map(|r| vec![r[0] * 3.0, r[1]]).collect();
        let img = PointSet::new(2.0, stretched).unwrap().distance_matrix().unwrap();
        let a = distortion_report(&m, &img, 0.5).unwrap();
        let b = distortion_report(&m, &img.scaled(s), 0.5).unwrap();
        prop_assert!((a.distortion - b.distortion).abs() <= 1e-9 * a.distortion);
        prop_assert!(a.distortion >= 1.0 - 1e-12 && a.distortion <= 3.0 + 1e-9);
    }

    #[test]
    fn dyadic_round_trips_doubles(num in 1u64..(1 << 40), exp in 0u32..40) {
        let d = Dyadic::new(num, exp).unwrap();
        prop_assert_eq!(Dyadic::from_f64(d.to_f64()).unwrap(), d);
        prop_assert!(d.num() % 2 == 1 || d.exp() == 0);
    }

    #[test]
    fn shortest_paths_form_a_metric(
        n in 2usize..10,
        extra in prop::collection::vec((0usize..10, 0usize..10, 1u64..16, 0u32..4), 0..15),
    ) {
        // A path backbone keeps the graph connected.
        let mut edges: Vec<Edge> =
            (1..n).map(|v| Edge { u: v - 1, v, length: Dyadic::one() }).collect();
        for (u, v, num, exp) in extra {
            let (u, v) = (u % n, v % n);
            if u != v {
                edges.push(Edge { u, v, length: Dyadic::new(num, exp).unwrap() });
            }
        }
        let g = WeightedGraph::new(n, edges, None).unwrap();
        let m = shortest_path_metric(&g).unwrap();
        prop_assert!(validate_metric(&m).is_empty());
        for v in 1..n {
            prop_assert!(m.get(v - 1, v) <= 1.0);
        }
    }

    #[test]
    fn partitions_respect_the_radius(rows in points(16, 2), rho in 0.5f64..20.0, seed in any::<u64>()) {
        let ps = PointSet::new(2.0, rows).unwrap();
        prop_assume!(distinct(&ps));
        let m = metric_from_points(&ps).unwrap();
        let part = padded_partition(&m, rho, DecompositionScheme::CkrGeneral, seed).unwrap();
        for c in 0..part.len() {
            prop_assert!(part.cluster_diameter(&m, c) <= rho * (1.0 + 1e-12));
        }
        for (x, &pad) in part.pads.iter().enumerate() {
            prop_assert!(pad > 0.0 && pad <= rho);
            for y in 0..m.len() {
                if part.cluster_of[y] != part.cluster_of[x] {
                    prop_assert!(m.get(x, y) >= pad);
                }
            }
        }
    }

    #[test]
    fn walsh_residual_is_tiny_for_any_map(
        entries in prop::collection::vec(-2.0f64..2.0, 16),
        p in prop::sample::select(vec![1.0, 1.5, 2.0]),
    ) {
        let a = l1lab::graph::walsh_pointset(2, p).unwrap();
        let matrix: Vec<Vec<f64>> = entries.chunks(4).map(<[f64]>::to_vec).collect();
        let t = LinearMap::new(matrix, p).unwrap();
        let e = walsh_linear_distortion(&t, &a, p).unwrap();
        prop_assert!(e.residual < 1e-12);
        prop_assert!(e.report.distortion >= e.bound - 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn snowflake_embedding_keeps_envelope_and_contraction(
        rows in points(14, 2),
        eps in prop::sample::select(vec![0.5, 0.25]),
        seed in any::<u64>(),
    ) {
        let ps = PointSet::new(2.0, rows).unwrap();
        prop_assume!(distinct(&ps));
        let m = metric_from_points(&ps).unwrap();
        let params = SnowflakeParams { partitions: 8, signs: 16, ..Default::default() };
        let s = snowflake_embed(&m, eps, &params, seed).unwrap();
        prop_assert_eq!(s.diagnostics.envelope_violations.len(), 0);
        prop_assert!(s.diagnostics.contraction_ok);
        prop_assert_eq!(s.embedding.image.len(), m.len());
    }
}
