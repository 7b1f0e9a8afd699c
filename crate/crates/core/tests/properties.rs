//! Randomized invariants complementing the unit tests and the acceptance
//! suite.

use proptest::prelude::*;

use batchbfgs::bench::{parse_csv, to_csv, BenchRow};
use batchbfgs::fd::{self, FdScheme};
use batchbfgs::objective::{BatchWidth, Evaluator, Objective};
use batchbfgs::polyfit::{select_alpha_min, Polynomial};

struct Quadratic {
    center: Vec<f64>,
}

impl Objective for Quadratic {
    fn dim(&self) -> usize {
        self.center.len()
    }
    fn value(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.center)
            .enumerate()
            .map(|(i, (xi, ci))| (i + 1) as f64 * (xi - ci) * (xi - ci))
            .sum()
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.center)
            .enumerate()
            .map(|(i, (xi, ci))| 2.0 * (i + 1) as f64 * (xi - ci))
            .collect()
    }
}

proptest! {
    /// The FD directional derivative agrees with the analytic gradient dot
    /// product on smooth quadratics.
    #[test]
    fn fd_matches_gradient_dot(
        center in prop::collection::vec(-2.0f64..2.0, 2..6),
        xs in prop::collection::vec(-2.0f64..2.0, 2..6),
        ps in prop::collection::vec(-1.0f64..1.0, 2..6),
    ) {
        let n = center.len().min(xs.len()).min(ps.len());
        let obj = Quadratic { center: center[..n].to_vec() };
        let x = &xs[..n];
        let p = &ps[..n];
        let exact: f64 = obj.gradient(x).iter().zip(p).map(|(a, b)| a * b).sum();

        let mut ev = Evaluator::new(&obj, BatchWidth::new(4).unwrap(), false);
        let scheme = FdScheme::new(4, 1e-4).unwrap();
        let got = fd::directional_derivative(&mut ev, x, p, &scheme).unwrap();
        prop_assert!((got - exact).abs() <= 1e-8 * (1.0 + exact.abs()),
            "got {got}, exact {exact}");
    }

    /// The batched forward-call count depends only on the number of point
    /// batches, never on the lane count inside a batch.
    #[test]
    fn forward_count_counts_batches(
        npts in 1usize..12,
        width in prop::sample::select(vec![1usize, 4, 8]),
    ) {
        let obj = Quadratic { center: vec![0.0, 0.0] };
        let mut ev = Evaluator::new(&obj, BatchWidth::new(width).unwrap(), false);
        let pts: Vec<Vec<f64>> = (0..npts).map(|i| vec![i as f64, 0.5]).collect();
        fd::eval_points_batched(&mut ev, &pts).unwrap();
        prop_assert_eq!(ev.counters.forward_calls, npts.div_ceil(width) as u64);
    }

    /// select_alpha_min commutes with rescaling the step variable: shrinking
    /// the polynomial's argument by `s` shrinks the selected step by `s`.
    #[test]
    fn select_alpha_min_scale_consistent(
        vertex in 0.3f64..3.9,
        scale in 0.5f64..2.0,
    ) {
        // q(t) = (t - v)^2 and q_s(t) = q(s t) have minima v and v/s.
        let q = Polynomial::new(vec![vertex * vertex, -2.0 * vertex, 1.0]);
        let qs = Polynomial::new(vec![
            vertex * vertex,
            -2.0 * vertex * scale,
            scale * scale,
        ]);
        let a = select_alpha_min(&q, 1.0);
        let b = select_alpha_min(&qs, 1.0 / scale);
        match (a, b) {
            (Some(a), Some(b)) => prop_assert!((a - b * scale).abs() <= 1e-9),
            (None, None) => {}
            other => prop_assert!(false, "inconsistent selection {other:?}"),
        }
    }

    /// CSV output round-trips through the parser.
    #[test]
    fn csv_round_trip(
        time in 0.0f64..1e4,
        iterations in 0u64..10_000,
        value in -1e12f64..1e12,
        forward in 0u64..1_000_000,
        reverse in 0u64..1_000_000,
        ls in 0u64..1_000_000,
    ) {
        let rows = vec![BenchRow {
            label: "row".into(),
            time_ms: time,
            iterations,
            value,
            forward,
            reverse,
            ls_iterations: ls,
            converged: true,
        }];
        let parsed = parse_csv(&to_csv(&rows)).unwrap();
        prop_assert_eq!(parsed.len(), 1);
        prop_assert_eq!(&parsed[0].label, "row");
        prop_assert_eq!(parsed[0].iterations, iterations);
        prop_assert_eq!(parsed[0].value.to_bits(), value.to_bits());
        prop_assert_eq!(parsed[0].forward, forward);
        prop_assert_eq!(parsed[0].reverse, reverse);
    }
}
