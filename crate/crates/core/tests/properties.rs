mod support;

use ot1d::barycenter::{finite_barycenter, scalar_frechet_mean, WeightedFamily};
use ot1d::cost::CostFunction;
use ot1d::measure::{from_samples, levy_distance, DiscreteMeasure, EmpiricalMeasure, QuantileCurve};
use ot1d::transport::{monotone_plan, transport_cost};
use proptest::prelude::*;
use support::BUILTINS;

fn arb_measure(max_atoms: usize) -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((-20i32..=20, 1u32..=10), 1..=max_atoms).prop_map(|pairs| {
        let (atoms, weights): (Vec<f64>, Vec<f64>) =
            pairs.into_iter().map(|(a, w)| (a as f64 / 4.0, w as f64)).unzip();
        DiscreteMeasure::normalized(atoms, weights).unwrap()
    })
}

fn arb_cost() -> impl Strategy<Value = CostFunction> {
    (0..BUILTINS.len()).prop_map(|i| BUILTINS[i].cost())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn galois_connection(mu in arb_measure(8), p in 1e-9f64..1.0, x in -6.0f64..6.0) {
        prop_assert_eq!(mu.quantile(p) <= x, p <= mu.cdf_right(x));
        for &a in mu.atoms() {
            prop_assert_eq!(mu.quantile(p) <= a, p <= mu.cdf_right(a));
        }
    }

    #[test]
    fn quantile_is_nondecreasing_and_left_continuous(mu in arb_measure(8), p in 1e-6f64..0.999, dp in 0.0f64..1e-3) {
        prop_assert!(mu.quantile(p) <= mu.quantile(p + dp));
        // Approaching each cumulative level from below stays on the level's atom.
        for (i, &c) in mu.cumulative().iter().enumerate() {
            prop_assert_eq!(mu.quantile(c - 1e-12), mu.atoms()[i]);
        }
    }

    #[test]
    fn samples_round_trip(xs in prop::collection::vec(-100.0f64..100.0, 1..50)) {
        let m = from_samples(&xs).unwrap();
        let emp = EmpiricalMeasure::new(xs.clone()).unwrap();
        let n = xs.len();
        for i in 1..=n {
            prop_assert_eq!(m.quantile((i as f64 - 0.5) / n as f64), emp.order_statistic(i));
        }
    }

    #[test]
    fn identity_is_zero(mu in arb_measure(8), g in arb_cost()) {
        prop_assert_eq!(transport_cost(&g, &mu, &mu).value(), 0.0);
    }

    #[test]
    fn exchange_inequality(mu in arb_measure(8), nu in arb_measure(8), k in 0usize..4) {
        let g = BUILTINS[k];
        let e = monotone_plan(&mu, &nu);
        let e = e.entries();
        for i in 0..e.len() {
            for j in i + 1..e.len() {
                let (a, b) = (&e[i], &e[j]);
                prop_assert!(a.x <= b.x && a.y <= b.y);
                let straight = g.g(a.x - a.y) + g.g(b.x - b.y);
                let crossed = g.g(a.x - b.y) + g.g(b.x - a.y);
                prop_assert!(straight <= crossed + 1e-12 * crossed.max(1.0));
            }
        }
    }

    #[test]
    fn barycenter_atoms_stay_in_hull(
        ms in prop::collection::vec(arb_measure(5), 1..5),
        g in arb_cost(),
    ) {
        let lo = ms.iter().map(|m| m.atoms()[0]).fold(f64::INFINITY, f64::min);
        let hi = ms.iter().map(|m| *m.atoms().last().unwrap()).fold(f64::NEG_INFINITY, f64::max);
        let b = finite_barycenter(&g, &WeightedFamily::equal(ms).unwrap()).unwrap();
        prop_assert!(b.atoms().windows(2).all(|w| w[0] < w[1]));
        prop_assert!(b.atoms()[0] >= lo - 1e-12 && *b.atoms().last().unwrap() <= hi + 1e-12);
    }

    #[test]
    fn scalar_mean_minimizes(points in prop::collection::vec(-10.0f64..10.0, 1..12), g in arb_cost(), y in -10.0f64..10.0) {
        let w = vec![1.0; points.len()];
        let r = scalar_frechet_mean(&g, &points, &w).unwrap();
        let f = |y: f64| points.iter().map(|x| g.eval(x - y)).sum::<f64>() / points.len() as f64;
        prop_assert!(f(r.minimizer) <= f(y) + 1e-9 * f(y).max(1.0));
    }
}

#[test]
fn barycenter_is_continuous_in_inputs() {
    // Jitter atoms by 1/n and weights by 1/n; the barycenter follows.
    let mut rng = support::rng(77);
    let ms: Vec<DiscreteMeasure> = (0..3).map(|_| support::measure(&mut rng, 5, 4.0)).collect();
    let lambda = vec![0.2, 0.3, 0.5];
    for g in BUILTINS {
        let cost = g.cost();
        let base = finite_barycenter(&cost, &WeightedFamily::new(ms.clone(), lambda.clone()).unwrap()).unwrap();
        let mut last = f64::INFINITY;
        for n in [10.0, 100.0, 1000.0] {
            let jittered: Vec<DiscreteMeasure> = ms
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    let atoms = m.atoms().iter().enumerate().map(|(k, a)| a + ((i + k) % 3) as f64 / n).collect();
                    DiscreteMeasure::new(atoms, m.weights().to_vec()).unwrap()
                })
                .collect();
            let weights = vec![0.2 + 1.0 / n, 0.3, 0.5 - 1.0 / n];
            let b = finite_barycenter(&cost, &WeightedFamily::new(jittered, weights).unwrap()).unwrap();
            let d = levy_distance(&b, &base);
            assert!(d < last, "{}: {d} at n = {n}", g.spec());
            last = d;
        }
        assert!(last < 0.01);
    }
}
