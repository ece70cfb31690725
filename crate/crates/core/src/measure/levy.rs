use super::DiscreteMeasure;


/// Lévy distance between two discrete measures:
/// `inf { ε > 0 : F_μ(x-ε) - ε ≤ F_ν(x) ≤ F_μ(x+ε) + ε  for all x }`.
///
/// Feasibility of a given `ε` is decided exactly by sweeping the merged jump
/// points of `F_μ(· - ε)`, `F_μ(· + ε)` and `F_ν`; the infimum is then located
/// by bisection on `ε ∈ [0, 1]`.
pub fn levy_distance(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    if feasible(mu, nu, 0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if feasible(mu, nu, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[derive(Clone, Copy)]
enum Track {
    /// jump of `F_μ(x - ε)`, located at `a + ε`
    Lagged,
    /// jump of `F_μ(x + ε)`, located at `a - ε`
    Led,
    /// jump of `F_ν(x)`
    Target,
}

fn feasible(mu: &DiscreteMeasure, nu: &DiscreteMeasure, eps: f64) -> bool {
    let mut events: Vec<(f64, Track)> = Vec::with_capacity(2 * mu.len() + nu.len());
    events.extend(mu.atoms().iter().map(|&a| (a + eps, Track::Lagged)));
    events.extend(mu.atoms().iter().map(|&a| (a - eps, Track::Led)));
    events.extend(nu.atoms().iter().map(|&b| (b, Track::Target)));
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let cum_mu = mu.cumulative();
    let cum_nu = nu.cumulative();
    let level = |cum: &[f64], passed: usize| if passed == 0 { 0.0 } else { cum[passed - 1] };

    // Number of jumps passed on each track.
    let (mut lagged, mut led, mut target) = (0usize, 0usize, 0usize);
    let ok = |lagged: usize, led: usize, target: usize| {
        let fm = level(cum_mu, lagged);
        let fp = level(cum_mu, led);
        let g = level(cum_nu, target);
        fm <= g + eps && g <= fp + eps
    };

    let mut i = 0;
    while i < events.len() {
        // Values at the group point itself (left limits)...
        if !ok(lagged, led, target) {
            return false;
        }
        let anchor = events[i].0;
        while i < events.len() && events[i].0 == anchor {
            match events[i].1 {
                Track::Lagged => lagged += 1,
                Track::Led => led += 1,
                Track::Target => target += 1,
            }
            i += 1;
        }
        // ...and on the open interval that follows.
        if !ok(lagged, led, target) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dirac(x: f64) -> DiscreteMeasure {
        DiscreteMeasure::dirac(x).unwrap()
    }

    #[test]
    fn identical_measures_are_at_distance_zero() {
        assert_eq!(levy_distance(&dirac(0.0), &dirac(0.0)), 0.0);
        let m = DiscreteMeasure::new(vec![-1.0, 0.3, 2.0], vec![0.2, 0.5, 0.3]).unwrap();
        assert_eq!(levy_distance(&m, &m), 0.0);
    }

    #[test]
    fn diracs_at_distance_t() {
        // Exhaustive-scan oracle values (see tests/levy_oracle.rs): min(t, 1).
        assert!((levy_distance(&dirac(0.0), &dirac(1.0)) - 1.0).abs() < 1e-12);
        assert!((levy_distance(&dirac(0.0), &dirac(0.1)) - 0.1).abs() < 1e-12);
        assert!((levy_distance(&dirac(0.0), &dirac(5.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn small_mass_perturbation() {
        // Moving mass h far away costs exactly h in Lévy distance.
        let h = 0.05;
        let m = DiscreteMeasure::new(vec![0.0, 100.0], vec![1.0 - h, h]).unwrap();
        assert!((levy_distance(&m, &dirac(0.0)) - h).abs() < 1e-12);
    }
}
