//! Seeded generators for randomized identity sweeps: valid affine systems
//! with prescribed weight ranges, and germ intervals of every closure kind.
//! Everything is driven by an explicit ChaCha20 seed so runs are
//! reproducible byte-for-byte.

use kneading_core::system::Branch;
use kneading_core::{Germ, GermInterval, Scalar, System};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

pub fn rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// A random valid system on `[0,1]`: 1–`max_cuts` interior cuts separated
/// by at least 0.05, each branch an affine surjection onto a random image
/// subinterval of width ≥ 0.1 strictly inside `]0,1[`, with a random sign
/// and a weight drawn uniformly from `[w_lo, w_hi]`.
pub fn random_system(rng: &mut ChaCha20Rng, max_cuts: usize, w_lo: f64, w_hi: f64) -> System<f64> {
    let ell = rng.gen_range(1..=max_cuts);
    let cuts = loop {
        let mut cuts: Vec<f64> = (0..ell).map(|_| rng.gen_range(0.05..0.95)).collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ok = cuts[0] >= 0.05 && cuts[ell - 1] <= 0.95;
        for w in cuts.windows(2) {
            ok &= w[1] - w[0] >= 0.05;
        }
        if ok {
            break cuts;
        }
    };
    let mut ends = vec![0.0];
    ends.extend(cuts.iter().copied());
    ends.push(1.0);
    let branches = (0..=ell)
        .map(|i| {
            let (lo, hi) = (ends[i], ends[i + 1]);
            let img_lo = rng.gen_range(0.0..0.85);
            let img_hi = img_lo + rng.gen_range(0.1..(0.99 - img_lo));
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let slope = sign * (img_hi - img_lo) / (hi - lo);
            let intercept = if sign > 0.0 { img_lo - slope * lo } else { img_hi - slope * lo };
            let weight = rng.gen_range(w_lo..=w_hi);
            Branch::new(slope, intercept, weight)
        })
        .collect();
    System::new(0.0, 1.0, cuts, branches).expect("generated system is valid by construction")
}

/// A random germ interval with endpoints on the 1/1024 grid (exactly
/// representable in both arithmetic modes), cycling through open, closed,
/// both half-open kinds and single points.
pub fn random_germ_interval<K: Scalar>(rng: &mut ChaCha20Rng, sys: &System<K>) -> GermInterval<K> {
    let span = sys.b().clone() - sys.a().clone();
    let coord = |k: i64, sys: &System<K>, span: &K| {
        sys.a().clone() + span.clone() * K::from_ratio(k, 1024)
    };
    let mut k1 = rng.gen_range(1..1024i64);
    let mut k2 = rng.gen_range(1..1024i64);
    if k1 > k2 {
        std::mem::swap(&mut k1, &mut k2);
    }
    let u = coord(k1, sys, &span);
    let v = coord(k2, sys, &span);
    match rng.gen_range(0..5) {
        0 => GermInterval::open(u, v),
        1 => GermInterval::closed(u, v),
        2 => GermInterval::half_open_right(u, v),
        3 => GermInterval::half_open_left(u, v),
        _ => GermInterval::point(u),
    }
}

/// A legal interior germ on the 1/1024 grid.
pub fn random_germ<K: Scalar>(rng: &mut ChaCha20Rng, sys: &System<K>) -> Germ<K> {
    let span = sys.b().clone() - sys.a().clone();
    let k = rng.gen_range(1..1024i64);
    let x = sys.a().clone() + span * K::from_ratio(k, 1024);
    if rng.gen_bool(0.5) {
        Germ::plus(x)
    } else {
        Germ::minus(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_systems_are_valid_and_reproducible() {
        let mut r1 = rng(7);
        let mut r2 = rng(7);
        for _ in 0..20 {
            let s1 = random_system(&mut r1, 4, 0.1, 3.0);
            let s2 = random_system(&mut r2, 4, 0.1, 3.0);
            assert_eq!(s1.num_branches(), s2.num_branches());
            for i in 0..s1.num_branches() {
                assert_eq!(s1.weight(i), s2.weight(i));
                assert!(*s1.weight(i) >= 0.1 && *s1.weight(i) <= 3.0);
            }
        }
    }

    #[test]
    fn interval_endpoints_match_across_modes() {
        use kneading_core::Rational;
        let mut rf = rng(11);
        let mut rq = rng(11);
        let tent_f = kneading_core::fixtures::tent::<f64>();
        let tent_q = kneading_core::fixtures::tent::<Rational>();
        for _ in 0..50 {
            let jf = random_germ_interval(&mut rf, &tent_f);
            let jq = random_germ_interval(&mut rq, &tent_q);
            match (jf.endpoints(), jq.endpoints()) {
                (None, None) => {}
                (Some((lf, hf)), Some((lq, hq))) => {
                    assert_eq!(lf.base, lq.base.to_f64());
                    assert_eq!(hf.base, hq.base.to_f64());
                    assert_eq!(lf.dir, lq.dir);
                    assert_eq!(hf.dir, hq.dir);
                }
                _ => panic!("interval kinds diverged between modes"),
            }
        }
    }
}
