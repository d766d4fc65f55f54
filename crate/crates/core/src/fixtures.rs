//! Small reference systems with hand-computed invariants, used throughout
//! the test suites and the benchmarks.

use crate::scalar::Scalar;
use crate::system::{Branch, System};

/// Full tent map on `[0,1]`, cut at `1/2`, unit weights.
///
/// Known exactly: `det ℛ = (1−2t)/(1−t)`, first zero `1/2`, pressure
/// `log 2`, weighted fixed-point counts `N_n = 2^n − 1`.
pub fn tent<K: Scalar>() -> System<K> {
    System::new(
        K::from_int(0),
        K::from_int(1),
        vec![K::half()],
        vec![
            Branch::new(K::from_int(2), K::from_int(0), K::from_int(1)),
            Branch::new(K::from_int(-2), K::from_int(2), K::from_int(1)),
        ],
    )
    .expect("tent fixture is valid")
}

/// Golden-mean map on `[0,1]`: doubling on the left half, the flip
/// `x ↦ 1−x` on the right half, unit weights.
///
/// `det ℛ = (1−t−t²)/(1−t)`, first zero `1/φ ≈ 0.618`, pressure `log φ`.
pub fn golden_mean<K: Scalar>() -> System<K> {
    System::new(
        K::from_int(0),
        K::from_int(1),
        vec![K::half()],
        vec![
            Branch::new(K::from_int(2), K::from_int(0), K::from_int(1)),
            Branch::new(K::from_int(-1), K::from_int(1), K::from_int(1)),
        ],
    )
    .expect("golden-mean fixture is valid")
}

/// Tent core on `[0,2]` plus a transient inflow branch `]2,3[ → ]0,2[`
/// carrying weight `m`; domain `[0,3]`, cuts `{1,2}`, weights `(1,1,m)`.
///
/// Orbits leave `]2,3[` after one step, so the inflow weight never affects
/// `det ℛ = (1−2t)/(1−t)` or the pressure `log 2`, but it enters the
/// boundary factor `H = 1 − (1+m)t/2` and hence `det ℬ`, whose first zero
/// `2/(1+m)` is spurious (strictly below `1/2`) once `m > 3`.
pub fn tent_with_inflow<K: Scalar>(m: K) -> System<K> {
    System::new(
        K::from_int(0),
        K::from_int(3),
        vec![K::from_int(1), K::from_int(2)],
        vec![
            Branch::new(K::from_int(2), K::from_int(0), K::from_int(1)),
            Branch::new(K::from_int(-2), K::from_int(4), K::from_int(1)),
            Branch::new(K::from_int(2), K::from_int(-4), m),
        ],
    )
    .expect("inflow fixture is valid")
}

/// Full doubling map on `[0,1]` (discontinuous at `1/2`) with unequal
/// branch weights `3` and `2`.
///
/// `det ℛ = (1−5t)/((1−3t)(1−2t))`, first zero `1/5`, pressure `log 5`;
/// the weight-per-branch ratio makes the linearized model slopes differ
/// per branch (`5/3` and `5/2` at the critical parameter).
pub fn weighted_doubling<K: Scalar>() -> System<K> {
    System::new(
        K::from_int(0),
        K::from_int(1),
        vec![K::half()],
        vec![
            Branch::new(K::from_int(2), K::from_int(0), K::from_int(3)),
            Branch::new(K::from_int(2), K::from_int(-1), K::from_int(2)),
        ],
    )
    .expect("weighted-doubling fixture is valid")
}
