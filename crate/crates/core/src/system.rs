//! Weighted piecewise-affine interval systems.
//!
//! A system is an interval `[a,b]`, interior cut points
//! `a < c_1 < ... < c_ℓ < b`, and one affine branch per component of the
//! complement, each strictly monotone with image inside `[a,b]`, carrying a
//! real weight.  The map is undefined *at* the cuts; orbits are taken on
//! germs (see [`crate::germ`]), which always know which branch applies next.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::germ::{Dir, Germ};
use crate::scalar::Scalar;

/// One affine branch `x ↦ slope·x + intercept` with a multiplicative weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch<K> {
    pub slope: K,
    pub intercept: K,
    pub weight: K,
}

impl<K: Scalar> Branch<K> {
    pub fn new(slope: K, intercept: K, weight: K) -> Self {
        Branch { slope, intercept, weight }
    }

    pub fn eval(&self, x: &K) -> K {
        self.slope.clone() * x.clone() + self.intercept.clone()
    }

    pub fn invert(&self, y: &K) -> K {
        (y.clone() - self.intercept.clone()) / self.slope.clone()
    }

    pub fn sign(&self) -> i64 {
        if self.slope > K::zero() {
            1
        } else {
            -1
        }
    }
}

/// Where a value sits relative to the cut partition.
enum Position {
    /// Equal to cut `k` (with `k = 0` the left endpoint, `k = ℓ+1` the right).
    OnCut(usize),
    /// Within snap tolerance of cut `k` but not equal to it.
    NearCut(usize),
    /// Strictly inside branch interval `i`.
    Interior(usize),
    Outside,
}

#[derive(Debug, Clone)]
pub struct System<K> {
    /// All cut points including the endpoints: `cuts[0] = a`,
    /// `cuts[ℓ+1] = b`, strictly increasing.
    cuts: Vec<K>,
    branches: Vec<Branch<K>>,
    /// Float mode: values this close to a cut (but unequal) are refused as
    /// ambiguous rather than silently assigned a side.  Zero in exact mode.
    snap_tol: K,
}

impl<K: Scalar> System<K> {
    /// Build and validate a system from its interval, interior cuts, and
    /// branches (one more branch than interior cuts, in left-to-right order).
    pub fn new(a: K, b: K, interior_cuts: Vec<K>, branches: Vec<Branch<K>>) -> Result<Self> {
        if a >= b {
            return Err(Error::InvalidSystem(format!(
                "interval endpoints out of order: [{a}, {b}]"
            )));
        }
        let mut cuts = Vec::with_capacity(interior_cuts.len() + 2);
        cuts.push(a.clone());
        cuts.extend(interior_cuts);
        cuts.push(b.clone());
        for w in cuts.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidSystem(format!(
                    "cut points must be strictly increasing inside the interval: {} !< {}",
                    w[0], w[1]
                )));
            }
        }
        if branches.len() + 1 != cuts.len() {
            return Err(Error::InvalidSystem(format!(
                "{} interior cuts require {} branches, got {}",
                cuts.len() - 2,
                cuts.len() - 1,
                branches.len()
            )));
        }
        let snap_tol = if K::is_exact() {
            K::zero()
        } else {
            (b.clone() - a.clone()) * K::from_ratio(1, 1_000_000_000_000)
        };
        for (i, br) in branches.iter().enumerate() {
            if br.slope.is_zero() {
                return Err(Error::InvalidSystem(format!("branch {i} has zero slope")));
            }
            let yl = br.eval(&cuts[i]);
            let yr = br.eval(&cuts[i + 1]);
            let (lo, hi) = if yl <= yr { (yl, yr) } else { (yr, yl) };
            if lo < a.clone() - snap_tol.clone() || hi > b.clone() + snap_tol.clone() {
                return Err(Error::InvalidSystem(format!(
                    "branch {i} maps its interval onto [{lo}, {hi}], escaping [{a}, {b}]"
                )));
            }
        }
        Ok(System { cuts, branches, snap_tol })
    }

    /// Number of interior cuts `ℓ`.
    pub fn ell(&self) -> usize {
        self.cuts.len() - 2
    }

    pub fn num_branches(&self) -> usize {
        self.branches.len()
    }

    pub fn a(&self) -> &K {
        &self.cuts[0]
    }

    pub fn b(&self) -> &K {
        &self.cuts[self.cuts.len() - 1]
    }

    /// Cut `c_k` for `k = 0..=ℓ+1`, endpoints included.
    pub fn cut(&self, k: usize) -> &K {
        &self.cuts[k]
    }

    pub fn interior_cuts(&self) -> &[K] {
        &self.cuts[1..self.cuts.len() - 1]
    }

    pub fn branch(&self, i: usize) -> &Branch<K> {
        &self.branches[i]
    }

    pub fn branches(&self) -> &[Branch<K>] {
        &self.branches
    }

    pub fn sign(&self, i: usize) -> i64 {
        self.branches[i].sign()
    }

    pub fn weight(&self, i: usize) -> &K {
        &self.branches[i].weight
    }

    /// Germ at the left end of the interval (the only legal germ at `a`).
    pub fn left_germ(&self) -> Germ<K> {
        Germ::plus(self.a().clone())
    }

    /// Germ at the right end of the interval (the only legal germ at `b`).
    pub fn right_germ(&self) -> Germ<K> {
        Germ::minus(self.b().clone())
    }

    fn locate(&self, y: &K) -> Position {
        let n = self.cuts.len();
        for (k, c) in self.cuts.iter().enumerate() {
            if y == c {
                return Position::OnCut(k);
            }
            if !self.snap_tol.is_zero() && (y.clone() - c.clone()).abs() <= self.snap_tol {
                return Position::NearCut(k);
            }
        }
        if y < &self.cuts[0] || y > &self.cuts[n - 1] {
            return Position::Outside;
        }
        for i in 0..self.branches.len() {
            if &self.cuts[i] < y && y < &self.cuts[i + 1] {
                return Position::Interior(i);
            }
        }
        unreachable!("value inside the interval but in no branch");
    }

    /// Branch index the map applies at a point, failing on cuts.
    pub fn branch_of_point(&self, x: &K) -> Result<usize> {
        match self.locate(x) {
            Position::Interior(i) => Ok(i),
            Position::OnCut(_) => Err(Error::CutHit { value: x.to_string() }),
            Position::NearCut(k) if k == 0 || k == self.cuts.len() - 1 => {
                if x < self.a() || x > self.b() {
                    Err(Error::OutsideDomain { value: x.to_string() })
                } else {
                    Ok(if k == 0 { 0 } else { self.branches.len() - 1 })
                }
            }
            Position::NearCut(k) => Err(Error::GermAmbiguity {
                value: x.to_string(),
                nearest: self.cuts[k].to_string(),
            }),
            Position::Outside => Err(Error::OutsideDomain { value: x.to_string() }),
        }
    }

    /// Branch index the map applies at a germ.  Unlike points, a germ on a
    /// cut still has a well-defined branch: its side picks one.
    pub fn branch_of_germ(&self, g: &Germ<K>) -> Result<usize> {
        match self.locate(&g.base) {
            Position::Interior(i) => Ok(i),
            Position::OnCut(k) => match g.dir {
                Dir::Plus if k < self.branches.len() => Ok(k),
                Dir::Minus if k > 0 => Ok(k - 1),
                // (a,-) and (b,+) point out of the interval.
                _ => Err(Error::OutsideDomain { value: g.to_string() }),
            },
            Position::NearCut(k) if k == 0 || k == self.cuts.len() - 1 => {
                if &g.base < self.a() || &g.base > self.b() {
                    Err(Error::OutsideDomain { value: g.to_string() })
                } else {
                    Ok(if k == 0 { 0 } else { self.branches.len() - 1 })
                }
            }
            Position::NearCut(k) => Err(Error::GermAmbiguity {
                value: g.base.to_string(),
                nearest: self.cuts[k].to_string(),
            }),
            Position::Outside => Err(Error::OutsideDomain { value: g.to_string() }),
        }
    }

    /// One step of the map on germs: returns the image germ and the branch
    /// index used.  Image values that land within snap tolerance of an
    /// interior cut (without equaling it) are refused as ambiguous; values
    /// overshooting the interval by at most the tolerance are snapped back
    /// onto the endpoint.
    pub fn step_germ(&self, g: &Germ<K>) -> Result<(Germ<K>, usize)> {
        let i = self.branch_of_germ(g)?;
        let br = &self.branches[i];
        let y = br.eval(&g.base);
        let dir = g.dir.times_sign(br.sign());
        let base = match self.locate(&y) {
            Position::Interior(_) | Position::OnCut(_) => y,
            Position::NearCut(k) if k == 0 || k == self.cuts.len() - 1 => {
                if &y < self.a() {
                    self.a().clone()
                } else if &y > self.b() {
                    self.b().clone()
                } else {
                    y
                }
            }
            Position::NearCut(k) => {
                return Err(Error::GermAmbiguity {
                    value: y.to_string(),
                    nearest: self.cuts[k].to_string(),
                });
            }
            Position::Outside => {
                return Err(Error::OutsideDomain { value: y.to_string() });
            }
        };
        debug_assert!(
            !(&base == self.a() && dir == Dir::Minus) && !(&base == self.b() && dir == Dir::Plus),
            "validated branches cannot produce an outward germ at an endpoint"
        );
        Ok((Germ { base, dir }, i))
    }

    /// Germ orbit of length `n` with its multiplicative cocycles.
    pub fn germ_orbit(&self, start: &Germ<K>, n: usize) -> Result<GermOrbit<K>> {
        let mut germs = Vec::with_capacity(n + 1);
        let mut branches = Vec::with_capacity(n);
        let mut sg = Vec::with_capacity(n + 1);
        let mut g = Vec::with_capacity(n + 1);
        let mut s = Vec::with_capacity(n + 1);
        germs.push(start.clone());
        sg.push(K::one());
        g.push(K::one());
        s.push(1i64);
        for m in 0..n {
            let (next, i) = self.step_germ(&germs[m])?;
            branches.push(i);
            sg.push(
                sg[m].clone()
                    * self.branches[i].weight.clone()
                    * K::from_int(self.branches[i].sign()),
            );
            g.push(g[m].clone() * self.branches[i].weight.clone());
            s.push(s[m] * self.branches[i].sign());
            germs.push(next);
        }
        Ok(GermOrbit { germs, branches, sg, g, s })
    }

    /// Follow a germ until its orbit revisits a germ, returning the distinct
    /// germs in orbit order, the branch applied at each, and for each one the
    /// index of its image.  All systems built from dyadic data are eventually
    /// periodic on germs; the cap guards against the rest.
    pub fn orbit_closure(&self, start: &Germ<K>, cap: usize) -> Result<OrbitClosure<K>> {
        let mut germs: Vec<Germ<K>> = vec![start.clone()];
        let mut branches = Vec::new();
        let mut next = Vec::new();
        loop {
            if germs.len() > cap {
                return Err(Error::OrbitNotPreperiodic { steps: cap });
            }
            let last = germs.last().unwrap();
            let (img, i) = self.step_germ(last)?;
            branches.push(i);
            if let Some(pos) = germs.iter().position(|h| h == &img) {
                next.push(pos);
                return Ok(OrbitClosure { germs, branches, next });
            }
            next.push(germs.len());
            germs.push(img);
        }
    }

    /// Preimage trees of a point: `levels[p]` lists each `x` with
    /// `f^p(x) = y` whose intermediate orbit avoids all cuts, paired with its
    /// accumulated weight `g(x)·g(f x)···g(f^{p-1} x)`, sorted by `x`.
    ///
    /// The target `y` itself may be a cut (level 0 is always `[(y, 1)]`);
    /// deeper preimages are strictly interior to their branch by
    /// construction, so the avoidance condition propagates on its own.
    pub fn preimages(&self, y: &K, depth: usize) -> Result<Vec<Vec<(K, K)>>> {
        let mut levels = Vec::with_capacity(depth + 1);
        levels.push(vec![(y.clone(), K::one())]);
        for p in 0..depth {
            let mut next: Vec<(K, K)> = Vec::new();
            for (z, w) in &levels[p] {
                for (i, br) in self.branches.iter().enumerate() {
                    let x = br.invert(z);
                    match self.locate(&x) {
                        Position::Interior(j) if j == i => {
                            next.push((x, br.weight.clone() * w.clone()));
                        }
                        Position::NearCut(k) if k > 0 && k + 1 < self.cuts.len() => {
                            return Err(Error::GermAmbiguity {
                                value: x.to_string(),
                                nearest: self.cuts[k].to_string(),
                            });
                        }
                        _ => {}
                    }
                }
            }
            next.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap_or(Ordering::Equal));
            levels.push(next);
        }
        Ok(levels)
    }
}

/// A germ orbit `x̂, f x̂, ..., f^n x̂` together with the cocycles that
/// weight it: `sg[m]`, `g[m]`, `s[m]` are the products of `sign·weight`,
/// `weight`, and `sign` over the first `m` steps (`m = 0` gives 1).
#[derive(Debug, Clone)]
pub struct GermOrbit<K> {
    pub germs: Vec<Germ<K>>,
    pub branches: Vec<usize>,
    pub sg: Vec<K>,
    pub g: Vec<K>,
    pub s: Vec<i64>,
}

/// A germ orbit folded at its first repetition: `next[i]` indexes the image
/// of `germs[i]`, so the tail of the orbit is a cycle inside the list.
#[derive(Debug, Clone)]
pub struct OrbitClosure<K> {
    pub germs: Vec<Germ<K>>,
    pub branches: Vec<usize>,
    pub next: Vec<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::tent_with_inflow;
    use crate::germ::Dir;

    fn tent() -> System<f64> {
        System::new(
            0.0,
            1.0,
            vec![0.5],
            vec![
                Branch::new(2.0, 0.0, 1.0),
                Branch::new(-2.0, 2.0, 1.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn validation_rejects_malformed_systems() {
        assert!(System::new(0.0, 1.0, vec![0.7, 0.3], vec![
            Branch::new(1.0, 0.0, 1.0),
            Branch::new(1.0, 0.0, 1.0),
            Branch::new(1.0, 0.0, 1.0),
        ])
        .is_err());
        // Branch image escapes the interval.
        assert!(System::new(0.0, 1.0, vec![0.5], vec![
            Branch::new(3.0, 0.0, 1.0),
            Branch::new(-2.0, 2.0, 1.0),
        ])
        .is_err());
        assert!(System::new(0.0, 1.0, vec![0.5], vec![
            Branch::new(0.0, 0.5, 1.0),
            Branch::new(-2.0, 2.0, 1.0),
        ])
        .is_err());
        assert!(System::new(1.0, 0.0, vec![], vec![Branch::new(1.0, 0.0, 1.0)]).is_err());
    }

    #[test]
    fn tent_germ_orbit_from_left_of_cut() {
        let sys = tent();
        let orbit = sys.germ_orbit(&Germ::minus(0.5), 3).unwrap();
        let bases: Vec<f64> = orbit.germs.iter().map(|g| g.base).collect();
        let dirs: Vec<Dir> = orbit.germs.iter().map(|g| g.dir).collect();
        assert_eq!(bases, vec![0.5, 1.0, 0.0, 0.0]);
        assert_eq!(dirs, vec![Dir::Minus, Dir::Minus, Dir::Plus, Dir::Plus]);
        assert_eq!(orbit.branches, vec![0, 1, 0]);
        assert_eq!(orbit.s, vec![1, 1, -1, -1]);
        assert_eq!(orbit.sg, vec![1.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn weighted_cocycle_tracks_branch_weights() {
        let m = 7.0;
        let sys = tent_with_inflow(m);
        // (3,-) -> (2,-) -> (0,+) -> (0,+): branches 2, 1, 0.
        let orbit = sys.germ_orbit(&sys.right_germ(), 3).unwrap();
        assert_eq!(orbit.branches, vec![2, 1, 0]);
        assert_eq!(orbit.g, vec![1.0, m, m, m]);
        assert_eq!(orbit.sg, vec![1.0, m, -m, -m]);
    }

    #[test]
    fn germ_on_cut_picks_branch_by_side() {
        let sys = tent_with_inflow(1.0);
        assert_eq!(sys.branch_of_germ(&Germ::minus(1.0)).unwrap(), 0);
        assert_eq!(sys.branch_of_germ(&Germ::plus(1.0)).unwrap(), 1);
        assert_eq!(sys.branch_of_germ(&Germ::plus(0.0)).unwrap(), 0);
        assert!(sys.branch_of_germ(&Germ::minus(0.0)).is_err());
        assert!(sys.branch_of_germ(&Germ::plus(3.0)).is_err());
        assert!(sys.branch_of_point(&1.0).is_err());
        assert_eq!(sys.branch_of_point(&1.5).unwrap(), 1);
    }

    #[test]
    fn orbit_closure_folds_at_first_repeat() {
        let sys = tent();
        let closure = sys.orbit_closure(&Germ::minus(0.5), 100).unwrap();
        // (1/2)- -> 1- -> 0+ -> 0+ (fixed).
        assert_eq!(closure.germs.len(), 3);
        assert_eq!(closure.next, vec![1, 2, 2]);
        assert_eq!(closure.branches, vec![0, 1, 0]);
    }

    #[test]
    fn preimage_levels_double_for_the_tent() {
        let sys = tent();
        let levels = sys.preimages(&0.5, 3).unwrap();
        assert_eq!(levels[0], vec![(0.5, 1.0)]);
        assert_eq!(levels[1], vec![(0.25, 1.0), (0.75, 1.0)]);
        assert_eq!(
            levels[2].iter().map(|p| p.0).collect::<Vec<_>>(),
            vec![0.125, 0.375, 0.625, 0.875]
        );
        assert_eq!(levels[3].len(), 8);
    }

    #[test]
    fn preimages_vanish_past_the_image_of_every_branch() {
        // Each branch of this map has image ]0,2[, so y = 2.5 has no
        // preimages at all.
        let sys = tent_with_inflow(1.0);
        let levels = sys.preimages(&2.5, 2).unwrap();
        assert!(levels[1].is_empty());
        assert!(levels[2].is_empty());

        // y = 1 sits in every branch image, so it has three preimages; of
        // those, 5/2 escapes every image and contributes nothing deeper.
        let levels = sys.preimages(&1.0, 2).unwrap();
        assert_eq!(levels[1].len(), 3);
        assert_eq!(levels[2].len(), 6);
    }

    #[test]
    fn near_cut_image_is_refused_as_ambiguous() {
        let sys = System::new(
            0.0,
            1.0,
            vec![0.25],
            vec![
                Branch::new(1.0, 0.15 + 1e-13, 1.0),
                Branch::new(0.5, 0.0, 1.0),
            ],
        )
        .unwrap();
        let err = sys.step_germ(&Germ::plus(0.1)).unwrap_err();
        assert!(matches!(err, Error::GermAmbiguity { .. }));
    }

    #[test]
    fn exact_cut_hits_are_fine_on_germs() {
        let sys = tent();
        let (img, _) = sys.step_germ(&Germ::plus(0.25)).unwrap();
        assert_eq!(img, Germ::plus(0.5));
        let (img2, _) = sys.step_germ(&img).unwrap();
        assert_eq!(img2, Germ::minus(1.0));
    }

    #[test]
    fn rational_mode_has_no_snap_tolerance() {
        use crate::scalar::Rational;
        let q = |n: i64, d: i64| Rational::from_ratio(n, d);
        let sys = System::new(
            q(0, 1),
            q(1, 1),
            vec![q(1, 2)],
            vec![
                Branch::new(q(2, 1), q(0, 1), q(1, 1)),
                Branch::new(q(-2, 1), q(2, 1), q(1, 1)),
            ],
        )
        .unwrap();
        let orbit = sys.germ_orbit(&Germ::minus(q(1, 2)), 2).unwrap();
        assert_eq!(orbit.germs[1].base, q(1, 1));
        assert_eq!(orbit.germs[2].base, q(0, 1));
    }
}
