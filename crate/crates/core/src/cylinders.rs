//! Depth-first enumeration of cylinders (maximal intervals on which an
//! iterate is continuous and monotone), together with the weighted
//! fixed-point census they carry.
//!
//! A depth-`n` cylinder is visited with its itinerary word, its open
//! interval `]u,v[`, the image interval of `f^n`, the accumulated sign and
//! weight, and the crossing class `π ∈ {−1,0,+1}` of the chord of `f^n`
//! over it.  `ω = g^n·π` summed over all depth-`n` cylinders gives `N_n`,
//! whose generating function is the reciprocal of the kneading determinant.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::Series;
use crate::system::System;

/// Borrowed view of one cylinder during a walk.
pub struct CylinderView<'a, K> {
    pub depth: usize,
    pub word: &'a [usize],
    pub lo: &'a K,
    pub hi: &'a K,
    pub image_lo: &'a K,
    pub image_hi: &'a K,
    /// `s^n`, the sign of the iterate on this cylinder.
    pub sign: i64,
    /// `g^n`, the accumulated weight.
    pub weight: &'a K,
    /// `g^{n−1}`, the weight of the word minus its last letter — the weight
    /// carried by this cylinder's boundary germs through `n−1` steps.
    pub prefix_weight: &'a K,
    /// Crossing class of the chord of `f^n` against the diagonal.
    pub pi: i64,
}

impl<K: Scalar> CylinderView<'_, K> {
    pub fn omega(&self) -> K {
        self.weight.clone() * K::from_int(self.pi)
    }
}

fn side<K: Scalar>(base: &K, dir: i64, x: &K) -> i64 {
    if base < x {
        -1
    } else if base > x {
        1
    } else {
        dir
    }
}

/// `π` from the one-sided limits of `f^n` at the cylinder's endpoints:
/// `π = −Σ_{x̂ ∈ ∂̂α} σ(f^n x̂, x)·ε(f^n x̂)`, where the boundary germs are
/// `u⁺` and `v⁻` and `σ` is the half-signed side against the endpoint
/// itself.  Equivalent to classifying how the chord meets the diagonal.
fn crossing_class<K: Scalar>(lo: &K, hi: &K, image_lo: &K, image_hi: &K, sign: i64) -> i64 {
    let (u_base, u_eps) = if sign > 0 { (image_lo, 1) } else { (image_hi, -1) };
    let (v_base, v_eps) = if sign > 0 { (image_hi, -1) } else { (image_lo, 1) };
    let term_u = side(u_base, u_eps, lo) * u_eps;
    let term_v = side(v_base, v_eps, hi) * v_eps;
    -(term_u + term_v) / 2
}

/// Independent geometric classification of the chord `h` of `f^n` over
/// `]u,v[` (`h` affine with `h(u), h(v)` the one-sided limit values):
/// `+1` for a strict transversal crossing of the diagonal (slope `> 1` or
/// `< 0`), `−1` when `0 < slope ≤ 1` and the closed chord meets the
/// diagonal, `0` otherwise — in particular for a mere endpoint touch at
/// slope `> 1` or `< 0`.
pub fn chord_crossing_class<K: Scalar>(
    lo: &K,
    hi: &K,
    image_lo: &K,
    image_hi: &K,
    sign: i64,
) -> i64 {
    let (hu, hv) = if sign > 0 {
        (image_lo.clone(), image_hi.clone())
    } else {
        (image_hi.clone(), image_lo.clone())
    };
    let du = hu - lo.clone();
    let dv = hv - hi.clone();
    let zero = K::zero();
    if sign < 0 {
        return if du > zero && dv < zero { 1 } else { 0 };
    }
    let rise = if sign > 0 {
        image_hi.clone() - image_lo.clone()
    } else {
        image_lo.clone() - image_hi.clone()
    };
    let run = hi.clone() - lo.clone();
    if rise > run {
        // slope > 1
        if du < zero && dv > zero {
            1
        } else {
            0
        }
    } else if rise == run {
        // slope = 1: the chord lies on the diagonal or misses it entirely
        if du == zero {
            -1
        } else {
            0
        }
    } else {
        // 0 < slope < 1: d decreases, so the closure touches iff du ≥ 0 ≥ dv
        if du >= zero && dv <= zero {
            -1
        } else {
            0
        }
    }
}

struct Walker<'s, K, F> {
    sys: &'s System<K>,
    max_depth: usize,
    budget: usize,
    cap: usize,
    word: Vec<usize>,
    visit: F,
}

impl<K: Scalar, F: FnMut(CylinderView<'_, K>)> Walker<'_, K, F> {
    /// `(a_lin, b_lin)` is the composed affine map of the current word and
    /// `]img_lo,img_hi[` its image interval.
    fn descend(
        &mut self,
        img_lo: K,
        img_hi: K,
        a_lin: K,
        b_lin: K,
        sign: i64,
        weight: K,
    ) -> Result<()> {
        if self.word.len() >= self.max_depth {
            return Ok(());
        }
        for i in 0..self.sys.num_branches() {
            let cut_lo = self.sys.cut(i);
            let cut_hi = self.sys.cut(i + 1);
            let piece_lo = if &img_lo > cut_lo { img_lo.clone() } else { cut_lo.clone() };
            let piece_hi = if &img_hi < cut_hi { img_hi.clone() } else { cut_hi.clone() };
            if piece_lo >= piece_hi {
                continue;
            }
            self.budget += 1;
            if self.budget > self.cap {
                return Err(Error::CylinderBudget { cap: self.cap });
            }
            // Pull the piece back through the current composed map.
            let (child_lo, child_hi) = if a_lin > K::zero() {
                (
                    (piece_lo.clone() - b_lin.clone()) / a_lin.clone(),
                    (piece_hi.clone() - b_lin.clone()) / a_lin.clone(),
                )
            } else {
                (
                    (piece_hi.clone() - b_lin.clone()) / a_lin.clone(),
                    (piece_lo.clone() - b_lin.clone()) / a_lin.clone(),
                )
            };
            let branch = self.sys.branch(i);
            let f_lo = branch.eval(&piece_lo);
            let f_hi = branch.eval(&piece_hi);
            let (child_img_lo, child_img_hi) = if self.sys.sign(i) > 0 {
                (f_lo, f_hi)
            } else {
                (f_hi, f_lo)
            };
            let child_a = branch.slope.clone() * a_lin.clone();
            let child_b = branch.slope.clone() * b_lin.clone() + branch.intercept.clone();
            let child_sign = sign * self.sys.sign(i);
            let child_weight = weight.clone() * branch.weight.clone();
            self.word.push(i);
            let pi = crossing_class(
                &child_lo,
                &child_hi,
                &child_img_lo,
                &child_img_hi,
                child_sign,
            );
            (self.visit)(CylinderView {
                depth: self.word.len(),
                word: &self.word,
                lo: &child_lo,
                hi: &child_hi,
                image_lo: &child_img_lo,
                image_hi: &child_img_hi,
                sign: child_sign,
                weight: &child_weight,
                prefix_weight: &weight,
                pi,
            });
            self.descend(child_img_lo, child_img_hi, child_a, child_b, child_sign, child_weight)?;
            self.word.pop();
        }
        Ok(())
    }
}

/// Visit every cylinder of depth `1..=max_depth` in depth-first word
/// order.  Fails with [`Error::CylinderBudget`] once more than `cap`
/// cylinders have been generated.
pub fn walk<K: Scalar>(
    sys: &System<K>,
    max_depth: usize,
    cap: usize,
    visit: impl FnMut(CylinderView<'_, K>),
) -> Result<()> {
    let mut walker = Walker {
        sys,
        max_depth,
        budget: 0,
        cap,
        word: Vec::with_capacity(max_depth),
        visit,
    };
    walker.descend(sys.a().clone(), sys.b().clone(), K::one(), K::zero(), 1, K::one())
}

/// Per-depth aggregates of one cylinder walk.  Index `n` holds the data of
/// depth-`n` cylinders; index 0 is the trivial depth (one cylinder, unit
/// weight).
#[derive(Debug, Clone)]
pub struct Census<K> {
    pub counts: Vec<usize>,
    /// `N_n = Σ_α ω(α)`, the weighted crossing count.
    pub nn: Vec<K>,
    /// `Σ_α |g^n(α)|`, the weight 1-norm driving pressure estimates.
    pub l1: Vec<K>,
    /// `max_α |g^n(α)|`, the sup-norm whose n-th roots bound the interior
    /// spectral radius from above.
    pub linf: Vec<K>,
}

impl<K: Scalar> Census<K> {
    pub fn depth(&self) -> usize {
        self.counts.len() - 1
    }

    /// Smallest upper bound `min_n ‖g^n‖_∞^{1/n}` available from the walk.
    pub fn sup_radius_bound(&self) -> f64 {
        let mut best = f64::INFINITY;
        for n in 1..=self.depth() {
            let root = self.linf[n].to_f64().powf(1.0 / n as f64);
            if root < best {
                best = root;
            }
        }
        best
    }
}

pub fn census<K: Scalar>(sys: &System<K>, depth: usize, cap: usize) -> Result<Census<K>> {
    let mut counts = vec![0usize; depth + 1];
    let mut nn = vec![K::zero(); depth + 1];
    let mut l1 = vec![K::zero(); depth + 1];
    let mut linf = vec![K::zero(); depth + 1];
    counts[0] = 1;
    l1[0] = K::one();
    linf[0] = K::one();
    walk(sys, depth, cap, |view| {
        let n = view.depth;
        counts[n] += 1;
        nn[n] = nn[n].clone() + view.omega();
        let abs = view.weight.abs();
        l1[n] = l1[n].clone() + abs.clone();
        if abs > linf[n] {
            linf[n] = abs;
        }
    })?;
    Ok(Census { counts, nn, l1, linf })
}

/// `Z(t) = exp(Σ_{n≥1} N_n·tⁿ/n)` truncated at `degree`; requires the
/// census to reach that depth.
pub fn zeta_series<K: Scalar>(nn: &[K], degree: usize) -> Result<Series<K>> {
    assert!(nn.len() > degree, "census too shallow for requested degree");
    let mut arg = Series::zero(degree);
    for n in 1..=degree {
        arg.set_coeff(n, nn[n].clone() / K::from_int(n as i64));
    }
    arg.exp()
}

/// Coefficients of `Z(t)·𝒟(t) − 1`, which vanish identically.
pub fn zeta_det_residual<K: Scalar>(nn: &[K], det: &Series<K>, degree: usize) -> Result<Series<K>> {
    let z = zeta_series(nn, degree)?;
    let prod = &z * &det.truncate(degree);
    Ok(&prod - &Series::one(degree))
}

/// Coefficients of `N_f(t) + 𝒟'(t)/𝒟(t)` through `degree`, where
/// `N_f = Σ_{n≥1} N_n·t^{n−1}`; also identically zero.
pub fn log_derivative_residual<K: Scalar>(
    nn: &[K],
    det: &Series<K>,
    degree: usize,
) -> Result<Series<K>> {
    assert!(nn.len() > degree + 1, "census too shallow for requested degree");
    let nf = Series::from_fn(degree, |m| nn[m + 1].clone());
    let logderiv = &det.derivative().truncate(degree) * &det.inverse()?.truncate(degree);
    Ok(&nf + &logderiv)
}

/// One fully materialized cylinder, for listings.
#[derive(Debug, Clone)]
pub struct CylinderRecord<K> {
    pub word: Vec<usize>,
    pub lo: K,
    pub hi: K,
    pub image_lo: K,
    pub image_hi: K,
    pub sign: i64,
    pub weight: K,
    pub pi: i64,
    pub omega: K,
}

pub fn collect<K: Scalar>(
    sys: &System<K>,
    depth: usize,
    cap: usize,
) -> Result<Vec<CylinderRecord<K>>> {
    let mut out = Vec::new();
    walk(sys, depth, cap, |view| {
        out.push(CylinderRecord {
            word: view.word.to_vec(),
            lo: view.lo.clone(),
            hi: view.hi.clone(),
            image_lo: view.image_lo.clone(),
            image_hi: view.image_hi.clone(),
            sign: view.sign,
            weight: view.weight.clone(),
            pi: view.pi,
            omega: view.omega(),
        });
    })?;
    Ok(out)
}
