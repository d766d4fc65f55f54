//! Piecewise-linear straightening of a weighted system.
//!
//! The central object is the weighted lap series of a germ interval `J`:
//! the coefficient of `tⁿ` collects, over every cylinder of depth `n+1`,
//! half the weight of the cylinder's word *minus its last letter* for each
//! of its two boundary germs whose base point lies in `J`.  Writing
//! `ℒ(x̂) = L(⟨a⁺, x̂⟩, t)` for the cumulative series up to a germ `x̂`, the
//! normalized map
//!
//! ```text
//!   φ_t(x̂) = ℒ(x̂, t) / ℒ(b⁻, t)
//! ```
//!
//! is monotone for subcritical `t` and conjugates every branch to an affine
//! map of slope `s_i/(t·g_i)` — see [`model_map`].  As `t` increases to the
//! smallest positive zero `t*` of the kneading determinant, `φ_t` converges
//! to the distribution function of a measure that scales by exactly
//! `1/t*` under the map; [`Lambda`] extrapolates it and [`critical_model`]
//! builds the corresponding piecewise-linear model with constant expansion.
//!
//! Three independent routes compute the same lap series — a direct cylinder
//! census, the cut-preimage counting series, and a branch-by-branch
//! recursion ([`PhiMap`]) — and the test suite insists they agree
//! coefficient by coefficient.

use crate::cylinders;
use crate::error::{Error, Result};
use crate::germ::{Dir, Germ, GermInterval};
use crate::kneading::{kneading_matrix, theta_row, PreimageTable};
use crate::linalg;
use crate::scalar::Scalar;
use crate::series::Series;
use crate::system::{Branch, System};

/// Germ orbits are followed until they revisit a germ; give up after this
/// many distinct germs (non-preperiodic data, e.g. irrational cuts).
const CLOSURE_CAP: usize = 100_000;

/// Relative size of a branch image under the critical measure below which
/// the branch is dropped from the critical model.
const COLLAPSE_TOL: f64 = 1e-9;

/// Largest translation allowed when nudging a critical-model branch image
/// back inside the unit interval.
const IMAGE_REPAIR_TOL: f64 = 1e-6;

// ---------------------------------------------------------------------------
// Germ and point weight series.

/// `G(x̂, t) = Σ_q t^q·g^q(x̂)`, the weight series along the orbit of a germ.
pub fn germ_weight_series<K: Scalar>(
    sys: &System<K>,
    germ: &Germ<K>,
    degree: usize,
) -> Result<Series<K>> {
    let orbit = sys.germ_orbit(germ, degree)?;
    Ok(Series::from_fn(degree, |q| orbit.g[q].clone()))
}

/// `G(x, t) = ½(G(x⁻) + G(x⁺))` for an interior point (both germs legal).
pub fn point_weight_series<K: Scalar>(
    sys: &System<K>,
    x: &K,
    degree: usize,
) -> Result<Series<K>> {
    let minus = germ_weight_series(sys, &Germ::minus(x.clone()), degree)?;
    let plus = germ_weight_series(sys, &Germ::plus(x.clone()), degree)?;
    Ok((&minus + &plus).scale(&K::half()))
}

/// Exact value of `G(x̂, t)` at a scalar `t`, summing the eventual cycle of
/// the germ orbit in closed form.  Fails if the cycle weight `t^Q·g^Q` has
/// modulus ≥ 1 (the series diverges there).
pub fn germ_weight_scalar<K: Scalar>(sys: &System<K>, germ: &Germ<K>, t: &K) -> Result<K> {
    let cl = sys.orbit_closure(germ, CLOSURE_CAP)?;
    let len = cl.germs.len();
    let lambda = cl.next[len - 1];
    let mut head = K::zero();
    let mut run = K::one();
    for q in 0..lambda {
        head = head + run.clone();
        run = run * t.clone() * sys.weight(cl.branches[q]).clone();
    }
    // `run` is now t^λ·g^λ; sum one period of the cycle.
    let mut cyc = K::zero();
    let mut cyc_run = K::one();
    for r in lambda..len {
        cyc = cyc + cyc_run.clone();
        cyc_run = cyc_run * t.clone() * sys.weight(cl.branches[r]).clone();
    }
    if cyc_run.abs() >= K::one() {
        return Err(Error::Numeric(format!(
            "weight series of {germ} diverges at t = {t}: cycle weight {cyc_run}"
        )));
    }
    Ok(head + run * cyc / (K::one() - cyc_run))
}

// ---------------------------------------------------------------------------
// Lap series, three ways.

/// Lap series of a germ interval by direct cylinder census: walk every
/// cylinder of depth `1..=degree+1` and credit half its prefix weight per
/// boundary point falling in `j`.
pub fn lap_series_census<K: Scalar>(
    sys: &System<K>,
    j: &GermInterval<K>,
    degree: usize,
    cap: usize,
) -> Result<Series<K>> {
    let mut coeffs = vec![K::zero(); degree + 1];
    cylinders::walk(sys, degree + 1, cap, |view| {
        let n = view.depth - 1;
        let mut hits = 0i64;
        if j.contains_point(view.lo) {
            hits += 1;
        }
        if j.contains_point(view.hi) {
            hits += 1;
        }
        if hits != 0 {
            coeffs[n] = coeffs[n].clone()
                + view.prefix_weight.clone() * K::from_int(hits) * K::half();
        }
    })?;
    Ok(Series::from_coeffs(coeffs))
}

/// Lap series of a germ interval from the cut-preimage counting series:
/// `L(J) = Σ_j γ_{c_j,J}·G(c_j)`, plus the boundary atoms `½G(a⁺)`/`½G(b⁻)`
/// when `J` contains an endpoint of the interval.
pub fn lap_series_from_counts<K: Scalar>(
    sys: &System<K>,
    tables: &[PreimageTable<K>],
    j: &GermInterval<K>,
    degree: usize,
) -> Result<Series<K>> {
    let mut acc = Series::zero(degree);
    for k in 1..=sys.ell() {
        let gamma = tables[k - 1].gamma(j, degree);
        let g = point_weight_series(sys, sys.cut(k), degree)?;
        acc = &acc + &(&gamma * &g);
    }
    if j.contains_point(sys.a()) {
        let g = germ_weight_series(sys, &sys.left_germ(), degree)?;
        acc = &acc + &g.scale(&K::half());
    }
    if j.contains_point(sys.b()) {
        let g = germ_weight_series(sys, &sys.right_germ(), degree)?;
        acc = &acc + &g.scale(&K::half());
    }
    Ok(acc)
}

/// Lap series of a single point.  An interior point contributes
/// `t^p·g^p(x)·G(c_k)` where `c_k` is the first interior cut its orbit
/// hits (at step `p`); the endpoints carry the atoms `½G(a⁺)`, `½G(b⁻)`.
pub fn lap_point<K: Scalar>(sys: &System<K>, x: &K, degree: usize) -> Result<Series<K>> {
    if x == sys.a() {
        return Ok(germ_weight_series(sys, &sys.left_germ(), degree)?.scale(&K::half()));
    }
    if x == sys.b() {
        return Ok(germ_weight_series(sys, &sys.right_germ(), degree)?.scale(&K::half()));
    }
    if x < sys.a() || x > sys.b() {
        return Err(Error::OutsideDomain { value: x.to_string() });
    }
    let mut y = x.clone();
    let mut w = K::one();
    for p in 0..=degree {
        for k in 1..=sys.ell() {
            if &y == sys.cut(k) {
                let g = point_weight_series(sys, sys.cut(k), degree)?;
                return Ok(g.scale(&w).shift_up(p));
            }
        }
        if &y == sys.a() || &y == sys.b() {
            // Interior orbits can only reach an endpoint through an interior
            // cut first; getting here means degenerate float input.
            return Err(Error::Numeric(format!(
                "orbit of {x} reached the boundary without crossing a cut"
            )));
        }
        let i = sys.branch_of_point(&y)?;
        w = w * sys.weight(i).clone();
        y = sys.branch(i).eval(&y);
    }
    Ok(Series::zero(degree))
}

// ---------------------------------------------------------------------------
// Cumulative lap solver.

/// Truncated cumulative lap series `ℒ(x̂) = L(⟨a⁺, x̂⟩, t)` for every germ,
/// solved degree by degree from the branch recursion
///
/// ```text
///   ℒ(x̂) = ℒ(c_j⁺) + t·s_j·g_j·(ℒ(f x̂) − ℒ(f c_j⁺)),   x̂ in branch j,
/// ```
///
/// where the per-branch offsets telescope through the cut germs:
/// `ℒ(c_{j+1}⁺) = ℒ(c_{j+1}⁻) + G(c_{j+1})`.  The coefficient of `tᵏ` on
/// the left only needs coefficients of `t^{k-1}` on the right, so the whole
/// table is triangular in `(degree, branch)`.
#[derive(Debug, Clone)]
pub struct PhiMap<K> {
    sys: System<K>,
    degree: usize,
    /// `sg[j] = s_j·g_j`.
    sg: Vec<K>,
    /// `a_series[j] = ℒ(c_j⁺)`.
    a_series: Vec<Series<K>>,
    /// `anchor_series[j] = ℒ(f(c_j⁺))`, truncated at `degree − 1`.
    anchor_series: Vec<Series<K>>,
    /// `minus_lap[i] = ℒ(c_{i+1}⁻)`; the last entry is `ℒ(b⁻)`, the total.
    minus_lap: Vec<Series<K>>,
}

impl<K: Scalar> PhiMap<K> {
    pub fn new(sys: &System<K>, degree: usize) -> Result<Self> {
        let nb = sys.num_branches();
        let mut seeds = Vec::with_capacity(2 * nb);
        for i in 0..nb {
            seeds.push(Germ::plus(sys.cut(i).clone()));
        }
        for i in 0..nb {
            seeds.push(Germ::minus(sys.cut(i + 1).clone()));
        }
        let mut branch_idx: Vec<Vec<usize>> = Vec::with_capacity(2 * nb);
        for seed in &seeds {
            let orbit = sys.germ_orbit(seed, degree)?;
            let mut bi = orbit.branches.clone();
            bi.push(sys.branch_of_germ(&orbit.germs[degree])?);
            branch_idx.push(bi);
        }
        let mut gpt = Vec::with_capacity(sys.ell());
        for i in 1..=sys.ell() {
            gpt.push(point_weight_series(sys, sys.cut(i), degree)?);
        }
        let sg: Vec<K> = (0..nb)
            .map(|j| K::from_int(sys.sign(j)) * sys.weight(j).clone())
            .collect();

        // vals[s][m][k]: coefficient k of ℒ at orbit position m of seed s,
        // filled for m + k ≤ degree.
        let mut vals: Vec<Vec<Vec<K>>> = branch_idx
            .iter()
            .map(|bi| {
                (0..=degree)
                    .map(|m| {
                        let mut row = vec![K::zero(); degree + 1];
                        row[0] = K::from_int(bi[m] as i64);
                        row
                    })
                    .collect()
            })
            .collect();
        for k in 1..=degree {
            for j in 0..nb {
                // Offset ℒ(c_j⁺) = ℒ(c_j⁻) + G(c_j); branch j−1 holds c_j⁻,
                // so its positions are already done this round.
                let a_jk = if j == 0 {
                    K::zero()
                } else {
                    vals[nb + j - 1][0][k].clone() + gpt[j - 1].coeff(k)
                };
                let anchor = vals[j][1][k - 1].clone();
                for s in 0..2 * nb {
                    for m in 0..=degree - k {
                        if branch_idx[s][m] != j {
                            continue;
                        }
                        let prev = vals[s][m + 1][k - 1].clone();
                        vals[s][m][k] =
                            a_jk.clone() + sg[j].clone() * (prev - anchor.clone());
                    }
                }
            }
        }

        let a_series: Vec<Series<K>> =
            (0..nb).map(|j| Series::from_coeffs(vals[j][0].clone())).collect();
        let anchor_series: Vec<Series<K>> = (0..nb)
            .map(|j| {
                if degree == 0 {
                    Series::zero(0)
                } else {
                    Series::from_coeffs(vals[j][1][..degree].to_vec())
                }
            })
            .collect();
        let minus_lap: Vec<Series<K>> =
            (0..nb).map(|i| Series::from_coeffs(vals[nb + i][0].clone())).collect();
        Ok(PhiMap {
            sys: sys.clone(),
            degree,
            sg,
            a_series,
            anchor_series,
            minus_lap,
        })
    }

    pub fn system(&self) -> &System<K> {
        &self.sys
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `ℒ(b⁻)`: the lap series of the whole open interval.
    pub fn total(&self) -> &Series<K> {
        &self.minus_lap[self.minus_lap.len() - 1]
    }

    /// Cumulative lap series `ℒ(x̂)` of an arbitrary germ, by running the
    /// branch recursion along its orbit against the stored offsets.
    pub fn lap_to(&self, germ: &Germ<K>) -> Result<Series<K>> {
        let degree = self.degree;
        let orbit = self.sys.germ_orbit(germ, degree)?;
        let mut bi = orbit.branches.clone();
        bi.push(self.sys.branch_of_germ(&orbit.germs[degree])?);
        let mut vals: Vec<Vec<K>> = (0..=degree)
            .map(|m| {
                let mut row = vec![K::zero(); degree + 1];
                row[0] = K::from_int(bi[m] as i64);
                row
            })
            .collect();
        for k in 1..=degree {
            for m in 0..=degree - k {
                let j = bi[m];
                vals[m][k] = self.a_series[j].coeff(k)
                    + self.sg[j].clone()
                        * (vals[m + 1][k - 1].clone() - self.anchor_series[j].coeff(k - 1));
            }
        }
        Ok(Series::from_coeffs(vals.swap_remove(0)))
    }

    /// Lap series of a germ interval, `L(⟨û,v̂⟩) = ℒ(v̂) − ℒ(û)`.
    pub fn lap_interval(&self, j: &GermInterval<K>) -> Result<Series<K>> {
        match j.endpoints() {
            None => Ok(Series::zero(self.degree)),
            Some((lo, hi)) => Ok(&self.cumulative(hi)? - &self.cumulative(lo)?),
        }
    }

    /// `ℒ` extended across the boundary by the endpoint atoms, so closed
    /// and half-closed intervals (whose outward germs carry no orbit) count
    /// the endpoint mass they contain: `ℒ(a⁻) = ℒ(a⁺) − ½G(a⁺)` and
    /// `ℒ(b⁺) = ℒ(b⁻) + ½G(b⁻)`.
    fn cumulative(&self, germ: &Germ<K>) -> Result<Series<K>> {
        if germ.base == *self.sys.a() && germ.dir == Dir::Minus {
            let inward = self.sys.left_germ();
            let atom = germ_weight_series(&self.sys, &inward, self.degree)?.scale(&K::half());
            return Ok(&self.lap_to(&inward)? - &atom);
        }
        if germ.base == *self.sys.b() && germ.dir == Dir::Plus {
            let inward = self.sys.right_germ();
            let atom = germ_weight_series(&self.sys, &inward, self.degree)?.scale(&K::half());
            return Ok(&self.lap_to(&inward)? + &atom);
        }
        self.lap_to(germ)
    }

    /// `φ_t(x̂) = ℒ(x̂)(t)/ℒ(b⁻)(t)` with a truncation-tail guard on both
    /// evaluations (see [`eval_with_tail_check`]).
    pub fn phi_at(&self, germ: &Germ<K>, t: &K, tail_tol: f64) -> Result<K> {
        let num = self.lap_to(germ)?;
        let nv = eval_with_tail_check(&num, t, tail_tol)?;
        let dv = eval_with_tail_check(self.total(), t, tail_tol)?;
        if dv.is_zero() {
            return Err(Error::Numeric(format!("total lap series vanishes at t = {t}")));
        }
        Ok(nv / dv)
    }
}

/// Evaluate a truncated series at `t`, refusing when the tail it cannot see
/// looks significant: the last few retained terms must decay geometrically
/// and their extrapolated tail must stay below `tol`.
pub fn eval_with_tail_check<K: Scalar>(series: &Series<K>, t: &K, tol: f64) -> Result<K> {
    const WINDOW: usize = 10;
    let n = series.degree();
    let tf = t.to_f64().abs();
    let lo = n.saturating_sub(WINDOW - 1);
    let mags: Vec<f64> =
        (lo..=n).map(|m| series.coeff(m).to_f64().abs() * tf.powi(m as i32)).collect();
    let mut q: f64 = 0.0;
    for w in mags.windows(2) {
        if w[0] == 0.0 {
            if w[1] != 0.0 {
                q = f64::INFINITY;
            }
        } else {
            q = q.max(w[1] / w[0]);
        }
    }
    if q >= 0.95 {
        return Err(Error::Numeric(format!(
            "series tail is not decaying at t = {t} (term ratio {q:.3}); \
             raise the truncation degree or lower t"
        )));
    }
    let last = *mags.last().unwrap();
    let tail = last * q / (1.0 - q);
    if tail > tol {
        return Err(Error::Numeric(format!(
            "estimated truncation tail {tail:.3e} exceeds tolerance {tol:.1e} at t = {t}"
        )));
    }
    Ok(series.eval(t))
}

// ---------------------------------------------------------------------------
// The straightened model at subcritical t.

/// Image of the system under `φ_t`: branch `i` of the original map becomes
/// the affine map `slopes[i]·y + intercepts[i]` on
/// `[φ(c_i⁺), φ(c_{i+1}⁻)]`.  Consecutive intervals are separated by gaps
/// (the `φ`-mass of the cut points), so the model is defined on a Cantor-like
/// subset of `[0,1]` for `t` strictly below critical.
#[derive(Debug, Clone)]
pub struct ModelMap<K> {
    pub t: K,
    pub intervals: Vec<(K, K)>,
    pub slopes: Vec<K>,
    pub intercepts: Vec<K>,
    /// Branches whose model interval collapsed (nonpositive width).
    pub degenerate: Vec<bool>,
    /// `φ(c_i⁺) − φ(c_i⁻)` for each interior cut, in order.
    pub gaps: Vec<K>,
}

impl<K: Scalar> ModelMap<K> {
    pub fn eval(&self, branch: usize, y: &K) -> K {
        self.slopes[branch].clone() * y.clone() + self.intercepts[branch].clone()
    }

    /// True when every pair of adjacent model intervals is separated by a
    /// positive gap.
    pub fn disjoint(&self) -> bool {
        self.gaps.iter().all(|g| g > &K::zero())
    }
}

/// Build the straightened model at `t` from a solved [`PhiMap`].  Each
/// branch must carry a strictly positive weight — the model slope is
/// `s_i/(t·g_i)`, anchored so that `φ(f c_i⁺) = f̃(φ(c_i⁺))`.
pub fn model_map<K: Scalar>(phi: &PhiMap<K>, t: &K, tail_tol: f64) -> Result<ModelMap<K>> {
    let sys = &phi.sys;
    let nb = sys.num_branches();
    for i in 0..nb {
        if !(sys.weight(i) > &K::zero()) {
            return Err(Error::InvalidSystem(format!(
                "branch {i} has nonpositive weight; the straightened slope s/(t·g) needs g > 0"
            )));
        }
    }
    let total = eval_with_tail_check(phi.total(), t, tail_tol)?;
    if total.is_zero() {
        return Err(Error::Numeric(format!("total lap series vanishes at t = {t}")));
    }
    let mut phi_plus = Vec::with_capacity(nb);
    let mut phi_minus = Vec::with_capacity(nb);
    let mut phi_anchor = Vec::with_capacity(nb);
    for i in 0..nb {
        phi_plus.push(eval_with_tail_check(&phi.a_series[i], t, tail_tol)? / total.clone());
        phi_minus.push(eval_with_tail_check(&phi.minus_lap[i], t, tail_tol)? / total.clone());
        phi_anchor
            .push(eval_with_tail_check(&phi.anchor_series[i], t, tail_tol)? / total.clone());
    }
    let mut intervals = Vec::with_capacity(nb);
    let mut slopes = Vec::with_capacity(nb);
    let mut intercepts = Vec::with_capacity(nb);
    let mut degenerate = Vec::with_capacity(nb);
    for i in 0..nb {
        let slope = K::from_int(sys.sign(i)) / (t.clone() * sys.weight(i).clone());
        let intercept = phi_anchor[i].clone() - slope.clone() * phi_plus[i].clone();
        degenerate.push(phi_minus[i] <= phi_plus[i]);
        intervals.push((phi_plus[i].clone(), phi_minus[i].clone()));
        slopes.push(slope);
        intercepts.push(intercept);
    }
    let gaps = (1..nb).map(|i| phi_plus[i].clone() - phi_minus[i - 1].clone()).collect();
    Ok(ModelMap { t: t.clone(), intervals, slopes, intercepts, degenerate, gaps })
}

/// `|φ(f x̂) − f̃(φ(x̂))|` at one germ: how far the model is from an exact
/// conjugacy at finite truncation.
pub fn conjugacy_residual<K: Scalar>(
    phi: &PhiMap<K>,
    model: &ModelMap<K>,
    germ: &Germ<K>,
    tail_tol: f64,
) -> Result<f64> {
    let j = phi.sys.branch_of_germ(germ)?;
    let x = phi.phi_at(germ, &model.t, tail_tol)?;
    let (img, _) = phi.sys.step_germ(germ)?;
    let y = phi.phi_at(&img, &model.t, tail_tol)?;
    Ok((y - model.eval(j, &x)).to_f64().abs())
}

// ---------------------------------------------------------------------------
// Independent reconstruction from the kneading matrix.

/// Rebuild the straightening from kneading data alone: solve
/// `ℛ(t)·w = (0, G(c_1,t), …, G(c_ℓ,t))ᵀ` and form
/// `h(x̂) = Σ_k θ(x̂; c_k)(t)·w_k`, normalized to send `a⁺ ↦ 0`, `b⁻ ↦ 1`.
/// For subcritical `t` this reproduces `φ_t` without ever counting laps,
/// which makes it a sharp cross-check on both computations.
#[derive(Debug, Clone)]
pub struct HCrossCheck<K> {
    sys: System<K>,
    t: K,
    degree: usize,
    w: Vec<K>,
    h_a: K,
    h_b: K,
}

impl<K: Scalar> HCrossCheck<K> {
    pub fn new(sys: &System<K>, t: &K, degree: usize) -> Result<Self> {
        let ell = sys.ell();
        let kn = kneading_matrix(sys, degree)?;
        let rt = kn.eval(t);
        let mut rhs = vec![K::zero(); ell + 1];
        for k in 1..=ell {
            rhs[k] = point_weight_series(sys, sys.cut(k), degree)?.eval(t);
        }
        let w = linalg::solve(rt, rhs)?;
        let raw = |germ: &Germ<K>| -> Result<K> {
            let row = theta_row(sys, germ, degree)?;
            let mut acc = K::zero();
            for k in 0..=ell {
                acc = acc + row[k].eval(t) * w[k].clone();
            }
            Ok(acc)
        };
        let h_a = raw(&sys.left_germ())?;
        let h_b = raw(&sys.right_germ())?;
        if (h_b.clone() - h_a.clone()).is_zero() {
            return Err(Error::Numeric(format!(
                "kneading cross-check degenerates at t = {t}: h(a⁺) = h(b⁻)"
            )));
        }
        Ok(HCrossCheck { sys: sys.clone(), t: t.clone(), degree, w, h_a, h_b })
    }

    pub fn eval(&self, germ: &Germ<K>) -> Result<K> {
        let row = theta_row(&self.sys, germ, self.degree)?;
        let mut acc = K::zero();
        for k in 0..row.len() {
            acc = acc + row[k].eval(&self.t) * self.w[k].clone();
        }
        Ok((acc - self.h_a.clone()) / (self.h_b.clone() - self.h_a.clone()))
    }
}

// ---------------------------------------------------------------------------
// Exact scalar lap values.

/// Exact values of `ℒ(·, t)` at a fixed scalar `t`, obtained by solving the
/// branch recursion over the finite germ closure of all cut germs instead
/// of truncating a power series.  This has no truncation error at all —
/// the only inputs are the cycle-resummed weight series `G(c_j, t)` — so it
/// can be evaluated arbitrarily close to the critical parameter.
#[derive(Debug, Clone)]
pub struct ScalarLap<K> {
    sys: System<K>,
    germs: Vec<Germ<K>>,
    next: Vec<usize>,
    values: Vec<K>,
    /// `t·s_j·g_j` per branch.
    tsg: Vec<K>,
    nb: usize,
}

impl<K: Scalar> ScalarLap<K> {
    pub fn new(sys: &System<K>, t: &K) -> Result<Self> {
        let nb = sys.num_branches();
        // Seeds: every cut germ, plus sides first (index j < nb is c_j⁺,
        // index nb+i is c_{i+1}⁻), then everything their orbits visit.
        let mut germs: Vec<Germ<K>> = Vec::new();
        for i in 0..nb {
            germs.push(Germ::plus(sys.cut(i).clone()));
        }
        for i in 0..nb {
            germs.push(Germ::minus(sys.cut(i + 1).clone()));
        }
        let mut next: Vec<usize> = Vec::new();
        let mut head = 0;
        while head < germs.len() {
            let (img, _) = sys.step_germ(&germs[head])?;
            let idx = match germs.iter().position(|h| h == &img) {
                Some(p) => p,
                None => {
                    germs.push(img);
                    germs.len() - 1
                }
            };
            next.push(idx);
            head += 1;
            if germs.len() > CLOSURE_CAP {
                return Err(Error::OrbitNotPreperiodic { steps: CLOSURE_CAP });
            }
        }
        let tsg: Vec<K> = (0..nb)
            .map(|j| t.clone() * K::from_int(sys.sign(j)) * sys.weight(j).clone())
            .collect();
        let mut gpt = Vec::with_capacity(sys.ell());
        for i in 1..=sys.ell() {
            let gm = germ_weight_scalar(sys, &Germ::minus(sys.cut(i).clone()), t)?;
            let gp = germ_weight_scalar(sys, &Germ::plus(sys.cut(i).clone()), t)?;
            gpt.push((gm + gp) * K::half());
        }
        // One unknown per closure germ.  Cut germs on their plus side obey
        // the telescoping offsets (their recursion row is vacuous); every
        // other germ obeys the branch recursion.
        let n = germs.len();
        let mut a = vec![vec![K::zero(); n]; n];
        let mut b = vec![K::zero(); n];
        for i in 0..n {
            a[i][i] = a[i][i].clone() + K::one();
            if i < nb {
                if i > 0 {
                    let mi = nb + i - 1;
                    a[i][mi] = a[i][mi].clone() - K::one();
                    b[i] = gpt[i - 1].clone();
                }
            } else {
                let j = sys.branch_of_germ(&germs[i])?;
                a[i][j] = a[i][j].clone() - K::one();
                let ni = next[i];
                a[i][ni] = a[i][ni].clone() - tsg[j].clone();
                let anch = next[j];
                a[i][anch] = a[i][anch].clone() + tsg[j].clone();
            }
        }
        let values = linalg::solve(a, b)?;
        Ok(ScalarLap { sys: sys.clone(), germs, next, values, tsg, nb })
    }

    /// `ℒ(b⁻, t)`, the lap value of the whole open interval.
    pub fn total(&self) -> &K {
        &self.values[2 * self.nb - 1]
    }

    /// `ℒ(x̂, t)` for an arbitrary germ: unroll the branch recursion along
    /// its orbit until it meets the solved closure, or resolve its own
    /// cycle in closed form if it never does.
    pub fn eval(&self, germ: &Germ<K>) -> Result<K> {
        if let Some(i) = self.germs.iter().position(|h| h == germ) {
            return Ok(self.values[i].clone());
        }
        let mut path: Vec<Germ<K>> = vec![germ.clone()];
        // v_m = u_m + w_m·v_{m+1} along the orbit.
        let mut steps: Vec<(K, K)> = Vec::new();
        loop {
            let cur = path.last().unwrap();
            let j = self.sys.branch_of_germ(cur)?;
            let u = self.values[j].clone()
                - self.tsg[j].clone() * self.values[self.next[j]].clone();
            steps.push((u, self.tsg[j].clone()));
            let (img, _) = self.sys.step_germ(cur)?;
            if let Some(i) = self.germs.iter().position(|h| h == &img) {
                let mut v = self.values[i].clone();
                for (u, w) in steps.iter().rev() {
                    v = u.clone() + w.clone() * v;
                }
                return Ok(v);
            }
            if let Some(p) = path.iter().position(|h| h == &img) {
                // Orbit closed on itself away from the cut germs: compose
                // the cycle v_p = U + W·v_p and solve.
                let mut big_u = K::zero();
                let mut big_w = K::one();
                for (u, w) in &steps[p..] {
                    big_u = big_u + big_w.clone() * u.clone();
                    big_w = big_w * w.clone();
                }
                let denom = K::one() - big_w;
                if denom.is_zero() {
                    return Err(Error::Numeric(format!(
                        "lap evaluation of {germ} hit a cycle of weight exactly one"
                    )));
                }
                let mut v = big_u / denom;
                for (u, w) in steps[..p].iter().rev() {
                    v = u.clone() + w.clone() * v;
                }
                return Ok(v);
            }
            if path.len() > CLOSURE_CAP {
                return Err(Error::OrbitNotPreperiodic { steps: CLOSURE_CAP });
            }
            path.push(img);
        }
    }

    /// `φ_t(x̂) = ℒ(x̂,t)/ℒ(b⁻,t)`, exactly at this `t`.
    pub fn phi(&self, germ: &Germ<K>) -> Result<K> {
        Ok(self.eval(germ)? / self.total().clone())
    }
}

// ---------------------------------------------------------------------------
// The critical measure.

/// Distribution function of the measure `Λ = lim_{t↑t*} φ_t`, computed by
/// Richardson extrapolation of exact scalar lap values at
/// `t_k = (1−δ_k)·t*`, `δ_k = 10⁻², 10⁻³, 10⁻⁴`.  The extrapolation
/// weights are the Lagrange coefficients at `δ = 0` (they sum to one); each
/// query verifies that the three samples actually converge and refuses
/// otherwise.
#[derive(Debug, Clone)]
pub struct Lambda<K> {
    t_star: K,
    laps: Vec<ScalarLap<K>>,
    weights: Vec<K>,
    a: K,
    b: K,
}

impl<K: Scalar> Lambda<K> {
    pub fn new(sys: &System<K>, t_star: &K) -> Result<Self> {
        let deltas =
            [K::from_ratio(1, 100), K::from_ratio(1, 1000), K::from_ratio(1, 10000)];
        let mut laps = Vec::with_capacity(3);
        for d in &deltas {
            let t = t_star.clone() * (K::one() - d.clone());
            laps.push(ScalarLap::new(sys, &t)?);
        }
        let mut weights = Vec::with_capacity(3);
        for k in 0..3 {
            let mut w = K::one();
            for m in 0..3 {
                if m != k {
                    w = w * (deltas[m].clone() / (deltas[m].clone() - deltas[k].clone()));
                }
            }
            weights.push(w);
        }
        Ok(Lambda {
            t_star: t_star.clone(),
            laps,
            weights,
            a: sys.a().clone(),
            b: sys.b().clone(),
        })
    }

    pub fn t_star(&self) -> &K {
        &self.t_star
    }

    /// `Λ(⟨û, v̂⟩)` as the extrapolated limit of `φ_t(v̂) − φ_t(û)`.
    pub fn interval(&self, lo: &Germ<K>, hi: &Germ<K>) -> Result<K> {
        let mut rs = Vec::with_capacity(3);
        for lap in &self.laps {
            let r = (lap.eval(hi)? - lap.eval(lo)?) / lap.total().clone();
            rs.push(r);
        }
        let mut est = K::zero();
        for k in 0..3 {
            est = est + self.weights[k].clone() * rs[k].clone();
        }
        let e2 = (rs[1].clone() - est.clone()).to_f64().abs();
        let e3 = (rs[2].clone() - est.clone()).to_f64().abs();
        if e3 > 0.5 * e2 + 1e-12 * (1.0 + est.to_f64().abs()) {
            return Err(Error::Numeric(format!(
                "critical-measure extrapolation is not converging \
                 (residuals {e2:.2e}, {e3:.2e})"
            )));
        }
        Ok(est)
    }

    /// `Λ([a, x])`, clamped to 0 and 1 outside the interval.
    pub fn point(&self, x: &K) -> Result<K> {
        if x <= &self.a {
            return Ok(K::zero());
        }
        if x >= &self.b {
            return Ok(K::one());
        }
        self.interval(&Germ::plus(self.a.clone()), &Germ::minus(x.clone()))
    }
}

/// Worst violation of the scaling law `Λ(α) = t*ⁿ·g(α)·Λ(fⁿα)` over all
/// cylinders up to `depth` — the defining invariance of the critical
/// measure, checked against an independently generated cylinder walk.
pub fn lambda_scaling_residual<K: Scalar>(
    sys: &System<K>,
    lambda: &Lambda<K>,
    depth: usize,
    cap: usize,
) -> Result<f64> {
    let mut worst = 0.0f64;
    let mut failure: Option<Error> = None;
    cylinders::walk(sys, depth, cap, |view| {
        if failure.is_some() {
            return;
        }
        let result = (|| -> Result<f64> {
            let lhs = lambda.point(view.hi)? - lambda.point(view.lo)?;
            let img = lambda.point(view.image_hi)? - lambda.point(view.image_lo)?;
            let mut scale = view.weight.clone();
            for _ in 0..view.depth {
                scale = scale * lambda.t_star.clone();
            }
            Ok((lhs - scale * img).to_f64().abs())
        })();
        match result {
            Ok(r) => worst = worst.max(r),
            Err(e) => failure = Some(e),
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(worst),
    }
}

// ---------------------------------------------------------------------------
// The critical piecewise-linear model.

/// Piecewise-linear model on `[0,1]` conjugate to the original system via
/// the critical measure: branch `i` becomes slope `s_i/(t*·g_i)` on
/// `[Λ(c_i), Λ(c_{i+1})]`.  Branches whose interval collapses under `Λ`
/// are dropped; `kept` records the surviving original indices.
#[derive(Debug, Clone)]
pub struct CriticalModel<K> {
    pub t_star: K,
    /// `Λ([a, c_k])` for every cut `c_0, …, c_{ℓ+1}`.
    pub cut_images: Vec<K>,
    pub kept: Vec<usize>,
    pub system: System<K>,
}

pub fn critical_model<K: Scalar>(sys: &System<K>, t_star: &K) -> Result<CriticalModel<K>> {
    let nb = sys.num_branches();
    for i in 0..nb {
        if sys.weight(i) < &K::zero() {
            return Err(Error::InvalidSystem(
                "negative weights admit no straightened model".into(),
            ));
        }
    }
    let lambda = Lambda::new(sys, t_star)?;
    let mut cut_images = Vec::with_capacity(nb + 1);
    cut_images.push(K::zero());
    for i in 1..=sys.ell() {
        cut_images.push(lambda.point(sys.cut(i))?);
    }
    cut_images.push(K::one());
    let mut kept = Vec::new();
    for i in 0..nb {
        let w = (cut_images[i + 1].clone() - cut_images[i].clone()).to_f64();
        if w < -COLLAPSE_TOL {
            return Err(Error::Numeric(format!(
                "critical measure decreases across branch {i} (width {w:.2e})"
            )));
        }
        if w > COLLAPSE_TOL {
            kept.push(i);
        }
    }
    if kept.is_empty() {
        return Err(Error::Numeric(
            "every branch collapses under the critical measure".into(),
        ));
    }
    for &i in &kept {
        if !(sys.weight(i) > &K::zero()) {
            return Err(Error::InvalidSystem(format!(
                "branch {i} survives the critical measure but has zero weight"
            )));
        }
    }
    // Model branch p spans [xs[p], xs[p+1]]; collapsed neighbours shift the
    // junction by at most the collapse tolerance, so anchor on the measure
    // value of the surviving branch's own left cut.
    let mut xs = Vec::with_capacity(kept.len() + 1);
    xs.push(K::zero());
    for &i in &kept[1..] {
        xs.push(cut_images[i].clone());
    }
    xs.push(K::one());
    let mut branches = Vec::with_capacity(kept.len());
    for (p, &i) in kept.iter().enumerate() {
        let mut slope = K::from_int(sys.sign(i)) / (t_star.clone() * sys.weight(i).clone());
        // The extrapolated measure carries ~1e-10 noise, which can push a
        // full-range branch image just past [0,1].  The slope is exact but
        // the interval width is not, so cap the span at 1 (a relative slope
        // change within the repair tolerance) and fix any remaining offset
        // by translation.
        let width = xs[p + 1].clone() - xs[p].clone();
        let span = (slope.clone() * width).abs();
        if span.to_f64() > 1.0 + IMAGE_REPAIR_TOL {
            return Err(Error::Numeric(format!(
                "model branch {p} image is wider than the unit interval by {:.2e}",
                span.to_f64() - 1.0
            )));
        }
        if span > K::one() {
            slope = slope / span;
        }
        let y_img = sys.branch(i).eval(sys.cut(i));
        let anchor_y = lambda.point(&y_img)?;
        let mut intercept = anchor_y - slope.clone() * xs[p].clone();
        let e0 = slope.clone() * xs[p].clone() + intercept.clone();
        let e1 = slope.clone() * xs[p + 1].clone() + intercept.clone();
        let (ymin, ymax) = if e0 <= e1 { (e0, e1) } else { (e1, e0) };
        let mut shift = K::zero();
        if ymin < K::zero() {
            shift = -ymin;
        } else if ymax > K::one() {
            shift = K::one() - ymax;
        }
        if shift.abs().to_f64() > IMAGE_REPAIR_TOL {
            return Err(Error::Numeric(format!(
                "model branch {p} image exceeds the unit interval by {:.2e}",
                shift.abs().to_f64()
            )));
        }
        intercept = intercept + shift;
        branches.push(Branch::new(slope, intercept, sys.weight(i).clone()));
    }
    let interior = xs[1..xs.len() - 1].to_vec();
    let system = System::new(K::zero(), K::one(), interior, branches)?;
    Ok(CriticalModel { t_star: t_star.clone(), cut_images, kept, system })
}
