//! Kneading matrices, their determinants, and the web of identities that
//! certify them.
//!
//! For each cut germ the invariant coordinate `θ(x̂,t;c)` records, degree by
//! degree, which side of `c` the orbit of `x̂` passes on, weighted by the
//! signed weight cocycle.  Differences of invariant coordinates across each
//! cut assemble into the `(ℓ+1)×(ℓ+1)` kneading matrix `ℛ(t)` (the 0-th row
//! holds the boundary germs `a⁺`, `b⁻` with both signs positive).  Everything
//! else here — the reduced matrix `ℬ`, the classical `ℓ×(ℓ+1)` matrix and its
//! column-deleted determinants, the matching matrix `ℱ` with `ℱℛ = ℛ'`, and
//! the main identity relating preimage counts to matrix rows — exists to
//! cross-check `det ℛ` through independent computations.

use std::cmp::Ordering;

use crate::error::Result;
use crate::germ::{Germ, GermInterval};
use crate::scalar::Scalar;
use crate::series::Series;
use crate::system::System;

/// Dense matrix of truncated power series, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMatrix<K> {
    rows: usize,
    cols: usize,
    entries: Vec<Series<K>>,
}

impl<K: Scalar> SeriesMatrix<K> {
    pub fn zero(rows: usize, cols: usize, degree: usize) -> Self {
        SeriesMatrix {
            rows,
            cols,
            entries: vec![Series::zero(degree); rows * cols],
        }
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Series<K>,
    ) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        SeriesMatrix { rows, cols, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Series<K> {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, s: Series<K>) {
        self.entries[i * self.cols + j] = s;
    }

    /// Delete one row and one column.
    pub fn minor(&self, row: usize, col: usize) -> Self {
        SeriesMatrix::from_fn(self.rows - 1, self.cols - 1, |i, j| {
            let si = if i < row { i } else { i + 1 };
            let sj = if j < col { j } else { j + 1 };
            self.get(si, sj).clone()
        })
    }

    /// Delete one column (for the column-deleted determinants of the
    /// classical kneading matrix).
    pub fn drop_col(&self, col: usize) -> Self {
        SeriesMatrix::from_fn(self.rows, self.cols - 1, |i, j| {
            let sj = if j < col { j } else { j + 1 };
            self.get(i, sj).clone()
        })
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows);
        SeriesMatrix::from_fn(self.rows, rhs.cols, |i, j| {
            let mut acc = Series::zero(self.get(0, 0).degree());
            for k in 0..self.cols {
                acc = &acc + &(self.get(i, k) * rhs.get(k, j));
            }
            acc
        })
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        SeriesMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - rhs.get(i, j))
    }

    pub fn truncate(&self, degree: usize) -> Self {
        SeriesMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).truncate(degree))
    }

    /// Entrywise formal derivative (each entry loses a reliable degree).
    pub fn derivative(&self) -> Self {
        SeriesMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).derivative())
    }

    pub fn trace(&self) -> Series<K> {
        assert_eq!(self.rows, self.cols);
        let mut acc = Series::zero(self.get(0, 0).degree());
        for i in 0..self.rows {
            acc = &acc + self.get(i, i);
        }
        acc
    }

    /// Evaluate every entry at a scalar.
    pub fn eval(&self, t: &K) -> Vec<Vec<K>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).eval(t)).collect())
            .collect()
    }

    /// Determinant by Laplace expansion memoized over column subsets
    /// (division-free, so exact in rational mode and benign for series).
    pub fn det(&self) -> Series<K> {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        let degree = self.get(0, 0).degree();
        if n == 0 {
            return Series::one(degree);
        }
        // best[mask]: determinant of the submatrix using the first
        // popcount(mask) rows and the column set `mask`.
        let mut memo: Vec<Option<Series<K>>> = vec![None; 1 << n];
        memo[0] = Some(Series::one(degree));
        for mask in 1usize..(1 << n) {
            let row = (mask.count_ones() - 1) as usize;
            let mut acc = Series::zero(degree);
            // Expanding along the last row of the subset: sign (−1)^{row+j}.
            let mut sign_flip = row % 2 == 1;
            for col in 0..n {
                if mask & (1 << col) == 0 {
                    continue;
                }
                let sub = memo[mask ^ (1 << col)]
                    .as_ref()
                    .expect("subset determinants fill in popcount order")
                    .clone();
                let term = self.get(row, col) * &sub;
                acc = if sign_flip { &acc - &term } else { &acc + &term };
                sign_flip = !sign_flip;
            }
            memo[mask] = Some(acc);
        }
        memo[(1 << n) - 1].take().unwrap()
    }

    /// Largest |entry coefficient| difference from another matrix.
    pub fn max_coeff_distance(&self, rhs: &Self, through_degree: usize) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let d = self.get(i, j).max_coeff_distance(rhs.get(i, j), through_degree);
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }
}

/// Invariant coordinate `θ(x̂,t;c) = Σ_m t^m [sg]^m(x̂)·σ(f^m x̂, c)`, where
/// `σ` is the half-signed side of the orbit germ relative to `c`.
pub fn theta<K: Scalar>(
    sys: &System<K>,
    germ: &Germ<K>,
    cut: &K,
    degree: usize,
) -> Result<Series<K>> {
    let orbit = sys.germ_orbit(germ, degree)?;
    Ok(Series::from_fn(degree, |m| {
        orbit.sg[m].clone() * K::from_int(orbit.germs[m].side_of(cut)) * K::half()
    }))
}

/// `θ(x̂,t;c_k)` for all cuts `c_0, …, c_ℓ` from a single orbit.
pub fn theta_row<K: Scalar>(
    sys: &System<K>,
    germ: &Germ<K>,
    degree: usize,
) -> Result<Vec<Series<K>>> {
    let orbit = sys.germ_orbit(germ, degree)?;
    Ok((0..=sys.ell())
        .map(|k| {
            let c = sys.cut(k);
            Series::from_fn(degree, |m| {
                orbit.sg[m].clone() * K::from_int(orbit.germs[m].side_of(c)) * K::half()
            })
        })
        .collect())
}

/// The kneading matrix `ℛ(t)`.  Row `j ≥ 1` is
/// `θ(c_j⁺,·) − θ(c_j⁻,·)`; row 0 is `θ(a⁺,·) + θ(b⁻,·)`.
pub fn kneading_matrix<K: Scalar>(sys: &System<K>, degree: usize) -> Result<SeriesMatrix<K>> {
    let ell = sys.ell();
    let mut m = SeriesMatrix::zero(ell + 1, ell + 1, degree);
    let row0_plus = theta_row(sys, &sys.left_germ(), degree)?;
    let row0_minus = theta_row(sys, &sys.right_germ(), degree)?;
    for k in 0..=ell {
        m.set(0, k, &row0_plus[k] + &row0_minus[k]);
    }
    for j in 1..=ell {
        let c = sys.cut(j).clone();
        let plus = theta_row(sys, &Germ::plus(c.clone()), degree)?;
        let minus = theta_row(sys, &Germ::minus(c), degree)?;
        for k in 0..=ell {
            m.set(j, k, &plus[k] - &minus[k]);
        }
    }
    Ok(m)
}

/// The reduced matrix `ℬ(t)`: `ℛ` without the boundary row and column.
pub fn reduced_matrix<K: Scalar>(kneading: &SeriesMatrix<K>) -> SeriesMatrix<K> {
    kneading.minor(0, 0)
}

/// `H(t) = 1 − t(s_0 g_0 + s_ℓ g_ℓ)/2`, the boundary factor with
/// `H·det ℛ = det ℬ`.  Its zero is what makes the first zero of `det ℬ`
/// spurious for lopsided outer weights.
pub fn boundary_factor<K: Scalar>(sys: &System<K>, degree: usize) -> Series<K> {
    let last = sys.num_branches() - 1;
    let sum = K::from_int(sys.sign(0)) * sys.weight(0).clone()
        + K::from_int(sys.sign(last)) * sys.weight(last).clone();
    let mut h = Series::one(degree);
    if degree >= 1 {
        h.set_coeff(1, -(sum * K::half()));
    }
    h
}

/// Preimage trees of one target point, sorted per level with prefix-summed
/// weights, so that weighted counts against intervals and germs are
/// logarithmic per query.
pub struct PreimageTable<K> {
    levels: Vec<Level<K>>,
}

struct Level<K> {
    pts: Vec<(K, K)>,
    /// `prefix[i]` = total weight of `pts[..i]`.
    prefix: Vec<K>,
}

impl<K: Scalar> PreimageTable<K> {
    pub fn new(sys: &System<K>, target: &K, depth: usize) -> Result<Self> {
        let levels = sys
            .preimages(target, depth)?
            .into_iter()
            .map(|pts| {
                let mut prefix = Vec::with_capacity(pts.len() + 1);
                let mut acc = K::zero();
                prefix.push(acc.clone());
                for (_, w) in &pts {
                    acc = acc + w.clone();
                    prefix.push(acc.clone());
                }
                Level { pts, prefix }
            })
            .collect();
        Ok(PreimageTable { levels })
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    fn total(&self, p: usize) -> K {
        self.levels[p].prefix.last().unwrap().clone()
    }

    /// Total weight of level-`p` points strictly below the germ.
    fn weight_below(&self, p: usize, g: &Germ<K>) -> K {
        let level = &self.levels[p];
        let idx = level
            .pts
            .partition_point(|(x, _)| g.cmp_point(x) == Ordering::Greater);
        level.prefix[idx].clone()
    }

    /// `γ_J(t) = Σ_p t^p Σ_{x ∈ Γ_p ∩ J} g^p(x)` — the preimage-counting
    /// series restricted to an interval of germs.
    pub fn gamma(&self, j: &GermInterval<K>, degree: usize) -> Series<K> {
        match j.endpoints() {
            None => Series::zero(degree),
            Some((lo, hi)) => Series::from_fn(degree, |p| {
                if p > self.depth() {
                    K::zero()
                } else {
                    self.weight_below(p, hi) - self.weight_below(p, lo)
                }
            }),
        }
    }

    /// Coefficient `p` of `m(û,t) = Σ_p t^p Σ_{x∈Γ_p} g^p(x)·σ(û,x)`:
    /// half the weight of points below `û` minus half the weight above.
    pub fn m_coeff(&self, u: &Germ<K>, p: usize) -> K {
        if p > self.depth() {
            return K::zero();
        }
        let below = self.weight_below(p, u);
        (below.clone() + below - self.total(p)) * K::half()
    }

    pub fn m_series(&self, u: &Germ<K>, degree: usize) -> Series<K> {
        Series::from_fn(degree, |p| self.m_coeff(u, p))
    }
}

/// Preimage tables for every interior cut, indexed `1..=ℓ`.
pub fn cut_preimage_tables<K: Scalar>(
    sys: &System<K>,
    depth: usize,
) -> Result<Vec<PreimageTable<K>>> {
    (1..=sys.ell())
        .map(|j| PreimageTable::new(sys, sys.cut(j), depth))
        .collect()
}

/// Main identity residuals: for `J = ⟨û,v̂⟩` and each `k`,
/// `Σ_{j=1}^ℓ γ_{c_j,J}·R_jk − (θ(v̂;c_k) − θ(û;c_k))` should vanish.
pub fn main_identity_residuals<K: Scalar>(
    sys: &System<K>,
    tables: &[PreimageTable<K>],
    kneading: &SeriesMatrix<K>,
    j: &GermInterval<K>,
    degree: usize,
) -> Result<Vec<Series<K>>> {
    let (lo, hi) = match j.endpoints() {
        None => return Ok(vec![Series::zero(degree); sys.ell() + 1]),
        Some((lo, hi)) => (lo.clone(), hi.clone()),
    };
    let gammas: Vec<Series<K>> =
        tables.iter().map(|t| t.gamma(j, degree)).collect();
    let theta_hi = theta_row(sys, &hi, degree)?;
    let theta_lo = theta_row(sys, &lo, degree)?;
    Ok((0..=sys.ell())
        .map(|k| {
            let mut lhs = Series::zero(degree);
            for (jj, gamma) in gammas.iter().enumerate() {
                lhs = &lhs + &(gamma * &kneading.get(jj + 1, k).truncate(degree));
            }
            let rhs = &theta_hi[k] - &theta_lo[k];
            &lhs - &rhs
        })
        .collect())
}

/// Residuals of `Σ_{j=0}^ℓ m_{c_j}(ŵ,t)·R_jk(t) − θ(ŵ,t;c_k)`, the bridge
/// between preimage counting and invariant coordinates (with `m_{c_0} ≡ ½`).
pub fn m_bridge_residuals<K: Scalar>(
    sys: &System<K>,
    tables: &[PreimageTable<K>],
    kneading: &SeriesMatrix<K>,
    w: &Germ<K>,
    degree: usize,
) -> Result<Vec<Series<K>>> {
    let thetas = theta_row(sys, w, degree)?;
    let half = Series::constant(K::half(), degree);
    let ms: Vec<Series<K>> = std::iter::once(half)
        .chain(tables.iter().map(|t| t.m_series(w, degree)))
        .collect();
    Ok((0..=sys.ell())
        .map(|k| {
            let mut lhs = Series::zero(degree);
            for (j, m) in ms.iter().enumerate() {
                lhs = &lhs + &(m * &kneading.get(j, k).truncate(degree));
            }
            &lhs - &thetas[k]
        })
        .collect())
}

/// The matching matrix `ℱ(t)` with `ℱℛ = ℛ'`:
/// `F_ij = Σ_q t^q [sg]^{q+1}(ĉ_i)·ε*(ĉ_i)·m_{c_j}(f^{q+1}ĉ_i, t)`,
/// summed over the two germs of cut `i` (for `i = 0` these are `a⁺` and
/// `b⁻`, both with `ε* = +1`; otherwise `ε* = ε`).
pub fn matching_matrix<K: Scalar>(
    sys: &System<K>,
    tables: &[PreimageTable<K>],
    degree: usize,
) -> Result<SeriesMatrix<K>> {
    let ell = sys.ell();
    let mut f = SeriesMatrix::zero(ell + 1, ell + 1, degree);
    for i in 0..=ell {
        let germs: Vec<(Germ<K>, i64)> = if i == 0 {
            vec![(sys.left_germ(), 1), (sys.right_germ(), 1)]
        } else {
            let c = sys.cut(i).clone();
            vec![(Germ::plus(c.clone()), 1), (Germ::minus(c), -1)]
        };
        for (germ, eps_star) in germs {
            // Orbit to depth degree+1: we need [sg]^{q+1} and f^{q+1}ĉ.
            let orbit = sys.germ_orbit(&germ, degree + 1)?;
            for q in 0..=degree {
                let factor = orbit.sg[q + 1].clone() * K::from_int(eps_star);
                for j in 0..=ell {
                    // Column 0: m ≡ 1/2.
                    let mcol = if j == 0 {
                        let mut s = Series::zero(degree);
                        s.set_coeff(0, K::half());
                        s
                    } else {
                        tables[j - 1].m_series(&orbit.germs[q + 1], degree)
                    };
                    let mut entry = f.get(i, j).clone();
                    for p in 0..=degree - q {
                        entry.add_to_coeff(p + q, factor.clone() * mcol.coeff(p));
                    }
                    f.set(i, j, entry);
                }
            }
        }
    }
    Ok(f)
}

/// `η(x̂,t;I_k) = θ(x̂;c_k) − θ(x̂;c_{k+1})` for `k = 0..=ℓ`, with the
/// convention `θ(·;c_{ℓ+1}) := −θ(·;c_0)` — equivalently the series whose
/// `m`-th coefficient is `[sg]^m(x̂)` when `f^m x̂` lies in `I_k`, else 0.
pub fn eta<K: Scalar>(
    sys: &System<K>,
    germ: &Germ<K>,
    k: usize,
    degree: usize,
) -> Result<Series<K>> {
    let thetas = theta_row(sys, germ, degree)?;
    let ell = sys.ell();
    if k < ell {
        Ok(&thetas[k] - &thetas[k + 1])
    } else {
        Ok(&thetas[ell] + &thetas[0])
    }
}

/// `Σ_k (1 − t·s_k g_k)·η(x̂;I_k)`, identically 1.
pub fn branch_partition_sum<K: Scalar>(
    sys: &System<K>,
    germ: &Germ<K>,
    degree: usize,
) -> Result<Series<K>> {
    let mut acc = Series::zero(degree);
    for k in 0..sys.num_branches() {
        let mut factor = Series::one(degree);
        if degree >= 1 {
            factor.set_coeff(1, -(K::from_int(sys.sign(k)) * sys.weight(k).clone()));
        }
        acc = &acc + &(&factor * &eta(sys, germ, k, degree)?);
    }
    Ok(acc)
}

/// The classical `ℓ×(ℓ+1)` kneading matrix: row `i`, column `k` is
/// `η(c_i⁺;I_k) − η(c_i⁻;I_k)`.
pub fn classical_matrix<K: Scalar>(sys: &System<K>, degree: usize) -> Result<SeriesMatrix<K>> {
    let ell = sys.ell();
    let mut m = SeriesMatrix::zero(ell, ell + 1, degree);
    for i in 1..=ell {
        let c = sys.cut(i).clone();
        for k in 0..=ell {
            let plus = eta(sys, &Germ::plus(c.clone()), k, degree)?;
            let minus = eta(sys, &Germ::minus(c.clone()), k, degree)?;
            m.set(i - 1, k, &plus - &minus);
        }
    }
    Ok(m)
}

/// The `ℓ+1` candidate determinants `(−1)^j·D_j/(1 − t·s_j g_j)` from
/// deleting each column of the classical matrix; all must coincide (and
/// equal `det ℛ`).
pub fn classical_determinants<K: Scalar>(
    sys: &System<K>,
    degree: usize,
) -> Result<Vec<Series<K>>> {
    let n = classical_matrix(sys, degree)?;
    (0..=sys.ell())
        .map(|j| {
            let dj = n.drop_col(j).det();
            let mut denom = Series::one(degree);
            if degree >= 1 {
                denom.set_coeff(1, -(K::from_int(sys.sign(j)) * sys.weight(j).clone()));
            }
            let quot = &dj * &denom.inverse()?;
            Ok(if j % 2 == 0 { quot } else { -&quot })
        })
        .collect()
}
