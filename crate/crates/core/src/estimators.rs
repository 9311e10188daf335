//! Losses, scores and the two regression fits used by the interval
//! pipeline: ordinary least squares and unit-threshold Huber regression.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::linalg::{self, Qr};
use crate::scalar::{norm2, Real};

/// Huber loss with knot at 1: `t²` inside, `2|t| − 1` outside.
#[inline]
pub fn huber_loss<T: Real>(t: T) -> T {
    let a = t.abs();
    if a <= T::one() {
        t * t
    } else {
        T::lit(2.0) * a - T::one()
    }
}

/// Derivative of [`huber_loss`]: `2t` clipped to `[−2, 2]`.
#[inline]
pub fn huber_score<T: Real>(t: T) -> T {
    let two = T::lit(2.0);
    if t.abs() <= T::one() {
        two * t
    } else {
        two * t.signum()
    }
}

/// `tanh(t)`, evaluated as `sign(t)·(1 − e^{−2|t|})/(1 + e^{−2|t|})` so no
/// positive exponent is ever formed.
#[inline]
pub fn tanh_score<T: Real>(t: T) -> T {
    if t == T::zero() {
        return T::zero();
    }
    let e = (T::lit(-2.0) * t.abs()).exp();
    let mag = if e < T::lit(0.25) {
        (T::one() - e) / (T::one() + e)
    } else {
        // Small |t|: expm1 keeps the relative accuracy near zero.
        let m = -(T::lit(-2.0) * t.abs()).exp_m1();
        m / (T::lit(2.0) - m)
    };
    mag.copysign(t)
}

/// `g′(t) = 1 − tanh(t)²`.
#[inline]
pub fn tanh_score_derivative<T: Real>(t: T) -> T {
    let g = tanh_score(t);
    T::one() - g * g
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<T> {
    pub coefficients: Array1<T>,
    /// Total loss (not averaged) at `coefficients`.
    pub objective: T,
    pub iterations: usize,
    pub converged: bool,
}

fn check_system<T: Real>(target: ArrayView1<T>, z: ArrayView2<T>) -> Result<()> {
    let (n, k) = z.dim();
    if target.len() != n {
        return Err(Error::Dimension(format!(
            "response has length {}, design has {n} rows",
            target.len()
        )));
    }
    if n < k {
        return Err(Error::Dimension(format!(
            "need n >= k, got n = {n}, k = {k}"
        )));
    }
    if !target.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("response"));
    }
    Ok(())
}

/// Least squares of `target` on the columns of `w`, via Householder QR.
pub fn ols<T: Real>(target: ArrayView1<T>, w: ArrayView2<T>) -> Result<FitResult<T>> {
    check_system(target, w)?;
    let coefficients = linalg::least_squares(w, target)?;
    let resid = &target - &w.dot(&coefficients);
    let objective = resid.iter().fold(T::zero(), |acc, &r| acc + r * r);
    Ok(FitResult {
        coefficients,
        objective,
        iterations: 1,
        converged: true,
    })
}

/// Total Huber loss of `y − z c`.
pub fn huber_objective<T: Real>(y: ArrayView1<T>, z: ArrayView2<T>, c: ArrayView1<T>) -> T {
    let fitted = z.dot(&c);
    y.iter()
        .zip(fitted.iter())
        .fold(T::zero(), |acc, (&yi, &fi)| acc + huber_loss(yi - fi))
}

/// Euclidean norm of `(1/n) Σ ρ′(y_i − z_iᵀc) z_i`, the gradient of the
/// averaged Huber objective up to sign.
pub fn huber_stationarity<T: Real>(y: ArrayView1<T>, z: ArrayView2<T>, c: ArrayView1<T>) -> T {
    let resid = &y - &z.dot(&c);
    let psi = resid.mapv(huber_score);
    let g = z.t().dot(&psi);
    let n = T::from_usize(y.len()).unwrap_or(T::one());
    norm2(g.as_slice().expect("contiguous")) / n
}

#[derive(Debug, Clone, Copy)]
pub struct HuberOptions {
    pub max_iter: usize,
    /// Stop when `(obj_prev − obj) / obj_prev` falls below this.
    pub rel_decrease_tol: f64,
    /// Stop when the stationarity norm is below `tol · (1 + ‖c‖)`.
    pub stationarity_tol: f64,
}

impl Default for HuberOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            rel_decrease_tol: 1e-12,
            stationarity_tol: 1e-10,
        }
    }
}

/// Minimizes `Σ ρ(y_i − z_iᵀc)` by iteratively reweighted least squares.
///
/// Each iteration collects several directions (the IRLS update, Newton
/// steps on a few widened inlier sets `|r_i| ≤ 1 + δ`, a null-space descent
/// direction when the inliers do not span, and the gradient) and minimizes
/// exactly along each. A Newton step lands on the optimum once its inlier
/// set is right, so the loop ends after finitely many iterations in
/// practice. The best candidate is kept and the objective never increases.
/// Returns the fit even when `converged` is false.
pub fn huber_fit<T: Real>(
    y: ArrayView1<T>,
    z: ArrayView2<T>,
    init: Option<ArrayView1<T>>,
    opts: &HuberOptions,
) -> Result<FitResult<T>> {
    check_system(y, z)?;
    let (n, k) = z.dim();
    // Rank check up front; also gives the OLS warm start.
    let qr = Qr::new(z)?;
    let mut c = match init {
        Some(c0) => {
            if c0.len() != k {
                return Err(Error::Dimension(format!(
                    "initial value has length {}, expected {k}",
                    c0.len()
                )));
            }
            c0.to_owned()
        }
        None => qr.solve(y)?,
    };
    let stat_tol = T::tol(opts.stationarity_tol);
    let rel_tol = T::tol(opts.rel_decrease_tol);

    let mut obj = huber_objective(y, z, c.view());
    let mut stat = huber_stationarity(y, z, c.view());
    let mut iterations = 0;
    let mut converged = stat <= stat_tol * (T::one() + norm_of(&c));

    let mut weighted = Array2::<T>::zeros((n, k));
    let mut wy = Array1::<T>::zeros(n);
    while !converged && iterations < opts.max_iter {
        iterations += 1;
        let resid = &y - &z.dot(&c);

        // Objective changes below this are rounding noise in the sum; large
        // outliers make the sum big, so ties are broken by stationarity.
        let tie = T::epsilon() * T::lit(4.0 * n as f64) * obj.abs();
        let mut best: Option<(Array1<T>, T, T)> = None;
        let mut consider = |cand: Array1<T>| {
            if !cand.iter().all(|v| v.is_finite()) {
                return;
            }
            let o = huber_objective(y, z, cand.view());
            let s = huber_stationarity(y, z, cand.view());
            let better = match &best {
                None => true,
                Some((_, bo, bs)) => o < *bo - tie || (o <= *bo + tie && s < *bs),
            };
            if better {
                best = Some((cand, o, s));
            }
        };

        // IRLS: weights ρ′(r)/(2r), equal to 1 inside the knot.
        for i in 0..n {
            let r = resid[i];
            let w = if r.abs() <= T::one() {
                T::one()
            } else {
                T::one() / r.abs()
            };
            let sw = w.sqrt();
            wy[i] = sw * y[i];
            for j in 0..k {
                weighted[[i, j]] = sw * z[[i, j]];
            }
        }
        let mut directions = Vec::with_capacity(BANDS.len() + 3);
        if let Ok(c_irls) = linalg::least_squares(weighted.view(), wy.view()) {
            directions.push(&c_irls - &c);
        }
        // Bands are nested, so an unchanged inlier count means the same set.
        let mut last_count = usize::MAX;
        for &band in BANDS {
            let edge = T::one() + T::lit(band);
            let count = resid.iter().filter(|r| r.abs() <= edge).count();
            if count == last_count {
                continue;
            }
            last_count = count;
            if let Some(step) = newton_step(z, resid.view(), T::lit(band)) {
                directions.push(step);
            }
        }
        let g = z.t().dot(&resid.mapv(huber_score));
        if let Some(d) = null_space_descent(z, resid.view(), g.view()) {
            directions.push(d);
        }
        directions.push(g);
        for d in directions {
            if let Some(t) = exact_line_search(resid.view(), z.dot(&d).view()) {
                consider(&c + &d.mapv(|v| v * t));
            }
        }

        let Some((cand, o, s)) = best else { break };
        let accept = o < obj - tie || (o <= obj + tie && s < stat);
        if !accept {
            // Nothing improves on the iterate in working precision.
            converged = stat <= T::tol(1e-8) * (T::one() + norm_of(&c));
            break;
        }
        let decrease = (obj - o) / obj.max(T::min_positive_value());
        c = cand;
        obj = o;
        stat = s;
        converged = stat <= stat_tol * (T::one() + norm_of(&c))
            || decrease < rel_tol && stat <= T::tol(1e-8) * (T::one() + norm_of(&c));
    }

    if converged {
        // One full Newton step on the final inlier set removes the residual
        // solver tolerance when the inlier set is already right.
        let resid = &y - &z.dot(&c);
        if let Some(step) = newton_step(z, resid.view(), T::zero()) {
            let cand = &c + &step;
            let o = huber_objective(y, z, cand.view());
            let s = huber_stationarity(y, z, cand.view());
            if o <= obj && s < stat {
                c = cand;
                obj = o;
            }
        }
    }

    Ok(FitResult {
        coefficients: c,
        objective: obj,
        iterations,
        converged,
    })
}

/// Widths of the bands `|r| ≤ 1 + δ` treated as inliers when building the
/// piecewise-quadratic model. Residuals sitting on a knot at the optimum
/// are only picked up by a positive band.
const BANDS: &[f64] = &[0.0, 1e-8, 1e-4, 1e-2, 0.1, 0.5];

/// Step to the minimizer of the quadratic model that treats `|r_i| ≤ 1 + band`
/// as inliers and the rest as linear: solves
/// `(Σ_in z zᵀ) d = Σ_in r_i z_i + Σ_out sign(r_i) z_i`.
/// When the inliers do not span, the curvature is completed by a multiple
/// of the projector onto their null space.
fn newton_step<T: Real>(z: ArrayView2<T>, resid: ArrayView1<T>, band: T) -> Option<Array1<T>> {
    let k = z.ncols();
    let edge = T::one() + band;
    let inliers: Vec<usize> = (0..resid.len())
        .filter(|&i| resid[i].abs() <= edge)
        .collect();
    if inliers.is_empty() {
        return None;
    }
    let zin = z.select(Axis(0), &inliers);
    let mut h = zin.t().dot(&zin);
    let basis = row_basis(zin.view());
    if basis.len() < k {
        let scale = (0..k).fold(T::zero(), |acc, j| acc + h[[j, j]]) / T::from_usize(k).unwrap();
        let proj = null_projector(&basis, k);
        h = h + proj.mapv(|v| v * scale);
    }
    let g = z
        .t()
        .dot(&resid.mapv(|r| if r.abs() <= edge { r } else { r.signum() }));
    linalg::solve_spd(h.view(), g.view()).ok()
}

/// Projection of the descent direction `g` onto the null space of the rows
/// with `|r_i| ≤ 1 + 1e-8`. Along it those residuals stay put and the
/// objective is linear until another residual reaches a knot.
fn null_space_descent<T: Real>(
    z: ArrayView2<T>,
    resid: ArrayView1<T>,
    g: ArrayView1<T>,
) -> Option<Array1<T>> {
    let k = z.ncols();
    let edge = T::one() + T::tol(1e-8);
    let rows: Vec<usize> = (0..resid.len())
        .filter(|&i| resid[i].abs() <= edge)
        .collect();
    let basis = row_basis(z.select(Axis(0), &rows).view());
    if basis.len() == k {
        return None;
    }
    let d = null_projector(&basis, k).dot(&g);
    let gn = norm_of(&g.to_owned());
    if norm_of(&d) <= T::tol(1e-14) * gn {
        return None;
    }
    Some(d)
}

/// Orthonormal basis of the row space, by modified Gram–Schmidt.
fn row_basis<T: Real>(rows: ArrayView2<T>) -> Vec<Array1<T>> {
    let k = rows.ncols();
    let mut basis: Vec<Array1<T>> = Vec::with_capacity(k);
    for row in rows.outer_iter() {
        if basis.len() == k {
            break;
        }
        let scale = norm_of(&row.to_owned());
        let mut v = row.to_owned();
        for q in &basis {
            let p = v.dot(q);
            v.scaled_add(-p, q);
        }
        let nv = norm_of(&v);
        if nv > T::tol(1e-10) * scale {
            basis.push(v.mapv(|x| x / nv));
        }
    }
    basis
}

fn null_projector<T: Real>(basis: &[Array1<T>], k: usize) -> Array2<T> {
    let mut p = Array2::<T>::eye(k);
    for q in basis {
        for i in 0..k {
            for j in 0..k {
                p[[i, j]] = p[[i, j]] - q[i] * q[j];
            }
        }
    }
    p
}

/// Exact minimizer over `t` of `Σ ρ(r_i − t a_i)`, a convex piecewise
/// quadratic. Its derivative `−Σ ψ(r_i − t a_i) a_i` is monotone and linear
/// between the knots `t = (r_i ∓ 1)/a_i`, so a binary search over the
/// sorted knots brackets the root exactly.
fn exact_line_search<T: Real>(r: ArrayView1<T>, a: ArrayView1<T>) -> Option<T> {
    let slope = |t: T| {
        r.iter().zip(a.iter()).fold(T::zero(), |acc, (&ri, &ai)| {
            acc - huber_score(ri - t * ai) * ai
        })
    };
    let mut knots: Vec<T> = Vec::with_capacity(2 * r.len());
    for (&ri, &ai) in r.iter().zip(a.iter()) {
        if ai != T::zero() {
            knots.push((ri - T::one()) / ai);
            knots.push((ri + T::one()) / ai);
        }
    }
    knots.retain(|t| t.is_finite());
    if knots.is_empty() {
        return None;
    }
    knots.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    knots.dedup();
    // First knot with nonnegative slope; the slope is negative far left.
    let (mut lo, mut hi) = (0usize, knots.len() - 1);
    if slope(knots[hi]) < T::zero() {
        return None;
    }
    if slope(knots[0]) >= T::zero() {
        return Some(knots[0]);
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if slope(knots[mid]) >= T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (t0, t1) = (knots[lo], knots[hi]);
    let (s0, s1) = (slope(t0), slope(t1));
    let t = t0 - s0 * (t1 - t0) / (s1 - s0);
    Some(t.max(t0).min(t1))
}

fn norm_of<T: Real>(c: &Array1<T>) -> T {
    c.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt()
}

/// Huber regression with default options; non-convergence is an error.
pub fn huber_regression<T: Real>(
    y: ArrayView1<T>,
    z: ArrayView2<T>,
    init: Option<ArrayView1<T>>,
) -> Result<FitResult<T>> {
    let fit = huber_fit(y, z, init, &HuberOptions::default())?;
    if fit.converged {
        Ok(fit)
    } else {
        Err(Error::NotConverged {
            iterations: fit.iterations,
            stationarity: huber_stationarity(y, z, fit.coefficients.view()).as_f64(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn huber_loss_values() {
        assert_eq!(huber_loss(0.5), 0.25);
        assert_eq!(huber_loss(1.0), 1.0);
        assert_eq!(huber_loss(3.0), 5.0);
        assert_eq!(huber_loss(-3.0), 5.0);
    }

    #[test]
    fn huber_score_values() {
        assert_eq!(huber_score(0.25), 0.5);
        assert_eq!(huber_score(-4.0), -2.0);
        assert_eq!(huber_score(0.0), 0.0);
    }

    #[test]
    fn tanh_values() {
        assert_eq!(tanh_score(0.0), 0.0);
        assert!((tanh_score(1.0f64) - 0.7615941559557649).abs() < 1e-15);
        assert_eq!(tanh_score(1e6), 1.0);
        assert_eq!(tanh_score(-1e8), -1.0);
        assert_eq!(tanh_score(1e8f32), 1.0f32);
        assert!((tanh_score(1e-10f64) - 1e-10).abs() < 1e-24);
    }

    #[test]
    fn tanh_matches_std_everywhere() {
        let mut t = -30.0;
        while t < 30.0 {
            let a: f64 = tanh_score(t);
            assert!((a - t.tanh()).abs() <= 2.0 * f64::EPSILON, "t = {t}");
            t += 0.0137;
        }
    }

    #[test]
    fn tanh_derivative_by_finite_differences() {
        let h = 1e-5;
        let mut state = 12345u64;
        for _ in 0..10_000 {
            state = crate::seed::splitmix64(state);
            let t = (state as f64 / u64::MAX as f64 - 0.5) * 20.0;
            let fd = (tanh_score(t + h) - tanh_score(t - h)) / (2.0 * h);
            assert!((tanh_score_derivative(t) - fd).abs() <= 1e-6);
        }
    }

    #[test]
    fn huber_score_curvature_inequality() {
        // (ρ′(t+Δ) − ρ′(t))·Δ ≥ 0.5·min(Δ², |Δ|) for |t| ≤ 1/2. At |t| = 1 a
        // step outward leaves ρ′ flat, so the bound cannot hold there.
        assert_eq!((huber_score(-4.0) - huber_score(-1.0)) * -3.0, 0.0);
        let steps = 121;
        for a in 0..steps {
            let t = -3.0 + 6.0 * a as f64 / (steps - 1) as f64;
            if t.abs() > 0.5 {
                continue;
            }
            for b in 0..steps {
                let d = -3.0 + 6.0 * b as f64 / (steps - 1) as f64;
                let lhs = (huber_score(t + d) - huber_score(t)) * d;
                assert!(lhs >= 0.5 * (d * d).min(d.abs()) - 1e-15, "t={t} d={d}");
            }
        }
    }

    #[test]
    fn ols_intercept_only_is_mean() {
        let fit = ols(
            array![2.0f64, 4.0, 6.0].view(),
            array![[1.0], [1.0], [1.0]].view(),
        )
        .unwrap();
        assert!((fit.coefficients[0] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn ols_orthogonal_target() {
        let fit = ols(array![1.0f64, -1.0].view(), array![[1.0], [1.0]].view()).unwrap();
        assert!(fit.coefficients[0].abs() < 1e-15);
    }

    #[test]
    fn ols_singular() {
        let w = array![[1.0, 2.0], [1.0, 2.0], [1.0, 2.0]];
        assert_eq!(
            ols(array![1.0, 2.0, 3.0].view(), w.view()).unwrap_err(),
            Error::SingularDesign
        );
    }

    #[test]
    fn huber_one_dimensional_instance() {
        let fit = huber_regression(
            array![0.0f64, 0.0, 10.0].view(),
            array![[1.0], [1.0], [1.0]].view(),
            None,
        )
        .unwrap();
        assert!((fit.coefficients[0] - 0.5).abs() < 1e-12);
        assert!((fit.objective - 18.5).abs() < 1e-10);
        // Independent check: grid scan over [-1, 10] with step 1e-5.
        let obj = |c: f64| huber_loss(-c) * 2.0 + huber_loss(10.0 - c);
        let (mut best_c, mut best_o) = (0.0, f64::INFINITY);
        for i in 0..=1_100_000 {
            let c = -1.0 + i as f64 * 1e-5;
            let o = obj(c);
            if o < best_o {
                best_o = o;
                best_c = c;
            }
        }
        assert!((best_c - fit.coefficients[0]).abs() < 2e-5);
        assert!(fit.objective <= best_o + 1e-12);
    }

    #[test]
    fn huber_interpolates_noiseless_data() {
        let z = array![[1.0, 0.5], [2.0, -1.0], [0.3, 3.0], [-1.0, 1.0]];
        let c = array![1.5f64, -0.25];
        let y = z.dot(&c);
        let fit = huber_regression(y.view(), z.view(), None).unwrap();
        assert!((&fit.coefficients - &c).iter().all(|d| d.abs() < 1e-12));
        assert!(fit.objective < 1e-24);
    }

    #[test]
    fn huber_rank_deficient() {
        let z = array![[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]];
        assert_eq!(
            huber_regression(array![1.0, 0.0, 2.0].view(), z.view(), None).unwrap_err(),
            Error::SingularDesign
        );
    }

    #[test]
    fn huber_reports_non_convergence() {
        let z = array![[1.0], [1.0], [1.0], [1.0]];
        let y = array![0.0, 0.1, 50.0, -70.0];
        let opts = HuberOptions {
            max_iter: 0,
            ..Default::default()
        };
        let fit = huber_fit(y.view(), z.view(), Some(array![1000.0].view()), &opts).unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.iterations, 0);
        assert_eq!(fit.coefficients[0], 1000.0);
    }

    #[test]
    fn huber_in_f32() {
        let fit = huber_regression(
            array![0.0f32, 0.0, 10.0].view(),
            array![[1.0f32], [1.0], [1.0]].view(),
            None,
        )
        .unwrap();
        assert!((fit.coefficients[0] - 0.5).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn huber_objective_is_convex(
            data in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0, -50.0f64..50.0), 4..20),
            c1 in proptest::collection::vec(-10.0f64..10.0, 2),
            c2 in proptest::collection::vec(-10.0f64..10.0, 2),
            lam in 0.01f64..0.99,
        ) {
            let n = data.len();
            let z = Array2::from_shape_fn((n, 2), |(i, j)| if j == 0 { data[i].0 } else { data[i].1 });
            let y = Array1::from_iter(data.iter().map(|d| d.2));
            let a = Array1::from(c1);
            let b = Array1::from(c2);
            let mid = &a * lam + &b * (1.0 - lam);
            let lhs = huber_objective(y.view(), z.view(), mid.view());
            let rhs = lam * huber_objective(y.view(), z.view(), a.view())
                + (1.0 - lam) * huber_objective(y.view(), z.view(), b.view());
            prop_assert!(lhs <= rhs + 1e-12 * (1.0 + rhs.abs()));
        }

        #[test]
        fn huber_beats_ols(
            data in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0, -100.0f64..100.0), 6..40),
        ) {
            let n = data.len();
            let z = Array2::from_shape_fn((n, 2), |(i, j)| if j == 0 { data[i].0 } else { data[i].1 });
            let y = Array1::from_iter(data.iter().map(|d| d.2));
            let Ok(o) = ols(y.view(), z.view()) else { return Ok(()) };
            let h = huber_regression(y.view(), z.view(), None).unwrap();
            let at_ols = huber_objective(y.view(), z.view(), o.coefficients.view());
            prop_assert!(h.objective <= at_ols + 1e-9 * (1.0 + at_ols));
        }

        #[test]
        fn ols_residuals_orthogonal(
            data in proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0, -10.0f64..10.0), 5..40),
        ) {
            let n = data.len();
            let w = Array2::from_shape_fn((n, 2), |(i, j)| if j == 0 { data[i].0 } else { data[i].1 });
            let t = Array1::from_iter(data.iter().map(|d| d.2));
            let Ok(fit) = ols(t.view(), w.view()) else { return Ok(()) };
            let resid = &t - &w.dot(&fit.coefficients);
            let g = w.t().dot(&resid);
            let scale = t.dot(&t).sqrt();
            prop_assert!(g.iter().all(|v| v.abs() <= 1e-8 * scale.max(1e-300) + 1e-12));
        }
    }
}
