//! Primal-dual interior point method on the homogeneous self-dual embedding,
//! with Nesterov-Todd scaling and a Mehrotra predictor-corrector step.
//!
//! Constraint rows are orthonormalized up front. Dependent rows are dropped,
//! or produce a Farkas certificate straight away when their right-hand side
//! disagrees with the rest.

use nalgebra::{DMatrix, DVector};

use super::{smat, svec_into, svec_len, IterationStats, SdpOptions, SdpProblem, SdpSolution, SdpStatus};

/// Reusable solver. The scratch buffers are private to each instance, so
/// separate instances may run on separate threads.
#[derive(Clone, Debug, Default)]
pub struct SdpSolver {
    options: SdpOptions,
    row: Vec<f64>,
}

pub fn solve(problem: &SdpProblem, options: &SdpOptions) -> SdpSolution {
    SdpSolver::new(options.clone()).solve(problem)
}

struct Layout {
    dims: Vec<usize>,
    offsets: Vec<usize>,
    len: usize,
}

impl Layout {
    fn new(dims: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(dims.len());
        let mut len = 0;
        for &n in dims {
            offsets.push(len);
            len += svec_len(n);
        }
        Self { dims: dims.to_vec(), offsets, len }
    }

    fn range(&self, b: usize) -> std::ops::Range<usize> {
        self.offsets[b]..self.offsets[b] + svec_len(self.dims[b])
    }

    fn unpack(&self, v: &DVector<f64>) -> Vec<DMatrix<f64>> {
        (0..self.dims.len())
            .map(|b| smat(&v.as_slice()[self.range(b)], self.dims[b]))
            .collect()
    }

    fn pack(&self, ms: &[DMatrix<f64>]) -> DVector<f64> {
        let mut v = DVector::zeros(self.len);
        for (b, m) in ms.iter().enumerate() {
            let r = self.range(b);
            svec_into(m, &mut v.as_mut_slice()[r]);
        }
        v
    }

    fn identity(&self) -> DVector<f64> {
        let eye: Vec<DMatrix<f64>> = self.dims.iter().map(|&n| DMatrix::identity(n, n)).collect();
        self.pack(&eye)
    }

    fn degree(&self) -> f64 {
        self.dims.iter().sum::<usize>() as f64
    }
}

struct Presolved {
    q: DMatrix<f64>,
    bq: DVector<f64>,
    /// `q = t * A`, `bq = t * b`.
    t: DMatrix<f64>,
    removed: Vec<usize>,
    farkas: Option<DVector<f64>>,
}

/// Modified Gram-Schmidt with one re-orthogonalization pass.
fn presolve(a: &DMatrix<f64>, b: &DVector<f64>, tol: f64, feas_tol: f64) -> Presolved {
    let (m, n) = a.shape();
    let mut q_rows: Vec<DVector<f64>> = Vec::new();
    let mut t_rows: Vec<DVector<f64>> = Vec::new();
    let mut bq = Vec::new();
    let mut removed = Vec::new();
    for k in 0..m {
        let orig: DVector<f64> = a.row(k).transpose();
        let mut v = orig.clone();
        let mut t = DVector::zeros(m);
        t[k] = 1.0;
        let mut bv = b[k];
        for _ in 0..2 {
            for j in 0..q_rows.len() {
                let coef = q_rows[j].dot(&v);
                v.axpy(-coef, &q_rows[j], 1.0);
                t.axpy(-coef, &t_rows[j], 1.0);
                bv -= coef * bq[j];
            }
        }
        let norm = v.norm();
        if norm <= tol * orig.norm().max(1.0) {
            if bv.abs() > feas_tol * (1.0 + b[k].abs()) {
                // t^T A is (numerically) zero while t^T b is not
                let y = t / bv;
                return Presolved {
                    q: DMatrix::zeros(0, n),
                    bq: DVector::zeros(0),
                    t: DMatrix::zeros(0, m),
                    removed,
                    farkas: Some(y),
                };
            }
            removed.push(k);
            continue;
        }
        q_rows.push(v / norm);
        t_rows.push(t / norm);
        bq.push(bv / norm);
    }
    let r = q_rows.len();
    let q = DMatrix::from_fn(r, n, |i, j| q_rows[i][j]);
    let t = DMatrix::from_fn(r, m, |i, j| t_rows[i][j]);
    Presolved { q, bq: DVector::from_vec(bq), t, removed, farkas: None }
}

/// Factor with `X = L L^T`. Falls back to a clamped eigen square root when
/// rounding has made `X` numerically singular.
fn factor(x: &DMatrix<f64>) -> DMatrix<f64> {
    if let Some(ch) = x.clone().cholesky() {
        return ch.l();
    }
    let e = x.clone().symmetric_eigen();
    let mut v = e.eigenvectors;
    for (j, &l) in e.eigenvalues.iter().enumerate() {
        let s = l.max(1e-300).sqrt();
        v.column_mut(j).scale_mut(s);
    }
    v
}

/// Nesterov-Todd scaling for one block: `R^{-1} X R^{-T} = R^T S R = diag(lam)`.
struct Scaling {
    r: DMatrix<f64>,
    rinv: DMatrix<f64>,
    lam: DVector<f64>,
    w: DMatrix<f64>,
}

fn nt_scaling(x: &DMatrix<f64>, s: &DMatrix<f64>) -> Scaling {
    let l1 = factor(x);
    let l2 = factor(s);
    let svd = (l2.transpose() * &l1).svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    let lam = svd.singular_values.map(|v| v.max(1e-300));
    let isq = DMatrix::from_diagonal(&lam.map(|v| 1.0 / v.sqrt()));
    let r = &l1 * vt.transpose() * &isq;
    let rinv = &isq * u.transpose() * l2.transpose();
    let w = &r * r.transpose();
    Scaling { r, rinv, lam, w }
}

/// Solve `(lam o U) = Z` for the Jordan product `(AB + BA) / 2` with `lam` diagonal.
fn jordan_div(lam: &DVector<f64>, z: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(z.nrows(), z.ncols(), |i, j| 2.0 * z[(i, j)] / (lam[i] + lam[j]))
}

fn jordan(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let ab = a * b;
    (&ab + ab.transpose()) * 0.5
}

/// Largest `alpha` with `diag(lam) + alpha * D` still PSD.
fn max_step_block(lam: &DVector<f64>, d: &DMatrix<f64>) -> f64 {
    let isq = lam.map(|v| 1.0 / v.sqrt());
    let scaled = DMatrix::from_fn(d.nrows(), d.ncols(), |i, j| isq[i] * d[(i, j)] * isq[j]);
    let sym = (&scaled + scaled.transpose()) * 0.5;
    let min = sym.symmetric_eigenvalues().min();
    if min < 0.0 {
        -1.0 / min
    } else {
        f64::INFINITY
    }
}

fn stays_interior(
    layout: &Layout,
    x: &DVector<f64>,
    dx: &DVector<f64>,
    s: &DVector<f64>,
    ds: &DVector<f64>,
    alpha: f64,
) -> bool {
    let pd = |v: DVector<f64>| layout.unpack(&v).into_iter().all(|m| m.cholesky().is_some());
    pd(x + dx * alpha) && pd(s + ds * alpha)
}

fn max_step_scalar(v: f64, dv: f64) -> f64 {
    if dv < 0.0 {
        -v / dv
    } else {
        f64::INFINITY
    }
}

struct Direction {
    dx: DVector<f64>,
    dy: DVector<f64>,
    ds: DVector<f64>,
    dtau: f64,
    dkappa: f64,
}

/// Per-iteration data shared by the predictor and corrector solves.
struct Newton<'a> {
    layout: &'a Layout,
    a: &'a DMatrix<f64>,
    b: &'a DVector<f64>,
    c: &'a DVector<f64>,
    scalings: Vec<Scaling>,
    schur: nalgebra::linalg::Cholesky<f64, nalgebra::Dyn>,
    dx2: DVector<f64>,
    dy2: DVector<f64>,
    denom_base: f64,
    rp: DVector<f64>,
    rd: DVector<f64>,
    rg: f64,
    tau: f64,
    kappa: f64,
}

impl Newton<'_> {
    fn hinv(&self, v: &DVector<f64>) -> DVector<f64> {
        let blocks = self.layout.unpack(v);
        let out: Vec<DMatrix<f64>> = blocks
            .iter()
            .zip(&self.scalings)
            .map(|(z, sc)| &sc.w * z * &sc.w)
            .collect();
        self.layout.pack(&out)
    }

    /// Cholesky solve with two rounds of iterative refinement against the
    /// unassembled operator `A H^{-1} A^T`; the assembled matrix loses
    /// digits once `mu` is small.
    fn schur_solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        schur_solve(&self.schur, rhs, |v| self.a * self.hinv(&self.a.tr_mul(v)))
    }

    /// `W(dX)` per block.
    fn scale_x(&self, dx: &DVector<f64>) -> Vec<DMatrix<f64>> {
        self.layout
            .unpack(dx)
            .iter()
            .zip(&self.scalings)
            .map(|(d, sc)| &sc.rinv * d * sc.rinv.transpose())
            .collect()
    }

    /// `W^{-T}(dS)` per block.
    fn scale_s(&self, ds: &DVector<f64>) -> Vec<DMatrix<f64>> {
        self.layout
            .unpack(ds)
            .iter()
            .zip(&self.scalings)
            .map(|(d, sc)| sc.r.transpose() * d * &sc.r)
            .collect()
    }

    fn solve(&self, eta: f64, rc: &[DMatrix<f64>], rkappa: f64) -> Direction {
        // H^{-1}(q) for q = eta rd + W^T(lam \ rc). The second term maps to
        // R (lam \ rc) R^T directly; going through W^T and then H^{-1} would
        // cancel O(1) quantities under an operator of condition ~ 1/mu.
        let centred: Vec<DMatrix<f64>> = rc
            .iter()
            .zip(&self.scalings)
            .map(|(z, sc)| &sc.r * jordan_div(&sc.lam, z) * sc.r.transpose())
            .collect();
        let hq = self.hinv(&(&self.rd * eta)) + self.layout.pack(&centred);
        let rhs = -(&self.rp * eta) - self.a * &hq;
        let dy1 = self.schur_solve(&rhs);
        let dx1 = self.hinv(&self.a.tr_mul(&dy1)) + hq;
        let num = -eta * self.rg - self.b.dot(&dy1) + self.c.dot(&dx1) + rkappa / self.tau;
        let dtau = num / self.denom_base;
        let dx = dx1 + &self.dx2 * dtau;
        let dy = dy1 + &self.dy2 * dtau;
        let ds = -(&self.rd * eta) - self.a.tr_mul(&dy) + self.c * dtau;
        let dkappa = (rkappa - self.kappa * dtau) / self.tau;
        Direction { dx, dy, ds, dtau, dkappa }
    }

    fn max_step(&self, d: &Direction) -> f64 {
        let mut alpha = max_step_scalar(self.tau, d.dtau).min(max_step_scalar(self.kappa, d.dkappa));
        for ((wx, ws), sc) in self.scale_x(&d.dx).iter().zip(self.scale_s(&d.ds)).zip(&self.scalings) {
            alpha = alpha.min(max_step_block(&sc.lam, wx)).min(max_step_block(&sc.lam, &ws));
        }
        alpha
    }
}

fn schur_solve(
    chol: &nalgebra::linalg::Cholesky<f64, nalgebra::Dyn>,
    rhs: &DVector<f64>,
    apply: impl Fn(&DVector<f64>) -> DVector<f64>,
) -> DVector<f64> {
    let mut z = chol.solve(rhs);
    for _ in 0..2 {
        let res = rhs - apply(&z);
        z += chol.solve(&res);
    }
    z
}

fn factor_schur(m: DMatrix<f64>) -> Option<nalgebra::linalg::Cholesky<f64, nalgebra::Dyn>> {
    let maxdiag = m.diagonal().amax().max(1e-300);
    let mut reg = 0.0;
    loop {
        let mut mm = m.clone();
        if reg > 0.0 {
            for i in 0..mm.nrows() {
                mm[(i, i)] += reg;
            }
        }
        if let Some(ch) = mm.cholesky() {
            return Some(ch);
        }
        reg = if reg == 0.0 { 1e-14 * maxdiag } else { reg * 100.0 };
        if reg > 1e-2 * maxdiag {
            return None;
        }
    }
}

impl SdpSolver {
    pub fn new(options: SdpOptions) -> Self {
        Self { options, row: Vec::new() }
    }

    pub fn options(&self) -> &SdpOptions {
        &self.options
    }

    pub fn solve(&mut self, problem: &SdpProblem) -> SdpSolution {
        let opts = self.options.clone();
        let layout = Layout::new(&problem.blocks);
        let m = problem.constraints.len();
        let n = layout.len;

        let mut a_full = DMatrix::zeros(m, n);
        self.row.resize(n, 0.0);
        for (k, con) in problem.constraints.iter().enumerate() {
            self.row.iter_mut().for_each(|v| *v = 0.0);
            for (bidx, mat) in con.matrices.iter().enumerate() {
                if let Some(mat) = mat {
                    svec_into(mat, &mut self.row[layout.range(bidx)]);
                }
            }
            for (j, &v) in self.row.iter().enumerate() {
                a_full[(k, j)] = v;
            }
        }
        let b_full = DVector::from_iterator(m, problem.constraints.iter().map(|c| c.rhs));
        let c = layout.pack(&problem.objective);

        let pre = presolve(&a_full, &b_full, opts.presolve_tol, opts.feasibility_tol);
        if let Some(y) = pre.farkas {
            return certificate_only(problem, &layout, y, pre.removed);
        }
        let a = &pre.q;
        let b = &pre.bq;
        let nu = layout.degree();

        let mut x = layout.identity();
        let mut s = layout.identity();
        let mut y = DVector::zeros(a.nrows());
        let mut tau = 1.0;
        let mut kappa = 1.0;
        let mut history = Vec::new();
        let mut status = SdpStatus::MaxIter;
        let mut last_step = 0.0;
        let mut iterations = 0;

        for iter in 0..=opts.max_iterations {
            iterations = iter;
            let rp = a * &x - b * tau;
            let rd = a.tr_mul(&y) + &s - &c * tau;
            let rg = b.dot(&y) - c.dot(&x) - kappa;
            let mu = (x.dot(&s) + tau * kappa) / (nu + 1.0);

            let xb = &x / tau;
            let pobj = c.dot(&xb);
            let dobj = b.dot(&y) / tau;
            let pres = (&a_full * &xb - &b_full).amax();
            let dres = rd.amax() / tau;
            history.push(IterationStats {
                iteration: iter,
                mu,
                primal_objective: pobj,
                dual_objective: dobj,
                primal_residual: pres,
                dual_residual: dres,
                step: last_step,
            });

            if pres <= opts.feasibility_tol
                && dres <= opts.feasibility_tol
                && (pobj - dobj).abs() <= opts.gap_tol * (1.0 + pobj.abs())
            {
                status = SdpStatus::Optimal;
                break;
            }
            if tau < kappa {
                let by = b.dot(&y);
                if by > 0.0 && (a.tr_mul(&y) + &s).amax() <= opts.feasibility_tol * by {
                    status = SdpStatus::Infeasible;
                    break;
                }
                let cx = c.dot(&x);
                if cx < 0.0 && (a * &x).amax() <= opts.feasibility_tol * -cx {
                    status = SdpStatus::DualInfeasible;
                    break;
                }
            }
            if iter == opts.max_iterations {
                break;
            }

            let xs = layout.unpack(&x);
            let ss = layout.unpack(&s);
            let scalings: Vec<Scaling> = xs.iter().zip(&ss).map(|(x, s)| nt_scaling(x, s)).collect();

            let hinv_rows = |v: &DVector<f64>| -> DVector<f64> {
                let blocks = layout.unpack(v);
                let out: Vec<DMatrix<f64>> = blocks
                    .iter()
                    .zip(&scalings)
                    .map(|(z, sc)| &sc.w * z * &sc.w)
                    .collect();
                layout.pack(&out)
            };
            let mut g = DMatrix::zeros(n, a.nrows());
            for k in 0..a.nrows() {
                g.set_column(k, &hinv_rows(&a.row(k).transpose()));
            }
            let schur_m = a * &g;
            let schur_m = (&schur_m + schur_m.transpose()) * 0.5;
            let Some(schur) = factor_schur(schur_m) else {
                break;
            };
            let hc = hinv_rows(&c);
            let dy2 = schur_solve(&schur, &(b + a * &hc), |v| a * hinv_rows(&a.tr_mul(v)));
            let dx2 = hinv_rows(&(a.tr_mul(&dy2) - &c));
            let denom_base = b.dot(&dy2) - c.dot(&dx2) + kappa / tau;

            let newton = Newton {
                layout: &layout,
                a,
                b,
                c: &c,
                scalings,
                schur,
                dx2,
                dy2,
                denom_base,
                rp,
                rd,
                rg,
                tau,
                kappa,
            };

            // predictor
            let rc_aff: Vec<DMatrix<f64>> = newton
                .scalings
                .iter()
                .map(|sc| DMatrix::from_diagonal(&sc.lam.map(|l| -l * l)))
                .collect();
            let aff = newton.solve(1.0, &rc_aff, -tau * kappa);
            let alpha_aff = newton.max_step(&aff).min(1.0);
            let x_aff = &x + &aff.dx * alpha_aff;
            let s_aff = &s + &aff.ds * alpha_aff;
            let mu_aff = (x_aff.dot(&s_aff)
                + (tau + alpha_aff * aff.dtau) * (kappa + alpha_aff * aff.dkappa))
                / (nu + 1.0);
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

            // corrector
            let wdx = newton.scale_x(&aff.dx);
            let wds = newton.scale_s(&aff.ds);
            let rc: Vec<DMatrix<f64>> = newton
                .scalings
                .iter()
                .zip(wdx.iter().zip(&wds))
                .map(|(sc, (dxw, dsw))| {
                    let k = sc.lam.len();
                    DMatrix::from_diagonal(&sc.lam.map(|l| -l * l)) - jordan(dxw, dsw)
                        + DMatrix::identity(k, k) * (sigma * mu)
                })
                .collect();
            let rkappa = -tau * kappa - aff.dtau * aff.dkappa + sigma * mu;
            let dir = newton.solve(1.0 - sigma, &rc, rkappa);
            let mut alpha = (opts.step_fraction * newton.max_step(&dir)).min(1.0);
            // the step bound is computed in the scaled space; when the scaling is
            // ill-conditioned rounding can overshoot, so confirm definiteness
            while alpha >= 1e-12 && !stays_interior(&layout, &x, &dir.dx, &s, &dir.ds, alpha) {
                alpha *= 0.8;
            }
            if !alpha.is_finite() || alpha < 1e-12 {
                break;
            }
            last_step = alpha;

            x += &dir.dx * alpha;
            y += &dir.dy * alpha;
            s += &dir.ds * alpha;
            tau += alpha * dir.dtau;
            kappa += alpha * dir.dkappa;
        }

        let removed = pre.removed;
        let y_orig = pre.t.tr_mul(&y);
        match status {
            SdpStatus::Infeasible => {
                let by = b.dot(&y);
                let cert = &y_orig / by;
                let mut sol = certificate_only(problem, &layout, cert, removed);
                sol.iterations = iterations;
                sol.history = history;
                sol
            }
            _ => {
                let scale = if status == SdpStatus::DualInfeasible { 1.0 } else { 1.0 / tau };
                let xm: Vec<DMatrix<f64>> = layout.unpack(&(&x * scale));
                let sm: Vec<DMatrix<f64>> = layout.unpack(&(&s * scale));
                let yv = y_orig * scale;
                let pobj = problem.objective_value(&xm);
                let dobj = problem.dual_objective_value(&yv);
                let pres = problem.primal_residual(&xm);
                let slack = problem.dual_slack(&yv);
                let dres = slack
                    .iter()
                    .zip(&sm)
                    .map(|(a, b)| (a - b).amax())
                    .fold(0.0, f64::max);
                SdpSolution {
                    status,
                    x: xm,
                    y: yv,
                    s: sm,
                    primal_objective: pobj,
                    dual_objective: dobj,
                    duality_gap: (pobj - dobj).abs(),
                    primal_residual: pres,
                    dual_residual: dres,
                    iterations,
                    history,
                    farkas: None,
                    removed_constraints: removed,
                }
            }
        }
    }
}

fn certificate_only(
    problem: &SdpProblem,
    layout: &Layout,
    y: DVector<f64>,
    removed: Vec<usize>,
) -> SdpSolution {
    let zeros: Vec<DMatrix<f64>> = layout.dims.iter().map(|&n| DMatrix::zeros(n, n)).collect();
    let m = problem.constraints.len();
    SdpSolution {
        status: SdpStatus::Infeasible,
        x: zeros.clone(),
        y: DVector::zeros(m),
        s: zeros,
        primal_objective: f64::NAN,
        dual_objective: f64::NAN,
        duality_gap: f64::NAN,
        primal_residual: f64::NAN,
        dual_residual: f64::NAN,
        iterations: 0,
        history: Vec::new(),
        farkas: Some(y),
        removed_constraints: removed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::Constraint;
    use nalgebra::SymmetricEigen;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sym(n: usize, rows: &[f64]) -> DMatrix<f64> {
        DMatrix::from_row_slice(n, n, rows)
    }

    fn single(n: usize, c: DMatrix<f64>, cons: Vec<(DMatrix<f64>, f64)>) -> SdpProblem {
        let cons = cons
            .into_iter()
            .map(|(a, rhs)| Constraint { matrices: vec![Some(a)], rhs })
            .collect();
        SdpProblem::new(vec![n], vec![c], cons).unwrap()
    }

    #[test]
    fn one_by_one_problem() {
        let p = single(1, sym(1, &[1.0]), vec![(sym(1, &[1.0]), 1.0)]);
        let sol = solve(&p, &SdpOptions::default());
        assert!(sol.is_optimal());
        assert!((sol.x[0][(0, 0)] - 1.0).abs() < 1e-8);
        assert!((sol.primal_objective - 1.0).abs() < 1e-8);
        assert!((sol.y[0] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn largest_eigenvalue_as_sdp() {
        // max <M, X> s.t. Tr X = 1 gives lambda_max(M)
        let m = sym(3, &[2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0]);
        let p = single(3, -m.clone(), vec![(DMatrix::identity(3, 3), 1.0)]);
        let sol = solve(&p, &SdpOptions::default());
        assert!(sol.is_optimal());
        let lmax = SymmetricEigen::new(m).eigenvalues.max();
        assert!((-sol.primal_objective - lmax).abs() < 1e-6);
        assert!((-sol.dual_objective - lmax).abs() < 1e-6);
    }

    #[test]
    fn detects_infeasibility_with_certificate() {
        // Tr X = -1 over PSD X
        let p = single(2, DMatrix::identity(2, 2), vec![(DMatrix::identity(2, 2), -1.0)]);
        let sol = solve(&p, &SdpOptions::default());
        assert_eq!(sol.status, SdpStatus::Infeasible);
        let y = sol.farkas.unwrap();
        assert!((p.dual_objective_value(&y) - 1.0).abs() < 1e-9);
        let comb = p.constraint_combination(&y);
        assert!(SymmetricEigen::new(comb[0].clone()).eigenvalues.max() < 1e-8);
    }

    #[test]
    fn inconsistent_duplicate_rows_certified_in_presolve() {
        let e = DMatrix::identity(2, 2);
        let p = single(2, e.clone(), vec![(e.clone(), 1.0), (e.clone() * 2.0, 3.0)]);
        let sol = solve(&p, &SdpOptions::default());
        assert_eq!(sol.status, SdpStatus::Infeasible);
        let y = sol.farkas.unwrap();
        assert!((p.dual_objective_value(&y) - 1.0).abs() < 1e-12);
        assert!(p.constraint_combination(&y)[0].amax() < 1e-12);
    }

    #[test]
    fn consistent_duplicate_rows_are_dropped() {
        let e = DMatrix::identity(2, 2);
        let p = single(2, sym(2, &[1.0, 0.0, 0.0, 2.0]), vec![(e.clone(), 1.0), (e * 3.0, 3.0)]);
        let sol = solve(&p, &SdpOptions::default());
        assert!(sol.is_optimal());
        assert_eq!(sol.removed_constraints, vec![1]);
        assert!((sol.primal_objective - 1.0).abs() < 1e-7);
    }

    #[test]
    fn rescaling_rows_does_not_change_the_optimum() {
        let m = sym(2, &[1.0, 0.5, 0.5, -1.0]);
        let base = single(2, m.clone(), vec![(DMatrix::identity(2, 2), 1.0)]);
        let scaled = single(2, m, vec![(DMatrix::identity(2, 2) * 1e4, 1e4)]);
        let a = solve(&base, &SdpOptions::default());
        let b = solve(&scaled, &SdpOptions::default());
        assert!(a.is_optimal() && b.is_optimal());
        assert!((a.primal_objective - b.primal_objective).abs() < 1e-8);
    }

    #[test]
    fn mu_decreases_and_weak_duality_holds_at_the_end() {
        let m = sym(3, &[1.0, 0.2, -0.3, 0.2, 0.5, 0.1, -0.3, 0.1, -0.7]);
        let p = single(
            3,
            m,
            vec![
                (DMatrix::identity(3, 3), 1.0),
                (sym(3, &[1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0]), 0.1),
            ],
        );
        let sol = solve(&p, &SdpOptions::default());
        assert!(sol.is_optimal());
        for w in sol.history.windows(2) {
            assert!(w[1].mu < w[0].mu, "mu went up: {:?}", w);
        }
        assert!(sol.primal_objective >= sol.dual_objective - 1e-7);
    }

    /// Random problems with strictly feasible primal and dual, checked by an
    /// optimality certificate rebuilt from the problem data alone.
    #[test]
    fn random_problems_satisfy_kkt() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let n = rng.random_range(2..=6);
            let x0 = {
                let g = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
                let x = &g * g.transpose() + DMatrix::identity(n, n) * 0.1;
                let t = x.trace();
                x / t
            };
            let mut cons = vec![(DMatrix::identity(n, n), 1.0)];
            for _ in 0..rng.random_range(1..=4) {
                let g = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
                let a = (&g + g.transpose()) * 0.5;
                let rhs = a.dot(&x0);
                cons.push((a, rhs));
            }
            let g = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
            let p = single(n, (&g + g.transpose()) * 0.5, cons);
            let sol = solve(&p, &SdpOptions::default());
            assert!(sol.is_optimal(), "{:?}", sol.history.last());
            assert!(p.primal_residual(&sol.x) <= 1e-8);
            let slack = p.dual_slack(&sol.y);
            let min_s = SymmetricEigen::new(slack[0].clone()).eigenvalues.min();
            let min_x = SymmetricEigen::new(sol.x[0].clone()).eigenvalues.min();
            assert!(min_s > -1e-8 && min_x > -1e-8);
            let gap = p.objective_value(&sol.x) - p.dual_objective_value(&sol.y);
            assert!(gap.abs() <= 1e-7 * (1.0 + sol.primal_objective.abs()));
            assert!(sol.x[0].dot(&slack[0]).abs() < 1e-7);
        }
    }
}
