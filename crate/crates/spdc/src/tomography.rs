//! Two-qubit state tomography: the canonical 16-projector measurement set,
//! count simulation, linear and maximum-likelihood reconstruction, and
//! entanglement metrics.

use nalgebra::{DMatrix, DVector, Vector2, Vector4};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::twophoton::{kron, DensityMatrix};

type C = Complex64;

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

/// Single-qubit analysis states of the canonical tomography set.
const BASIS_LABELS: [char; 4] = ['H', 'V', 'D', 'R'];

fn basis_state(which: char) -> Vector2<C> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    match which {
        'H' => Vector2::new(c(1.0), c(0.0)),
        'V' => Vector2::new(c(0.0), c(1.0)),
        'D' => Vector2::new(c(r), c(r)),
        'R' => Vector2::new(c(r), C::new(0.0, -r)),
        _ => unreachable!("basis label"),
    }
}

/// The 16 rank-1 two-qubit projectors {H,V,D,R} x {H,V,D,R} with their
/// two-letter labels, ordered so the first four (HH, HV, VH, VV) form a
/// complete basis (their projectors sum to the identity).
pub fn projector_set() -> Vec<(String, DensityMatrix)> {
    // order: HH, HV, VH, VV, then the remaining 12
    let order = [
        (0, 0),
        (0, 1),
        (1, 0),
        (1, 1),
        (0, 2),
        (0, 3),
        (1, 2),
        (1, 3),
        (2, 0),
        (2, 1),
        (2, 2),
        (2, 3),
        (3, 0),
        (3, 1),
        (3, 2),
        (3, 3),
    ];
    order
        .iter()
        .map(|&(i, j)| {
            let a = basis_state(BASIS_LABELS[i]);
            let b = basis_state(BASIS_LABELS[j]);
            let pa = &a * a.adjoint();
            let pb = &b * b.adjoint();
            (
                format!("{}{}", BASIS_LABELS[i], BASIS_LABELS[j]),
                kron(&pa, &pb),
            )
        })
        .collect()
}

/// Counts from one full tomography run: 16 settings in `projector_set` order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TomographyRecord {
    /// (projector label, integrated counts) in canonical order.
    pub entries: Vec<(String, f64)>,
    pub duration_s: f64,
    pub power_mw: f64,
}

impl TomographyRecord {
    pub fn counts(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.1).collect()
    }

    /// Total pair number per setting, estimated from the complete basis
    /// formed by the first four settings (HH + HV + VH + VV).
    pub fn total_per_setting(&self) -> f64 {
        self.entries.iter().take(4).map(|e| e.1).sum()
    }

    /// Serialize as `label,count` lines (16 rows) with `#` metadata.
    pub fn to_csv_string(&self) -> String {
        let mut s = String::new();
        s.push_str("# tomography record: 16 projector settings\n");
        s.push_str(&format!(
            "# duration_s: {}\n# power_mw: {}\n",
            self.duration_s, self.power_mw
        ));
        s.push_str("# label,count\n");
        for (label, count) in &self.entries {
            s.push_str(&format!("{label},{count}\n"));
        }
        s
    }

    /// Build a record from 16 counts in canonical projector order.
    pub fn from_counts(counts: &[f64]) -> Result<Self> {
        if counts.len() != 16 {
            return Err(Error::MalformedInput {
                line: 0,
                message: format!("expected 16 counts, found {}", counts.len()),
            });
        }
        let entries = projector_set()
            .into_iter()
            .zip(counts)
            .map(|((label, _), &c)| (label, c))
            .collect();
        Ok(Self {
            entries,
            duration_s: 1.0,
            power_mw: 1.0,
        })
    }

    /// Parse the `label,count` format; validates the full 16-setting set.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut duration_s = 1.0;
        let mut power_mw = 1.0;
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(v) = rest.strip_prefix("duration_s:") {
                    duration_s = v.trim().parse().map_err(|_| Error::MalformedInput {
                        line: line_no,
                        message: "unparsable duration_s".into(),
                    })?;
                } else if let Some(v) = rest.strip_prefix("power_mw:") {
                    power_mw = v.trim().parse().map_err(|_| Error::MalformedInput {
                        line: line_no,
                        message: "unparsable power_mw".into(),
                    })?;
                }
                continue;
            }
            let (label, count_str) = line.split_once(',').ok_or(Error::MalformedInput {
                line: line_no,
                message: "expected `label,count`".into(),
            })?;
            let count: f64 = count_str.trim().parse().map_err(|_| Error::MalformedInput {
                line: line_no,
                message: format!("unparsable count '{}'", count_str.trim()),
            })?;
            if count < 0.0 {
                return Err(Error::MalformedInput {
                    line: line_no,
                    message: "negative count".into(),
                });
            }
            entries.push((label.trim().to_string(), count));
        }
        let expected: Vec<String> = projector_set().into_iter().map(|(l, _)| l).collect();
        if entries.len() != 16 {
            return Err(Error::MalformedInput {
                line: text.lines().count(),
                message: format!("expected 16 settings, found {}", entries.len()),
            });
        }
        for (i, (label, _)) in entries.iter().enumerate() {
            if *label != expected[i] {
                return Err(Error::MalformedInput {
                    line: i + 1,
                    message: format!("setting {} should be {}, found {}", i, expected[i], label),
                });
            }
        }
        Ok(Self {
            entries,
            duration_s,
            power_mw,
        })
    }
}

/// Count-noise model for `simulate_counts`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseModel {
    None,
    Poisson,
}

/// Validate the density-matrix invariants: Hermitian and unit trace to
/// 1e-10, eigenvalues >= -1e-10.
pub fn validate_density_matrix(rho: &DensityMatrix) -> Result<()> {
    let herm = (rho - rho.adjoint()).norm();
    if herm > 1e-10 {
        return Err(Error::InvalidDensityMatrix(format!(
            "not Hermitian: ||rho - rho^dag|| = {herm:e}"
        )));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
        return Err(Error::InvalidDensityMatrix(format!("trace = {tr}")));
    }
    let eigs = hermitian_eigenvalues(rho);
    if let Some(min) = eigs.iter().cloned().reduce(f64::min) {
        if min < -1e-10 {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min:e}"
            )));
        }
    }
    Ok(())
}

fn hermitian_part(m: &DensityMatrix) -> DensityMatrix {
    (m + m.adjoint()).map(|z| z * 0.5)
}

fn hermitian_eigenvalues(rho: &DensityMatrix) -> Vec<f64> {
    hermitian_part(rho).symmetric_eigen().eigenvalues.iter().cloned().collect()
}

/// Simulated counts N * tr(rho P_i), optionally Poisson-sampled.
pub fn simulate_counts(
    rho: &DensityMatrix,
    n_per_setting: f64,
    noise: NoiseModel,
    seed: u64,
) -> Result<TomographyRecord> {
    validate_density_matrix(rho)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries = projector_set()
        .into_iter()
        .map(|(label, p)| {
            let mean = n_per_setting * (rho * p).trace().re.max(0.0);
            let count = match noise {
                NoiseModel::None => mean,
                NoiseModel::Poisson => {
                    if mean <= 0.0 {
                        0.0
                    } else {
                        Poisson::new(mean).expect("positive mean").sample(&mut rng)
                    }
                }
            };
            (label, count)
        })
        .collect();
    Ok(TomographyRecord {
        entries,
        duration_s: 1.0,
        power_mw: 1.0,
    })
}

/// Linear (inversion) estimate of the density matrix. Hermitian and unit
/// trace by construction, but not necessarily positive semidefinite.
pub fn linear_reconstruct(record: &TomographyRecord) -> Result<DensityMatrix> {
    let projectors = projector_set();
    let n_total = record.total_per_setting();
    if n_total <= 0.0 {
        return Err(Error::InsufficientData(
            "complete-basis counts sum to zero".into(),
        ));
    }
    // tr(rho P_i) = sum_jk rho_jk (P_i)_kj: one linear equation per setting
    let mut a = DMatrix::<C>::zeros(16, 16);
    let mut b = DVector::<C>::zeros(16);
    for (i, (_, p)) in projectors.iter().enumerate() {
        for j in 0..4 {
            for k in 0..4 {
                a[(i, 4 * j + k)] = p[(k, j)];
            }
        }
        b[i] = c(record.entries[i].1 / n_total);
    }
    let sol = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::FitFailed("singular tomography system".into()))?;
    let mut rho = DensityMatrix::zeros();
    for j in 0..4 {
        for k in 0..4 {
            rho[(j, k)] = sol[4 * j + k];
        }
    }
    let mut rho = hermitian_part(&rho);
    let tr = rho.trace().re;
    rho /= c(tr);
    Ok(rho)
}

/// Likelihood model for the MLE fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Likelihood {
    /// Gaussian with variance equal to the expected counts.
    Gaussian,
    /// Exact Poisson log-likelihood.
    Poisson,
}

/// Options for `mle_reconstruct`.
#[derive(Debug, Clone, Copy)]
pub struct MleOptions {
    pub likelihood: Likelihood,
    pub seed: u64,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub restarts: usize,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            likelihood: Likelihood::Gaussian,
            seed: 7,
            max_iterations: 10_000,
            gradient_tolerance: 1e-8,
            restarts: 5,
        }
    }
}

/// Lower-triangular Cholesky-like parameterization: rho = T^dag T / tr.
/// 16 real parameters: 4 diagonal, 6 complex below the diagonal.
fn t_from_params(t: &[f64; 16]) -> DensityMatrix {
    let mut m = DensityMatrix::zeros();
    m[(0, 0)] = c(t[0]);
    m[(1, 1)] = c(t[1]);
    m[(2, 2)] = c(t[2]);
    m[(3, 3)] = c(t[3]);
    m[(1, 0)] = C::new(t[4], t[5]);
    m[(2, 0)] = C::new(t[6], t[7]);
    m[(2, 1)] = C::new(t[8], t[9]);
    m[(3, 0)] = C::new(t[10], t[11]);
    m[(3, 1)] = C::new(t[12], t[13]);
    m[(3, 2)] = C::new(t[14], t[15]);
    m
}

fn param_basis(k: usize) -> DensityMatrix {
    let mut t = [0.0f64; 16];
    t[k] = 1.0;
    t_from_params(&t)
}

fn rho_from_params(t: &[f64; 16]) -> DensityMatrix {
    let m = t_from_params(t);
    let s = m.adjoint() * m;
    let tr = s.trace().re;
    s.map(|z| z / tr.max(1e-300))
}

/// Parameters whose rho equals the PSD projection of `estimate`.
fn params_from_estimate(estimate: &DensityMatrix) -> [f64; 16] {
    // clip negative eigenvalues, renormalize, then Cholesky-factor
    let eig = hermitian_part(estimate).symmetric_eigen();
    let mut clipped = DensityMatrix::zeros();
    let mut total = 0.0;
    let vals: Vec<f64> = eig.eigenvalues.iter().map(|&v| v.max(1e-8)).collect();
    for v in &vals {
        total += v;
    }
    for i in 0..4 {
        let col = eig.eigenvectors.column(i);
        clipped += (&col * col.adjoint()).map(|z| z * (vals[i] / total));
    }
    // We need lower-triangular T with T^dag T = clipped. With U = T^dag
    // (upper triangular) this reads clipped = U U^dag; conjugating by the
    // exchange matrix J turns it into an ordinary Cholesky problem:
    // J clipped J = (J U J)(J U J)^dag with J U J lower triangular.
    let ex = DensityMatrix::from_fn(|i, j| if i + j == 3 { c(1.0) } else { c(0.0) });
    let reversed = ex * clipped * ex;
    let chol = nalgebra::linalg::Cholesky::new(reversed).unwrap_or_else(|| {
        nalgebra::linalg::Cholesky::new(DensityMatrix::identity().map(|z: C| z * 0.25)).unwrap()
    });
    let u = ex * chol.l() * ex;
    let tm = u.adjoint();
    let mut t = [0.0f64; 16];
    t[0] = tm[(0, 0)].re;
    t[1] = tm[(1, 1)].re;
    t[2] = tm[(2, 2)].re;
    t[3] = tm[(3, 3)].re;
    t[4] = tm[(1, 0)].re;
    t[5] = tm[(1, 0)].im;
    t[6] = tm[(2, 0)].re;
    t[7] = tm[(2, 0)].im;
    t[8] = tm[(2, 1)].re;
    t[9] = tm[(2, 1)].im;
    t[10] = tm[(3, 0)].re;
    t[11] = tm[(3, 0)].im;
    t[12] = tm[(3, 1)].re;
    t[13] = tm[(3, 1)].im;
    t[14] = tm[(3, 2)].re;
    t[15] = tm[(3, 2)].im;
    t
}

struct MleProblem {
    projectors: Vec<DensityMatrix>,
    counts: Vec<f64>,
    n_total: f64,
    likelihood: Likelihood,
}

/// tr(A B) for 4x4 complex matrices without forming the product.
fn trace_prod(a: &DensityMatrix, b: &DensityMatrix) -> C {
    let mut acc = C::new(0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

impl MleProblem {
    /// Objective (normalized per count) and gradient at parameter vector `t`.
    fn eval(&self, t: &[f64; 16]) -> (f64, [f64; 16]) {
        let tm = t_from_params(t);
        let s = tm.adjoint() * &tm;
        let tr_s = s.trace().re.max(1e-300);
        // per-parameter dS = dT^dag T + T^dag dT; t_from_params is linear in
        // the parameters, so dT/dt_k is just the unit-parameter matrix
        let ds: Vec<DensityMatrix> = (0..16)
            .map(|k| {
                let bk = param_basis(k);
                bk.adjoint() * &tm + tm.adjoint() * bk
            })
            .collect();
        let d_tr: Vec<f64> = ds.iter().map(|m| m.trace().re).collect();

        // normalize the likelihood by the total counts so the gradient
        // tolerance is scale-free
        let scale = 1.0 / self.n_total;
        let floor = 1e-9 * self.n_total;
        let mut f = 0.0;
        let mut grad = [0.0f64; 16];
        for (i, p) in self.projectors.iter().enumerate() {
            let sp = trace_prod(&s, p).re;
            let q = sp / tr_s; // probability of setting i
            let mean = (self.n_total * q).max(floor);
            let n_obs = self.counts[i];
            let dmean_dq = self.n_total;
            let df_dmean = match self.likelihood {
                Likelihood::Gaussian => {
                    let r = mean - n_obs;
                    f += scale * r * r / (2.0 * mean);
                    scale * (r / mean - r * r / (2.0 * mean * mean))
                }
                Likelihood::Poisson => {
                    f += scale * (mean - n_obs * mean.ln());
                    scale * (1.0 - n_obs / mean)
                }
            };
            for k in 0..16 {
                let d_num = trace_prod(&ds[k], p).re;
                let dq = (d_num * tr_s - sp * d_tr[k]) / (tr_s * tr_s);
                grad[k] += df_dmean * dmean_dq * dq;
            }
        }
        // pin the scale gauge (rho is invariant under t -> c t)
        let pen = tr_s - 1.0;
        f += pen * pen;
        for k in 0..16 {
            grad[k] += 2.0 * pen * d_tr[k];
        }
        (f, grad)
    }
}

fn norm16(v: &[f64; 16]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// BFGS with backtracking line search on the 16-parameter problem.
fn bfgs(
    problem: &MleProblem,
    start: [f64; 16],
    max_iter: usize,
    gtol: f64,
) -> ([f64; 16], f64, f64, usize) {
    let mut x = start;
    let (mut f, mut g) = problem.eval(&x);
    let mut h = [[0.0f64; 16]; 16]; // inverse Hessian approximation
    for (i, row) in h.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let mut iterations = 0;
    for it in 0..max_iter {
        iterations = it + 1;
        let gn = norm16(&g);
        if gn < gtol {
            break;
        }
        // direction d = -H g
        let mut d = [0.0f64; 16];
        for i in 0..16 {
            for j in 0..16 {
                d[i] -= h[i][j] * g[j];
            }
        }
        let slope: f64 = d.iter().zip(g.iter()).map(|(a, b)| a * b).sum();
        let (d, slope) = if slope >= 0.0 {
            // reset to steepest descent if curvature estimate went bad
            for (i, row) in h.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = if i == j { 1.0 } else { 0.0 };
                }
            }
            let mut sd = [0.0f64; 16];
            for i in 0..16 {
                sd[i] = -g[i];
            }
            let sl = -g.iter().map(|v| v * v).sum::<f64>();
            (sd, sl)
        } else {
            (d, slope)
        };
        // backtracking Armijo line search
        let mut alpha = 1.0;
        let mut x_new = x;
        let mut f_new = f;
        let mut g_new = g;
        let mut ok = false;
        for _ in 0..60 {
            for i in 0..16 {
                x_new[i] = x[i] + alpha * d[i];
            }
            let (ft, gt) = problem.eval(&x_new);
            if ft <= f + 1e-4 * alpha * slope {
                f_new = ft;
                g_new = gt;
                ok = true;
                break;
            }
            alpha *= 0.5;
        }
        if !ok {
            break; // no descent possible at machine precision
        }
        // BFGS update of the inverse Hessian
        let mut sdiff = [0.0f64; 16];
        let mut ydiff = [0.0f64; 16];
        for i in 0..16 {
            sdiff[i] = x_new[i] - x[i];
            ydiff[i] = g_new[i] - g[i];
        }
        let sy: f64 = sdiff.iter().zip(ydiff.iter()).map(|(a, b)| a * b).sum();
        if sy > 1e-14 {
            let rho_bfgs = 1.0 / sy;
            // H <- (I - r s y^T) H (I - r y s^T) + r s s^T
            let mut hy = [0.0f64; 16];
            for i in 0..16 {
                for j in 0..16 {
                    hy[i] += h[i][j] * ydiff[j];
                }
            }
            let yhy: f64 = ydiff.iter().zip(hy.iter()).map(|(a, b)| a * b).sum();
            for i in 0..16 {
                for j in 0..16 {
                    h[i][j] += rho_bfgs * rho_bfgs * (sy + yhy) * sdiff[i] * sdiff[j]
                        - rho_bfgs * (hy[i] * sdiff[j] + sdiff[i] * hy[j]);
                }
            }
        }
        x = x_new;
        f = f_new;
        g = g_new;
    }
    (x, f, norm16(&g), iterations)
}

/// Maximum-likelihood density-matrix reconstruction over the physical
/// (Cholesky) parameterization; always Hermitian, unit-trace, PSD.
pub fn mle_reconstruct(record: &TomographyRecord, options: &MleOptions) -> Result<DensityMatrix> {
    let projectors: Vec<DensityMatrix> = projector_set().into_iter().map(|(_, p)| p).collect();
    let n_total = record.total_per_setting();
    if n_total <= 0.0 {
        return Err(Error::InsufficientData(
            "complete-basis counts sum to zero".into(),
        ));
    }
    let problem = MleProblem {
        projectors,
        counts: record.counts(),
        n_total,
        likelihood: options.likelihood,
    };

    let mut starts = Vec::with_capacity(options.restarts.max(1));
    if let Ok(linear) = linear_reconstruct(record) {
        starts.push(params_from_estimate(&linear));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    while starts.len() < options.restarts.max(1) {
        let mut t = [0.0f64; 16];
        for v in &mut t {
            *v = rng.gen_range(-0.5..0.5);
        }
        // keep the diagonal positive so tr(T^dag T) is well away from zero
        for v in t.iter_mut().take(4) {
            *v = v.abs() + 0.1;
        }
        starts.push(t);
    }

    let mut best: Option<([f64; 16], f64, f64, usize)> = None;
    for start in starts {
        let run = bfgs(&problem, start, options.max_iterations, options.gradient_tolerance);
        let better = match &best {
            None => true,
            Some(b) => run.1 < b.1,
        };
        if better {
            best = Some(run);
        }
        if let Some(b) = &best {
            if b.2 < options.gradient_tolerance {
                break;
            }
        }
    }
    let (x, _f, grad_norm, iterations) = best.expect("at least one start");
    if grad_norm >= options.gradient_tolerance.max(1e-5) {
        return Err(Error::MleNotConverged {
            grad_norm,
            iterations,
        });
    }
    let rho = rho_from_params(&x);
    validate_density_matrix(&rho)?;
    Ok(rho)
}

/// Wootters concurrence of a two-qubit density matrix.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    validate_density_matrix(rho)?;
    // spin-flipped state rho~ = (sy x sy) rho* (sy x sy)
    let sy = nalgebra::Matrix2::new(
        c(0.0),
        C::new(0.0, -1.0),
        C::new(0.0, 1.0),
        c(0.0),
    );
    let syy = kron(&sy, &sy);
    let rho_tilde = syy * rho.map(|z| z.conj()) * syy;
    // eigenvalues of rho rho~ via the Hermitian form sqrt(rho) rho~ sqrt(rho)
    let eig = hermitian_part(rho).symmetric_eigen();
    let mut sqrt_rho = DensityMatrix::zeros();
    for i in 0..4 {
        let col = eig.eigenvectors.column(i);
        let v = eig.eigenvalues[i].max(0.0).sqrt();
        sqrt_rho += (&col * col.adjoint()).map(|z| z * v);
    }
    let m = sqrt_rho * rho_tilde * sqrt_rho;
    let mut lambdas: Vec<f64> = hermitian_part(&m)
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|&v| v.max(0.0).sqrt())
        .collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Fidelity <psi| rho |psi> of the state with a pure target.
pub fn fidelity(rho: &DensityMatrix, target: &Vector4<C>) -> Result<f64> {
    validate_density_matrix(rho)?;
    let norm = target.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidDensityMatrix(format!(
            "target state norm {norm} != 1"
        )));
    }
    Ok((target.adjoint() * rho * target)[(0, 0)].re)
}

/// Purity tr(rho^2).
pub fn purity(rho: &DensityMatrix) -> f64 {
    (rho * rho).trace().re
}

/// Raised-sine fit result y = a + b sin(2 theta + c).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VisibilityFit {
    pub visibility: f64,
    pub phase_rad: f64,
    pub offset: f64,
    pub amplitude: f64,
    pub visibility_std_error: f64,
    pub offset_std_error: f64,
    pub amplitude_std_error: f64,
}

/// Least-squares raised-sine fit (linear in a, B, C with
/// b sin(2t + c) = B sin 2t + C cos 2t); visibility = b/a with standard
/// errors from the linear covariance.
pub fn visibility_fit(points: &[(f64, f64)]) -> Result<VisibilityFit> {
    if points.len() < 6 {
        return Err(Error::InsufficientData(format!(
            "raised-sine fit needs >= 6 points, got {}",
            points.len()
        )));
    }
    let span = points
        .iter()
        .map(|p| p.0)
        .fold(f64::NEG_INFINITY, f64::max)
        - points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    if span < 90.0 {
        return Err(Error::InsufficientData(format!(
            "sweep spans {span} deg, need at least half a period (90 deg)"
        )));
    }
    let mut m = nalgebra::Matrix3::<f64>::zeros();
    let mut rhs = nalgebra::Vector3::<f64>::zeros();
    for &(deg, y) in points {
        let t = 2.0 * deg.to_radians();
        let basis = [1.0, t.sin(), t.cos()];
        for i in 0..3 {
            for j in 0..3 {
                m[(i, j)] += basis[i] * basis[j];
            }
            rhs[i] += basis[i] * y;
        }
    }
    let lu = m.lu();
    let sol = lu
        .solve(&rhs)
        .ok_or_else(|| Error::FitFailed("singular raised-sine system".into()))?;
    let (a, bb, cc) = (sol[0], sol[1], sol[2]);
    let amplitude = (bb * bb + cc * cc).sqrt();
    let phase = cc.atan2(bb);
    if a <= 0.0 {
        return Err(Error::FitFailed("non-positive fitted offset".into()));
    }
    // residual variance and covariance of the linear parameters
    let dof = (points.len() as f64 - 3.0).max(1.0);
    let mut ss = 0.0;
    for &(deg, y) in points {
        let t = 2.0 * deg.to_radians();
        let model = a + bb * t.sin() + cc * t.cos();
        ss += (y - model) * (y - model);
    }
    let sigma2 = ss / dof;
    let cov = m
        .try_inverse()
        .ok_or_else(|| Error::FitFailed("singular normal equations".into()))?
        * sigma2;
    let var_a = cov[(0, 0)].max(0.0);
    // variance of amplitude via the Jacobian (b/amp, c/amp)
    let var_amp = if amplitude > 0.0 {
        let jb = bb / amplitude;
        let jc = cc / amplitude;
        (jb * jb * cov[(1, 1)] + jc * jc * cov[(2, 2)] + 2.0 * jb * jc * cov[(1, 2)]).max(0.0)
    } else {
        cov[(1, 1)].max(cov[(2, 2)]).max(0.0)
    };
    let vis = amplitude / a;
    let var_vis = var_amp / (a * a) + amplitude * amplitude * var_a / (a * a * a * a);
    Ok(VisibilityFit {
        visibility: vis,
        phase_rad: phase,
        offset: a,
        amplitude,
        visibility_std_error: var_vis.sqrt(),
        offset_std_error: var_a.sqrt(),
        amplitude_std_error: var_amp.sqrt(),
    })
}

/// Random density matrix from the Ginibre ensemble (seeded).
pub fn random_density_matrix(rng: &mut impl Rng) -> DensityMatrix {
    let g = DensityMatrix::from_fn(|_, _| {
        C::new(
            rng.sample::<f64, _>(rand_distr::StandardNormal),
            rng.sample::<f64, _>(rand_distr::StandardNormal),
        )
    });
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    m.map(|z| z / tr)
}
