//! Time-domain propagation of the TC2 equation via the exact
//! auxiliary-operator reformulation: one σ_j per site turns the memory
//! integral into a closed linear system
//!
//!   ρ̇  = (L_S + L_eh)ρ − Σ_j [S_j, σ_j − σ_j†]
//!   σ̇_j = c·S_jρ + (L_S − γ)σ_j,  σ_j(0) = 0.
//!
//! Two steppers are provided. `StepMode::Adaptive` is an embedded
//! Dormand-Prince 5(4) with local error control. `StepMode::Exponential`
//! exponentiates the full augmented generator once (in a real-split
//! representation, since the h.c. term is antilinear in σ) and advances by
//! exact multiplication; it is the right tool for long horizons where an
//! explicit method is throttled by the fastest coherence frequency.
//!
//! The second-order kernel is only conditionally stable: for strong
//! reorganization energies or near-degenerate exciton gaps the augmented
//! generator can acquire eigenvalues with positive real part, in which case
//! the trace grows without bound. Both steppers detect this and return
//! [`Error::UnstableDynamics`] rather than a garbage efficiency.

use super::liouville::{commutator_matrix, transpose_index, vec_index};
use super::{elapsed_seconds, wall_clock, Method, SinkSpec, TransportResult};
use crate::bath::{correlation_amplitude, BathSpec};
use crate::constants::{cm2_to_rad2_ps2, cm_to_rad_ps};
use crate::error::{Error, Result};
use crate::exciton::ExcitonHamiltonian;
use crate::linalg::matexp;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Initial states are pure (trace 1) and the exact sink dynamics only drain
/// trace, so growth past this ceiling is unambiguous divergence of the
/// time-nonlocal kernel and the run is aborted with
/// [`Error::UnstableDynamics`].
const TRACE_CEILING: f64 = 2.0;

/// Stepper selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepMode {
    /// Embedded Dormand-Prince 5(4) at the given local tolerance.
    Adaptive { tol: f64 },
    /// Exact stepping with a precomputed matrix exponential of step dt (ps).
    Exponential { dt: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagateOptions {
    pub t_max: f64,
    pub mode: StepMode,
    /// Stop once tr ρ falls below this value.
    pub trace_floor: f64,
    /// Approximate spacing of trajectory records; None records every step.
    pub sample_dt: Option<f64>,
}

impl PropagateOptions {
    pub fn adaptive(t_max: f64, tol: f64) -> Self {
        Self {
            t_max,
            mode: StepMode::Adaptive { tol },
            trace_floor: 1e-8,
            sample_dt: Some(t_max / 2000.0),
        }
    }

    pub fn exponential(t_max: f64, dt: f64) -> Self {
        Self {
            t_max,
            mode: StepMode::Exponential { dt },
            trace_floor: 1e-8,
            sample_dt: None,
        }
    }

    /// Exponential stepping with a step size suited to ETE integration over
    /// long horizons.
    pub fn exponential_auto(t_max: f64) -> Self {
        Self::exponential(t_max, (t_max / 10_000.0).clamp(0.05, 1.0))
    }
}

/// Sampled time evolution plus integrity diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Site populations Re ρ[j,j] at each recorded time.
    pub populations: Vec<Vec<f64>>,
    pub trace: Vec<f64>,
    /// Running η = 2r_trap∫₀^t⟨trap|ρ|trap⟩dt′ at each recorded time.
    pub eta_curve: Vec<f64>,
    /// Max over recorded times of ‖ρ − ρ†‖_F.
    pub hermiticity_defect_max: f64,
    /// Min over recorded times and sites of Re ρ[j,j].
    pub min_population: f64,
}

struct System {
    n: usize,
    n_sigma: usize,
    ht: DMatrix<f64>,
    rates: Vec<f64>,
    c_tilde: Complex64,
    gamma: f64,
    r_trap: f64,
    r_loss: f64,
    trap: usize,
}

impl System {
    fn new(h: &ExcitonHamiltonian, bath: &BathSpec, sinks: &SinkSpec) -> System {
        let n = h.n();
        let c_cm2 = correlation_amplitude(bath);
        let c_tilde = Complex64::new(cm2_to_rad2_ps2(c_cm2.re), cm2_to_rad2_ps2(c_cm2.im));
        let n_sigma = if bath.lambda == 0.0 { 0 } else { n };
        System {
            n,
            n_sigma,
            ht: h.matrix() * cm_to_rad_ps(1.0),
            rates: (0..n).map(|j| sinks.rate(j)).collect(),
            c_tilde,
            gamma: cm_to_rad_ps(bath.gamma),
            r_trap: sinks.r_trap,
            r_loss: sinks.r_loss,
            trap: sinks.trap_index,
        }
    }

    /// Complex state length: ρ, the σ blocks, and two sink accumulators.
    fn state_len(&self) -> usize {
        self.n * self.n * (1 + self.n_sigma) + 2
    }

    fn rhs(&self, y: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        let m = n * n;
        let mi = Complex64::new(0.0, -1.0);
        let rho = &y[0..m];

        // ρ̇: commutator, sinks, and the kernel feed from the σ blocks.
        for b in 0..n {
            for a in 0..n {
                let mut acc = Complex64::ZERO;
                for c in 0..n {
                    acc += self.ht[(a, c)] * rho[vec_index(c, b, n)]
                        - rho[vec_index(a, c, n)] * self.ht[(c, b)];
                }
                let i = vec_index(a, b, n);
                out[i] = mi * acc - (self.rates[a] + self.rates[b]) * rho[i];
            }
        }
        for j in 0..self.n_sigma {
            let sig = &y[m * (1 + j)..m * (2 + j)];
            // D = σ_j − σ_j†; [S_j, D][a,b] = δ_{aj}D[j,b] − D[a,j]δ_{jb}
            for b in 0..n {
                let d_jb = sig[vec_index(j, b, n)] - sig[vec_index(b, j, n)].conj();
                out[vec_index(j, b, n)] -= d_jb;
            }
            for a in 0..n {
                let d_aj = sig[vec_index(a, j, n)] - sig[vec_index(j, a, n)].conj();
                out[vec_index(a, j, n)] += d_aj;
            }
        }

        // σ̇_j = c·S_jρ − i[H̃, σ_j] − γσ_j
        for j in 0..self.n_sigma {
            let (lo, hi) = (m * (1 + j), m * (2 + j));
            for b in 0..n {
                for a in 0..n {
                    let mut acc = Complex64::ZERO;
                    for c in 0..n {
                        acc += self.ht[(a, c)] * y[lo + vec_index(c, b, n)]
                            - y[lo + vec_index(a, c, n)] * self.ht[(c, b)];
                    }
                    let i = lo + vec_index(a, b, n);
                    out[i] = mi * acc - self.gamma * y[i];
                    if a == j {
                        out[i] += self.c_tilde * rho[vec_index(j, b, n)];
                    }
                }
            }
            debug_assert!(hi <= y.len());
        }

        // Accumulators: η̇ and η̇_loss.
        let len = self.state_len();
        out[len - 2] = Complex64::new(
            2.0 * self.r_trap * rho[vec_index(self.trap, self.trap, n)].re,
            0.0,
        );
        let mut loss = 0.0;
        for j in 0..n {
            loss += rho[vec_index(j, j, n)].re;
        }
        out[len - 1] = Complex64::new(2.0 * self.r_loss * loss, 0.0);
    }

    fn trace(&self, y: &[Complex64]) -> f64 {
        let n = self.n;
        (0..n).map(|j| y[vec_index(j, j, n)].re).sum()
    }

    fn hermiticity_defect(&self, y: &[Complex64]) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for b in 0..n {
            for a in 0..n {
                let d = y[vec_index(a, b, n)] - y[vec_index(b, a, n)].conj();
                s += d.norm_sqr();
            }
        }
        s.sqrt()
    }
}

struct Recorder {
    sample_dt: f64,
    next_sample: f64,
    traj: Trajectory,
}

impl Recorder {
    fn new(sample_dt: Option<f64>) -> Recorder {
        Recorder {
            sample_dt: sample_dt.unwrap_or(0.0).max(0.0),
            next_sample: 0.0,
            traj: Trajectory {
                times: Vec::new(),
                populations: Vec::new(),
                trace: Vec::new(),
                eta_curve: Vec::new(),
                hermiticity_defect_max: 0.0,
                min_population: f64::INFINITY,
            },
        }
    }

    fn record(&mut self, sys: &System, t: f64, y: &[Complex64], force: bool) {
        if !force && t < self.next_sample {
            return;
        }
        self.next_sample = t + self.sample_dt;
        let n = sys.n;
        let pops: Vec<f64> = (0..n).map(|j| y[vec_index(j, j, n)].re).collect();
        for &p in &pops {
            self.traj.min_population = self.traj.min_population.min(p);
        }
        let defect = sys.hermiticity_defect(y);
        self.traj.hermiticity_defect_max = self.traj.hermiticity_defect_max.max(defect);
        self.traj.times.push(t);
        self.traj.trace.push(pops.iter().sum());
        self.traj.populations.push(pops);
        self.traj.eta_curve.push(y[sys.state_len() - 2].re);
    }
}

/// Propagate with the contract stepper (adaptive Dormand-Prince at local
/// tolerance `tol`); see [`propagate_with_options`] for the exact
/// exponential stepper.
pub fn propagate_time_domain(
    h: &ExcitonHamiltonian,
    bath: &BathSpec,
    sinks: &SinkSpec,
    initial_index: usize,
    t_max: f64,
    tol: f64,
) -> Result<(Trajectory, TransportResult)> {
    propagate_with_options(
        h,
        bath,
        sinks,
        initial_index,
        &PropagateOptions::adaptive(t_max, tol),
    )
}

/// ETE by long-horizon time integration (exponential stepper); the
/// trajectory is discarded.
pub fn ete_time_domain(
    h: &ExcitonHamiltonian,
    bath: &BathSpec,
    sinks: &SinkSpec,
    initial_index: usize,
    t_max: f64,
) -> Result<TransportResult> {
    propagate_with_options(
        h,
        bath,
        sinks,
        initial_index,
        &PropagateOptions::exponential_auto(t_max),
    )
    .map(|(_, r)| r)
}

pub fn propagate_with_options(
    h: &ExcitonHamiltonian,
    bath: &BathSpec,
    sinks: &SinkSpec,
    initial_index: usize,
    options: &PropagateOptions,
) -> Result<(Trajectory, TransportResult)> {
    let n = h.n();
    if initial_index >= n {
        return Err(Error::InvalidParameter(format!(
            "initial index {initial_index} out of range for n={n}"
        )));
    }
    if sinks.trap_index >= n {
        return Err(Error::InvalidParameter(format!(
            "trap index {} out of range for n={n}",
            sinks.trap_index
        )));
    }
    if !options.t_max.is_finite() || options.t_max <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "t_max must be > 0, got {}",
            options.t_max
        )));
    }
    let timer = wall_clock();
    let sys = System::new(h, bath, sinks);
    let mut recorder = Recorder::new(options.sample_dt);

    let y_end = match options.mode {
        StepMode::Adaptive { tol } => {
            if !tol.is_finite() || tol <= 0.0 || tol >= 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "adaptive tolerance must be in (0,1), got {tol}"
                )));
            }
            step_dormand_prince(&sys, initial_index, options, tol, &mut recorder)?
        }
        StepMode::Exponential { dt } => {
            if !dt.is_finite() || dt <= 0.0 {
                return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
            }
            step_exponential(&sys, h, initial_index, options, dt, &mut recorder)?
        }
    };

    let eta_raw = y_end[sys.state_len() - 2].re;
    let eta_loss_raw = y_end[sys.state_len() - 1].re;
    let trailing_trace = sys.trace(&y_end);
    let positivity_violation = !(-1e-6..=1.0 + 1e-6).contains(&eta_raw)
        || recorder.traj.min_population < -1e-6;
    let result = TransportResult {
        eta: eta_raw.clamp(0.0, 1.0),
        eta_loss: eta_loss_raw.clamp(0.0, 1.0),
        residual: trailing_trace.abs(),
        method: Method::TimeDomain,
        wall_time: elapsed_seconds(timer),
        positivity_violation,
    };
    Ok((recorder.traj, result))
}

fn initial_state(sys: &System, initial_index: usize) -> Vec<Complex64> {
    let mut y = vec![Complex64::ZERO; sys.state_len()];
    y[vec_index(initial_index, initial_index, sys.n)] = Complex64::ONE;
    y
}

fn step_dormand_prince(
    sys: &System,
    initial_index: usize,
    options: &PropagateOptions,
    tol: f64,
    recorder: &mut Recorder,
) -> Result<Vec<Complex64>> {
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    // y5 − y4 combination weights (stage 2 weight is zero).
    const E: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];

    let len = sys.state_len();
    let atol = tol * 1e-3;
    let mut y = initial_state(sys, initial_index);
    let mut k: Vec<Vec<Complex64>> = (0..7).map(|_| vec![Complex64::ZERO; len]).collect();
    let mut ytmp = vec![Complex64::ZERO; len];
    let mut ynew = vec![Complex64::ZERO; len];

    let mut t = 0.0f64;
    let mut hstep = 1e-3f64.min(options.t_max);
    recorder.record(sys, t, &y, true);

    let (k0, rest) = k.split_first_mut().unwrap();
    sys.rhs(&y, k0);
    let _ = rest;

    while t < options.t_max {
        if hstep > options.t_max - t {
            hstep = options.t_max - t;
        }
        // Stages 2..7; stage 1 is reused from the previous step (FSAL).
        for stage in 1..7 {
            for i in 0..len {
                let mut acc = Complex64::ZERO;
                for (j, kj) in k.iter().enumerate().take(stage) {
                    let a = A[stage - 1][j];
                    if a != 0.0 {
                        acc += a * kj[i];
                    }
                }
                ytmp[i] = y[i] + hstep * acc;
            }
            if stage == 6 {
                ynew.copy_from_slice(&ytmp);
            }
            let (pre, post) = k.split_at_mut(stage);
            let _ = pre;
            sys.rhs(&ytmp, &mut post[0]);
        }

        // Scaled RMS error of the embedded pair.
        let mut err_sq = 0.0f64;
        for i in 0..len {
            let mut e = Complex64::ZERO;
            for (j, kj) in k.iter().enumerate() {
                if E[j] != 0.0 {
                    e += E[j] * kj[i];
                }
            }
            let scale = atol + tol * y[i].norm().max(ynew[i].norm());
            let ratio = hstep * e.norm() / scale;
            err_sq += ratio * ratio;
        }
        let err = (err_sq / len as f64).sqrt();

        if err <= 1.0 {
            t += hstep;
            std::mem::swap(&mut y, &mut ynew);
            k.swap(0, 6); // FSAL: last stage of the accepted step is the next first stage
            if y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFiniteState { t });
            }
            recorder.record(sys, t, &y, false);
            let trace = sys.trace(&y);
            if trace > TRACE_CEILING {
                return Err(Error::UnstableDynamics { t, trace });
            }
            if trace < options.trace_floor {
                break;
            }
        }
        let factor = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        hstep *= factor;
        if hstep < 1e-13 * options.t_max.max(t) {
            return Err(Error::StepSizeUnderflow { t, h: hstep });
        }
    }
    recorder.record(sys, t, &y, true);
    Ok(y)
}

fn step_exponential(
    sys: &System,
    h: &ExcitonHamiltonian,
    initial_index: usize,
    options: &PropagateOptions,
    dt: f64,
    recorder: &mut Recorder,
) -> Result<Vec<Complex64>> {
    let n = sys.n;
    let m = n * n;
    let blocks = 1 + sys.n_sigma;
    let dim = 2 * m * blocks + 2;
    let x_rho = 0;
    let y_rho = m;
    let x_sig = |j: usize| 2 * m + 2 * m * j;
    let y_sig = |j: usize| 2 * m + 2 * m * j + m;
    let row_eta = 2 * m * blocks;
    let row_loss = row_eta + 1;

    // Real-split augmented generator.
    let e_mat = commutator_matrix(h);
    let mut gen = DMatrix::<f64>::zeros(dim, dim);
    for p in 0..m {
        let (a, b) = (p % n, p / n);
        let decay = -(sys.rates[a] + sys.rates[b]);
        gen[(x_rho + p, x_rho + p)] += decay;
        gen[(y_rho + p, y_rho + p)] += decay;
        for q in 0..m {
            let e = e_mat[(p, q)];
            if e != 0.0 {
                gen[(x_rho + p, y_rho + q)] += e;
                gen[(y_rho + p, x_rho + q)] -= e;
            }
        }
    }
    for j in 0..sys.n_sigma {
        for p in 0..m {
            let (a, b) = (p % n, p / n);
            let mu = if a == j && b != j {
                1.0
            } else if b == j && a != j {
                -1.0
            } else {
                0.0
            };
            if mu != 0.0 {
                let tp = transpose_index(p, n);
                gen[(x_rho + p, x_sig(j) + p)] -= mu;
                gen[(x_rho + p, x_sig(j) + tp)] += mu;
                gen[(y_rho + p, y_sig(j) + p)] -= mu;
                gen[(y_rho + p, y_sig(j) + tp)] -= mu;
            }
            gen[(x_sig(j) + p, x_sig(j) + p)] -= sys.gamma;
            gen[(y_sig(j) + p, y_sig(j) + p)] -= sys.gamma;
            for q in 0..m {
                let e = e_mat[(p, q)];
                if e != 0.0 {
                    gen[(x_sig(j) + p, y_sig(j) + q)] += e;
                    gen[(y_sig(j) + p, x_sig(j) + q)] -= e;
                }
            }
        }
        for b in 0..n {
            let q = vec_index(j, b, n);
            gen[(x_sig(j) + q, x_rho + q)] += sys.c_tilde.re;
            gen[(x_sig(j) + q, y_rho + q)] -= sys.c_tilde.im;
            gen[(y_sig(j) + q, x_rho + q)] += sys.c_tilde.im;
            gen[(y_sig(j) + q, y_rho + q)] += sys.c_tilde.re;
        }
    }
    gen[(row_eta, x_rho + vec_index(sys.trap, sys.trap, n))] = 2.0 * sys.r_trap;
    for j in 0..n {
        gen[(row_loss, x_rho + vec_index(j, j, n))] = 2.0 * sys.r_loss;
    }

    let step = matexp(&(gen * dt));

    let mut state = DVector::<f64>::zeros(dim);
    state[x_rho + vec_index(initial_index, initial_index, n)] = 1.0;
    let mut t = 0.0f64;

    // Complex view of the real-split state, for shared recording code.
    let as_complex = |v: &DVector<f64>| -> Vec<Complex64> {
        let mut y = vec![Complex64::ZERO; sys.state_len()];
        for p in 0..m {
            y[p] = Complex64::new(v[x_rho + p], v[y_rho + p]);
        }
        for j in 0..sys.n_sigma {
            for p in 0..m {
                y[m * (1 + j) + p] = Complex64::new(v[x_sig(j) + p], v[y_sig(j) + p]);
            }
        }
        y[sys.state_len() - 2] = Complex64::new(v[row_eta], 0.0);
        y[sys.state_len() - 1] = Complex64::new(v[row_loss], 0.0);
        y
    };

    recorder.record(sys, t, &as_complex(&state), true);
    let mut scratch = DVector::<f64>::zeros(dim);
    while t < options.t_max * (1.0 - 1e-12) {
        step.mul_to(&state, &mut scratch);
        std::mem::swap(&mut state, &mut scratch);
        t += dt;
        if !state[x_rho].is_finite() {
            return Err(Error::NonFiniteState { t });
        }
        let trace: f64 = (0..n).map(|j| state[x_rho + vec_index(j, j, n)]).sum();
        if trace > TRACE_CEILING {
            return Err(Error::UnstableDynamics { t, trace });
        }
        recorder.record(sys, t, &as_complex(&state), false);
        if trace < options.trace_floor {
            break;
        }
    }
    let y = as_complex(&state);
    recorder.record(sys, t, &y, true);
    Ok(y)
}
