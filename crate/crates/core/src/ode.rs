//! Dormand–Prince 5(4) with embedded error estimation and FSAL.
//!
//! Step acceptance uses the max-norm of the scaled local error
//! `|e_i| / (atol + rtol · max(|y_i|, |y_new_i|))`.

use crate::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions { rtol: 1e-9, atol: 1e-12, max_step: f64::INFINITY, max_steps: 1_000_000 }
    }
}

impl StepOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rtol > 0.0
            && self.atol > 0.0
            && self.rtol.is_finite()
            && self.atol.is_finite()
            && self.max_step > 0.0
            && self.max_steps > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("bad step options {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// An explicit adaptive integrator for `y' = f(t, y)` that can be advanced in segments
/// without losing its step-size history.
pub struct Dopri5<F> {
    rhs: F,
    opts: StepOptions,
    t: f64,
    y: Vec<f64>,
    f0: Vec<f64>,
    h: Option<f64>,
    stats: StepStats,
}

impl<F: FnMut(f64, &[f64], &mut [f64])> Dopri5<F> {
    pub fn new(mut rhs: F, t0: f64, y0: Vec<f64>, opts: StepOptions) -> Result<Self> {
        opts.validate()?;
        let mut f0 = vec![0.0; y0.len()];
        rhs(t0, &y0, &mut f0);
        Ok(Dopri5 {
            rhs,
            opts,
            t: t0,
            y: y0,
            f0,
            h: None,
            stats: StepStats { evaluations: 1, ..Default::default() },
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    fn scaled_norm(&self, v: &[f64], y: &[f64]) -> f64 {
        v.iter()
            .zip(y)
            .map(|(vi, yi)| vi.abs() / (self.opts.atol + self.opts.rtol * yi.abs()))
            .fold(0.0, f64::max)
    }

    fn initial_step(&self, span: f64) -> f64 {
        let d0 = self.scaled_norm(&self.y, &self.y);
        let d1 = self.scaled_norm(&self.f0, &self.y);
        let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h.min(span).min(self.opts.max_step)
    }

    /// Integrates to `t_end`, calling `on_step(t, y)` after every accepted step.
    pub fn advance_to(&mut self, t_end: f64, mut on_step: impl FnMut(f64, &[f64])) -> Result<()> {
        let dim = self.y.len();
        let mut k = vec![vec![0.0; dim]; 7];
        let mut stage = vec![0.0; dim];
        let mut y_new = vec![0.0; dim];
        let mut h = self.h.unwrap_or_else(|| self.initial_step(t_end - self.t));
        while self.t < t_end {
            if self.stats.accepted + self.stats.rejected >= self.opts.max_steps {
                return Err(Error::MaxStepsExceeded { t: self.t, max_steps: self.opts.max_steps });
            }
            let remaining = t_end - self.t;
            h = h.min(self.opts.max_step);
            let last = h >= remaining;
            let step = if last { remaining } else { h };

            k[0].copy_from_slice(&self.f0);
            for s in 1..7 {
                for i in 0..dim {
                    let incr: f64 = (0..s).map(|r| A[s][r] * k[r][i]).sum();
                    stage[i] = self.y[i] + step * incr;
                }
                (self.rhs)(self.t + C[s] * step, &stage, &mut k[s]);
            }
            self.stats.evaluations += 6;
            // stage 7 is evaluated at the fifth-order solution
            y_new.copy_from_slice(&stage);
            let mut err = 0.0_f64;
            for i in 0..dim {
                let e: f64 = (0..7).map(|r| E[r] * k[r][i]).sum::<f64>() * step;
                let sc = self.opts.atol + self.opts.rtol * self.y[i].abs().max(y_new[i].abs());
                let r = e.abs() / sc;
                // f64::max would silently drop a NaN
                err = if r.is_nan() { f64::INFINITY } else { err.max(r) };
            }

            if err <= 1.0 {
                self.t = if last { t_end } else { self.t + step };
                std::mem::swap(&mut self.y, &mut y_new);
                self.f0.copy_from_slice(&k[6]);
                self.stats.accepted += 1;
                on_step(self.t, &self.y);
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                // keep the controller's step, not the one clipped to hit t_end
                if !last {
                    h = step * fac;
                }
            } else {
                self.stats.rejected += 1;
                let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.2, 1.0) } else { 0.2 };
                h = step * fac;
                if h <= 16.0 * f64::EPSILON * self.t.abs().max(1.0) {
                    return Err(Error::StepSizeUnderflow { t: self.t });
                }
            }
        }
        self.h = Some(h);
        Ok(())
    }
}
