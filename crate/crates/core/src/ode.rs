//! Adaptive Dormand-Prince 5(4) integrator for small first-order systems.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

pub type State = [f64; 2];

fn axpy(y: &State, terms: &[(f64, &State)], h: f64) -> State {
    let mut out = *y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// Dormand-Prince integrator that remembers its last accepted step size.
#[derive(Debug, Clone)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    step: Option<f64>,
}

impl Dopri5 {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, max_steps: 1_000_000, step: None }
    }

    /// Integrates from `t0` to `t1` (t1 > t0), calling `on_step` after every
    /// accepted step with the new time and state.
    pub fn advance<F, O>(&mut self, f: &F, t0: f64, y0: State, t1: f64, mut on_step: O) -> Result<State>
    where
        F: Fn(f64, &State) -> State,
        O: FnMut(f64, &State),
    {
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(y0);
        }
        let mut t = t0;
        let mut y = y0;
        let mut h = self.step.unwrap_or(span * 1e-3).min(span);
        let mut k1 = f(t, &y);
        let mut steps = 0;
        while t < t1 {
            steps += 1;
            if steps > self.max_steps {
                return Err(Error::Shooting(format!("step limit reached at t = {t}")));
            }
            let last = t + h >= t1 - 1e-15 * t1.abs().max(1.0);
            let h_try = if last { t1 - t } else { h };
            let k2 = f(t + C2 * h_try, &axpy(&y, &[(A21, &k1)], h_try));
            let k3 = f(t + C3 * h_try, &axpy(&y, &[(A31, &k1), (A32, &k2)], h_try));
            let k4 = f(t + C4 * h_try, &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h_try));
            let k5 = f(t + C5 * h_try, &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h_try));
            let k6 = f(t + h_try, &axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h_try));
            let y_new = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h_try);
            let k7 = f(t + h_try, &y_new);
            let mut err = 0.0;
            for i in 0..2 {
                let e = h_try * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / sc) * (e / sc);
            }
            let err = (err / 2.0).sqrt();
            if !err.is_finite() {
                h *= 0.1;
                if h < 1e-14 * span {
                    return Err(Error::Shooting(format!("non-finite state near t = {t}")));
                }
                continue;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                t = if last { t1 } else { t + h_try };
                y = y_new;
                k1 = k7;
                on_step(t, &y);
                if !last {
                    h = h_try * factor;
                }
                self.step = Some(h_try * factor);
            } else {
                h = h_try * factor.min(1.0);
                if h < 1e-14 * span {
                    return Err(Error::Shooting(format!("step size underflow at t = {t}")));
                }
            }
        }
        Ok(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_to_tolerance() {
        let f = |_t: f64, y: &State| [y[1], -y[0]];
        let mut ode = Dopri5::new(1e-11, 1e-14);
        let y = ode.advance(&f, 0.0, [0.0, 1.0], 10.0, |_, _| {}).unwrap();
        assert!((y[0] - 10f64.sin()).abs() < 1e-9);
        assert!((y[1] - 10f64.cos()).abs() < 1e-9);
    }

    #[test]
    fn lands_exactly_on_end_time() {
        let f = |_t: f64, y: &State| [y[0], 0.0];
        let mut last = 0.0;
        let mut ode = Dopri5::new(1e-10, 1e-14);
        let y = ode.advance(&f, 0.0, [1.0, 0.0], 1.0, |t, _| last = t).unwrap();
        assert_eq!(last, 1.0);
        assert!((y[0] - std::f64::consts::E).abs() < 1e-8);
    }
}
