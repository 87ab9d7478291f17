//! Constant-velocity Kalman filter over `[range, velocity]`.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackEstimate {
    pub state: Vector2<f64>,
    pub covariance: Matrix2<f64>,
}

impl TrackEstimate {
    pub fn new(range_m: f64, velocity_mps: f64, covariance: Matrix2<f64>) -> Result<Self> {
        check_pd(&covariance, "initial covariance")?;
        Ok(Self {
            state: Vector2::new(range_m, velocity_mps),
            covariance,
        })
    }

    pub fn range_m(&self) -> f64 {
        self.state[0]
    }

    pub fn velocity_mps(&self) -> f64 {
        self.state[1]
    }
}

fn check_pd(m: &Matrix2<f64>, what: &str) -> Result<()> {
    let symmetric = (m - m.transpose()).abs().max() <= 1e-9 * m.abs().max().max(1.0);
    if !symmetric || m.iter().any(|x| !x.is_finite()) || m.cholesky().is_none() {
        return Err(Error::Parameter(format!(
            "{what} is not symmetric positive definite"
        )));
    }
    Ok(())
}

pub fn transition(dt: f64) -> Matrix2<f64> {
    Matrix2::new(1.0, dt, 0.0, 1.0)
}

/// Continuous white-acceleration process noise of spectral density `q`.
pub fn cv_process_noise(dt: f64, q: f64) -> Matrix2<f64> {
    q * Matrix2::new(dt.powi(3) / 3.0, dt * dt / 2.0, dt * dt / 2.0, dt)
}

pub fn kalman_predict(est: &TrackEstimate, dt: f64, process_noise: &Matrix2<f64>) -> TrackEstimate {
    let f = transition(dt);
    let p = f * est.covariance * f.transpose() + process_noise;
    TrackEstimate {
        state: f * est.state,
        covariance: 0.5 * (p + p.transpose()),
    }
}

/// Linear update with `H = I`, Joseph-form covariance.
pub fn kalman_update(
    est: &TrackEstimate,
    measurement: &Vector2<f64>,
    meas_noise: &Matrix2<f64>,
) -> Result<TrackEstimate> {
    check_pd(meas_noise, "measurement noise")?;
    let (gain, _) = gain(&est.covariance, meas_noise)?;
    let innovation = measurement - est.state;
    let i_k = Matrix2::identity() - gain;
    let p = i_k * est.covariance * i_k.transpose() + gain * meas_noise * gain.transpose();
    Ok(TrackEstimate {
        state: est.state + gain * innovation,
        covariance: 0.5 * (p + p.transpose()),
    })
}

/// Kalman gain and innovation covariance for prior covariance `p`.
pub fn gain(p: &Matrix2<f64>, r: &Matrix2<f64>) -> Result<(Matrix2<f64>, Matrix2<f64>)> {
    let s = p + r;
    let s_inv = s
        .cholesky()
        .ok_or_else(|| Error::Parameter("innovation covariance is singular".into()))?
        .inverse();
    Ok((p * s_inv, s))
}

/// Root mean squared Euclidean error between state sequences.
pub fn track_rmse(truth: &[[f64; 2]], estimates: &[[f64; 2]]) -> Result<f64> {
    if truth.len() != estimates.len() {
        return Err(Error::Input(format!(
            "truth has {} states but estimates have {}",
            truth.len(),
            estimates.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Input("RMSE of an empty track".into()));
    }
    let sq: f64 = truth
        .iter()
        .zip(estimates)
        .map(|(t, e)| (t[0] - e[0]).powi(2) + (t[1] - e[1]).powi(2))
        .sum();
    Ok((sq / truth.len() as f64).sqrt())
}

/// Incremental form of [`track_rmse`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RmseAccumulator {
    sum_sq: f64,
    count: u64,
}

impl RmseAccumulator {
    pub fn push(&mut self, truth: [f64; 2], estimate: [f64; 2]) {
        self.sum_sq += (truth[0] - estimate[0]).powi(2) + (truth[1] - estimate[1]).powi(2);
        self.count += 1;
    }

    pub fn rmse(&self) -> Option<f64> {
        (self.count > 0).then(|| (self.sum_sq / self.count as f64).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    const DT: f64 = 0.063488;

    fn est(r: f64, v: f64) -> TrackEstimate {
        TrackEstimate::new(r, v, Matrix2::new(4.0, 0.5, 0.5, 2.0)).unwrap()
    }

    #[test]
    fn predict_examples() {
        let still = kalman_predict(&est(100.0, 0.0), DT, &Matrix2::zeros());
        assert_eq!(still.state, Vector2::new(100.0, 0.0));
        let moving = kalman_predict(&est(100.0, 10.0), DT, &Matrix2::zeros());
        assert!((moving.range_m() - 100.63488).abs() < 1e-12);
        let p = moving.covariance;
        assert!((p - p.transpose()).norm() < 1e-12);
    }

    #[test]
    fn update_limits() {
        let prior = est(100.0, 10.0);
        let z = Vector2::new(103.0, 9.0);
        let sharp = kalman_update(&prior, &z, &(1e-12 * Matrix2::identity())).unwrap();
        assert!((sharp.state - z).norm() < 1e-6);
        let vague = kalman_update(&prior, &z, &(1e12 * Matrix2::identity())).unwrap();
        assert!((vague.state - prior.state).norm() / prior.state.norm() < 1e-6);
        let bad = Matrix2::new(1.0, 2.0, 2.0, 1.0);
        assert!(matches!(
            kalman_update(&prior, &z, &bad),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn steady_state_gain_matches_riccati_fixed_point() {
        let q = cv_process_noise(DT, 2.0);
        let r = Matrix2::new(9.0, 0.0, 0.0, 4.0);
        // Oracle: iterate the prediction Riccati recursion directly.
        let f = transition(DT);
        let mut p = Matrix2::identity() * 100.0;
        for _ in 0..5000 {
            let s_inv = (p + r).try_inverse().unwrap();
            let post = p - p * s_inv * p;
            p = f * post * f.transpose() + q;
        }
        let k_oracle = p * (p + r).try_inverse().unwrap();

        let mut e = TrackEstimate::new(0.0, 0.0, Matrix2::identity() * 100.0).unwrap();
        let mut k = Matrix2::zeros();
        for _ in 0..500 {
            e = kalman_predict(&e, DT, &q);
            k = gain(&e.covariance, &r).unwrap().0;
            e = kalman_update(&e, &Vector2::zeros(), &r).unwrap();
        }
        assert!((k - k_oracle).abs().max() < 1e-9, "{k} vs {k_oracle}");
    }

    #[test]
    fn covariance_stays_pd_over_many_cycles() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut e = est(0.0, 0.0);
        let rand_pd = |rng: &mut ChaCha8Rng| {
            let a = Matrix2::from_fn(|_, _| rng.random_range(-1.0..1.0));
            a * a.transpose() + Matrix2::identity() * 1e-3
        };
        for _ in 0..10_000 {
            let q = rand_pd(&mut rng);
            let r = rand_pd(&mut rng);
            e = kalman_predict(&e, DT, &q);
            let z = Vector2::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
            e = kalman_update(&e, &z, &r).unwrap();
            assert!(e.covariance.symmetric_eigenvalues().min() > 1e-9);
        }
    }

    #[test]
    fn noiseless_constant_velocity_tracks_exactly() {
        let mut e = TrackEstimate::new(1000.0, 50.0, Matrix2::identity()).unwrap();
        let mut truth = [1000.0, 50.0];
        let (mut ts, mut es) = (Vec::new(), Vec::new());
        for _ in 0..200 {
            truth[0] += truth[1] * DT;
            e = kalman_predict(&e, DT, &Matrix2::zeros());
            e = kalman_update(
                &e,
                &Vector2::new(truth[0], truth[1]),
                &(1e-9 * Matrix2::identity()),
            )
            .unwrap();
            ts.push(truth);
            es.push([e.range_m(), e.velocity_mps()]);
        }
        assert!(track_rmse(&ts, &es).unwrap() < 1e-6);
    }

    #[test]
    fn normalized_innovations_are_white() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let q_density = 1.0;
        let q = cv_process_noise(DT, q_density);
        let r = Matrix2::new(9.0, 0.0, 0.0, 4.0);
        let lq = q.cholesky().unwrap().l();
        let lr = r.cholesky().unwrap().l();
        let mut x = Vector2::new(1000.0, 50.0);
        let mut e = TrackEstimate::new(1000.0, 50.0, Matrix2::identity() * 10.0).unwrap();
        let n = 10_000;
        let mut acc = 0.0;
        for k in 0..n + 200 {
            let w = Vector2::new(
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            );
            x = transition(DT) * x + lq * w;
            let v = Vector2::new(
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            );
            let z = x + lr * v;
            e = kalman_predict(&e, DT, &q);
            let (_, s) = gain(&e.covariance, &r).unwrap();
            let nu = z - e.state;
            if k >= 200 {
                acc += (nu.transpose() * s.try_inverse().unwrap() * nu)[0] / 2.0;
            }
            e = kalman_update(&e, &z, &r).unwrap();
        }
        let var = acc / n as f64;
        assert!(
            (var - 1.0).abs() < 0.1,
            "normalized innovation variance {var}"
        );
    }

    #[test]
    fn rmse_examples() {
        let t = [[1.0, 2.0], [3.0, 4.0]];
        assert_eq!(track_rmse(&t, &t).unwrap(), 0.0);
        let off = [[4.0, 6.0], [6.0, 8.0]];
        assert!((track_rmse(&t, &off).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(track_rmse(&[[0.0, 0.0]], &[[1.0, 0.0]]).unwrap(), 1.0);
        assert!(matches!(track_rmse(&t, &off[..1]), Err(Error::Input(_))));

        let mut acc = RmseAccumulator::default();
        assert!(acc.rmse().is_none());
        for (a, b) in t.iter().zip(&off) {
            acc.push(*a, *b);
        }
        assert!((acc.rmse().unwrap() - 5.0).abs() < 1e-12);
    }
}
