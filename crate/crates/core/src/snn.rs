//! Feed-forward reflex network built from rate-mode LIF ensembles.
//!
//! Each stage is a population of leaky integrate-and-fire neurons that
//! represents a scalar angle. A stage's firing rates are read out through a
//! linear decoder; the decoded value drives the next stage. Inner stages
//! decode the identity and the last stage decodes the target mapping, so the
//! chain reads (cerci) → giant interneurons → abdominal ganglia → ventral
//! nerve cord → thoracic ganglia → (pivot).

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::angle::AngleDeg;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SnnError {
    #[error("ensemble needs at least one neuron")]
    ZeroNeurons,
    #[error("network needs at least one stage")]
    NoStages,
    #[error("invalid LIF parameters: tau_rc={tau_rc}, tau_ref={tau_ref}")]
    InvalidLif { tau_rc: f64, tau_ref: f64 },
    #[error(
        "max-rate band [{low}, {high}] Hz must be positive and below 1/tau_ref = {ceiling} Hz"
    )]
    InvalidRateBand { low: f64, high: f64, ceiling: f64 },
    #[error("representation radius must be positive, got {0}")]
    InvalidRadius(f64),
    #[error("decoder solve needs at least one sample point")]
    NoSamples,
    #[error("regularization must be non-negative, got {0}")]
    InvalidRegularization(f64),
    #[error("decoder normal equations are singular")]
    Singular,
    #[error("MAE needs at least one test angle")]
    EmptyTestSet,
}

/// Membrane and refractory time constants, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifParams {
    pub tau_rc: f64,
    pub tau_ref: f64,
}

impl LifParams {
    pub fn new(tau_rc: f64, tau_ref: f64) -> Result<Self, SnnError> {
        let p = LifParams { tau_rc, tau_ref };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), SnnError> {
        if self.tau_rc > 0.0
            && self.tau_ref >= 0.0
            && self.tau_rc.is_finite()
            && self.tau_ref.is_finite()
        {
            Ok(())
        } else {
            Err(SnnError::InvalidLif {
                tau_rc: self.tau_rc,
                tau_ref: self.tau_ref,
            })
        }
    }

    /// Upper bound on the firing rate, `1 / tau_ref`.
    pub fn max_rate_ceiling(&self) -> f64 {
        1.0 / self.tau_ref
    }

    /// Input current that produces `rate` Hz; inverse of [`lif_rate`] for
    /// `0 < rate < 1/tau_ref`.
    pub fn drive_for_rate(&self, rate: f64) -> f64 {
        let u = (1.0 / rate - self.tau_ref) / self.tau_rc;
        1.0 + 1.0 / u.exp_m1()
    }
}

impl Default for LifParams {
    fn default() -> Self {
        LifParams {
            tau_rc: 0.02,
            tau_ref: 0.002,
        }
    }
}

/// Steady-state LIF firing rate (Hz) for a dimensionless input current
/// normalised so that the firing threshold is 1.
pub fn lif_rate(drive: f64, p: &LifParams) -> f64 {
    if drive <= 1.0 {
        return 0.0;
    }
    // ln(1 + 1/(J-1)), written to stay accurate for large J
    let isi = p.tau_ref + p.tau_rc * (1.0 / (drive - 1.0)).ln_1p();
    1.0 / isi
}

/// Range the maximum firing rates are drawn from, Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBand {
    pub low: f64,
    pub high: f64,
}

impl Default for RateBand {
    fn default() -> Self {
        RateBand {
            low: 200.0,
            high: 400.0,
        }
    }
}

/// A population of LIF neurons representing one scalar over
/// `[-radius, radius]`.
///
/// Neurons are tuned in mirrored pairs: both members share gain, intercept
/// and maximum rate and have opposite encoders. An odd-sized ensemble ends
/// with one unpaired `+1` neuron.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    encoders: Vec<f64>,
    gains: Vec<f64>,
    biases: Vec<f64>,
    intercepts: Vec<f64>,
    max_rates: Vec<f64>,
    radius: f64,
    lif: LifParams,
}

impl Ensemble {
    pub fn build(
        n: usize,
        radius: f64,
        lif: LifParams,
        band: RateBand,
        seed: u64,
    ) -> Result<Ensemble, SnnError> {
        if n == 0 {
            return Err(SnnError::ZeroNeurons);
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(SnnError::InvalidRadius(radius));
        }
        lif.validate()?;
        let ceiling = lif.max_rate_ceiling();
        if !(band.low > 0.0 && band.low <= band.high && band.high < ceiling) {
            return Err(SnnError::InvalidRateBand {
                low: band.low,
                high: band.high,
                ceiling,
            });
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut e = Ensemble {
            encoders: Vec::with_capacity(n),
            gains: Vec::with_capacity(n),
            biases: Vec::with_capacity(n),
            intercepts: Vec::with_capacity(n),
            max_rates: Vec::with_capacity(n),
            radius,
            lif,
        };
        while e.encoders.len() < n {
            let intercept: f64 = rng.random_range(-1.0..1.0);
            let max_rate = if band.high > band.low {
                rng.random_range(band.low..band.high)
            } else {
                band.low
            };
            let j_max = lif.drive_for_rate(max_rate);
            let gain = (j_max - 1.0) / (1.0 - intercept);
            for encoder in [1.0, -1.0] {
                if e.encoders.len() == n {
                    break;
                }
                e.encoders.push(encoder);
                e.gains.push(gain);
                e.biases.push(1.0 - gain * intercept);
                e.intercepts.push(intercept * radius);
                e.max_rates.push(max_rate);
            }
        }
        Ok(e)
    }

    pub fn n(&self) -> usize {
        self.encoders.len()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn lif(&self) -> &LifParams {
        &self.lif
    }

    pub fn encoders(&self) -> &[f64] {
        &self.encoders
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    /// x-intercepts in representation units (degrees).
    pub fn intercepts(&self) -> &[f64] {
        &self.intercepts
    }

    pub fn max_rates(&self) -> &[f64] {
        &self.max_rates
    }

    pub fn mean_max_rate(&self) -> f64 {
        self.max_rates.iter().sum::<f64>() / self.n() as f64
    }

    /// Input current of neuron `i` for the value `x`.
    ///
    /// Equal to `gain * encoder * x / radius + bias`; evaluated relative to
    /// the intercept so the threshold crossing is exact.
    pub fn drive(&self, i: usize, x: f64) -> f64 {
        self.gains[i] * (self.encoders[i] * x - self.intercepts[i]) / self.radius + 1.0
    }

    pub fn rate(&self, i: usize, x: f64) -> f64 {
        lif_rate(self.drive(i, x), &self.lif)
    }

    pub fn rates(&self, x: f64) -> Vec<f64> {
        (0..self.n()).map(|i| self.rate(i, x)).collect()
    }

    /// `count` evenly spaced points covering `[-radius, radius]`.
    pub fn sample_points(&self, count: usize) -> Vec<f64> {
        match count {
            0 => Vec::new(),
            1 => vec![0.0],
            _ => (0..count)
                .map(|k| -self.radius + 2.0 * self.radius * k as f64 / (count - 1) as f64)
                .collect(),
        }
    }
}

/// Builds an ensemble with the default max-rate band.
pub fn build_ensemble(
    n: usize,
    radius: f64,
    p: LifParams,
    seed: u64,
) -> Result<Ensemble, SnnError> {
    Ensemble::build(n, radius, p, RateBand::default(), seed)
}

/// Linear readout weights for one ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoders(Vec<f64>);

impl Decoders {
    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn decode(&self, rates: &[f64]) -> f64 {
        self.0.iter().zip(rates).map(|(d, a)| d * a).sum()
    }
}

/// Ridge-regularised least-squares decoders for `target` over
/// `sample_count` evenly spaced points in `[-radius, radius]`.
///
/// `reg` is the standard deviation (Hz) of the rate noise the decoders are
/// made robust to: the normal equations are `(AᵀA + m·reg²·I) d = Aᵀy`.
pub fn solve_decoders(
    e: &Ensemble,
    target: impl Fn(f64) -> f64,
    sample_count: usize,
    reg: f64,
) -> Result<Decoders, SnnError> {
    if sample_count == 0 {
        return Err(SnnError::NoSamples);
    }
    if !(reg >= 0.0 && reg.is_finite()) {
        return Err(SnnError::InvalidRegularization(reg));
    }
    let xs = e.sample_points(sample_count);
    let n = e.n();
    let m = xs.len();
    let a = DMatrix::from_fn(m, n, |r, c| e.rate(c, xs[r]));
    let y = DVector::from_iterator(m, xs.iter().map(|&x| target(x)));

    let mut gram = a.transpose() * &a;
    let lambda = m as f64 * reg * reg;
    for i in 0..n {
        gram[(i, i)] += lambda;
    }
    let rhs = a.transpose() * y;
    let chol = gram.cholesky().ok_or(SnnError::Singular)?;
    let d = chol.solve(&rhs);
    if d.iter().any(|v| !v.is_finite()) {
        return Err(SnnError::Singular);
    }
    Ok(Decoders(d.iter().copied().collect()))
}

/// Root-mean-square decoding error of `d` against `target` on `points`.
pub fn rms_error(e: &Ensemble, d: &Decoders, target: impl Fn(f64) -> f64, points: &[f64]) -> f64 {
    let sq: f64 = points
        .iter()
        .map(|&x| (d.decode(&e.rates(x)) - target(x)).powi(2))
        .sum();
    (sq / points.len() as f64).sqrt()
}

/// Construction parameters for a [`ReflexNetwork`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReflexConfig {
    /// Neurons per stage, input side first.
    pub stage_sizes: Vec<usize>,
    pub lif: LifParams,
    pub rate_band: RateBand,
    /// Representation radius of every stage, degrees.
    pub radius: f64,
    /// Regularisation as a fraction of the stage's mean maximum rate.
    pub reg_factor: f64,
    pub sample_count: usize,
}

impl Default for ReflexConfig {
    fn default() -> Self {
        ReflexConfig {
            stage_sizes: vec![100; 4],
            lif: LifParams::default(),
            rate_band: RateBand::default(),
            radius: 180.0,
            reg_factor: 0.1,
            sample_count: 500,
        }
    }
}

/// Something that chooses a turn for a given stimulus angle.
pub trait TurnPolicy {
    fn turn(&self, stimulus: AngleDeg) -> AngleDeg;
}

/// Chain of ensembles mapping a stimulus angle to a turn angle.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflexNetwork {
    stages: Vec<Ensemble>,
    decoders: Vec<Decoders>,
    seed: u64,
}

impl ReflexNetwork {
    pub fn build(
        config: &ReflexConfig,
        target: impl Fn(f64) -> f64,
        seed: u64,
    ) -> Result<ReflexNetwork, SnnError> {
        if config.stage_sizes.is_empty() {
            return Err(SnnError::NoStages);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let last = config.stage_sizes.len() - 1;
        let mut stages = Vec::with_capacity(config.stage_sizes.len());
        let mut decoders = Vec::with_capacity(config.stage_sizes.len());
        for (k, &n) in config.stage_sizes.iter().enumerate() {
            let stage_seed: u64 = rng.random();
            let e = Ensemble::build(n, config.radius, config.lif, config.rate_band, stage_seed)?;
            let reg = config.reg_factor * e.mean_max_rate();
            let d = if k == last {
                solve_decoders(&e, &target, config.sample_count, reg)?
            } else {
                solve_decoders(&e, |x| x, config.sample_count, reg)?
            };
            stages.push(e);
            decoders.push(d);
        }
        Ok(ReflexNetwork {
            stages,
            decoders,
            seed,
        })
    }

    pub fn stages(&self) -> &[Ensemble] {
        &self.stages
    }

    pub fn decoders(&self) -> &[Decoders] {
        &self.decoders
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Propagates a raw value through every stage without wrapping.
    pub fn forward(&self, x: f64) -> f64 {
        self.stages
            .iter()
            .zip(&self.decoders)
            .fold(x, |x, (e, d)| d.decode(&e.rates(x)))
    }

    pub fn predict_turn(&self, stimulus: AngleDeg) -> AngleDeg {
        AngleDeg::new(self.forward(stimulus.degrees()))
    }

    /// Mean absolute angular error against `target` over `test_angles`.
    ///
    /// Errors are measured as the shortest rotation between prediction and
    /// target, so a prediction just across the ±180° cut is not penalised
    /// by a full turn.
    pub fn evaluate_mae(
        &self,
        target: impl Fn(f64) -> f64,
        test_angles: &[AngleDeg],
    ) -> Result<f64, SnnError> {
        if test_angles.is_empty() {
            return Err(SnnError::EmptyTestSet);
        }
        let total: f64 = test_angles
            .iter()
            .map(|&a| {
                let want = AngleDeg::new(target(a.degrees()));
                self.predict_turn(a).diff(want).degrees().abs()
            })
            .sum();
        Ok(total / test_angles.len() as f64)
    }
}

impl TurnPolicy for ReflexNetwork {
    fn turn(&self, stimulus: AngleDeg) -> AngleDeg {
        self.predict_turn(stimulus)
    }
}

/// Builds a network with default LIF parameters, rate band, radius and
/// regularisation for the given stage sizes.
pub fn build_reflex_net(
    stage_sizes: &[usize],
    target: impl Fn(f64) -> f64,
    p: LifParams,
    seed: u64,
) -> Result<ReflexNetwork, SnnError> {
    let config = ReflexConfig {
        stage_sizes: stage_sizes.to_vec(),
        lif: p,
        ..ReflexConfig::default()
    };
    ReflexNetwork::build(&config, target, seed)
}

/// `count` angles evenly spaced over `(-180, 180]`, ending at 180.
pub fn uniform_test_angles(count: usize) -> Vec<AngleDeg> {
    (1..=count)
        .map(|k| AngleDeg::new(-180.0 + 360.0 * k as f64 / count as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p() -> LifParams {
        LifParams::default()
    }

    #[test]
    fn rate_is_zero_at_and_below_threshold() {
        assert_eq!(lif_rate(1.0, &p()), 0.0);
        assert_eq!(lif_rate(0.5, &p()), 0.0);
        assert_eq!(lif_rate(-3.0, &p()), 0.0);
    }

    #[test]
    fn rate_at_drive_two() {
        // 1 / (0.002 + 0.02 * ln 2), evaluated independently
        let r = lif_rate(2.0, &p());
        assert!((r - 63.04000219064139).abs() < 1e-9, "{r}");
        assert!(r < 500.0);
    }

    #[test]
    fn drive_for_rate_inverts_rate() {
        for rate in [50.0, 200.0, 399.0, 490.0] {
            let j = p().drive_for_rate(rate);
            assert!((lif_rate(j, &p()) - rate).abs() < 1e-9 * rate);
        }
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(LifParams::new(0.0, 0.002).is_err());
        assert!(LifParams::new(0.02, -1.0).is_err());
        assert!(LifParams::new(0.02, 0.0).is_ok());
        let band = RateBand {
            low: 200.0,
            high: 600.0,
        };
        assert!(matches!(
            Ensemble::build(10, 180.0, p(), band, 0),
            Err(SnnError::InvalidRateBand { .. })
        ));
        assert!(matches!(
            build_ensemble(10, 0.0, p(), 0),
            Err(SnnError::InvalidRadius(_))
        ));
    }

    #[test]
    fn zero_neurons_rejected() {
        assert_eq!(build_ensemble(0, 180.0, p(), 1), Err(SnnError::ZeroNeurons));
    }

    #[test]
    fn ensemble_is_deterministic_and_seed_sensitive() {
        let a = build_ensemble(50, 180.0, p(), 11).unwrap();
        let b = build_ensemble(50, 180.0, p(), 11).unwrap();
        assert_eq!(a, b);
        let c = build_ensemble(50, 180.0, p(), 12).unwrap();
        assert!(a.gains().iter().zip(c.gains()).any(|(x, y)| x != y));
    }

    #[test]
    fn tuning_calibration_points() {
        let e = build_ensemble(100, 180.0, p(), 3).unwrap();
        for (i, &c) in e.intercepts().iter().enumerate() {
            let enc = e.encoders()[i];
            assert!(enc == 1.0 || enc == -1.0);
            assert!(e.gains()[i] > 0.0);
            assert!(c > -180.0 && c < 180.0);
            // silent at its own intercept along the preferred direction
            assert_eq!(e.rate(i, enc * c), 0.0);
            let top = e.rate(i, enc * 180.0);
            assert!((200.0 - 1e-6..=400.0 + 1e-6).contains(&top), "{top}");
            assert!((top - e.max_rates()[i]).abs() < 1e-6 * top);
        }
    }

    #[test]
    fn encoders_alternate() {
        let e = build_ensemble(7, 180.0, p(), 5).unwrap();
        assert_eq!(e.encoders(), &[1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0]);
    }

    #[test]
    fn identity_decoding_within_two_percent() {
        let e = build_ensemble(100, 180.0, p(), 21).unwrap();
        let d = solve_decoders(&e, |x| x, 500, 0.1 * e.mean_max_rate()).unwrap();
        let pts = e.sample_points(997);
        let rms = rms_error(&e, &d, |x| x, &pts);
        assert!(rms <= 0.02 * 180.0, "rms {rms}");
    }

    #[test]
    fn zero_function_decoding() {
        let e = build_ensemble(100, 180.0, p(), 21).unwrap();
        let d = solve_decoders(&e, |_| 0.0, 500, 0.1 * e.mean_max_rate()).unwrap();
        let pts = e.sample_points(997);
        assert!(rms_error(&e, &d, |_| 0.0, &pts) <= 0.02 * 180.0);
    }

    #[test]
    fn stronger_regularisation_does_not_help() {
        let e = build_ensemble(100, 180.0, p(), 21).unwrap();
        let pts = e.sample_points(500);
        let reg = 0.1 * e.mean_max_rate();
        let weak = solve_decoders(&e, |x| x, 500, reg).unwrap();
        let strong = solve_decoders(&e, |x| x, 500, 100.0 * reg).unwrap();
        assert!(rms_error(&e, &strong, |x| x, &pts) >= rms_error(&e, &weak, |x| x, &pts));
    }

    #[test]
    fn decoder_argument_errors() {
        let e = build_ensemble(10, 180.0, p(), 1).unwrap();
        assert_eq!(solve_decoders(&e, |x| x, 0, 1.0), Err(SnnError::NoSamples));
        assert_eq!(
            solve_decoders(&e, |x| x, 10, -1.0),
            Err(SnnError::InvalidRegularization(-1.0))
        );
    }

    #[test]
    fn unregularised_degenerate_tuning_is_singular() {
        // every neuron silent over the whole range: A = 0, so AᵀA = 0
        let e = build_ensemble(4, 180.0, p(), 1).unwrap();
        let silent = Ensemble {
            gains: vec![1.0; 4],
            intercepts: vec![360.0; 4],
            encoders: vec![1.0; 4],
            ..e
        };
        assert_eq!(
            solve_decoders(&silent, |x| x, 20, 0.0),
            Err(SnnError::Singular)
        );
    }

    #[test]
    fn accuracy_improves_with_population_size() {
        let rms: Vec<f64> = [10, 100, 500]
            .iter()
            .map(|&n| {
                let e = build_ensemble(n, 180.0, p(), 77).unwrap();
                let d = solve_decoders(&e, |x| x, 500, 0.1 * e.mean_max_rate()).unwrap();
                rms_error(&e, &d, |x| x, &e.sample_points(401))
            })
            .collect();
        assert!(rms[0] >= rms[1] && rms[1] >= rms[2], "{rms:?}");
    }

    #[test]
    fn network_shapes() {
        let net = build_reflex_net(&[100, 100, 100, 100], |x| x, p(), 9).unwrap();
        assert_eq!(net.stages().len(), 4);
        assert!(net
            .stages()
            .iter()
            .zip(net.decoders())
            .all(|(e, d)| e.n() == 100 && d.weights().len() == 100));
        assert_eq!(
            build_reflex_net(&[], |x| x, p(), 9),
            Err(SnnError::NoStages)
        );
    }

    #[test]
    fn single_stage_equals_one_decoded_ensemble() {
        let net = build_reflex_net(&[60], |x| 0.5 * x, p(), 4).unwrap();
        let e = &net.stages()[0];
        let d = solve_decoders(e, |x| 0.5 * x, 500, 0.1 * e.mean_max_rate()).unwrap();
        for x in [-150.0, -20.0, 0.0, 33.0, 170.0] {
            assert_eq!(net.forward(x), d.decode(&e.rates(x)));
        }
    }

    #[test]
    fn network_is_deterministic() {
        let a = build_reflex_net(&[30, 30], |x| x, p(), 5).unwrap();
        let b = build_reflex_net(&[30, 30], |x| x, p(), 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mae_edge_cases() {
        let net = build_reflex_net(&[40], |x| x, p(), 2).unwrap();
        assert_eq!(net.evaluate_mae(|x| x, &[]), Err(SnnError::EmptyTestSet));

        let angles = uniform_test_angles(25);
        let own = |x: f64| net.predict_turn(AngleDeg::new(x)).degrees();
        assert_eq!(net.evaluate_mae(own, &angles).unwrap(), 0.0);

        let a = AngleDeg::new(37.0);
        let single = net.evaluate_mae(|x| x, &[a]).unwrap();
        assert_eq!(single, net.predict_turn(a).diff(a).degrees().abs());
    }

    #[test]
    fn uniform_angles_cover_half_open_circle() {
        let a = uniform_test_angles(100);
        assert_eq!(a.len(), 100);
        assert_eq!(a.last().unwrap().degrees(), 180.0);
        assert!((a[0].degrees() - (-176.4)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn rate_monotone_and_bounded(j1 in 1.0f64..1e3, dj in 1e-3f64..1e3) {
            let lo = lif_rate(j1, &p());
            let hi = lif_rate(j1 + dj, &p());
            prop_assert!(hi > lo);
            prop_assert!(hi < 500.0);
        }

        #[test]
        fn prediction_is_normalised(x in -180.0f64..=180.0) {
            let net = build_reflex_net(&[20], |v| 3.0 * v, p(), 1).unwrap();
            let y = net.predict_turn(AngleDeg::new(x)).degrees();
            prop_assert!(y > -180.0 && y <= 180.0);
        }
    }
}
