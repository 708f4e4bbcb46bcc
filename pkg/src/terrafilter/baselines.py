"""Comparison filters: normalized LMS, static-lambda RLS, gradient-adapted
variable-forgetting-factor RLS, and a bootstrap particle filter.

All four share the StreamingFilter surface (fit on an init window, one
prediction per subsequent sample) so the benchmark can drive them and the
adaptive filter over identical traces.
"""

import math

import numpy as np

from .base import ForgettingFactorCore, StreamingFilter
from .exceptions import InvalidInputError, NumericalDivergenceError
from .regression import batch_least_squares, poly_basis


class NormalizedLms(StreamingFilter):
    """Normalized LMS on a polynomial regressor.

    theta <- theta + mu * r * phi / (eps + phi^T phi). The default degree
    is 0, a level tracker: per-step corrections then equal mu times the
    residual, which is the stable configuration for an unbounded time
    abscissa (higher degrees leave parameter error components undamped in
    directions the instantaneous regressor cannot see, and those grow with
    powers of scaled time).
    """

    def __init__(self, degree: int = 0, mu: float = 0.3, eps: float = 1e-8,
                 init_window: int = 100, scale_divisor: float = 100.0):
        self.degree = degree
        self.mu = mu
        self.eps = eps
        self.init_window = init_window
        self.scale_divisor = scale_divisor

    def fit(self, times, measurements):
        times, measurements = self._validate_window(times, measurements)
        taus = times / self.scale_divisor
        self.theta_ = batch_least_squares(taus, measurements, self.degree).theta
        self.last_time_ = float(times[-1])
        self.is_fitted_ = True
        return self

    def step(self, t_raw: float, y: float) -> float:
        self._check_fitted()
        t_raw, y = self._advance_clock(t_raw, y)
        phi = poly_basis(t_raw / self.scale_divisor, self.degree)
        prediction = float(phi @ self.theta_)
        residual = y - prediction
        self.theta_ = self.theta_ + self.mu * residual * phi / (self.eps + float(phi @ phi))
        return prediction


class StaticRls(ForgettingFactorCore):
    """Exponentially weighted RLS with a fixed forgetting factor.

    No outlier gate and no variance recursion; otherwise the update chain
    matches the adaptive filter with lambda frozen. With forgetting = 1 and
    covariance_init = "gram" the recursion equals growing-window batch
    least squares.
    """

    def __init__(self, forgetting: float = 0.96, degree: int = 4,
                 init_window: int = 100, scale_divisor: float = 100.0,
                 covariance_init: str = "gram"):
        self.forgetting = forgetting
        self.degree = degree
        self.init_window = init_window
        self.scale_divisor = scale_divisor
        self.covariance_init = covariance_init

    def fit(self, times, measurements):
        if not (0.0 < self.forgetting <= 1.0):
            raise InvalidInputError("forgetting must lie in (0, 1]")
        self._init_from_window(times, measurements)
        return self

    def step(self, t_raw: float, y: float) -> float:
        self._check_fitted()
        t_raw, y = self._advance_clock(t_raw, y)
        phi = self._basis_at(t_raw)
        prediction = float(phi @ self.theta_)
        if not math.isfinite(prediction):
            raise NumericalDivergenceError(
                "prediction became non-finite", self.step_index_
            )
        gain = self._gain_update(phi, self.forgetting)
        self.theta_ = self.theta_ + gain * (y - prediction)
        self.step_index_ += 1
        return prediction


class GvffRls(ForgettingFactorCore):
    """RLS whose forgetting factor descends the expected squared a-priori
    error, using the sensitivity recursions of the gradient-based
    variable-forgetting-factor method.

    State carries, besides theta and the covariance factor, the matrix
    sensitivity S = dP/dlambda and the vector sensitivity psi = dtheta/dlambda:

        lambda <- clip(lambda + alpha * e * phi^T psi)
        S <- (1/lambda) [(I - K phi^T) S (I - phi K^T) + K K^T - P]
        psi <- (I - K phi^T) psi + S phi e

    No outlier gate, by design.
    """

    def __init__(self, alpha: float = 1e-3, lambda_min: float = 0.85,
                 lambda_max: float = 0.95, lambda_init: float = 0.90,
                 degree: int = 4, init_window: int = 100,
                 scale_divisor: float = 100.0, covariance_init: str = "gram"):
        self.alpha = alpha
        self.lambda_min = lambda_min
        self.lambda_max = lambda_max
        self.lambda_init = lambda_init
        self.degree = degree
        self.init_window = init_window
        self.scale_divisor = scale_divisor
        self.covariance_init = covariance_init

    def fit(self, times, measurements):
        if not (0.0 < self.lambda_min <= self.lambda_init <= self.lambda_max <= 1.0):
            raise InvalidInputError(
                "need 0 < lambda_min <= lambda_init <= lambda_max <= 1"
            )
        self._init_from_window(times, measurements)
        n = self.degree + 1
        self.lambda_ = self.lambda_init
        self.S_ = np.zeros((n, n))
        self.psi_ = np.zeros(n)
        return self

    def step(self, t_raw: float, y: float) -> float:
        self._check_fitted()
        t_raw, y = self._advance_clock(t_raw, y)
        phi = self._basis_at(t_raw)
        prediction = float(phi @ self.theta_)
        if not math.isfinite(prediction):
            raise NumericalDivergenceError(
                "prediction became non-finite", self.step_index_
            )
        e = y - prediction
        self.lambda_ = min(
            max(self.lambda_ + self.alpha * e * float(phi @ self.psi_),
                self.lambda_min),
            self.lambda_max,
        )
        gain = self._gain_update(phi, self.lambda_)
        self.theta_ = self.theta_ + gain * e
        P_new = self.L_ @ self.L_.T
        # (I - K phi^T) S (I - phi K^T) via two rank-1 corrections
        AS = self.S_ - np.outer(gain, phi @ self.S_)
        ASA = AS - np.outer(AS @ phi, gain)
        self.S_ = (ASA + np.outer(gain, gain) - P_new) / self.lambda_
        self.psi_ = (
            self.psi_ - gain * float(phi @ self.psi_) + self.S_ @ phi * e
        )
        if not np.isfinite(self.psi_).all():
            raise NumericalDivergenceError(
                "sensitivity vector became non-finite", self.step_index_
            )
        self.step_index_ += 1
        return prediction


class BootstrapParticleFilter(StreamingFilter):
    """Scalar bootstrap particle filter with systematic resampling.

    Random-walk state, Gaussian measurement likelihood, resampling when the
    effective sample size drops below ``resample_threshold * particle_count``.
    The prediction is the likelihood-weighted particle mean. Particles are
    initialized around the init window's last fitted value.

    Propagation and weighting run per particle; the per-step cost is the
    point of this baseline, not a target for optimization.
    """

    def __init__(self, particle_count: int = 500, process_std: float = 0.09,
                 measurement_std: float = 0.3, resample_threshold: float = 0.5,
                 seed: int = 0, degree: int = 4, init_window: int = 100,
                 scale_divisor: float = 100.0):
        self.particle_count = particle_count
        self.process_std = process_std
        self.measurement_std = measurement_std
        self.resample_threshold = resample_threshold
        self.seed = seed
        self.degree = degree
        self.init_window = init_window
        self.scale_divisor = scale_divisor

    def fit(self, times, measurements):
        if self.particle_count < 2:
            raise InvalidInputError("particle_count must be at least 2")
        if self.process_std < 0 or self.measurement_std <= 0:
            raise InvalidInputError(
                "process_std must be >= 0 and measurement_std > 0"
            )
        if not (0.0 < self.resample_threshold <= 1.0):
            raise InvalidInputError("resample_threshold must lie in (0, 1]")
        times, measurements = self._validate_window(times, measurements)
        taus = times / self.scale_divisor
        fit = batch_least_squares(taus, measurements, self.degree)
        anchor = float(poly_basis(taus[-1], self.degree) @ fit.theta)
        self.rng_ = np.random.default_rng(self.seed)
        n = self.particle_count
        self.particles_ = [
            anchor + self.rng_.normal(0.0, self.measurement_std) for _ in range(n)
        ]
        self.weights_ = [1.0 / n] * n
        self.degenerate_steps_ = 0
        self.last_time_ = float(times[-1])
        self.is_fitted_ = True
        return self

    def step(self, t_raw: float, y: float) -> float:
        self._check_fitted()
        t_raw, y = self._advance_clock(t_raw, y)
        n = self.particle_count
        rng = self.rng_
        q = self.process_std
        inv_two_r2 = 0.5 / (self.measurement_std * self.measurement_std)

        for i in range(n):
            self.particles_[i] += rng.normal(0.0, q)

        total = 0.0
        for i in range(n):
            diff = y - self.particles_[i]
            w = self.weights_[i] * math.exp(-diff * diff * inv_two_r2)
            self.weights_[i] = w
            total += w

        if total <= 0.0 or not math.isfinite(total):
            # measurement is astronomically far from every particle
            self.weights_ = [1.0 / n] * n
            self.degenerate_steps_ += 1
        else:
            for i in range(n):
                self.weights_[i] /= total

        prediction = 0.0
        sum_sq = 0.0
        for i in range(n):
            prediction += self.weights_[i] * self.particles_[i]
            sum_sq += self.weights_[i] * self.weights_[i]

        if 1.0 / sum_sq < self.resample_threshold * n:
            self._systematic_resample()
        return prediction

    def _systematic_resample(self):
        n = self.particle_count
        positions = (np.arange(n) + self.rng_.random()) / n
        cumulative = np.cumsum(self.weights_)
        cumulative[-1] = 1.0
        indices = np.searchsorted(cumulative, positions)
        self.particles_ = [self.particles_[min(k, n - 1)] for k in indices]
        self.weights_ = [1.0 / n] * n
