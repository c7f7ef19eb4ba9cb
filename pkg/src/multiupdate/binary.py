"""Binary classification catalog: sixteen online learners behind one contract.

Every learner exposes

    begin_instance()          advance the outer clock (once per instance)
    score(x) -> float         current prediction score <w_eff, x>
    step(x, y) -> UpdateInfo  one predict -> maybe-update cycle
    primary_norm() -> float   L2 norm of the audited state vector

step() is deterministic, so once a cycle reports triggered=False every
further cycle on the same (x, y) is a no-op — the property the engine's
early-exit relies on.

The audited state vector (whose per-cycle change is reported in
delta_sq_norm and whose norm primary_norm() returns) is w for first-order
kinds, the mean mu for the confidence-weighted family, and the accumulator v
for the second-order perceptron. Measuring norms and deltas on the same
vector makes the accumulated-update norm bound hold on traces by
construction.
"""
from __future__ import annotations

import math

import numpy as np

from .core import PASSIVE_EPS, SparseVector, UpdateInfo, hinge_loss, predict_linear
from .errors import ConfigError, NumericalDegeneracyError
from .numerics import inv_norm_cdf
from .params import HyperParams

_DEGENERACY_EPS = 1e-12


def _passive(loss: float, mispredicted: bool) -> UpdateInfo:
    return UpdateInfo(loss=loss, triggered=False, mispredicted=mispredicted)


def _sparse_add(w: np.ndarray, x: SparseVector, coef: float) -> float:
    """w += coef * x on x's support; returns the realized squared change.

    Measured from the committed values rather than coef^2 * ||x||^2 so the
    reported delta matches the state the audit later re-norms even when the
    increment is partly absorbed by rounding against large coordinates.
    """
    old = w[x.indices]
    w[x.indices] = old + coef * x.values
    return float(np.sum((w[x.indices] - old) ** 2))


class BinaryLearner:
    """Base: holds the dimension, hyperparameters, and the outer-instance clock t."""

    kind: str = "?"

    def __init__(self, d: int, hp: HyperParams):
        if d < 1:
            raise ConfigError("learner dimension must be >= 1")
        self.d = d
        self.hp = hp
        self.t = 0

    def begin_instance(self) -> None:
        self.t += 1

    def score(self, x: SparseVector) -> float:
        raise NotImplementedError

    def step(self, x: SparseVector, y: int) -> UpdateInfo:
        raise NotImplementedError

    def primary_norm(self) -> float:
        raise NotImplementedError


class FirstOrderLearner(BinaryLearner):
    def __init__(self, d, hp):
        super().__init__(d, hp)
        self.w = np.zeros(d)

    def score(self, x):
        return predict_linear(self.w, x)

    def primary_norm(self):
        return float(np.linalg.norm(self.w))


class Perceptron(FirstOrderLearner):
    """Rosenblatt's rule: on a sign mistake, w += y*x."""

    kind = "Perceptron"

    def step(self, x, y):
        s = self.score(x)
        loss = hinge_loss(y, s)
        mis = y * s <= 0
        if not mis or x.squared_norm() <= PASSIVE_EPS:
            return _passive(loss, mis)
        dsq = _sparse_add(self.w, x, float(y))
        return UpdateInfo(loss=loss, triggered=True, delta_sq_norm=dsq,
                          tau=1.0, mispredicted=mis)


class _PABase(FirstOrderLearner):
    """Passive-aggressive: step size tau chosen so the instance reaches margin 1,
    optionally truncated; update fires whenever hinge loss is positive."""

    def _tau(self, loss: float, xsq: float) -> float:
        raise NotImplementedError

    def step(self, x, y):
        s = self.score(x)
        loss = hinge_loss(y, s)
        mis = y * s <= 0
        xsq = x.squared_norm()
        # A loss within rounding distance of zero means the margin constraint
        # is already met (an uncapped step lands on it exactly); treating it
        # as positive would re-trigger zero-size updates on repeat cycles.
        if loss <= PASSIVE_EPS or xsq <= PASSIVE_EPS:
            return _passive(loss, mis)
        tau = self._tau(loss, xsq)
        dsq = _sparse_add(self.w, x, tau * y)
        return UpdateInfo(loss=loss, triggered=True, delta_sq_norm=dsq,
                          tau=tau, mispredicted=mis)


class PA(_PABase):
    kind = "PA"

    def _tau(self, loss, xsq):
        return loss / xsq


class PA1(_PABase):
    kind = "PA1"

    def _tau(self, loss, xsq):
        return min(self.hp.C, loss / xsq)


class PA2(_PABase):
    kind = "PA2"

    def _tau(self, loss, xsq):
        return loss / (xsq + 1.0 / (2.0 * self.hp.C))


class OGD(FirstOrderLearner):
    """Online gradient descent on the hinge loss with eta_t = eta0 / sqrt(t).

    t is the outer-instance counter: it advances once per instance, so the
    rate is constant across one instance's repeated update cycles.
    """

    kind = "OGD"

    def step(self, x, y):
        s = self.score(x)
        loss = hinge_loss(y, s)
        mis = y * s <= 0
        xsq = x.squared_norm()
        if loss <= PASSIVE_EPS or xsq <= PASSIVE_EPS:
            return _passive(loss, mis)
        eta = self.hp.eta0 / math.sqrt(self.t if self.t >= 1 else 1)
        dsq = _sparse_add(self.w, x, eta * y)
        return UpdateInfo(loss=loss, triggered=True, delta_sq_norm=dsq,
                          tau=eta, mispredicted=mis)


class ALMA(FirstOrderLearner):
    """Approximate large-margin algorithm (p = 2).

    Works on direction only: the instance is normalized by its norm, the
    weight is kept inside the unit ball, and both the margin threshold
    (1 - alpha) * B / sqrt(k) and the step C / sqrt(k) shrink with the
    correction counter k.
    """

    kind = "ALMA"

    def __init__(self, d, hp):
        super().__init__(d, hp)
        self.k = 1

    def step(self, x, y):
        s = self.score(x)
        loss = hinge_loss(y, s)
        mis = y * s <= 0
        xsq = x.squared_norm()
        if xsq <= PASSIVE_EPS:
            return _passive(loss, mis)
        xnorm = math.sqrt(xsq)
        theta = self.hp.alma_B / math.sqrt(self.k)
        if y * s / xnorm > (1.0 - self.hp.alma_alpha) * theta:
            return _passive(loss, mis)
        eta = self.hp.alma_C / math.sqrt(self.k)
        old = self.w.copy()
        self.w[x.indices] += eta * y * x.values / xnorm
        wnorm = float(np.linalg.norm(self.w))
        if wnorm > 1.0:
            self.w /= wnorm
        self.k += 1
        delta = self.w - old
        return UpdateInfo(loss=loss, triggered=True, delta_sq_norm=float(delta @ delta),
                          tau=eta, mispredicted=mis)


class _RommaBase(FirstOrderLearner):
    """Relaxed online maximum-margin: w' = c*w + g*y*x with the closed-form
    coefficients; degenerate cases (zero weight, vanishing denominator) fall
    back to a plain perceptron step."""

    aggressive = False

    def step(self, x, y):
        s = self.score(x)
        loss = hinge_loss(y, s)
        mis = y * s <= 0
        triggered = loss > PASSIVE_EPS if self.aggressive else mis
        xsq = x.squared_norm()
        if not triggered or xsq <= PASSIVE_EPS:
            return _passive(loss, mis)
        wsq = float(self.w @ self.w)
        den = xsq * wsq - s * s
        if wsq <= _DEGENERACY_EPS or abs(den) < _DEGENERACY_EPS:
            dsq = _sparse_add(self.w, x, float(y))
            return UpdateInfo(loss=loss, triggered=True, delta_sq_norm=dsq,
                              tau=1.0, mispredicted=mis)
        c = (xsq * wsq - y * s) / den
        g = wsq * (1.0 - y * s) / den
        old = self.w.copy()
        self.w *= c
        self.w[x.indices] += g * y * x.values
        delta = self.w - old
        return UpdateInfo(loss=loss, triggered=True, delta_sq_norm=float(delta @ delta),
                          tau=g, mispredicted=mis)


class ROMMA(_RommaBase):
    kind = "ROMMA"
    aggressive = False


class AROMMA(_RommaBase):
    kind = "aROMMA"
    aggressive = True


class SOP(BinaryLearner):
    """Second-order perceptron: v accumulates y*x on mistakes, S accumulates
    x x^T, and predictions use w = (S + a*I)^-1 v.

    For small d the solve is done per prediction; above d=64 the inverse is
    maintained incrementally (rank-1 Sherman-Morrison), which is the standard
    large-d trade.
    """

    kind = "SOP"
    _SOLVE_LIMIT = 64

    def __init__(self, d, hp):
        super().__init__(d, hp)
        self.v = np.zeros(d)
        if d <= self._SOLVE_LIMIT:
            self._S = np.zeros((d, d))
            self._P = None
        else:
            self._S = None
            self._P = np.eye(d) / hp.sop_a

    def _effective_w(self) -> np.ndarray:
        if self._P is not None:
            return self._P @ self.v
        return np.linalg.solve(self._S + self.hp.sop_a * np.eye(self.d), self.v)

    def score(self, x):
        return predict_linear(self._effective_w(), x)

    def primary_norm(self):
        return float(np.linalg.norm(self.v))

    def step(self, x, y):
        s = self.score(x)
        loss = hinge_loss(y, s)
        mis = y * s <= 0
        xsq = x.squared_norm()
        if not mis or xsq <= PASSIVE_EPS:
            return _passive(loss, mis)
        dsq = _sparse_add(self.v, x, float(y))
        if self._P is not None:
            px = self._P[:, x.indices] @ x.values
            denom = 1.0 + float(px[x.indices] @ x.values)
            self._P -= np.outer(px, px) / denom
        else:
            xi, xv = x.indices, x.values
            self._S[np.ix_(xi, xi)] += np.outer(xv, xv)
        return UpdateInfo(loss=loss, triggered=True, delta_sq_norm=dsq,
                          tau=1.0, mispredicted=mis)


class SecondOrderLearner(BinaryLearner):
    """Gaussian-state family: mean mu plus covariance Sigma, initialized N(0, I)."""

    def __init__(self, d, hp):
        super().__init__(d, hp)
        self.mu = np.zeros(d)
        self.sigma = np.eye(d)

    def score(self, x):
        return predict_linear(self.mu, x)

    def primary_norm(self):
        return float(np.linalg.norm(self.mu))

    def _sigma_x(self, x: SparseVector):
        """(Sigma @ x, x^T Sigma x) without densifying x."""
        sx = self.sigma[:, x.indices] @ x.values
        return sx, float(sx[x.indices] @ x.values)

    def _commit(self, sx: np.ndarray, mu_coef: float, rank1_coef: float) -> float:
        """Apply mu += mu_coef * Sigma*x and Sigma -= rank1_coef * (Sigma*x)(Sigma*x)^T.

        The new covariance is validated before anything is committed; a
        non-positive diagonal means the closed form degenerated numerically,
        in which case the state is left untouched and the error surfaces.
        Returns the squared norm of the mean change.
        """
        new_sigma = self.sigma - rank1_coef * np.outer(sx, sx)
        if np.diagonal(new_sigma).min() <= 0.0:
            raise NumericalDegeneracyError(
                f"{self.kind}: covariance update lost positive definiteness"
            )
        self.sigma = new_sigma
        new_mu = self.mu + mu_coef * sx
        dsq = float(np.sum((new_mu - self.mu) ** 2))
        self.mu = new_mu
        return dsq


class CW(SecondOrderLearner):
    """Confidence-weighted learning (exact convex closed form).

    phi is the normal quantile of the confidence level; an update fires when
    the margin falls short of phi standard deviations, i.e.
    y*<mu,x> < phi*sqrt(x^T Sigma x).
    """

    kind = "CW"

    def __init__(self, d, hp):
        super().__init__(d, hp)
        self._phi = inv_norm_cdf(hp.cw_eta)

    def _alpha(self, m: float, v: float) -> float:
        phi = self._phi
        psi = 1.0 + phi * phi / 2.0
        zeta = 1.0 + phi * phi
        return max(0.0, (-m * psi + math.sqrt(m * m * phi ** 4 / 4.0 + v * phi * phi * zeta))
                   / (v * zeta))

    def step(self, x, y):
        s = self.score(x)
        mis = y * s <= 0
        if x.squared_norm() <= PASSIVE_EPS:
            return _passive(hinge_loss(y, s), mis)
        sx, v = self._sigma_x(x)
        m = y * s
        loss = max(0.0, self._phi * math.sqrt(v) - m)
        if loss <= PASSIVE_EPS or v <= PASSIVE_EPS:
            return _passive(loss, mis)
        alpha = self._alpha(m, v)
        if alpha <= 0.0:
            return _passive(loss, mis)
        phi = self._phi
        u = 0.25 * (-alpha * v * phi + math.sqrt(alpha * alpha * v * v * phi * phi + 4.0 * v)) ** 2
        beta = alpha * phi / (math.sqrt(u) + v * alpha * phi)
        dsq = self._commit(sx, alpha * y, beta)
        return UpdateInfo(loss=loss, triggered=True, delta_sq_norm=dsq,
                          tau=alpha, mispredicted=mis)


class SCW1(CW):
    """Soft confidence-weighted, variant I: the CW step capped at C."""

    kind = "SCW1"

    def _alpha(self, m, v):
        return min(self.hp.scw_C, super()._alpha(m, v))


class SCW2(CW):
    """Soft confidence-weighted, variant II: the CW step damped by a slack term."""

    kind = "SCW2"

    def _alpha(self, m, v):
        phi = self._phi
        n = v + 1.0 / (2.0 * self.hp.scw_C)
        phi2 = phi * phi
        num = -(2.0 * m * n + phi2 * m * v) + phi * math.sqrt(
            phi2 * m * m * v * v + 4.0 * n * v * (n + v * phi2))
        return max(0.0, num / (2.0 * (n * n + n * v * phi2)))


class AROW(SecondOrderLearner):
    """Adaptive regularization of weights: hinge-triggered, with
    beta = 1/(x^T Sigma x + r), alpha = loss * beta."""

    kind = "AROW"

    def _r(self, v: float) -> float:
        return self.hp.arow_r

    def step(self, x, y):
        s = self.score(x)
        loss = hinge_loss(y, s)
        mis = y * s <= 0
        if loss <= PASSIVE_EPS or x.squared_norm() <= PASSIVE_EPS:
            return _passive(loss, mis)
        sx, v = self._sigma_x(x)
        if v <= PASSIVE_EPS:
            return _passive(loss, mis)
        beta = 1.0 / (v + self._r(v))
        alpha = loss * beta
        dsq = self._commit(sx, alpha * y, beta)
        return UpdateInfo(loss=loss, triggered=True, delta_sq_norm=dsq,
                          tau=alpha, mispredicted=mis)


class NAROW(AROW):
    """AROW with the adaptive regularizer r_t = chi/(b*chi - 1) whenever
    b*chi > 1 (chi = x^T Sigma x); otherwise the fixed r is used."""

    kind = "NAROW"

    def _r(self, v):
        b = self.hp.narow_b
        if b * v > 1.0:
            return v / (b * v - 1.0)
        return self.hp.arow_r


class NHERD(SecondOrderLearner):
    """Gaussian herding (full-matrix projection variant).

    Mean moves like AROW with gamma = 1/C; the covariance contracts by the
    factor (C^2 v + 2C)/(1 + Cv)^2 on the (Sigma x) direction, which keeps
    Sigma positive definite since that factor times v is 1 - 1/(1+Cv)^2 < 1.
    """

    kind = "NHERD"

    def step(self, x, y):
        s = self.score(x)
        loss = hinge_loss(y, s)
        mis = y * s <= 0
        if loss <= PASSIVE_EPS or x.squared_norm() <= PASSIVE_EPS:
            return _passive(loss, mis)
        sx, v = self._sigma_x(x)
        if v <= PASSIVE_EPS:
            return _passive(loss, mis)
        C = self.hp.C
        beta = 1.0 / (v + 1.0 / C)
        alpha = loss * beta
        factor = (C * C * v + 2.0 * C) / (1.0 + C * v) ** 2
        dsq = self._commit(sx, alpha * y, factor)
        return UpdateInfo(loss=loss, triggered=True, delta_sq_norm=dsq,
                          tau=alpha, mispredicted=mis)


class IELLIP(SecondOrderLearner):
    """Ellipsoid-method learner: on a mistake the center moves along Sigma*x
    and the ellipsoid contracts by the constant factors b (global) and c
    (along the update direction). With g = y*x/sqrt(x^T Sigma x) the rank-1
    term satisfies g^T Sigma g = 1, so c <= 1 keeps Sigma positive definite.
    """

    kind = "IELLIP"

    def step(self, x, y):
        s = self.score(x)
        loss = hinge_loss(y, s)
        mis = y * s <= 0
        if not mis or x.squared_norm() <= PASSIVE_EPS:
            return _passive(loss, mis)
        sx, v = self._sigma_x(x)
        if v <= PASSIVE_EPS:
            return _passive(loss, mis)
        root_v = math.sqrt(v)
        alpha = (1.0 - y * s) / root_v
        sg = y * sx / root_v                      # Sigma @ g
        new_sigma = self.hp.iellip_b * (self.sigma - self.hp.iellip_c * np.outer(sg, sg))
        if np.diagonal(new_sigma).min() <= 0.0:
            raise NumericalDegeneracyError("IELLIP: covariance update lost positive definiteness")
        self.sigma = new_sigma
        new_mu = self.mu + alpha * sg
        dsq = float(np.sum((new_mu - self.mu) ** 2))
        self.mu = new_mu
        return UpdateInfo(loss=loss, triggered=True, delta_sq_norm=dsq,
                          tau=alpha, mispredicted=mis)


BINARY_KINDS: dict[str, type[BinaryLearner]] = {
    cls.kind: cls
    for cls in (Perceptron, PA, PA1, PA2, OGD, ALMA, ROMMA, AROMMA,
                SOP, CW, AROW, NAROW, NHERD, SCW1, SCW2, IELLIP)
}


def make_binary(kind: str, d: int, hp: HyperParams) -> BinaryLearner:
    try:
        cls = BINARY_KINDS[kind]
    except KeyError:
        raise ConfigError(f"unknown binary learner {kind!r} (valid: {list(BINARY_KINDS)})") from None
    return cls(d, hp)
