"""scikit-learn style wrappers around the projections.

``fit`` takes a model (parameters or a parsed model file) rather than a
data matrix; the fitted product state is exposed through trailing-underscore
attributes, and hyperparameters round-trip through ``get_params``.

>>> from mfbm import CbmParams, ClassicalMeanField
>>> est = ClassicalMeanField(damping=0.5).fit(CbmParams.product([0.5, -0.2]))
>>> est.magnetization_.round(4)
array([ 0.4621, -0.1974])
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import DomainError
from .cbm import CbmParams, kl_divergence
from .cbm_meanfield import e_project_classical, m_project_classical
from .modelfile import ModelFile
from .qbm import QbmParams, density_matrix, product_state, quantum_relative_entropy
from .qbm_meanfield import e_project_quantum, m_project_quantum
from .solver import SolverConfig


def check_model(model, kind: str):
    """Return the parameter record of ``model`` for the given kind."""
    if isinstance(model, ModelFile):
        model = model.params
    expected = CbmParams if kind == "classical" else QbmParams
    if not isinstance(model, expected):
        raise DomainError(f"expected {expected.__name__} (or a {kind} ModelFile), got {type(model).__name__}")
    return model


class _MeanFieldBase(BaseEstimator):
    _kind = None

    def __init__(self, projection="e", damping=0.5, tol=1e-10, max_iter=10000, init="local-field", restarts=0, seed=None):
        self.projection = projection
        self.damping = damping
        self.tol = tol
        self.max_iter = max_iter
        self.init = init
        self.restarts = restarts
        self.seed = seed

    def _config(self) -> SolverConfig:
        return SolverConfig(
            damping=self.damping, tol=self.tol, max_iter=self.max_iter,
            init=self.init, seed=self.seed, restarts=self.restarts,
        )

    def fit(self, model, y=None):
        """Project ``model`` onto product states; ``y`` is ignored."""
        p = check_model(model, self._kind)
        if self.projection == "e":
            coords, report = self._e_project(p, self._config())
            self.report_ = report
            self.divergence_ = report.objective
        elif self.projection == "m":
            coords = self._m_project(p)
            self.report_ = None
            self.divergence_ = self._m_divergence(p, coords)
        else:
            raise DomainError(f"projection must be 'e' or 'm', got {self.projection!r}")
        self.coords_ = coords
        self.magnetization_ = np.array(coords.mbar)
        self.natural_ = np.array(coords.hbar)
        self.n_sites_ = p.n
        return self

    def transform(self, model=None):
        """Magnetizations of the fitted product state.

        With a model, refit first; this mirrors ``fit_transform``.
        """
        if model is not None:
            self.fit(model)
        check_is_fitted(self, "magnetization_")
        return self.magnetization_.copy()

    def fit_transform(self, model, y=None):
        return self.fit(model).transform()


class ClassicalMeanField(_MeanFieldBase):
    """Product-distribution approximation of a classical model."""

    _kind = "classical"
    _e_project = staticmethod(e_project_classical)
    _m_project = staticmethod(m_project_classical)

    @staticmethod
    def _m_divergence(p, coords):
        return kl_divergence(p, CbmParams.product(coords.hbar))


class QuantumMeanField(_MeanFieldBase):
    """Product-state approximation of a quantum model."""

    _kind = "quantum"
    _e_project = staticmethod(e_project_quantum)
    _m_project = staticmethod(m_project_quantum)

    @staticmethod
    def _m_divergence(p, coords):
        return quantum_relative_entropy(density_matrix(p), product_state(coords))
