"""scikit-learn style allocators.

Each allocator is fitted on a column of path gains (dB, one row per node) and
exposes the chosen parameters per row. Allocation is transductive, so the
estimators offer ``fit``/``fit_predict`` like scikit-learn clusterers.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .allocation import (
    DEFAULT_DEPLOYMENT,
    LORAWAN_POW_LEVELS,
    NodeReport,
    assign_rates_by_region,
    baseline_adelantado,
    baseline_equal_sf,
    baseline_reynders,
    baseline_sn5,
    fadr_power_control,
    parse_strategy,
)
from .phy import DEFAULT_CF, MAX_TP, CirMatrix, SensitivityModel, TxParams


def check_path_gains(X) -> np.ndarray:
    """Validate path gains given as shape (n,) or (n, 1); return them flat."""
    X = check_array(X, ensure_2d=False, dtype=float)
    if X.ndim == 2:
        if X.shape[1] != 1:
            raise ValueError(f"expected a single path-gain column, got {X.shape[1]} columns")
        X = X[:, 0]
    return X


def _as_cir(cir) -> CirMatrix:
    if isinstance(cir, CirMatrix):
        return cir
    if np.ndim(cir) == 0:
        return CirMatrix.uniform(float(cir))
    return CirMatrix(np.asarray(cir, dtype=float))


class BaseAllocator(BaseEstimator):
    sample_count = 1

    def _allocate(self, reports: list[NodeReport]) -> dict[int, TxParams]:
        raise NotImplementedError

    def fit(self, X, y=None):
        gains = check_path_gains(X)
        reports = [NodeReport(i, float(g), self.sample_count) for i, g in enumerate(gains)]
        assignment = self._allocate(reports)
        self.params_ = [assignment[i] for i in range(len(reports))]
        self.sf_ = np.array([p.sf for p in self.params_])
        self.bw_ = np.array([p.bw for p in self.params_])
        self.cr_ = np.array([p.cr for p in self.params_])
        self.tp_ = np.array([p.tp for p in self.params_])
        self.n_features_in_ = 1
        return self

    def fit_predict(self, X, y=None) -> np.ndarray:
        """Fit, then return an (n, 4) integer array of sf, bw, cr index and tp per node."""
        self.fit(X)
        return self.allocation_matrix()

    def allocation_matrix(self) -> np.ndarray:
        check_is_fitted(self, "params_")
        return np.column_stack([self.sf_, self.bw_, self.cr_, self.tp_])


class FairRateAllocator(BaseAllocator):
    """Fair data-rate ratios per region plus FADR transmit power control.

    Parameters
    ----------
    region_size : int or None
        Nodes per RSSI region; None treats the cell as a single region.
    pow_levels : sequence of int
        Available transmit powers in dBm, ascending.
    cir : float, 6x6 array or CirMatrix
        Co-channel rejection thresholds in dB.
    deployed : iterable of (sf, bw, cr) tuples
        Data-rate combinations in use.
    bw_weighting : {"linear", "squared"}
        How an SF's share splits across bandwidths.
    power_control : bool
        If False, every node keeps ``initial_tp``.
    """

    def __init__(
        self,
        region_size=None,
        pow_levels=LORAWAN_POW_LEVELS,
        cir=6.0,
        deployed=DEFAULT_DEPLOYMENT,
        bw_weighting="linear",
        power_control=True,
        initial_tp=MAX_TP,
        cf=DEFAULT_CF,
    ):
        self.region_size = region_size
        self.pow_levels = pow_levels
        self.cir = cir
        self.deployed = deployed
        self.bw_weighting = bw_weighting
        self.power_control = power_control
        self.initial_tp = initial_tp
        self.cf = cf

    def _allocate(self, reports):
        rates = assign_rates_by_region(reports, self.region_size, self.deployed, self.bw_weighting)
        if self.power_control:
            tps = fadr_power_control(reports, self.pow_levels, _as_cir(self.cir))
        else:
            tps = dict.fromkeys(rates, self.initial_tp)
        return {i: TxParams(r.sf, r.bw, r.cr, tps[i], self.cf) for i, r in rates.items()}


class EqualSFAllocator(BaseAllocator):
    def __init__(self, tp=MAX_TP, cf=DEFAULT_CF):
        self.tp = tp
        self.cf = cf

    def _allocate(self, reports):
        return baseline_equal_sf(reports, self.tp, self.cf)


class AdelantadoAllocator(BaseAllocator):
    def __init__(self, tp=MAX_TP, cf=DEFAULT_CF):
        self.tp = tp
        self.cf = cf

    def _allocate(self, reports):
        return baseline_adelantado(reports, self.tp, self.cf)


class ReyndersAllocator(BaseAllocator):
    def __init__(self, pow_levels=LORAWAN_POW_LEVELS, cir=6.0, sensitivity=None, target="reference", cf=DEFAULT_CF):
        self.pow_levels = pow_levels
        self.cir = cir
        self.sensitivity = sensitivity
        self.target = target
        self.cf = cf

    def _allocate(self, reports):
        sens = self.sensitivity or SensitivityModel()
        return baseline_reynders(reports, self.pow_levels, _as_cir(self.cir), sens, self.target, self.cf)


class SN5Allocator(BaseAllocator):
    def __init__(self, pow_levels=LORAWAN_POW_LEVELS, sensitivity=None, payload_len=80, cf=DEFAULT_CF):
        self.pow_levels = pow_levels
        self.sensitivity = sensitivity
        self.payload_len = payload_len
        self.cf = cf

    def _allocate(self, reports):
        sens = self.sensitivity or SensitivityModel()
        return baseline_sn5(reports, self.pow_levels, sens, self.payload_len, self.cf)


def make_allocator(scenario) -> BaseAllocator:
    """Build the allocator named by ``scenario.strategy``."""
    kind, region_size = parse_strategy(scenario.strategy)
    cf = scenario.channels[0]
    if kind == "fadr":
        est = FairRateAllocator(
            region_size=region_size,
            pow_levels=tuple(scenario.pow_levels),
            cir=scenario.cir,
            deployed=tuple(scenario.deployed),
            bw_weighting=scenario.bw_weighting,
            initial_tp=scenario.initial_tp,
            cf=cf,
        )
    elif kind == "equal-sf":
        est = EqualSFAllocator(scenario.initial_tp, cf)
    elif kind == "adelantado":
        est = AdelantadoAllocator(scenario.initial_tp, cf)
    elif kind == "reynders":
        est = ReyndersAllocator(tuple(scenario.pow_levels), scenario.cir, scenario.sensitivity, cf=cf)
    else:
        est = SN5Allocator(tuple(scenario.pow_levels), scenario.sensitivity, scenario.packet_len, cf)
    est.sample_count = scenario.warmup_packets
    return est
