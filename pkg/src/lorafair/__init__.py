"""Fair data-rate allocation and transmit power control for LoRa cells, with a
discrete-event uplink simulator to evaluate them."""

from .allocation import (
    NodeReport,
    Rate,
    assign_rates_by_region,
    baseline_adelantado,
    baseline_equal_sf,
    baseline_reynders,
    baseline_sn5,
    fadr_power_control,
    fadr_tp_levels,
    fair_rate_ratios,
    fair_sf_bw_ratios,
    fair_sf_ratios,
    ratios_to_counts,
)
from .channel import PropagationConfig, Position, path_loss, place_nodes, received_power
from .config import load_config, parse_config
from .estimators import (
    AdelantadoAllocator,
    EqualSFAllocator,
    FairRateAllocator,
    ReyndersAllocator,
    SN5Allocator,
)
from .experiments import ExperimentSpec, sweep, to_csv
from .metrics import MetricsReport, der, jain_index
from .phy import CirMatrix, EnergyProfile, SensitivityModel, TxParams, airtime, bit_rate, tx_energy
from .simulation import ConfigError, Outcome, Scenario, resolve_receptions, run

__version__ = "0.1.0"

__all__ = [
    "AdelantadoAllocator",
    "CirMatrix",
    "ConfigError",
    "EnergyProfile",
    "EqualSFAllocator",
    "ExperimentSpec",
    "FairRateAllocator",
    "MetricsReport",
    "NodeReport",
    "Outcome",
    "Position",
    "PropagationConfig",
    "Rate",
    "ReyndersAllocator",
    "SN5Allocator",
    "Scenario",
    "SensitivityModel",
    "TxParams",
    "airtime",
    "assign_rates_by_region",
    "baseline_adelantado",
    "baseline_equal_sf",
    "baseline_reynders",
    "baseline_sn5",
    "bit_rate",
    "der",
    "fadr_power_control",
    "fadr_tp_levels",
    "fair_rate_ratios",
    "fair_sf_bw_ratios",
    "fair_sf_ratios",
    "jain_index",
    "load_config",
    "parse_config",
    "path_loss",
    "place_nodes",
    "ratios_to_counts",
    "received_power",
    "resolve_receptions",
    "run",
    "sweep",
    "to_csv",
    "tx_energy",
]
