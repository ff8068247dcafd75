"""Channel-aware car-to-cloud upload scheduling: trace-driven simulation."""

from .channel_model import ChannelConfig, calibrate_defaults, rate_from_sinr
from .connectivity_map import ConnectivityMap, build_map, load_map, predict_horizon_mean, save_map
from .engine import CampaignResult, DataSourceConfig, DriveResult, TransmissionEvent, run_campaign, run_drive
from .metrics import mean_goodput_per_drive, mean_sinr_at_tx, relative_gains, sinr_at_tx_cdf, write_report
from .schemes import (
    Decision,
    SchemeConfig,
    SchemeKind,
    cat_probability,
    clamp_sinr,
    pcat_probability,
    pcat_z,
    periodic_decide,
    sample_decision,
)
from .synthgen import RouteProfile, generate_ensemble, generate_trace, urban_hotspot_profile
from .traces import DriveTrace, TraceSample, load_trace, resample_trace, save_trace

__version__ = "0.1.0"
