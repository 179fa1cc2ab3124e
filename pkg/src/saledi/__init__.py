"""Large-event resilience metrics for distribution outage data."""

__version__ = "0.1.0"

from .estimators import ParetoTailEstimator, TruncatedLognormalEstimator, check_cmip
from .events import Event, EventCatalog, event_cmip, group_events
from .exceptions import ConfigError, DataError, NumericalError, SalediError
from .ingest import (OutageRecord, SystemProfile, filter_sustained, outage_cmip,
                     parse_outage_csv, write_outage_csv)
from .metrics import (CvarSpec, ExceedanceCurve, MetricsReport, area_under_exceedance, cvar,
                      exceedance, resilience_metrics, saidi_with_med, saidi_without_med,
                      seemingly_plausible_metrics, track_sliding)
from .synth import SyntheticSpec, generate_catalog, generate_data, sample_magnitudes
from .tailfit import (CandidatePolicy, GofResult, LognormalTailFit, TailFit,
                      fit_truncated_lognormal, gof_bootstrap, hill_alpha, ks_distance,
                      likelihood_ratio_test, select_m_large)
from .variability import (BoundedModel, RsePlan, bounded_lognormal_moments, bounded_pareto_moments,
                          data_requirement_factor, plan_n_year, rse_compound)

