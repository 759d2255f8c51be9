"""Health scoring engine for managed IT environments.

Turns raw operational records (changes, incidents, events, assets,
compliance scans) into normalized operational metrics and weighted KPI
scores, and serves heatmaps, cross-account benchmarks, forecasts and
KPI correlations over HTTP.
"""

__version__ = "0.1.0"
