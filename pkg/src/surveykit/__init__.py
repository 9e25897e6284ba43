"""Outlier detection on weighted categorical survey data, subgroup profiling,
and Monte Carlo evaluation of stratified and multi-frame sampling."""

__version__ = "0.1.0"
