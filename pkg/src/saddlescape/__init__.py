"""Perturbed gradient methods for escaping saddle points, with stationarity certification."""

__version__ = "0.1.0"
