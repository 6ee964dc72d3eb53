"""Frozen absolute constants for the concentration checks and stochastic invariants.

The lemmas only promise that *some* absolute constant works.  The values
here were calibrated once at n=100, d=10, iota=5 on the worse of the isotropic
N(0, sigma^2/d I) and one-dimensional N(0, sigma^2) e_1 families, then rounded
up to two decimals; see
:func:`saddlescape.concentration.calibrate_constants`.  Changing any of them is
a reviewed decision: the optimizer invariant tests read them from here.
"""

CALIBRATION_POINT = {"n": 100, "d": 10, "iota": 5.0}

# |sum X_i| <= C sqrt(sum sigma_i^2 iota) fails w.p. <= 2 d e^-iota
HOEFFDING_C = 0.67
# sum |X_i|^2 <= C sigma^2 (n + iota) fails w.p. <= e^-iota
SQUARES_C = 1.32
# sum <u_i, X_i> <= C lam sum |u_i|^2 sigma_i^2 + iota/lam fails w.p. <= e^-iota;
# 1/2 is exact for projections that are Gaussian with variance <= |u|^2 sigma^2
INNER_C = 0.5

# stochastic improve-or-localize is checked with this constant
LOCALIZE_C = 10.0


def mc_slack(trials: int) -> float:
    """Monte Carlo allowance 3/sqrt(trials) added to every probability bound."""
    return 3.0 / trials**0.5
