"""Numerical floors and tolerances used by the tests.

Finite-k coercivity floors were set from scans of the implementation; the
observed minima are noted next to each value.
"""

WRONSKIAN_TOL = 1e-12
WRONSKIAN_TOL_HIGH_ORDER = 1e-11  # n > 4|K|
CROSS_PATH_TOL = 1e-10
CALDERON_TOL = 1e-9

A1_FLOOR = 0.5     # observed minimum 0.5003
A2_FLOOR = 0.1     # observed minimum 0.424
D_FLOOR = 0.5      # observed minimum 0.50001
P_FLOOR = 0.35     # observed minimum 0.432

BNU_LIMIT_RTOL = 0.05
COND_A_COEF = 0.38 * 1.05
COND_B_COEF = 0.75 * 1.05
SLOPE_TARGET = 2.0 / 3.0
SLOPE_TOL = 0.1

PLANEWAVE_ORACLE_TOL = 1e-8
TRACE_ORACLE_TOL = 1e-6
