"""Slot layout of the packed modulus descriptor consumed by the kernel backends.

A descriptor is a flat float64 array so the compiled and pure-Python kernels
can share one calling convention.  The Cython source hardcodes the same
indices; `tests/test_backends.py` cross-checks the two implementations on
random descriptors.
"""

VARIANT = 0        # 0 holder_log, 1 capped, 2 appendix, 3 family, 4 family_log
KAPPA = 1
GAMMA = 2
DELTA = 3
SIGMA = 4
CAP = 5            # cap point 1/(2 b1); 0 when unused
LAM = 6            # appendix scaling lambda
A_EXP = 7          # alpha exponent of the appendix scaling
B_EXP = 8          # beta exponent of the appendix scaling
XI0 = 9            # family front position; <= 0 collapses to the base modulus
M_KIND = 10        # 0 identity, 1 power, 2 power_log, 3 log_power
M_P1 = 11
M_P2 = 12
M_FLOOR = 13       # lower clamp of the log_power symbol
M_INV_DELTA = 14   # m(1/delta), precomputed
GI_XI0 = 15        # gamma-integral from delta to xi0, precomputed (family, xi0 > delta)
M_INV_XI0 = 16     # m(1/xi0), precomputed (family)
QTOL = 17          # absolute tolerance of the nested gamma-integral quadrature
OMEGA_CAP = 18     # omega at the cap point, precomputed (capped / family_log)
DESC_SIZE = 19

V_HOLDER_LOG = 0
V_CAPPED = 1
V_APPENDIX = 2
V_FAMILY = 3
V_FAMILY_LOG = 4
