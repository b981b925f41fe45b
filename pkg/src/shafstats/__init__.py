"""Reduction statistics of a fixed elliptic curve over Q.

Frobenius traces, sizes of Sha for the reductions, Frobenius-field counts
and the Jacobi-symbol sums used in square-sieve estimates.
"""

from .arith import factorize, is_prime, is_squarefree, jacobi, primes_up_to, squarefree_decompose
from .charsums import (
    SieveConfig,
    SumReport,
    burgess_sum,
    hb_double_sum,
    lemma1_report,
    make_sieve_config,
    square_sieve_rhs,
    u_sum,
)
from .curve import ApRecord, ApTable, CurveQ, ap_bsgs, ap_naive, is_cm, j_invariant, new_curve, trace_table
from .frobenius import build_index, frobenius_m, lang_trotter_fit, m_set, pi_K, sigma
from .sha_stats import ShaRecord, ShaTable, build_sha_table, d_xy, pi_n, pi_ts, s_m, sha_histogram, sha_size

__version__ = "0.1.0"
