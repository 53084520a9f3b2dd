"""Exact asymptotic *-moments of square random Vandermonde matrices.

The limit *-distribution lives over C[0,1]: expectations of words in the
matrix and its adjoint, with continuous coefficients, are computed exactly
as piecewise polynomials by summing partition-indexed maps, and every
analytic value can be cross-checked against finite-size Monte Carlo
simulation.
"""

from .cumulants import CumulantSpec, alpha, consistency_report, cumulant_by_inversion
from .funcspace import (ONE, PiecewisePoly, T, algebra, const, eval_at,
                        from_poly, piecewise, scale, tau)
from .moments import (MomentEngine, MomentResult, Word, alternating_even_moment,
                      centered_product_trace, diagonal_limit, expectation,
                      scalar_check, trace_moment, word_power)
from .montecarlo import (DiagonalProbe, EstimatorReport, VandermondeSample,
                         centered_decay, estimate_diagonal, estimate_trace,
                         growth_check, sample)
from .parsing import parse_function, parse_word, render_function, render_word
from .partitions import (PI4, Classification, PartitionGeometry, SetPartition,
                         bell_number, classify, enumerate_partitions,
                         enumerate_purely_crossing, geometry,
                         max_alternating_interval_partition, one_partition,
                         zero_partition)
from .polytopes import (MultiPoly, RationalPolytope, Simplex, integrate,
                        triangulate, vertex_enumeration, volume)
from .transforms import (gamma, lambda_eval_at, lambda_function,
                         lambda_interpolate, lambda_point, lambda_reduce,
                         tau_gamma, tau_lambda)

__version__ = "0.1.0"
