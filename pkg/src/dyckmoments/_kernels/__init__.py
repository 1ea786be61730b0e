"""Hot numeric kernels: compiled core with a pure-numpy fallback.

The compiled extension (Cython) and the fallback implement the same
contract: the float64 finite-size moment DP, batch path sampling and the
batch slice statistic.  ``dyckmoments.backend`` selects one at import.
"""
