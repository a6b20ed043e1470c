"""
Orthant MC
Exact-form Bayesian probit regression by direct Monte Carlo
"""

__version__ = "1.0.0"
__author__ = "Orthant MC developers"
