"""
Scoring services: two-covariance kernel, trial scoring and s-norm.
"""
