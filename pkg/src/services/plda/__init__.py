"""
sGPLDA training: single- and multi-objective EM, between-class selection, model files.
"""
