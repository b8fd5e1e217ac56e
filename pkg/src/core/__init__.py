"""
Core toolkit modules: configuration, logging, exceptions and random generators.
"""
