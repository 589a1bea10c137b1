"""
Settings, built-in map profiles and experiment configuration.
"""
