"""
Poincaré return times, Lyapunov spectra and recurrence dimensions of linear maps of tori.
"""
__version__ = "1.0.0"
