"""
eos-lab: multi-channel electro-optic sampling statistics, post-measurement states
and Bayesian reconstruction, with a truncated-Fock brute-force oracle.
"""
__version__ = "0.1.0"
