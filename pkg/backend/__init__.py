"""
Backend package initialization.
"""
