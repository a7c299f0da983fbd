"""
Run plumbing: logging, configuration, artifact storage and parallel execution.
"""
