"""
Figures for count tables, quasi-probability grids and sweep curves.
"""
