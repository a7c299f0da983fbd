import matplotlib
matplotlib.use('Agg')  # Set non-interactive backend before importing pyplot
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
import seaborn as sns
from pathlib import Path
from typing import Dict, Optional, Sequence

from ..eos_core import CountTable
from ..phase_space import QpdGrid

SVG_SALT = "eos-lab"


def setup_plotting_style():
    """Setup consistent plotting style"""
    sns.set_theme(style='whitegrid')
    plt.rcParams['figure.figsize'] = [8, 6]
    plt.rcParams['figure.dpi'] = 100
    plt.rcParams['savefig.dpi'] = 100
    plt.rcParams['font.size'] = 12
    plt.rcParams['axes.titlesize'] = 14
    plt.rcParams['axes.labelsize'] = 12
    plt.rcParams['xtick.labelsize'] = 10
    plt.rcParams['ytick.labelsize'] = 10
    # identical inputs must give identical SVG bytes
    plt.rcParams['svg.hashsalt'] = SVG_SALT
    plt.rcParams['svg.fonttype'] = 'path'


def save_svg(fig, path: Path) -> Path:
    """Write a figure as SVG without the creation date and close it."""
    fig.savefig(path, format='svg', metadata={'Date': None})
    plt.close(fig)
    return path


def plot_count_table(table: CountTable, title: str = ""):
    """Heatmap of a two-axis table, bar chart for a single axis."""
    setup_plotting_style()
    fig, ax = plt.subplots()
    if len(table.axes) == 1:
        ax.bar(table.axes[0], table.probabilities, width=1.0, color=sns.color_palette()[0])
        ax.set_xlabel(table.labels[0])
        ax.set_ylabel('p')
    elif len(table.axes) == 2:
        xs, ys = table.axes
        mesh = ax.pcolormesh(xs, ys, table.probabilities.T, shading='nearest', cmap='viridis')
        fig.colorbar(mesh, ax=ax, label='p')
        ax.set_xlabel(table.labels[0])
        ax.set_ylabel(table.labels[1])
    else:
        marginal = table.marginal(0)
        ax.bar(table.axes[0], marginal, width=1.0)
        ax.set_xlabel(f'{table.labels[0]} (marginal)')
    ax.set_title(title)
    return fig


def plot_qpd(grid: QpdGrid, title: str = ""):
    """Heatmap of a quasiprobability grid with a diverging map centered on zero."""
    setup_plotting_style()
    fig, ax = plt.subplots()
    bound = float(np.max(np.abs(grid.values))) or 1.0
    mesh = ax.pcolormesh(grid.xs, grid.ys, grid.values, shading='nearest', cmap='RdBu_r', vmin=-bound, vmax=bound)
    fig.colorbar(mesh, ax=ax)
    ax.set_aspect('equal')
    ax.set_xlabel('x')
    ax.set_ylabel('y')
    ax.set_title(title)
    return fig


def plot_curves(
    frame: pd.DataFrame,
    x: str,
    columns: Sequence[str],
    title: str = "",
    ylabel: str = "",
    dashed: Optional[Dict[str, float]] = None,
    errors: Optional[Dict[str, str]] = None,
):
    """
    Line plot of several columns against ``x``.

    ``dashed`` adds horizontal reference lines (label -> value); ``errors``
    maps a column to the column holding its standard error.
    """
    setup_plotting_style()
    fig, ax = plt.subplots()
    palette = sns.color_palette(n_colors=max(len(columns), 1))
    for color, column in zip(palette, columns):
        if errors and column in errors:
            ax.errorbar(frame[x], frame[column], yerr=frame[errors[column]], label=column, color=color,
                        marker='o', markersize=3, capsize=2)
        else:
            ax.plot(frame[x], frame[column], label=column, color=color)
    for label, value in (dashed or {}).items():
        ax.axhline(value, linestyle='--', color='0.3', linewidth=1.0, label=label)
    ax.set_xlabel(x)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend()
    return fig
