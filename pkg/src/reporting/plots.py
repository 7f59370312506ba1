"""
Relevance-matrix heatmap.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402
import seaborn as sns  # noqa: E402

from config import FIGURE_SIZE, FONT_SIZE, MATRIX_MARKS, PLOT_STYLE  # noqa: E402


def plot_relevance_matrix(matrix: pd.DataFrame, output_path: Path) -> Path:
    """
    Draw the THAD x program matrix as an annotated heatmap.

    Args:
        matrix: Output of `reporting.corpus.relevance_matrix`.
        output_path: Image path; the suffix selects the format.

    Returns:
        The written path.
    """
    sns.set_style(PLOT_STYLE)
    values = matrix.apply(lambda column: column.map(MATRIX_MARKS)).astype(float)
    fig, ax = plt.subplots(figsize=FIGURE_SIZE)
    sns.heatmap(
        values,
        annot=matrix.to_numpy(),
        fmt="",
        cmap="RdYlGn",
        vmin=min(MATRIX_MARKS.values()),
        vmax=max(MATRIX_MARKS.values()),
        cbar=False,
        linewidths=0.5,
        annot_kws={"fontsize": FONT_SIZE},
        ax=ax,
    )
    ax.set_xlabel("program")
    ax.set_ylabel("THAD")
    ax.set_title("THADs checked per program")
    fig.tight_layout()
    output_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(output_path)
    plt.close(fig)
    return output_path
