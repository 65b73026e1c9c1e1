"""PNG rendering of CLI tables; matplotlib is imported only when called."""

from __future__ import annotations


def render_table(path: str, header: list[str], rows: list[tuple], *, title: str = "",
                 logx: bool = False, logy: bool = False) -> None:
    """Plot every numeric column against the first one and save to *path*."""
    try:
        import matplotlib
    except ImportError as exc:  # pragma: no cover - depends on environment
        raise RuntimeError("--figure needs matplotlib installed") from exc
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    x = [r[0] for r in rows]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for j, name in enumerate(header[1:], start=1):
        ys = [r[j] for r in rows]
        if all(isinstance(v, (int, float)) for v in ys):
            ax.plot(x, ys, label=name, lw=1.2)
    ax.set_xlabel(header[0])
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
