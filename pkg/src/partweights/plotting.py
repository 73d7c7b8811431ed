"""Report figures.  Every function writes one image file and closes its
figure; nothing is shown interactively."""
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

DPI = 120


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=DPI, metadata={"Software": None})
    plt.close(fig)


def plot_error_matrix(esm, path, title="error score matrix", vmax=None):
    """Heat map of triplet errors (rows) along the alignment (columns)."""
    data = np.ma.masked_array(np.where(esm.mask, 0.0, esm.values), mask=esm.mask)
    fig, ax = plt.subplots(figsize=(5, 6))
    im = ax.imshow(data, aspect="auto", cmap="viridis", vmin=0.0, vmax=vmax, interpolation="nearest")
    ax.set_xlabel("aligned pair")
    ax.set_ylabel("triplet")
    ax.set_title(title)
    fig.colorbar(im, ax=ax, label="E")
    _save(fig, path)


def plot_triplet_rows(same, cross, triplets, path, labels=None):
    """Per-triplet error traces for a same-action and a cross-action alignment."""
    fig, axes = plt.subplots(len(triplets), 1, figsize=(6, 1.8 * len(triplets)), sharex=True, squeeze=False)
    for ax, t in zip(axes[:, 0], triplets):
        ax.plot(np.where(same.mask[t], np.nan, same.values[t]), label="same action", lw=1.2)
        ax.plot(np.where(cross.mask[t], np.nan, cross.values[t]), label="other action", lw=1.2)
        name = f"triplet {t}" if labels is None else f"triplet {t} ({', '.join(labels[t])})"
        ax.set_title(name, fontsize=9)
        ax.set_ylabel("E")
    axes[0, 0].legend(fontsize=8, loc="upper right")
    axes[-1, 0].set_xlabel("aligned pair")
    _save(fig, path)


def plot_weights(labels, omega, path, title="point weights"):
    fig, ax = plt.subplots(figsize=(6, 3))
    x = np.arange(len(labels))
    ax.bar(x, omega, color="tab:blue")
    ax.axhline(1.0 / len(labels), color="grey", ls="--", lw=1, label="uniform")
    ax.set_xticks(x)
    ax.set_xticklabels(labels, rotation=45, ha="right")
    ax.set_ylim(0, max(1.0 / len(labels), float(np.max(omega))) * 1.1)
    ax.set_ylabel("weight")
    ax.set_title(title)
    ax.legend(fontsize=8)
    _save(fig, path)


def plot_confusion(conf, path, title="confusion matrix"):
    counts = conf.counts
    fig, ax = plt.subplots(figsize=(4.5, 4))
    ax.imshow(counts, cmap="Blues")
    for i in range(counts.shape[0]):
        for j in range(counts.shape[1]):
            if counts[i, j]:
                colour = "white" if counts[i, j] > counts.max() / 2 else "black"
                ax.text(j, i, str(counts[i, j]), ha="center", va="center", color=colour, fontsize=9)
    ax.set_xticks(range(len(conf.labels)))
    ax.set_xticklabels(conf.labels, rotation=45, ha="right")
    ax.set_yticks(range(len(conf.labels)))
    ax.set_yticklabels(conf.labels)
    ax.set_xlabel("recognized as")
    ax.set_ylabel("ground truth")
    ax.set_title(f"{title} (accuracy {conf.accuracy:.3f})")
    _save(fig, path)


def plot_significance(index, path, top=10):
    finite = np.where(np.isfinite(index), index, np.nan)
    fig, ax = plt.subplots(figsize=(7, 2.8))
    ax.plot(finite, ".", ms=4)
    order = np.argsort(-np.nan_to_num(finite, nan=-np.inf), kind="stable")[:top]
    ax.plot(order, finite[order], "o", mfc="none", color="tab:red", label=f"top {top}")
    ax.set_xlabel("triplet")
    ax.set_ylabel("significance index")
    ax.legend(fontsize=8)
    _save(fig, path)
