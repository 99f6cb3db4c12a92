import numpy as np
from scipy.spatial import cKDTree


def neighbor_pairs(points, spacing, kappa: float = 1.5, tree: cKDTree | None = None):
    """Pairs (i, j), i < j, with 0 < d(i, j) <= kappa * max(spacing_i, spacing_j).

    Returns index arrays and distances.
    """
    points = np.asarray(points, dtype=float)
    spacing = np.broadcast_to(np.asarray(spacing, dtype=float), (len(points),))
    tree = cKDTree(points) if tree is None else tree
    reach = kappa * float(spacing.max()) * (1 + 1e-9)
    pairs = tree.query_pairs(reach, output_type="ndarray")
    if len(pairs) == 0:
        empty = np.zeros(0, dtype=int)
        return empty, empty, np.zeros(0)
    i, j = pairs[:, 0], pairs[:, 1]
    d = np.linalg.norm(points[i] - points[j], axis=1)
    keep = (d > 0) & (d <= kappa * np.maximum(spacing[i], spacing[j]) * (1 + 1e-9))
    return i[keep], j[keep], d[keep]
