"""PCA reduction and a linear soft-margin SVM for sign / non-sign decisions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DimensionMismatch(ValueError):
    pass


class SingleClassData(ValueError):
    pass


class ModelFormatError(ValueError):
    pass


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    components: np.ndarray          # (k, d), orthonormal rows
    explained_variance: np.ndarray  # (k,), descending

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


@dataclass(frozen=True)
class SvmModel:
    weights: np.ndarray
    bias: float
    c_param: float


def pca_fit(samples, variance_keep: float = 0.95) -> PcaModel:
    """Principal axes of the sample covariance.

    Keeps the smallest ``k`` whose cumulative explained variance reaches
    ``variance_keep``. Identical samples give a ``k = 0`` model.
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise ValueError("pca_fit needs a 2-D array with at least two samples")
    if not 0 < variance_keep <= 1:
        raise ValueError("variance_keep must lie in (0, 1]")
    mean = x.mean(axis=0)
    cov = np.cov(x - mean, rowvar=False, ddof=1).reshape(x.shape[1], x.shape[1])
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1]
    vals = np.clip(vals[order], 0.0, None)
    vecs = vecs[:, order]
    total = vals.sum()
    if total <= 0:
        return PcaModel(mean, np.zeros((0, x.shape[1])), np.zeros(0))
    frac = np.cumsum(vals) / total
    # guard the comparison against round-off when variance_keep == 1
    k = int(np.searchsorted(frac, variance_keep - 1e-12) + 1)
    k = min(k, len(vals))
    comps = vecs[:, :k].T.copy()
    # deterministic sign: largest-magnitude entry of each axis positive
    flip = np.sign(comps[np.arange(k), np.abs(comps).argmax(axis=1)])
    comps *= flip[:, None]
    return PcaModel(mean, comps, vals[:k].copy())


def pca_project(model: PcaModel, v) -> np.ndarray:
    """``components @ (v - mean)``; accepts one vector or a row stack."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1] != model.dim:
        raise DimensionMismatch(f"expected {model.dim} values, got {v.shape[-1]}")
    return (v - model.mean) @ model.components.T


def svm_objective(w, b, x, y, c_param: float) -> float:
    """``0.5 |w|^2 + C sum max(0, 1 - y (w.x + b))``."""
    w = np.asarray(w, dtype=np.float64)
    margins = 1.0 - np.asarray(y) * (np.asarray(x) @ w + b)
    return 0.5 * float(w @ w) + c_param * float(np.maximum(margins, 0.0).sum())


def best_bias(scores, y, c_param: float) -> float:
    """Exact minimiser over ``b`` of ``C sum max(0, 1 - y (s + b))``.

    The function is convex and piecewise linear with kinks at ``y - s``.
    When the minimum is a flat interval, its midpoint is returned.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    p = np.sort(1.0 - s[y > 0])    # positive i is active for b < p_i
    q = np.sort(-1.0 - s[y < 0])   # negative j is active for b > q_j
    cand = np.concatenate([p, q])
    p_suffix = np.concatenate([np.cumsum(p[::-1])[::-1], [0.0]])
    q_prefix = np.concatenate([[0.0], np.cumsum(q)])
    ip = np.searchsorted(p, cand, side="right")
    iq = np.searchsorted(q, cand, side="left")
    loss = (p_suffix[ip] - cand * (len(p) - ip)) + (cand * iq - q_prefix[iq])
    best = loss.min()
    at_min = cand[loss <= best + 1e-12 * max(1.0, abs(best))]
    return float(0.5 * (at_min.min() + at_min.max()))


def svm_train(x, y, c_param: float = 10.0, epochs: int = 200, seed: int = 0) -> SvmModel:
    """Stochastic subgradient descent on the hinge-loss objective.

    ``w`` takes steps ``1 / (lam t)`` with ``lam = 1 / (C n)``; each epoch
    visits the samples in a seeded random order. The bias is unregularised,
    so a subgradient step of that size never settles; instead it is set to
    its exact minimiser after every epoch. The returned ``w`` is the
    average of the iterates over the second half of training, with the
    bias re-minimised for it.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.ndim == 1:
        x = x[:, None]
    if c_param <= 0:
        raise ValueError("c_param must be positive")
    if len(x) != len(y):
        raise DimensionMismatch("samples and labels differ in length")
    if not np.isin(y, (-1.0, 1.0)).all():
        raise ValueError("labels must be +1 or -1")
    if not ((y > 0).any() and (y < 0).any()):
        raise SingleClassData("both labels are required")

    n, d = x.shape
    lam = 1.0 / (c_param * n)
    rng = np.random.default_rng(seed)
    w = np.zeros(d)
    b = 0.0
    w_sum = np.zeros(d)
    n_avg = 0
    start_avg = (epochs // 2) * n
    t = 0
    for _ in range(epochs):
        for i in rng.permutation(n):
            t += 1
            eta = 1.0 / (lam * t)
            xi, yi = x[i], y[i]
            violated = yi * (xi @ w + b) < 1.0
            w *= 1.0 - eta * lam
            if violated:
                w += (eta * yi) * xi
            if t > start_avg:
                w_sum += w
                n_avg += 1
        b = best_bias(x @ w, y, c_param)
    if n_avg:
        w = w_sum / n_avg
        b = best_bias(x @ w, y, c_param)
    return SvmModel(w, float(b), float(c_param))


def svm_decide(model: SvmModel, v) -> tuple[float, int]:
    """``(score, label)`` with ``score = w.v + b``; ties go to +1."""
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.shape[0] != model.weights.shape[0]:
        raise DimensionMismatch(
            f"expected {model.weights.shape[0]} values, got {v.shape[0]}")
    score = float(model.weights @ v + model.bias)
    return score, (1 if score >= 0 else -1)


def train_test_split(n: int, test_fraction: float = 0.25, seed: int = 0):
    """Seeded index split ``(train_idx, test_idx)``, both sorted."""
    perm = np.random.default_rng(seed).permutation(n)
    n_test = int(round(n * test_fraction))
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


# --------------------------------------------------------------------------
# full classifier: z-score -> PCA -> SVM


@dataclass(frozen=True)
class SignClassifier:
    mean: np.ndarray
    scale: np.ndarray
    pca: PcaModel
    svm: SvmModel
    threshold: float = field(default=0.0)

    def transform(self, features) -> np.ndarray:
        f = np.asarray(features, dtype=np.float64)
        if f.shape[-1] != self.mean.shape[0]:
            raise DimensionMismatch(
                f"expected {self.mean.shape[0]} features, got {f.shape[-1]}")
        return pca_project(self.pca, (f - self.mean) / self.scale)

    def decide(self, features) -> tuple[float, int]:
        return svm_decide(self.svm, self.transform(features))

    def scores(self, features) -> np.ndarray:
        z = self.transform(np.atleast_2d(features))
        return z @ self.svm.weights + self.svm.bias


def fit_classifier(x, y, c_param: float = 10.0, epochs: int = 200,
                   variance_keep: float = 0.95, seed: int = 0) -> SignClassifier:
    x = np.asarray(x, dtype=np.float64)
    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    z = (x - mean) / scale
    pca = pca_fit(z, variance_keep)
    svm = svm_train(pca_project(pca, z), y, c_param=c_param, epochs=epochs, seed=seed)
    return SignClassifier(mean, scale, pca, svm)


def _fmt(values) -> str:
    return " ".join(repr(float(v)) for v in np.ravel(values))


def save_model(path, model: SignClassifier) -> None:
    """Line-oriented text model; floats use shortest round-trip repr."""
    d, k = model.mean.shape[0], model.pca.n_components
    lines = [
        f"dims {d} {k}",
        f"mean {_fmt(model.mean)}",
        f"scale {_fmt(model.scale)}",
        f"pca_mean {_fmt(model.pca.mean)}",
        f"pca_variance {_fmt(model.pca.explained_variance)}".rstrip(),
    ]
    lines += [f"pca_component_{i} {_fmt(row)}" for i, row in enumerate(model.pca.components)]
    lines += [
        f"svm_w {_fmt(model.svm.weights)}".rstrip(),
        f"svm_b {model.svm.bias!r}",
        f"c_param {model.svm.c_param!r}",
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_model(path) -> SignClassifier:
    """Parse a model written by :func:`save_model`.

    Raises :class:`ModelFormatError` on any structural problem; I/O errors
    propagate unchanged.
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        rows = {}
        for line in text.splitlines():
            if not line.strip():
                continue
            key, *vals = line.split()
            if key in rows:
                raise ModelFormatError(f"duplicate key {key}")
            rows[key] = vals
        d, k = (int(v) for v in rows["dims"])

        def vec(key, n):
            vals = np.array([float(v) for v in rows[key]], dtype=np.float64)
            if vals.shape != (n,) or not np.isfinite(vals).all():
                raise ModelFormatError(f"{key}: expected {n} finite values")
            return vals

        mean, scale = vec("mean", d), vec("scale", d)
        comps = np.array([vec(f"pca_component_{i}", d) for i in range(k)]).reshape(k, d)
        pca = PcaModel(vec("pca_mean", d), comps, vec("pca_variance", k))
        svm = SvmModel(vec("svm_w", k), float(vec("svm_b", 1)[0]), float(vec("c_param", 1)[0]))
    except ModelFormatError:
        raise
    except (KeyError, ValueError, IndexError) as exc:
        raise ModelFormatError(f"malformed model file {path}: {exc}") from exc
    if svm.c_param <= 0 or (scale <= 0).any():
        raise ModelFormatError("c_param and scale must be positive")
    return SignClassifier(mean, scale, pca, svm)
