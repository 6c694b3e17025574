"""Quantized gradient descent application.

One worker sends its full gradient to a server each iteration, but may
spend only an average of budget_bits per coordinate to encode it. The
gradient is normalized by its 2-norm, each coordinate is quantized by
the signed fixed-point quantizer with its allocated bit count, and the
descent step uses the dequantized vector. The allocation can be the
uniform baseline or re-optimized every iteration by one of the swarm
engines, minimizing the post-step loss directly.

Two tasks are built in: linear least squares (synthetic Gaussian
design, known target) and binary logistic regression with a 1/(2m)
ridge term (synthetic two-Gaussian data or a sparse text dataset).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .problem import AllocationProblem, ContractViolation
from .quantizers import quantize_fixed_bits
from .swarm import RunResult, SwarmConfig, run_gcpso, run_ppso

_DATA_DOMAIN = 0xDA7A

# Per-step swarm effort: a fraction of the standalone defaults, since
# the engine runs once per descent iteration.
DEFAULT_STEP_SWARM = SwarmConfig(
    n_pop=60, i_iter=30, restarts=1, penalty_weight=1e5
)


@dataclass(frozen=True, eq=False)
class QgdTask:
    """One training problem the quantized descent loop can run on."""

    kind: str
    features: np.ndarray
    targets: np.ndarray
    eta: float
    t_iter: int
    budget_bits: int
    z_star: Optional[np.ndarray] = None
    seed: int = 0
    name: str = ""

    def __post_init__(self):
        if self.kind not in ("least_squares", "logistic"):
            raise ContractViolation(
                f"unknown task kind {self.kind!r}; use 'least_squares' or 'logistic'"
            )
        features = np.asarray(self.features, dtype=float)
        targets = np.asarray(self.targets, dtype=float)
        if features.ndim != 2 or targets.shape != (features.shape[0],):
            raise ContractViolation(
                f"features {features.shape} and targets {targets.shape} do not line up"
            )
        if self.kind == "least_squares" and features.shape[0] < features.shape[1]:
            raise ContractViolation("least squares requires at least as many rows as columns")
        if self.kind == "logistic" and not np.isin(targets, (-1.0, 1.0)).all():
            raise ContractViolation("logistic labels must be -1 or +1")
        if not self.eta > 0:
            raise ContractViolation(f"step size must be positive, got {self.eta}")
        if self.t_iter < 1 or self.budget_bits < 1:
            raise ContractViolation("t_iter and budget_bits must be >= 1")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "targets", targets)
        if self.z_star is not None:
            z_star = np.asarray(self.z_star, dtype=float)
            if z_star.shape != (features.shape[1],):
                raise ContractViolation(f"z_star has shape {z_star.shape}, expected ({features.shape[1]},)")
            object.__setattr__(self, "z_star", z_star)

    @property
    def dimension(self) -> int:
        return self.features.shape[1]

    @property
    def allowed_values(self) -> tuple[int, ...]:
        return tuple(range(1, 2 * self.budget_bits + 2))


def loss(task: QgdTask, z) -> float:
    """Training objective at parameters z."""
    z = np.asarray(z, dtype=float)
    if task.kind == "least_squares":
        r = task.targets - task.features @ z
        return float(0.5 * (r @ r))
    m = task.features.shape[0]
    scores = task.targets * (task.features @ z)
    return float(np.logaddexp(0.0, -scores).mean() + 0.5 * (z @ z) / m)


def _loss_batch(task: QgdTask, zs: np.ndarray) -> np.ndarray:
    """loss() over a (rows, D) parameter matrix."""
    if task.kind == "least_squares":
        r = task.targets[None, :] - zs @ task.features.T
        return 0.5 * (r * r).sum(axis=1)
    m = task.features.shape[0]
    scores = task.targets[None, :] * (zs @ task.features.T)
    return np.logaddexp(0.0, -scores).mean(axis=1) + 0.5 * (zs * zs).sum(axis=1) / m


def gradient(task: QgdTask, z) -> np.ndarray:
    """Analytic gradient of loss() at z."""
    z = np.asarray(z, dtype=float)
    if task.kind == "least_squares":
        return task.features.T @ (task.features @ z - task.targets)
    m = task.features.shape[0]
    scores = task.targets * (task.features @ z)
    # sigmoid(-s), computed stably for both signs of s
    sig = np.where(scores >= 0, np.exp(-np.abs(scores)) / (1 + np.exp(-np.abs(scores))),
                   1.0 / (1.0 + np.exp(-np.abs(scores))))
    return -(task.features.T @ (task.targets * sig)) / m + z / m


def quantize_gradient(g, bits) -> np.ndarray:
    """Normalize by the 2-norm, quantize per coordinate, denormalize.

    Every normalized coordinate lies in [-1, 1], inside the fixed-point
    quantizer's domain; the coordinate equal to the norm itself (when
    the gradient has a single nonzero entry) saturates to 1 - 2^(-b),
    a documented bias of the scheme. A zero gradient passes through as
    zeros.
    """
    g = np.asarray(g, dtype=float)
    bits = np.asarray(bits, dtype=np.int64)
    if bits.shape != g.shape:
        raise ContractViolation(f"bit vector has shape {bits.shape}, expected {g.shape}")
    norm = float(np.linalg.norm(g))
    if norm == 0.0:
        return np.zeros_like(g)
    return norm * quantize_fixed_bits(g / norm, bits)


def qgd_problem(task: QgdTask, z) -> AllocationProblem:
    """Next-step loss minimization over the per-coordinate bit split.

    F(b) = loss(z - eta * quantize_gradient(grad, b)) with the gradient
    taken at the current z; consumption is the plain bit sum with
    budget dimension * budget_bits.
    """
    z = np.asarray(z, dtype=float)
    g = gradient(task, z)
    norm = float(np.linalg.norm(g))
    if norm == 0.0:
        raise ContractViolation("gradient is zero; descent has converged")
    g_unit = g / norm

    def objective_batch(mat: np.ndarray) -> np.ndarray:
        q = norm * quantize_fixed_bits(g_unit[None, :], np.asarray(mat, dtype=np.int64))
        return _loss_batch(task, z[None, :] - task.eta * q)

    return AllocationProblem(
        dimension=task.dimension,
        allowed_values=task.allowed_values,
        budget_bits=task.budget_bits,
        budget=float(task.dimension * task.budget_bits),
        objective=lambda b: float(objective_batch(np.asarray(b)[None, :])[0]),
        consumption=lambda b: float(np.asarray(b, dtype=float).sum()),
        objective_batch=objective_batch,
        consumption_batch=lambda mat: np.asarray(mat, dtype=float).sum(axis=1),
        name=f"qgd-{task.kind}",
    )


@dataclass(frozen=True, eq=False)
class TrainResult:
    """Trajectory of one quantized-descent run.

    metric_trace[t] is ||z_t - z_star|| when the task knows its target
    and loss(z_t) otherwise, recorded at t = 0..t_iter. allocations
    holds the bit vector chosen at each step; converged_at is the first
    iteration whose gradient vanished, if any.
    """

    z: np.ndarray
    metric_trace: np.ndarray
    loss_trace: np.ndarray
    allocations: np.ndarray
    converged_at: Optional[int] = None


def _metric(task: QgdTask, z: np.ndarray) -> float:
    if task.z_star is not None:
        return float(np.linalg.norm(z - task.z_star))
    return loss(task, z)


def train(
    task: QgdTask,
    strategy: str = "uniform",
    swarm_config: SwarmConfig | None = None,
) -> TrainResult:
    """Run t_iter quantized descent steps under an allocation strategy.

    Strategies: 'uniform' spends budget_bits on every coordinate;
    'ppso' / 'gcpso' re-solve the per-step allocation problem with the
    corresponding engine, seeded per step so reruns are reproducible.
    """
    if strategy not in ("uniform", "ppso", "gcpso"):
        raise ContractViolation(
            f"unknown strategy {strategy!r}; use 'uniform', 'ppso' or 'gcpso'"
        )
    base_cfg = swarm_config if swarm_config is not None else DEFAULT_STEP_SWARM
    if swarm_config is None:
        base_cfg = replace(base_cfg, seed=task.seed)

    d = task.dimension
    z = np.zeros(d)
    metric_trace = np.empty(task.t_iter + 1)
    loss_trace = np.empty(task.t_iter + 1)
    metric_trace[0] = _metric(task, z)
    loss_trace[0] = loss(task, z)
    allocations = np.full((task.t_iter, d), task.budget_bits, dtype=np.int64)
    converged_at: Optional[int] = None

    for t in range(task.t_iter):
        g = gradient(task, z)
        if not np.any(g):
            converged_at = t
            metric_trace[t + 1 :] = metric_trace[t]
            loss_trace[t + 1 :] = loss_trace[t]
            allocations[t:] = allocations[t - 1] if t else task.budget_bits
            break
        if strategy == "uniform":
            bits = np.full(d, task.budget_bits, dtype=np.int64)
        else:
            problem = qgd_problem(task, z)
            cfg = replace(base_cfg, seed=base_cfg.seed + t)
            result: RunResult = (run_gcpso if strategy == "gcpso" else run_ppso)(problem, cfg)
            bits = result.best
        allocations[t] = bits
        z = z - task.eta * quantize_gradient(g, bits)
        metric_trace[t + 1] = _metric(task, z)
        loss_trace[t + 1] = loss(task, z)

    return TrainResult(
        z=z,
        metric_trace=metric_trace,
        loss_trace=loss_trace,
        allocations=allocations,
        converged_at=converged_at,
    )


# -- task constructors ---------------------------------------------------------


def gaussian_least_squares(
    n_rows: int = 200,
    n_cols: int = 20,
    eta: float = 0.001,
    t_iter: int = 200,
    budget_bits: int = 4,
    seed: int = 0,
    noise_std: float = 0.0,
) -> QgdTask:
    """Random Gaussian design with a known planted target."""
    rng = np.random.default_rng([_DATA_DOMAIN, seed])
    A = rng.standard_normal((n_rows, n_cols))
    z_star = rng.standard_normal(n_cols)
    y = A @ z_star
    if noise_std > 0:
        y = y + noise_std * rng.standard_normal(n_rows)
    return QgdTask(
        kind="least_squares",
        features=A,
        targets=y,
        eta=eta,
        t_iter=t_iter,
        budget_bits=budget_bits,
        z_star=z_star,
        seed=seed,
        name=f"ls-{n_rows}x{n_cols}",
    )


def synthetic_classification(
    n_samples: int = 400,
    n_features: int = 30,
    eta: float = 0.05,
    t_iter: int = 100,
    budget_bits: int = 4,
    seed: int = 0,
    separation: float = 2.0,
) -> QgdTask:
    """Two Gaussian clouds with opposite labels, linearly separable-ish."""
    rng = np.random.default_rng([_DATA_DOMAIN, seed, 1])
    direction = rng.standard_normal(n_features)
    direction /= np.linalg.norm(direction)
    labels = np.where(rng.random(n_samples) < 0.5, -1.0, 1.0)
    features = rng.standard_normal((n_samples, n_features))
    features += (0.5 * separation) * labels[:, None] * direction[None, :]
    return QgdTask(
        kind="logistic",
        features=features,
        targets=labels,
        eta=eta,
        t_iter=t_iter,
        budget_bits=budget_bits,
        seed=seed,
        name=f"logit-{n_samples}x{n_features}",
    )


def load_sparse_dataset(
    path,
    eta: float = 0.05,
    t_iter: int = 100,
    budget_bits: int = 4,
    seed: int = 0,
) -> QgdTask:
    """Read 'label idx:val ...' sparse text rows into a logistic task.

    Feature indices are treated as 1-based unless an index 0 appears.
    Exactly two distinct label values are required; the smaller maps to
    -1 and the larger to +1.
    """
    rows: list[dict[int, float]] = []
    raw_labels: list[float] = []
    max_idx = 0
    saw_zero = False
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            raw_labels.append(float(parts[0]))
            entries = {}
            for item in parts[1:]:
                idx_s, val_s = item.split(":", 1)
                idx = int(idx_s)
                if idx < 0:
                    raise ValueError("negative index")
                saw_zero = saw_zero or idx == 0
                max_idx = max(max_idx, idx)
                entries[idx] = float(val_s)
            rows.append(entries)
        except (ValueError, IndexError):
            raise ContractViolation(f"{path}:{lineno}: malformed sparse row: {line!r}") from None
    if not rows:
        raise ContractViolation(f"{path}: no samples found")
    uniq = sorted(set(raw_labels))
    if len(uniq) != 2:
        raise ContractViolation(f"{path}: need exactly two label values, found {uniq}")
    offset = 0 if saw_zero else 1
    dim = max_idx + 1 - offset
    features = np.zeros((len(rows), dim))
    for i, entries in enumerate(rows):
        for idx, val in entries.items():
            features[i, idx - offset] = val
    labels = np.where(np.asarray(raw_labels) == uniq[0], -1.0, 1.0)
    return QgdTask(
        kind="logistic",
        features=features,
        targets=labels,
        eta=eta,
        t_iter=t_iter,
        budget_bits=budget_bits,
        seed=seed,
        name=Path(path).stem,
    )
