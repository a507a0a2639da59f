"""Hierarchical Edwards-Anderson spin glass: disorder sampling, exact
per-instance free energy, and quenched averages.

At level ``l`` every pair inside a common block of ``2**l`` spins receives an
independent coupling ``J^(l)_ij / 2**(l sigma)`` with ``J^(l)_ij ~ N(0, 1)``.
A pair whose smallest common block sits at level ``L(i, j)`` therefore sees a
single Gaussian coupling ``K_ij`` with variance
``sum_{l=L(i,j)}^{depth} 2**(-2 l sigma)``, which is what gets sampled.

Reproducibility: the instance for ``(params, seed)`` is drawn from a Philox
counter-based stream keyed by ``splitmix64`` mixes of ``seed`` and ``depth``;
uniforms are the top 53 bits of each 64-bit word, mapped into ``(0, 1]``, and
normals come from Box-Muller (``sqrt(-2 ln u1) cos(2 pi u2)`` and the
matching ``sin``). Couplings are drawn first, pair by pair in row-major
order ``(1,2), (1,3), ..., (N-1,N)``, then the site fields.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import logsumexp

from .errors import ParameterError
from .numerics import gaussian_rule, logcosh
from .params import FieldSpec, ModelParams, level_variance, validate

DEFAULT_SPIN_CAP = 20
HARD_SPIN_CAP = 24

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One round of the splitmix64 finalizer on a 64-bit integer."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Per-instance seed for sample ``index`` of a run seeded with ``seed``."""
    return splitmix64((splitmix64(seed & _MASK64) ^ (index & _MASK64)) & _MASK64)


def standard_normals(key: int, count: int) -> np.ndarray:
    """``count`` standard normals from the Philox stream keyed by ``key``."""
    n_pairs = (count + 1) // 2
    raw = np.random.Philox(key=key & _MASK64).random_raw(2 * n_pairs)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0**-53
    u1, u2 = u[0::2], u[1::2]
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    z = np.empty(2 * n_pairs)
    z[0::2] = radius * np.cos(angle)
    z[1::2] = radius * np.sin(angle)
    return z[:count]


def ancestor_level(i: int, j: int, depth: int | None = None) -> int:
    """Smallest level whose blocks contain both 1-based sites ``i < j``."""
    if not (1 <= i < j):
        raise IndexError(f"need 1 <= i < j, got ({i}, {j})")
    if depth is not None and j > 2**depth:
        raise IndexError(f"site {j} outside a depth-{depth} model")
    return ((i - 1) ^ (j - 1)).bit_length()


def ancestor_levels(depth: int) -> np.ndarray:
    """``N x N`` integer matrix of ancestor levels (0 on the diagonal)."""
    idx = np.arange(2**depth)
    x = idx[:, None] ^ idx[None, :]
    levels = np.zeros_like(x)
    while np.any(x):
        levels += x > 0
        x >>= 1
    return levels


@dataclass
class HEAInstance:
    depth: int
    sigma: float
    couplings: np.ndarray  # strictly upper-triangular N x N
    fields: np.ndarray
    seed: int

    @property
    def n_spins(self) -> int:
        return 2**self.depth

    def pairs(self):
        n = self.n_spins
        for i in range(n):
            for j in range(i + 1, n):
                yield i + 1, j + 1, float(self.couplings[i, j])


def _instance_key(seed: int, depth: int) -> int:
    return splitmix64((seed & _MASK64) ^ splitmix64(depth))


def _draw_fields(field: FieldSpec, z: np.ndarray) -> np.ndarray:
    if field.kind == "gaussian":
        return field.mean + field.std * z
    return np.full(z.shape, field.mean)


def sample_instance(params: ModelParams, seed: int) -> HEAInstance:
    """One disorder realization with collapsed couplings, fixed by ``(params, seed)``."""
    validate(params)
    depth = int(params.depth)
    n = 2**depth
    iu, ju = np.triu_indices(n, k=1)
    z = standard_normals(_instance_key(seed, depth), iu.size + n)
    levels = ancestor_levels(depth)[iu, ju]
    std_by_level = np.array(
        [0.0] + [math.sqrt(level_variance(params.sigma, l, depth)) for l in range(1, depth + 1)]
    )
    couplings = np.zeros((n, n))
    couplings[iu, ju] = z[: iu.size] * std_by_level[levels]
    fields = _draw_fields(params.field, z[iu.size :])
    return HEAInstance(depth, params.sigma, couplings, fields, seed)


def sample_instance_expanded(params: ModelParams, seed: int) -> HEAInstance:
    """Same law as :func:`sample_instance`, built level by level.

    Draws one ``N(0, 1)`` coupling per pair at every level that contains it and
    sums them with weights ``2**(-l sigma)``. Used only to cross-check the
    collapsed generator's distribution.
    """
    validate(params)
    depth = int(params.depth)
    n = 2**depth
    levels = ancestor_levels(depth)
    iu, ju = np.triu_indices(n, k=1)
    per_level = [(iu[levels[iu, ju] <= l], ju[levels[iu, ju] <= l]) for l in range(1, depth + 1)]
    total = sum(p[0].size for p in per_level)
    z = standard_normals(_instance_key(seed, depth) ^ 0x5EED, total + n)
    couplings = np.zeros((n, n))
    pos = 0
    for l, (pi, pj) in enumerate(per_level, start=1):
        couplings[pi, pj] += z[pos : pos + pi.size] * 2.0 ** (-l * params.sigma)
        pos += pi.size
    fields = _draw_fields(params.field, z[total:])
    return HEAInstance(depth, params.sigma, couplings, fields, seed)


def _log_partition(couplings: np.ndarray, fields: np.ndarray, beta: float) -> float:
    """``log sum_S exp(beta sum_{i<j} K_ij S_i S_j + sum_i h_i S_i)``.

    Configurations are built one spin at a time: appending spin ``k`` to every
    configuration of spins ``0..k-1`` adds ``s_k (h_k + beta sum_{i<k} K_ik s_i)``
    to its exponent, an O(k) update per configuration.
    """
    n = fields.size
    exponent = np.zeros(1)
    spins = np.zeros((1, 0))
    for k in range(n):
        local = fields[k] + beta * (spins @ couplings[:k, k])
        exponent = np.concatenate([exponent + local, exponent - local])
        column = np.repeat([1.0, -1.0], spins.shape[0])[:, None]
        spins = np.hstack([np.vstack([spins, spins]), column])
    return float(logsumexp(exponent))


def instance_free_energy(inst: HEAInstance, beta: float, spin_cap: int = DEFAULT_SPIN_CAP) -> float:
    """``(1/N) log Z`` of one instance by exhaustive enumeration."""
    if beta < 0:
        raise ParameterError("beta must be >= 0")
    n = inst.n_spins
    cap = min(spin_cap, HARD_SPIN_CAP)
    if n > cap:
        raise ParameterError(f"{n} spins exceed the enumeration cap of {cap}")
    return _log_partition(inst.couplings, inst.fields, beta) / n


@dataclass(frozen=True)
class QuenchedEstimate:
    mean: float
    stderr: float
    n_samples: int

    @property
    def std(self) -> float:
        """Per-instance sample standard deviation."""
        return self.stderr * math.sqrt(self.n_samples)

    @classmethod
    def from_samples(cls, values) -> "QuenchedEstimate":
        values = np.asarray(values, dtype=float)
        if values.size < 2:
            raise ParameterError("need at least 2 samples")
        if np.all(values == values[0]):
            return cls(float(values[0]), 0.0, int(values.size))
        std = float(np.std(values, ddof=1))
        return cls(float(np.mean(values)), std / math.sqrt(values.size), int(values.size))


def _free_energies(params: ModelParams, seed: int, indices, spin_cap: int) -> list[float]:
    return [
        instance_free_energy(sample_instance(params, derive_seed(seed, i)), params.beta, spin_cap)
        for i in indices
    ]


def quenched_samples(
    params: ModelParams,
    n_samples: int,
    seed: int,
    workers: int = 1,
    spin_cap: int = DEFAULT_SPIN_CAP,
) -> np.ndarray:
    """Per-instance free energies for sample indices ``0 .. n_samples-1``, in order."""
    validate(params)
    if n_samples < 2:
        raise ParameterError("n_samples must be >= 2")
    if 2 ** int(params.depth) > min(spin_cap, HARD_SPIN_CAP):
        raise ParameterError(f"depth {params.depth} exceeds the enumeration cap")
    if workers <= 1:
        return np.array(_free_energies(params, seed, range(n_samples), spin_cap))
    chunks = np.array_split(np.arange(n_samples), workers * 4)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = pool.map(
            _free_energies,
            [params] * len(chunks),
            [seed] * len(chunks),
            [c.tolist() for c in chunks],
            [spin_cap] * len(chunks),
        )
        return np.array([v for part in parts for v in part])


def quenched_free_energy(
    params: ModelParams,
    n_samples: int,
    seed: int,
    workers: int = 1,
    spin_cap: int = DEFAULT_SPIN_CAP,
) -> QuenchedEstimate:
    """Disorder-averaged free energy with its standard error."""
    return QuenchedEstimate.from_samples(quenched_samples(params, n_samples, seed, workers, spin_cap))


def single_spin_free_energy(field: FieldSpec, nodes: int = 64) -> float:
    """``E[log 2 cosh h]``: the depth-0 free energy (exact for a point field)."""
    if field.is_point:
        return math.log(2.0) + logcosh(field.mean)
    z, lw = gaussian_rule(nodes, field.std)
    return math.log(2.0) + float(np.sum(np.exp(lw) * logcosh(field.mean + field.std * z)))


def write_instance(inst: HEAInstance, path) -> None:
    """Plain-text export: a header, then ``i j K_ij`` per pair and ``i h_i`` per site."""
    lines = [f"depth={inst.depth} sigma={inst.sigma!r} seed={inst.seed}"]
    lines += [f"{i} {j} {k!r}" for i, j, k in inst.pairs()]
    lines += [f"{i + 1} {float(h)!r}" for i, h in enumerate(inst.fields)]
    Path(path).write_text("\n".join(lines) + "\n")


def read_instance(path) -> HEAInstance:
    text = Path(path).read_text().splitlines()
    header = dict(tok.split("=", 1) for tok in text[0].split())
    depth = int(header["depth"])
    n = 2**depth
    couplings = np.zeros((n, n))
    fields = np.zeros(n)
    seen_pairs = 0
    seen_sites = 0
    for line in text[1:]:
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        if len(parts) == 3:
            i, j = int(parts[0]), int(parts[1])
            if not 1 <= i < j <= n:
                raise ParameterError(f"bad pair indices in line {line!r}")
            couplings[i - 1, j - 1] = float(parts[2])
            seen_pairs += 1
        elif len(parts) == 2:
            fields[int(parts[0]) - 1] = float(parts[1])
            seen_sites += 1
        else:
            raise ParameterError(f"cannot parse instance line {line!r}")
    if seen_pairs != n * (n - 1) // 2 or seen_sites != n:
        raise ParameterError("instance file is missing pairs or sites")
    return HEAInstance(depth, float(header["sigma"]), couplings, fields, int(header["seed"]))
