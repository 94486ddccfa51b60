"""Ensembles of lattice realizations.

Realizations are split into fixed blocks of ``BLOCK`` consecutive indices.
A block is a pure function of its index range, and block results are
combined in block order with a fixed pairwise tree, so results are
bit-identical for any worker count.

Evolution is linear with real coefficients, so each block evolves only
the two real basis walkers ``|0, up>`` and ``|0, down>``; every coin input
is a linear combination of those.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .evolution import evolve_kernel, probabilities
from .inputs import InputSpec, parse_input
from .lattice import Regime, bond_uniforms, bonds_from_uniforms
from .observables import joint_quantity, single_quantity
from .twowalker import JointDistribution, joint_from_evolved

BLOCK = 250


def blocks(averages: int) -> list[tuple[int, int]]:
    return [(s, min(s + BLOCK, averages)) for s in range(0, averages, BLOCK)]


def tree_sum(parts: list):
    """Pairwise sum in a fixed order (fan-in 2)."""
    if not parts:
        raise ValueError("nothing to reduce")
    while len(parts) > 1:
        nxt = [parts[i] + parts[i + 1] for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def map_blocks(fn, tasks: list, workers: int = 1) -> list:
    """Ordered map, in-process for one worker, over a process pool otherwise."""
    workers = max(1, min(workers, len(tasks))) if workers else 1
    if workers == 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def basis_evolution(regime: Regime, p: float, uniforms: np.ndarray, steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Evolved ``|0,up>`` and ``|0,down>`` for each realization, each ``(B, sites, 2)``."""
    b, _, nb = uniforms.shape
    n = nb // 2
    bonds = bonds_from_uniforms(regime, p, uniforms)[:, None]  # (B, 1, cfg, 2N)
    up = np.zeros((b, 2, 2 * n + 1))
    down = np.zeros((b, 2, 2 * n + 1))
    up[:, 0, n] = 1.0
    down[:, 1, n] = 1.0
    up, down = evolve_kernel(up, down, bonds, steps)
    e_up = np.stack([up[:, 0], down[:, 0]], axis=-1)
    e_down = np.stack([up[:, 1], down[:, 1]], axis=-1)
    return e_up, e_down


def _combine(coin, e_up, e_down) -> np.ndarray:
    return complex(coin.up) * e_up + complex(coin.down) * e_down


@dataclass(frozen=True)
class _SampleTask:
    inputs: tuple
    quantities: tuple
    regime: Regime
    p_grid: tuple
    steps: int
    master_seed: int
    start: int
    stop: int


def _sample_block(task: _SampleTask) -> dict:
    u = bond_uniforms(task.regime, task.steps, task.master_seed, np.arange(task.start, task.stop))
    out = {s.name: {q: np.empty((len(task.p_grid), task.stop - task.start)) for q in task.quantities}
           for s in task.inputs}
    for ip, p in enumerate(task.p_grid):
        e_up, e_down = basis_evolution(task.regime, p, u, task.steps)
        for spec in task.inputs:
            a = _combine(spec.coin1, e_up, e_down)
            if spec.is_single:
                probs = probabilities(a)
                for q in task.quantities:
                    out[spec.name][q][ip] = single_quantity(q, probs)
            else:
                b = _combine(spec.coin2, e_up, e_down)
                joint = joint_from_evolved(spec.kind, a, b, spec.overlap)
                for q in task.quantities:
                    out[spec.name][q][ip] = joint_quantity(q, joint)
    return out


def sample_observables(
    inputs,
    quantities,
    regime,
    p_grid,
    steps: int,
    averages: int,
    master_seed: int,
    workers: int = 1,
) -> dict[str, dict[str, np.ndarray]]:
    """Per-realization samples ``[input][quantity] -> (n_p, averages)``.

    Every input and grid point reuses the same lattice realizations.
    """
    specs = tuple(s if isinstance(s, InputSpec) else parse_input(s) for s in inputs)
    regime = Regime.parse(regime)
    if averages < 1 or steps < 1:
        raise ValueError("averages and steps must be positive")
    grid = tuple(float(p) for p in np.atleast_1d(p_grid))
    for p in grid:
        if not 0 <= p <= 1:
            raise ValueError(f"p={p} outside [0, 1]")
    quantities = tuple(q.upper() for q in quantities)
    tasks = [_SampleTask(specs, quantities, regime, grid, steps, master_seed, s, e)
             for s, e in blocks(averages)]
    parts = map_blocks(_sample_block, tasks, workers)
    return {
        s.name: {q: np.concatenate([part[s.name][q] for part in parts], axis=1) for q in quantities}
        for s in specs
    }


# -- averaged distributions ----------------------------------------------------

@dataclass(frozen=True)
class EnsembleSpec:
    averages: int
    steps: int
    regime: Regime | str
    p: float
    input_name: str
    master_seed: int
    keep_marginals: bool = False


@dataclass(frozen=True, eq=False)
class AveragedJoint:
    mean: JointDistribution
    averages: int
    marginals1: np.ndarray | None = None  # (A, sites) single-walker distributions
    marginals2: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class AveragedSingle:
    probs: np.ndarray
    averages: int


def _ensemble_block(args):
    spec, inp, start, stop = args
    regime = Regime.parse(spec.regime)
    u = bond_uniforms(regime, spec.steps, spec.master_seed, np.arange(start, stop))
    e_up, e_down = basis_evolution(regime, spec.p, u, spec.steps)
    a = _combine(inp.coin1, e_up, e_down)
    if inp.is_single:
        return np.sum(probabilities(a), axis=0), None, None
    b = _combine(inp.coin2, e_up, e_down)
    total = np.sum(joint_from_evolved(inp.kind, a, b, inp.overlap), axis=0)
    if spec.keep_marginals:
        return total, probabilities(a), probabilities(b)
    return total, None, None


def run_ensemble(spec: EnsembleSpec, workers: int = 1) -> AveragedJoint | AveragedSingle:
    """Arithmetic mean of the output distribution over ``spec.averages`` lattices."""
    if spec.averages < 1:
        raise ValueError("averages must be >= 1")
    if not 0 <= spec.p <= 1:
        raise ValueError("p outside [0, 1]")
    inp = parse_input(spec.input_name)
    tasks = [(spec, inp, s, e) for s, e in blocks(spec.averages)]
    parts = map_blocks(_ensemble_block, tasks, workers)
    mean = tree_sum([t for t, _, _ in parts]) / spec.averages
    if inp.is_single:
        return AveragedSingle(mean, spec.averages)
    m1 = m2 = None
    if spec.keep_marginals:
        m1 = np.concatenate([x for _, x, _ in parts])
        m2 = np.concatenate([y for _, _, y in parts])
    return AveragedJoint(JointDistribution(spec.steps, mean), spec.averages, m1, m2)
