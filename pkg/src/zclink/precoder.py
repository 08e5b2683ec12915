"""Temporal precoding: assemble the margin program for a target sign pattern
and solve for the transmit block.

One program is solved per user, per real dimension, per block.  The context
bundles the immutable system matrices so workers can share it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import qcqp
from .dims import SystemDims
from .zccode import ZcCodebook, encode_pattern

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PrecodeContext:
    """System matrices plus the scalars a block solve needs.

    ``e_tx`` is the per-user block energy budget over both real dimensions;
    each real-dimension program is bounded by ``e_tx / 2``.  ``energy_op``
    maps transmit samples to the energy-normalized transmit signal; when
    omitted it falls back to the transmit-filter Toeplitz acting on the
    upsampled block, which is accurate only while the pulse is wide
    relative to the receive grid.  ``rx_filter`` is only needed on the
    receive path and may be omitted for pure precoding work.
    """

    dims: SystemDims
    waveform: np.ndarray  # combined-pulse Toeplitz, (n_tot, n_tot)
    upsampler: np.ndarray  # 0/1 spreading matrix, (n_tot, n_q)
    tx_filter: np.ndarray  # transmit-filter Toeplitz, (n_tot, 3 n_tot)
    beta: float = 1.0
    e_tx: float = 1.0
    rx_filter: np.ndarray | None = None
    energy_op: np.ndarray | None = None

    def __post_init__(self):
        n_tot, n_q = self.dims.n_tot, self.dims.n_q
        if self.waveform.shape != (n_tot, n_tot):
            raise ValueError(f"waveform matrix shape {self.waveform.shape} != {(n_tot, n_tot)}")
        if self.upsampler.shape != (n_tot, n_q):
            raise ValueError(f"upsampler shape {self.upsampler.shape} != {(n_tot, n_q)}")
        if self.tx_filter.shape != (n_tot, 3 * n_tot):
            raise ValueError(f"tx filter shape {self.tx_filter.shape} != {(n_tot, 3 * n_tot)}")
        if self.energy_op is not None and self.energy_op.shape[1] != n_q:
            raise ValueError(f"energy operator must have {n_q} columns")
        if self.e_tx < 0:
            raise ValueError("e_tx must be nonnegative")

    @property
    def per_dim_energy(self) -> float:
        return self.e_tx / 2.0

    @cached_property
    def energy_matrix(self) -> np.ndarray:
        """The W block of the energy constraint, shape (rows, n_q)."""
        if self.energy_op is not None:
            return self.energy_op
        return self.tx_filter.T @ self.upsampler

    @cached_property
    def energy_quad(self) -> np.ndarray:
        """Gram matrix of the energy block, shared across block solves."""
        return self.energy_matrix.T @ self.energy_matrix

    def with_beta(self, beta: float) -> "PrecodeContext":
        ctx = PrecodeContext(
            dims=self.dims,
            waveform=self.waveform,
            upsampler=self.upsampler,
            tx_filter=self.tx_filter,
            beta=beta,
            e_tx=self.e_tx,
            rx_filter=self.rx_filter,
            energy_op=self.energy_op,
        )
        # reuse the shared Gram matrix; beta does not touch the energy side
        ctx.__dict__["energy_matrix"] = self.energy_matrix
        ctx.__dict__["energy_quad"] = self.energy_quad
        return ctx


@dataclass
class PrecodedBlock:
    """Optimized transmit samples for one real dimension of one block."""

    p_x: np.ndarray
    gamma: float
    solve_stats: qcqp.PrecodeSolution


def build_problem(c_out, ctx: PrecodeContext) -> qcqp.EpigraphProblem:
    """Margin program for a target pattern: variables r = [p_x, -gamma],
    objective picks -gamma, sign constraints come from the pattern applied
    to the noiseless receive map, and the energy constraint weights the
    transmit samples by the transmit filter."""
    c_out = np.asarray(c_out, dtype=float)
    n_tot, n_q = ctx.dims.n_tot, ctx.dims.n_q
    if c_out.shape != (n_tot,):
        raise ValueError(f"pattern length {c_out.shape} != ({n_tot},)")

    receive_map = ctx.beta * (c_out[:, None] * (ctx.waveform @ ctx.upsampler))
    b_ineq = -np.hstack([receive_map, np.ones((n_tot, 1))])
    w_block = ctx.energy_matrix
    w = np.hstack([w_block, np.zeros((w_block.shape[0], 1))])
    quad = np.zeros((n_q + 1, n_q + 1))
    quad[:n_q, :n_q] = ctx.energy_quad
    a = np.zeros(n_q + 1)
    a[-1] = 1.0
    return qcqp.EpigraphProblem(
        a=a, b_ineq=b_ineq, w=w, energy_bound=ctx.per_dim_energy, precomputed_quad=quad
    )


def precode(
    symbols,
    ctx: PrecodeContext,
    codebook: ZcCodebook,
    tol: float = 1e-7,
    max_iter: int = 200,
) -> PrecodedBlock:
    """Encode a symbol sequence and solve for its transmit block.

    A failed solve is retried once with a quadrupled iteration budget; a
    block that still fails is returned with its failure status so callers
    can count it as an erasure.
    """
    pattern = encode_pattern(symbols, codebook)
    return precode_pattern(pattern, ctx, tol=tol, max_iter=max_iter)


def precode_pattern(
    c_out, ctx: PrecodeContext, tol: float = 1e-7, max_iter: int = 200
) -> PrecodedBlock:
    """Solve the margin program for an explicit target sign pattern.

    The gain scales the achievable margin linearly without moving the
    optimal transmit samples, so the solve runs on the unit-gain program
    and the margin is scaled back; solver statistics refer to the
    unit-gain program.
    """
    problem = build_problem(c_out, ctx.with_beta(1.0) if ctx.beta != 1.0 else ctx)
    solution = qcqp.solve(problem, tol=tol, max_iter=max_iter)
    if solution.status == qcqp.STATUS_NUMERICAL_FAILURE or (
        solution.status == qcqp.STATUS_MAX_ITERATIONS
        and max(solution.kkt_residuals.values()) > 100 * tol
    ):
        logger.warning("block solve failed (%s); retrying with 4x iterations", solution.status)
        retry = qcqp.solve(problem, tol=tol, max_iter=4 * max_iter)
        retry.retries = 1
        solution = retry
    n_q = ctx.dims.n_q
    return PrecodedBlock(
        p_x=solution.r[:n_q],
        gamma=ctx.beta * solution.gamma,
        solve_stats=solution,
    )


def noiseless_receive(p_x, ctx: PrecodeContext) -> np.ndarray:
    """Receive-filtered samples absent noise: beta * waveform * upsampler * p_x."""
    p_x = np.asarray(p_x, dtype=float)
    if p_x.shape != (ctx.dims.n_q,):
        raise ValueError(f"p_x length {p_x.shape} != ({ctx.dims.n_q},)")
    return ctx.beta * (ctx.waveform @ (ctx.upsampler @ p_x))


def received_margin(p_x, c_out, ctx: PrecodeContext) -> float:
    """Margin recomputed independently from a transmit block: the smallest
    receive sample distance to the threshold in the pattern direction."""
    y = noiseless_receive(p_x, ctx)
    return float(np.min(np.asarray(c_out) * y))


def transmit_energy(p_x, ctx: PrecodeContext) -> float:
    """Block transmit energy through the context's energy weighting."""
    x = ctx.energy_matrix @ np.asarray(p_x, dtype=float)
    return float(x @ x)
