"""SSPRK3 time integration with a CFL-limited step and run orchestration."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .models import SimState, evaluate_rhs

#: Sub-steps per CFL step.  P1 DG with SSPRK3 is linearly stable only up to a
#: Courant number of about 0.41, so the step ``cfl * h / lambda`` is split
#: into equal sub-steps; with cfl = 0.95 each one runs at about 0.32.
DG_SUBSTEPS = 3


class NumericalFailure(ArithmeticError):
    """Non-finite data, a collapsed time step or an exhausted step budget."""


@dataclass
class RunConfig:
    t_end: float
    cfl: float = 0.95
    output_times: Sequence[float] = field(default_factory=tuple)
    max_steps: Optional[int] = None
    substeps: int = DG_SUBSTEPS
    dt_min: float = 1e-14

    def __post_init__(self):
        if not (np.isfinite(self.t_end) and self.t_end >= 0):
            raise ValueError("t_end must be finite and >= 0")
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if int(self.substeps) != self.substeps or self.substeps < 1:
            raise ValueError("substeps must be a positive integer")
        times = tuple(sorted(float(t) for t in self.output_times))
        if any(t < 0 or t > self.t_end for t in times):
            raise ValueError("output times must lie in [0, t_end]")
        self.output_times = times


def cfl_dt(state, model, cfl=0.95, max_speed=None, next_stop=None):
    """``cfl * h / lambda``, clipped so the step ends no later than ``next_stop``."""
    if not 0 < cfl <= 1:
        raise ValueError("cfl must lie in (0, 1]")
    if max_speed is None:
        max_speed = evaluate_rhs(state, model).max_speed
    if not np.isfinite(max_speed) or max_speed <= 0:
        raise NumericalFailure(f"invalid wave speed {max_speed!r} at t={state.time:.6g}")
    dt = cfl * state.mesh.h / max_speed
    if next_stop is not None:
        dt = min(dt, next_stop - state.time)
    return dt


def model_operator(model):
    """The semi-discrete operator ``q -> dq/dt`` of ``model`` for :func:`ssprk3_step`."""
    return lambda state: evaluate_rhs(state, model).dq


def ssprk3_step(state, dt, rhs, first_stage=None):
    """One Shu-Osher SSPRK3 step of ``dq/dt = rhs(state)``.

    ``first_stage`` may supply ``rhs(state)`` when it is already known.
    Exceptions raised by ``rhs`` propagate with a ``stage`` attribute (1-3).
    """
    q0 = state.q
    mesh, t = state.mesh, state.time

    def stage(i, s):
        try:
            d = rhs(s)
        except Exception as exc:
            exc.stage = i
            raise
        d = d.q if isinstance(d, SimState) else d
        return d

    k1 = first_stage if first_stage is not None else stage(1, state)
    q1 = q0 + dt * k1
    _check(q1, t, 1)
    q2 = 0.75 * q0 + 0.25 * (q1 + dt * stage(2, SimState(mesh, q1, t + dt)))
    _check(q2, t, 2)
    q3 = q0 / 3.0 + (2.0 / 3.0) * (q2 + dt * stage(3, SimState(mesh, q2, t + 0.5 * dt)))
    _check(q3, t, 3)
    return SimState(mesh, q3, t + dt)


def _check(q, t, stage):
    if not np.all(np.isfinite(q)):
        exc = NumericalFailure(f"non-finite state in stage {stage} of the step from t={t:.6g}")
        exc.stage = stage
        raise exc


def run(state, model, config, on_step: Optional[Callable] = None,
        on_output: Optional[Callable] = None, diagnostics=True):
    """Advance ``state`` to ``config.t_end``.

    Every entry of ``config.output_times`` is hit exactly by clipping the
    step.  At each output time a :class:`DiagnosticsRecord` is appended to
    the returned series and ``on_output(state, record)`` is called;
    ``on_step(state, dt)`` fires after every step.  Returns
    ``(final_state, records)``.
    """
    from .diagnostics import record as make_record

    state = state.copy()
    pending = list(config.output_times)
    records = []
    tol = 1e-12 * max(config.t_end, 1.0)
    operator = model_operator(model)

    def emit():
        while pending and pending[0] <= state.time + tol:
            pending.pop(0)
            rec = make_record(state, model) if diagnostics else None
            if rec is not None:
                records.append(rec)
            if on_output:
                on_output(state, rec)

    emit()
    steps = 0
    while state.time < config.t_end - tol:
        if config.max_steps is not None and steps >= config.max_steps:
            raise NumericalFailure(
                f"step budget {config.max_steps} exhausted at t={state.time:.6g}")
        ev = evaluate_rhs(state, model)
        target = pending[0] if pending else config.t_end
        dt = cfl_dt(state, model, config.cfl, ev.max_speed, target) / config.substeps
        if dt < config.dt_min:
            raise NumericalFailure(f"time step collapsed to {dt:.3e} at t={state.time:.6g}")
        first = ev.dq
        for _ in range(config.substeps):
            new = ssprk3_step(state, dt, operator, first_stage=first)
            first = None
            if abs(new.time - target) <= tol:
                new.time = target
            state = new
            steps += 1
            if on_step:
                on_step(state, dt)
        emit()
    return state, records
