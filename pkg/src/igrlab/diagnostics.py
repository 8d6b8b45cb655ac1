"""Conserved totals, entropy functionals, production rates and the internal-energy spike metric."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np

from .dg1d import integrate
from .models import ModelKind, entropic_pressure, recover_primitives
from .quadrature import GAUSS_WEIGHTS


@dataclass(frozen=True)
class DiagnosticsRecord:
    time: float
    total_mass: float
    total_momentum: float
    total_energy: float
    total_entropy: float
    entropy_production_rate: float
    generalized_kinetic_energy: float
    spike_amplitude: float = float("nan")

    @classmethod
    def columns(cls):
        return [f.name for f in fields(cls)]

    def as_row(self):
        return [asdict(self)[c] for c in self.columns()]


def _integrate_quad(mesh, values):
    """Gauss-quadrature integral of values given at the quadrature points."""
    return 0.5 * mesh.h * float(np.sum(values @ GAUSS_WEIGHTS))


def conserved_totals(state):
    """``(mass, momentum, energy)`` integrals of the DG representation."""
    return integrate(state.rho), integrate(state.mom), integrate(state.energy)


def total_entropy(state, model, prim=None):
    """``S = int rho s(rho, eps)`` with the model's eps recovery."""
    if prim is None:
        prim = recover_primitives(state, model)
    rq = state.rho.at_quad()
    s = model.eos.entropy(rq, prim.eps_q)
    return _integrate_quad(state.mesh, rq * s)


def entropy_production_integrand(state, model, prim=None, sigma=None):
    """Pointwise entropy production density at the quadrature points.

    IGR: ``-Sigma q_u / theta``; HIGR and the ablated variant:
    ``-alpha rho q_u^3 / theta``; conservative models: zeros.
    """
    kind = model.kind
    n = state.mesh.n_cells
    if kind in (ModelKind.EULER, ModelKind.HRE, ModelKind.HRE_NO_CAPILLARY):
        return np.zeros((n, 3))
    if prim is None:
        prim = recover_primitives(state, model)
    theta = model.eos.temperature(state.rho.at_quad(), prim.eps_q)
    qu = prim.aux.q_u.at_quad()
    if kind is ModelKind.IGR:
        if sigma is None:
            sigma = entropic_pressure(state, model, prim)
        return -sigma.at_quad() * qu / theta
    return -model.alpha * state.rho.at_quad() * qu**3 / theta


def entropy_production_rate(state, model, prim=None, sigma=None):
    """Total entropy production rate; exactly 0.0 for Euler and HRE."""
    if model.kind in (ModelKind.EULER, ModelKind.HRE, ModelKind.HRE_NO_CAPILLARY):
        return 0.0
    return _integrate_quad(state.mesh, entropy_production_integrand(state, model, prim, sigma))


def generalized_kinetic_energy(state, model, prim=None, include_alpha=None):
    """``1/2 int rho (u^2 + alpha q_u^2)``.

    By default the alpha term is kept only for models whose energy carries
    it; ``include_alpha=True`` forces the regularized form (used by the
    kinetic-energy budget, which is stated for it in every model).
    """
    if prim is None:
        prim = recover_primitives(state, model)
    if include_alpha is None:
        include_alpha = model.kind.regularized_kinetic
    rq = state.rho.at_quad()
    dens = prim.u_q**2
    if include_alpha:
        dens = dens + model.alpha * prim.aux.q_u.at_quad() ** 2
    return _integrate_quad(state.mesh, 0.5 * rq * dens)


def _budget_source(state, model):
    if model.kind in (ModelKind.EULER, ModelKind.HRE, ModelKind.HRE_NO_CAPILLARY):
        return 0.0
    prim = recover_primitives(state, model)
    qu = prim.aux.q_u.at_quad()
    return model.alpha * _integrate_quad(state.mesh, state.rho.at_quad() * qu**3)


def kinetic_energy_budget_residual(states, model):
    """``|d/dt int K_E - alpha int rho q_u^3|`` from stored snapshots.

    ``states`` holds two (forward difference, source averaged) or three
    (central difference at the middle one) temporally adjacent states.  The
    source term is zero for the conservative models.
    """
    states = list(states)
    if len(states) not in (2, 3):
        raise ValueError("need two or three snapshots")
    times = [s.time for s in states]
    if any(b <= a for a, b in zip(times, times[1:])):
        raise ValueError("snapshots must have increasing times")
    k = [generalized_kinetic_energy(s, model, include_alpha=True) for s in states]
    dkdt = (k[-1] - k[0]) / (times[-1] - times[0])
    if len(states) == 3:
        source = _budget_source(states[1], model)
    else:
        source = 0.5 * (_budget_source(states[0], model) + _budget_source(states[1], model))
    return abs(dkdt - source)


def _window_mask(mesh, window):
    lo, hi = window
    L = mesh.domain_length
    x = mesh.cell_centers
    if hi - lo >= L:
        return np.ones_like(x, dtype=bool)
    lo_w, hi_w = np.mod(lo, L), np.mod(hi, L)
    if lo_w <= hi_w:
        return (x >= lo_w) & (x <= hi_w)
    return (x >= lo_w) | (x <= hi_w)  # window wraps through x = 0


def spike_metric(state, model, window, prim=None):
    """``max |eps - median(eps)|`` over cell centres inside ``window = (x_lo, x_hi)``.

    The window may wrap through the periodic boundary (e.g. ``(-0.05, 0.05)``).
    """
    if prim is None:
        prim = recover_primitives(state, model)
    mask = _window_mask(state.mesh, window)
    if not mask.any():
        raise ValueError(f"window {window!r} contains no cell centres")
    eps = prim.eps.at_centers()[mask]
    return float(np.max(np.abs(eps - np.median(eps))))


def window_deviation(values, mesh, window):
    """``max |v - median(v)|`` of a cell-centre array inside ``window``."""
    mask = _window_mask(mesh, window)
    if not mask.any():
        raise ValueError(f"window {window!r} contains no cell centres")
    v = np.asarray(values)[mask]
    return float(np.max(np.abs(v - np.median(v))))


def record(state, model, spike_window=None):
    """Full :class:`DiagnosticsRecord` for ``state``."""
    prim = recover_primitives(state, model)
    sigma = entropic_pressure(state, model, prim) if model.kind is ModelKind.IGR else None
    mass, mom, energy = conserved_totals(state)
    try:
        entropy = total_entropy(state, model, prim)
        production = entropy_production_rate(state, model, prim, sigma)
    except ValueError:  # pressureless runs may carry eps <= 0
        entropy = production = float("nan")
    spike = float("nan") if spike_window is None else spike_metric(state, model, spike_window, prim)
    return DiagnosticsRecord(
        time=state.time, total_mass=mass, total_momentum=mom, total_energy=energy,
        total_entropy=entropy, entropy_production_rate=production,
        generalized_kinetic_energy=generalized_kinetic_energy(state, model, prim),
        spike_amplitude=spike,
    )
