"""Semi-discrete DG right-hand sides for the 1D Euler / IGR / HRE / HIGR family.

All models share the conservative variables (rho, rho u, E), a local
Lax-Friedrichs face flux and P1 DG volume terms.  The regularized models add
an entropic pressure obtained from one (or, for the ablated HIGR variant,
two) weighted SIPG elliptic solves per right-hand-side evaluation.  The
thermodynamic pressure always stays outside the elliptic solve, so every
term on the elliptic right-hand side is O(alpha).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np

from .dg1d import (
    DgField, PenaltyParams, face_traces, project_values, sipg_solve, sipg_system,
    weak_derivative,
)
from .eos import IdealGasEos
from .quadrature import GAUSS_WEIGHTS


class ModelKind(enum.Enum):
    EULER = "Euler"
    IGR = "IGR"
    HRE = "HRE"
    HIGR = "HIGR"
    HIGR_ABLATED = "HIGRAblated"
    HRE_NO_CAPILLARY = "HRENoCapillary"

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        for kind in cls:
            if kind.value.lower() == str(name).lower() or kind.name.lower() == str(name).lower():
                return kind
        raise ValueError(f"unknown model {name!r}; expected one of {[k.value for k in cls]}")

    @property
    def regularized_kinetic(self):
        """Whether E carries the 1/2 rho alpha u_x^2 kinetic correction."""
        return self in (ModelKind.HRE, ModelKind.HIGR, ModelKind.HIGR_ABLATED,
                        ModelKind.HRE_NO_CAPILLARY)

    @property
    def capillary_energy(self):
        """Whether E carries the capillary energy alpha (rho eps)_rhorho rho_x^2 / 2."""
        return self in (ModelKind.HRE, ModelKind.HIGR, ModelKind.HIGR_ABLATED)

    @property
    def needs_gradients(self):
        """Whether the elliptic source uses (ln rho)_x and eps_x."""
        return self in (ModelKind.HRE, ModelKind.HIGR, ModelKind.HIGR_ABLATED,
                        ModelKind.HRE_NO_CAPILLARY)


_DEFAULT_K = {ModelKind.HRE: 1.0, ModelKind.HIGR: 2.0, ModelKind.HRE_NO_CAPILLARY: 1.0,
              ModelKind.HIGR_ABLATED: 1.0, ModelKind.IGR: 2.0, ModelKind.EULER: 0.0}


@dataclass(frozen=True)
class ModelParams:
    kind: ModelKind = ModelKind.IGR
    alpha: float = 0.0
    eos: IdealGasEos = field(default_factory=IdealGasEos)
    k: Optional[float] = None
    penalty: PenaltyParams = field(default_factory=PenaltyParams)
    flux_dissipation_scale: float = 1.0
    pressureless: bool = False
    sipg_rtol: float = 1e-10

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind.parse(self.kind))
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.k is None:
            object.__setattr__(self, "k", _DEFAULT_K[self.kind])
        if self.flux_dissipation_scale < 0:
            raise ValueError("flux_dissipation_scale must be >= 0")

    @property
    def gamma(self):
        return self.eos.gamma

    @classmethod
    def default_for(cls, kind, mesh, alpha_coefficient=5.0, **kw):
        """Parameters with ``alpha = alpha_coefficient * h**2``."""
        return cls(kind=ModelKind.parse(kind), alpha=alpha_coefficient * mesh.h**2, **kw)

    def with_(self, **kw):
        return replace(self, **kw)


class PositivityError(ArithmeticError):
    """Density or specific internal energy lost positivity."""

    def __init__(self, field_name, cell, time=None, value=None):
        self.field = field_name
        self.cell = int(cell)
        self.time = time
        self.value = value
        where = f"cell {self.cell}" + ("" if time is None else f", t={time:.6g}")
        super().__init__(f"non-positive {field_name} ({value!r}) at {where}")


class SimState:
    """Conservative DG state; ``q[0], q[1], q[2]`` are rho, rho u, E coefficients."""

    __slots__ = ("mesh", "q", "time")

    def __init__(self, mesh, q, time=0.0):
        q = np.asarray(q, dtype=float)
        if q.shape != (3, mesh.n_cells, 2):
            raise ValueError(f"state array must have shape (3, {mesh.n_cells}, 2)")
        self.mesh = mesh
        self.q = q
        self.time = float(time)

    @classmethod
    def from_fields(cls, rho, mom, energy, time=0.0):
        return cls(rho.mesh, np.stack([rho.coeffs, mom.coeffs, energy.coeffs]), time)

    @property
    def rho(self):
        return DgField(self.mesh, self.q[0])

    @property
    def mom(self):
        return DgField(self.mesh, self.q[1])

    @property
    def energy(self):
        return DgField(self.mesh, self.q[2])

    def copy(self):
        return SimState(self.mesh, self.q.copy(), self.time)


class AuxFields(NamedTuple):
    q_u: DgField
    q_lnrho: Optional[DgField]
    q_eps: Optional[DgField]


class Primitives(NamedTuple):
    u: DgField            # projected velocity
    eps: DgField          # projected specific internal energy
    u_q: np.ndarray       # nodal velocity at quadrature points
    eps_q: np.ndarray     # nodal specific internal energy at quadrature points
    aux: AuxFields


def _check_density(state):
    rq = state.rho.at_quad()
    bad = np.flatnonzero((rq <= 0).any(axis=1) | (state.q[0, :, 0] <= 0))
    if bad.size:
        c = int(bad[0])
        raise PositivityError("rho", c, state.time, float(rq[c].min()))
    return rq


def recover_primitives(state, model):
    """Velocity, specific internal energy and auxiliary derivative fields.

    For the Hamiltonian models the total energy also holds the capillary
    energy ``alpha/2 (rho eps)_rhorho rho_x^2 = alpha/2 gamma (gamma-1) rho eps
    (ln rho)_x^2``, which is linear in eps, so eps is recovered by division.
    """
    mesh = state.mesh
    rq = _check_density(state)
    mq = state.mom.at_quad()
    eq = state.energy.at_quad()
    u_q = mq / rq
    u = project_values(mesh, u_q)
    q_u = weak_derivative(u, model.penalty)
    eps_q = eq / rq - 0.5 * u_q**2
    if model.kind.regularized_kinetic:
        eps_q = eps_q - 0.5 * model.alpha * q_u.at_quad() ** 2
    q_lnrho = q_eps = None
    if model.kind.needs_gradients:
        q_lnrho = weak_derivative(project_values(mesh, np.log(rq)), model.penalty)
        if model.kind.capillary_energy:
            eps_q = eps_q / (1.0 + capillary_factor(model, q_lnrho.at_quad()))
    if not model.pressureless:
        bad = np.flatnonzero((eps_q <= 0).any(axis=1))
        if bad.size:
            c = int(bad[0])
            raise PositivityError("eps", c, state.time, float(eps_q[c].min()))
    eps = project_values(mesh, eps_q)
    if model.kind.needs_gradients:
        q_eps = weak_derivative(eps, model.penalty)
    return Primitives(u, eps, u_q, eps_q, AuxFields(q_u, q_lnrho, q_eps))


def capillary_factor(model, q_lnrho):
    """Capillary energy per unit rho eps: ``alpha gamma (gamma-1) q_lnrho^2 / 2``."""
    if model.pressureless:
        return 0.0 * q_lnrho
    g = model.gamma
    return 0.5 * model.alpha * g * (g - 1.0) * q_lnrho**2


def elliptic_rhs(state, prim, model):
    """Right-hand side(s) of the entropic-pressure equation(s) as DgFields.

    Returns a single field, or ``(rhs_C, rhs_D)`` for the ablated HIGR model,
    or ``None`` for Euler.
    """
    kind, a, g = model.kind, model.alpha, model.gamma
    mesh = state.mesh
    if kind is ModelKind.EULER:
        return None
    qu2 = prim.aux.q_u.at_quad() ** 2
    if kind is ModelKind.IGR:
        return project_values(mesh, 2.0 * a * qu2)
    if model.pressureless:
        # eps plays no mechanical role, so every eps- and rho_x-sourced term drops
        if kind is ModelKind.HIGR_ABLATED:
            return project_values(mesh, a * qu2), project_values(mesh, a * qu2)
        return project_values(mesh, a * model.k * qu2)
    eps_q = prim.eps_q
    qlr = prim.aux.q_lnrho.at_quad()
    qeps = prim.aux.q_eps.at_quad()
    if kind is ModelKind.HRE_NO_CAPILLARY:
        # only rho^-1 p_x = (g-1)(eps_x + eps rho_x/rho) survives
        inner = project_values(mesh, qeps + eps_q * qlr)
        d_inner = weak_derivative(inner, model.penalty).at_quad()
        return project_values(mesh, a * (model.k * qu2 + (g - 1.0) * d_inner))
    inner = project_values(mesh, qeps - (g - 1.0) * eps_q * qlr)
    d_inner = weak_derivative(inner, model.penalty).at_quad()
    grad_terms = (g - 1.0) * d_inner + 0.5 * g * (g - 1.0) ** 2 * eps_q * qlr**2
    if kind is ModelKind.HIGR_ABLATED:
        return (project_values(mesh, a * (qu2 + grad_terms)),
                project_values(mesh, a * qu2))
    return project_values(mesh, a * (model.k * qu2 + grad_terms))


def entropic_pressure(state, model, prim=None):
    """Entropic pressure field(s): ``Sigma`` or ``(Sigma_C, Sigma_D)``; None for Euler."""
    if prim is None:
        prim = recover_primitives(state, model)
    rhs = elliptic_rhs(state, prim, model)
    if rhs is None:
        return None
    system = sipg_system(state.rho, model.alpha, model.penalty)
    if isinstance(rhs, tuple):
        return tuple(sipg_solve(state.rho, model.alpha, list(rhs), model.penalty,
                                rtol=model.sipg_rtol, system=system))
    return sipg_solve(state.rho, model.alpha, rhs, model.penalty,
                      rtol=model.sipg_rtol, system=system)


class FluxPoint(NamedTuple):
    rho: np.ndarray
    mom: np.ndarray
    energy: np.ndarray
    eps: np.ndarray
    q_u: np.ndarray = 0.0
    q_lnrho: np.ndarray = 0.0


def physical_flux(pt, model, sigma=0.0, sigma_d=0.0):
    """Pointwise flux ``(F_rho, F_mom, F_E)``.

    ``sigma`` is the entropic pressure (Sigma_C for the ablated model) and
    ``sigma_d`` the dissipative part used only by the ablated model.
    """
    kind, g = model.kind, model.gamma
    u = pt.mom / pt.rho
    p = 0.0 if model.pressureless else (g - 1.0) * pt.rho * pt.eps
    f_rho = pt.mom
    if kind is ModelKind.EULER:
        return f_rho, pt.mom * u + p, (pt.energy + p) * u
    f_mom = pt.mom * u + p + sigma + sigma_d
    f_e = (pt.energy + p + sigma) * u
    if kind in (ModelKind.HRE, ModelKind.HIGR) and not model.pressureless:
        f_e = f_e + model.alpha * g * (g - 1.0) * pt.rho * pt.eps * pt.q_lnrho * pt.q_u
    return f_rho, f_mom, f_e


def _wave_speed(rho, mom, eps, model):
    u = np.abs(mom / rho)
    if model.pressureless:
        return u
    return u + np.sqrt(model.gamma * (model.gamma - 1.0) * eps)


def max_wave_speed(state, model, prim=None):
    """max over quadrature points of |u| + c_s."""
    if prim is None:
        prim = recover_primitives(state, model)
    eps = np.maximum(prim.eps_q, 0.0)
    return float(np.max(np.abs(prim.u_q) + (0.0 if model.pressureless
                                            else np.sqrt(model.gamma * (model.gamma - 1.0) * eps))))


class RhsEvaluation(NamedTuple):
    dq: np.ndarray
    prim: Primitives
    sigma: object          # DgField, (DgField, DgField) or None
    max_speed: float


def _traces(f):
    return face_traces(f) if f is not None else (0.0, 0.0)


def evaluate_rhs(state, model):
    """Full semi-discrete evaluation; returns the time derivative and intermediates."""
    mesh = state.mesh
    h = mesh.h
    prim = recover_primitives(state, model)
    sig = entropic_pressure(state, model, prim)
    if sig is None:
        sig_c, sig_d = None, None
    elif isinstance(sig, tuple):
        sig_c, sig_d = sig
    else:
        sig_c, sig_d = sig, None
    aux = prim.aux
    regular = model.kind.regularized_kinetic

    # volume terms at quadrature points
    rq = state.rho.at_quad()
    vol = FluxPoint(
        rq, state.mom.at_quad(), state.energy.at_quad(), prim.eps_q,
        aux.q_u.at_quad(),
        aux.q_lnrho.at_quad() if aux.q_lnrho is not None else 0.0,
    )
    fv = physical_flux(vol, model,
                       sig_c.at_quad() if sig_c is not None else 0.0,
                       sig_d.at_quad() if sig_d is not None else 0.0)

    # face states from both sides
    sides = []
    for side in (0, 1):
        r = face_traces(state.rho)[side]
        m = face_traces(state.mom)[side]
        e = face_traces(state.energy)[side]
        qu = face_traces(aux.q_u)[side]
        qlr = face_traces(aux.q_lnrho)[side] if aux.q_lnrho is not None else 0.0
        eps = e / r - 0.5 * (m / r) ** 2
        if regular:
            eps = eps - 0.5 * model.alpha * qu**2
        if model.kind.capillary_energy:
            eps = eps / (1.0 + capillary_factor(model, qlr))
        if np.any(r <= 0) or (not model.pressureless and np.any(eps <= 0)):
            bad = np.flatnonzero((r <= 0) | (eps <= 0))[0]
            cell = int(bad if side == 0 else (bad + 1) % mesh.n_cells)
            name = "rho" if r[bad] <= 0 else "eps"
            raise PositivityError(name, cell, state.time, float(r[bad] if name == "rho" else eps[bad]))
        pt = FluxPoint(r, m, e, eps, qu, qlr)
        f = physical_flux(pt, model, _traces(sig_c)[side], _traces(sig_d)[side])
        sides.append((np.stack([r, m, e]), np.stack(f), _wave_speed(r, m, eps, model)))
    (ul, fl, sl), (ur, fr, sr) = sides
    lam = model.flux_dissipation_scale * np.maximum(sl, sr)
    fhat = 0.5 * (fl + fr) - 0.5 * lam * (ur - ul)

    fv_arr = np.stack(fv)                        # (3, n, 3)
    dq = np.empty_like(state.q)
    fhat_prev = np.roll(fhat, 1, axis=1)
    dq[:, :, 0] = -(fhat - fhat_prev) / h
    dq[:, :, 1] = 3.0 * (fv_arr @ GAUSS_WEIGHTS - (fhat + fhat_prev)) / h
    return RhsEvaluation(dq, prim, sig, max_wave_speed(state, model, prim))


def semidiscrete_rhs(state, model):
    """Time derivative of the state coefficients as a :class:`SimState`."""
    return SimState(state.mesh, evaluate_rhs(state, model).dq, state.time)


# ---------------------------------------------------------------------------
# initial conditions

SOD_LEFT = (1.0, 0.0, 1.0)
SOD_RIGHT = (0.125, 0.0, 0.1)


class ConfigurationError(ValueError):
    pass


def sod_blend(x, x1=0.25, x2=0.75, delta=0.02, length=1.0):
    """Smooth periodic indicator: ~1 on (x1, x2), ~0 outside, tanh ramps of width delta."""
    return 0.5 * (np.tanh((x - x1) / delta) - np.tanh((x - x2) / delta))


def initial_condition_sod(mesh, model, delta=0.02, x1=0.25, x2=0.75):
    """Periodized smoothed Sod data: high-pressure state on (x1, x2)."""
    L = mesh.domain_length
    if not (0 < x1 < x2 < L) or delta <= 0:
        raise ConfigurationError("need 0 < x1 < x2 < domain_length and delta > 0")
    if x2 - x1 < 4 * delta or L - x2 + x1 < 4 * delta:
        raise ConfigurationError(f"tanh ramps overlap: x1={x1}, x2={x2}, delta={delta}")
    g = model.gamma

    def prim(x):
        b = sod_blend(x, x1, x2, delta, L)
        rho = SOD_RIGHT[0] + (SOD_LEFT[0] - SOD_RIGHT[0]) * b
        p = SOD_RIGHT[2] + (SOD_LEFT[2] - SOD_RIGHT[2]) * b
        return rho, p

    rho_q, p_q = prim(mesh.quad_points)
    rho = project_values(mesh, rho_q)
    # u = 0, so only the capillary part of the energy definition enters
    e_q = p_q / (g - 1.0) * (1.0 + _capillary_of(rho, model))
    return SimState.from_fields(rho, DgField.zeros(mesh), project_values(mesh, e_q))


def _capillary_of(rho, model):
    if not (model.kind.capillary_energy and model.alpha > 0):
        return 0.0
    q_lnrho = weak_derivative(project_values(rho.mesh, np.log(rho.at_quad())), model.penalty)
    return capillary_factor(model, q_lnrho.at_quad())


def constant_state(mesh, rho0, u0, eps0, model):
    """Uniform state; E uses the model's kinetic energy (u_x = 0 here)."""
    q = np.zeros((3, mesh.n_cells, 2))
    q[0, :, 0] = rho0
    q[1, :, 0] = rho0 * u0
    q[2, :, 0] = rho0 * (eps0 + 0.5 * u0**2)
    return SimState(mesh, q)


def state_from_primitives(mesh, model, rho_fn, u_fn, eps_fn, dudx_fn=None):
    """Project (rho, rho u, E) built pointwise from primitive profiles.

    For models whose energy carries the alpha u_x^2 term, ``dudx_fn`` supplies
    the analytic velocity gradient; the capillary energy uses the discrete
    (ln rho)_x.
    """
    x = mesh.quad_points
    rho, u, eps = rho_fn(x), u_fn(x), eps_fn(x)
    rho_f = project_values(mesh, rho)
    e = rho * eps * (1.0 + _capillary_of(rho_f, model)) + 0.5 * rho * u**2
    if model.kind.regularized_kinetic and dudx_fn is not None:
        e = e + 0.5 * rho * model.alpha * dudx_fn(x) ** 2
    return SimState.from_fields(rho_f, project_values(mesh, rho * u), project_values(mesh, e))
