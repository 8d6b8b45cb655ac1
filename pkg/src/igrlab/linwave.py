"""Linear acoustic waves: analytic dispersion, measured phase speeds and the acoustic energy average."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import factorial2

from .dg1d import Mesh1D
from .eos import IdealGasEos
from .models import ModelKind, ModelParams, state_from_primitives
from .quadrature import GAUSS_WEIGHTS
from .timestep import RunConfig, run


@dataclass(frozen=True)
class DispersionQuery:
    k: float
    rho0: float = 1.0
    eps0: float = 1.0 / (1.4 * 0.4)
    u0: float = 0.0
    alpha: float = 0.0
    capillary: bool = True
    eos: IdealGasEos = IdealGasEos()

    @property
    def sound_speed(self):
        return float(self.eos.sound_speed(self.rho0, self.eps0))


def dispersion_omega(query):
    """Sound branches ``(omega_plus, omega_minus, note)``.

    ``omega = k u0 +- |k| sqrt((c^2 + 2 rho0 eps_g |k|^2) / (1 + alpha k^2))``
    with the gradient-energy coefficient ``rho0 eps_g = alpha c^2 / 2`` when the
    capillary term is on and 0 otherwise.
    """
    q = query
    c2 = q.sound_speed**2
    k2 = q.k**2
    rho_eps_g = 0.5 * q.alpha * c2 if q.capillary else 0.0
    if q.capillary:
        speed = np.sqrt(c2)  # (c^2 + alpha c^2 k^2)/(1 + alpha k^2) == c^2
    else:
        speed = np.sqrt((c2 + 2.0 * rho_eps_g * k2) / (1.0 + q.alpha * k2))
    shift = q.k * q.u0
    note = "1 zero branch (entropy mode, omega = k u0)"
    return shift + abs(q.k) * speed, shift - abs(q.k) * speed, note


class PhaseFitError(RuntimeError):
    """Phase samples too sparse to unwrap; shorten t_measure or add samples."""


def _fourier_mode(field, k):
    """``int_0^L rho exp(-i k x) dx`` by Gauss quadrature."""
    x = field.mesh.quad_points
    return 0.5 * field.mesh.h * np.sum((field.at_quad() * np.exp(-1j * k * x)) @ GAUSS_WEIGHTS)


def acoustic_initial_state(mesh, model, k_mode, amplitude, rho0=1.0, eps0=None):
    """Right-moving small-amplitude wave ``rho = rho0 (1 + a cos kx)``.

    Velocity follows ``u' = (omega/k) rho'/rho0`` with the model's analytic
    phase speed; the perturbation is isentropic.
    """
    gamma = model.gamma
    if eps0 is None:
        eps0 = 1.0 / (gamma * (gamma - 1.0))  # unit sound speed
    k = 2.0 * np.pi * k_mode / mesh.domain_length
    c = expected_phase_speed(model, k, rho0, eps0)
    s0 = float(model.eos.entropy(rho0, eps0))

    def rho(x):
        return rho0 * (1.0 + amplitude * np.cos(k * x))

    def u(x):
        return c * amplitude * np.cos(k * x)

    def eps(x):
        return model.eos.eps_from_entropy(rho(x), s0)

    def dudx(x):
        return -c * amplitude * k * np.sin(k * x)

    return state_from_primitives(mesh, model, rho, u, eps, dudx)


def expected_phase_speed(model, k, rho0=1.0, eps0=None):
    """Analytic right-going phase speed of ``model`` at wavenumber ``k``."""
    gamma = model.gamma
    if eps0 is None:
        eps0 = 1.0 / (gamma * (gamma - 1.0))
    kind = model.kind
    alpha = model.alpha if kind.regularized_kinetic else 0.0
    capillary = kind is not ModelKind.HRE_NO_CAPILLARY
    q = DispersionQuery(k=k, rho0=rho0, eps0=eps0, alpha=alpha, capillary=capillary, eos=model.eos)
    return dispersion_omega(q)[0] / k


def measure_phase_speed(model, k_mode, amplitude=1e-6, t_measure=None, mesh=None,
                        n_samples=65, cfl=0.95):
    """Phase speed of a small right-moving acoustic wave run through ``model``.

    The phase of the ``k_mode``-th Fourier coefficient of rho is sampled at
    ``n_samples`` equally spaced times, unwrapped and fitted by least squares.
    ``t_measure`` defaults to one domain crossing at the sound speed.
    """
    if mesh is None:
        mesh = Mesh1D(256)
    if isinstance(model, (ModelKind, str)):
        model = ModelParams.default_for(ModelKind.parse(model), mesh)
    if k_mode < 1:
        raise ValueError("k_mode must be a positive integer")
    if not 0 < amplitude <= 1e-5:
        raise ValueError("amplitude must lie in (0, 1e-5]")
    if n_samples < 3:
        raise ValueError("need at least three samples")
    state = acoustic_initial_state(mesh, model, k_mode, amplitude)
    if t_measure is None:
        t_measure = mesh.domain_length  # background sound speed is 1
    k = 2.0 * np.pi * k_mode / mesh.domain_length
    times = np.linspace(0.0, t_measure, n_samples)
    phases = []
    run(state, model, RunConfig(t_measure, cfl=cfl, output_times=times),
        on_output=lambda s, _: phases.append(np.angle(_fourier_mode(s.rho, k))),
        diagnostics=False)
    raw = np.diff(phases)
    wrapped = np.angle(np.exp(1j * raw))
    # a step near +-pi cannot be attributed to a direction
    if np.any(np.abs(wrapped) > 0.75 * np.pi):
        raise PhaseFitError(
            f"phase advances up to {np.max(np.abs(wrapped)):.3f} rad per sample; "
            "shorten t_measure or increase n_samples")
    phi = np.concatenate([[phases[0]], phases[0] + np.cumsum(wrapped)])
    slope = np.polyfit(times, phi, 1)[0]
    return -slope / k


def acoustic_energy_rate_avg(n, omega, rho0, rho_amp):
    """Period average of the n-th order acoustic kinetic-energy rate.

    Zero for odd n; ``(-1)^(n+1) omega^n rho'^n / rho0^(n-1) 2 pi (n-1)!!/n!!``
    for even n.
    """
    _check_avg_args(n, rho0, rho_amp)
    if n % 2:
        return 0.0
    ratio = factorial2(n - 1, exact=True) / factorial2(n, exact=True)
    return (-1.0) ** (n + 1) * omega**n * rho_amp**n / rho0 ** (n - 1) * 2.0 * np.pi * ratio


def acoustic_energy_rate_avg_quadrature(n, omega, rho0, rho_amp, points=10_000):
    """The same average from its defining period integral (periodic trapezoid rule)."""
    _check_avg_args(n, rho0, rho_amp)
    theta = np.linspace(0.0, 2.0 * np.pi, points, endpoint=False)
    integral = 2.0 * np.pi * np.mean((rho0 + rho_amp * np.cos(theta)) * np.sin(theta) ** n)
    return (-1.0) ** (n + 1) * (omega * rho_amp / rho0) ** n * integral


def _check_avg_args(n, rho0, rho_amp):
    if int(n) != n or n < 2:
        raise ValueError(f"n must be an integer >= 2, got {n!r}")
    if not abs(rho_amp) < rho0:
        raise ValueError("rho_amp must be smaller than rho0")
