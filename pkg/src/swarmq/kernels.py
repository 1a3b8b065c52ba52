"""Numeric kernels for controllers, energies, tuning gradients, and dwells.

All hot inner loops live here, written as explicit scalar loops over flat
float64 arrays so the same source runs two ways:

* ``numba`` backend (default when numba imports): functions are compiled
  with ``@njit``.
* ``numpy`` backend: the identical functions run interpreted.

Select with the ``SWARMQ_BACKEND`` environment variable (``numba`` or
``numpy``) before import. Both variants are kept importable for the
benchmark in ``benchmarks/backend_bench.py``.

Behavior kind codes (must match ``behaviors.BehaviorId``):
    0 static formation, 1 formation with leader, 2 cyclic pursuit,
    3 leader-follower, 4 triangulation coverage.

Environment kind codes: 0 convoy, 1 box.

Dwell kernel exit codes: 0 energy threshold reached, 1 step budget
exhausted (the caller distinguishes dwell timeout from horizon end).
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

KIND_STATIC_FORMATION = 0
KIND_FORMATION_WITH_LEADER = 1
KIND_CYCLIC_PURSUIT = 2
KIND_LEADER_FOLLOWER = 3
KIND_TRIANGULATION_COVERAGE = 4

ENV_CONVOY = 0
ENV_BOX = 1

EXIT_ENERGY = 0
EXIT_STEPS = 1
EXIT_MISSION_DONE = 2

_flag = os.environ.get("SWARMQ_BACKEND", "").strip().lower()
if _flag not in ("", "numba", "numpy"):
    raise ValueError(f"SWARMQ_BACKEND must be 'numba' or 'numpy', got {_flag!r}")
if _flag == "numba" and not HAVE_NUMBA:
    raise ImportError("SWARMQ_BACKEND=numba but numba is not importable")
BACKEND = "numpy" if _flag == "numpy" or not HAVE_NUMBA else "numba"


def _build(jit):
    """Construct the kernel family, optionally wrapping each in ``jit``."""

    dec = jit if jit is not None else (lambda f: f)

    @dec
    def control_kernel(kind, pos, edges, deltas, leader, theta, phix, phiy,
                       rot_c, rot_s, ring_coeff, out):
        """Per-robot velocity command; fills ``out`` (N, 2) and returns it."""
        n = pos.shape[0]
        for i in range(n):
            out[i, 0] = 0.0
            out[i, 1] = 0.0
        if kind == KIND_CYCLIC_PURSUIT:
            r_des = ring_coeff * theta
            for i in range(n):
                j = i + 1
                if j == n:
                    j = 0
                dx = pos[j, 0] - pos[i, 0]
                dy = pos[j, 1] - pos[i, 1]
                out[i, 0] = rot_c * dx - rot_s * dy
                out[i, 1] = rot_s * dx + rot_c * dy
                gx = phix - pos[i, 0]
                gy = phiy - pos[i, 1]
                d = math.sqrt(gx * gx + gy * gy)
                scale = 1.0 - r_des / max(d, 1e-12)
                out[i, 0] += scale * gx
                out[i, 1] += scale * gy
        else:
            for e in range(edges.shape[0]):
                i = edges[e, 0]
                j = edges[e, 1]
                dx = pos[j, 0] - pos[i, 0]
                dy = pos[j, 1] - pos[i, 1]
                d_des = theta * deltas[e]
                w = (dx * dx + dy * dy) - d_des * d_des
                out[i, 0] += w * dx
                out[i, 1] += w * dy
                out[j, 0] -= w * dx
                out[j, 1] -= w * dy
            if leader >= 0:
                out[leader, 0] += phix - pos[leader, 0]
                out[leader, 1] += phiy - pos[leader, 1]
        return out

    @dec
    def energy_kernel(kind, pos, edges, deltas, leader, theta, phix, phiy,
                      ring_coeff):
        """Scalar progress measure; zero exactly on the behavior's goal set."""
        n = pos.shape[0]
        if kind == KIND_CYCLIC_PURSUIT:
            r_des = ring_coeff * theta
            acc = 0.0
            for i in range(n):
                gx = pos[i, 0] - phix
                gy = pos[i, 1] - phiy
                err = math.sqrt(gx * gx + gy * gy) - r_des
                acc += err * err
            return acc / n
        acc = 0.0
        for e in range(edges.shape[0]):
            i = edges[e, 0]
            j = edges[e, 1]
            dx = pos[j, 0] - pos[i, 0]
            dy = pos[j, 1] - pos[i, 1]
            d_des = theta * deltas[e]
            w = (dx * dx + dy * dy) - d_des * d_des
            acc += 0.25 * w * w
        if leader >= 0:
            gx = phix - pos[leader, 0]
            gy = phiy - pos[leader, 1]
            acc += 0.5 * (gx * gx + gy * gy)
        return acc

    @dec
    def tuning_grad_kernel(kind, pos, env_kind, snap_x, snap_y, env_par,
                           theta, phix, phiy, ring_coeff,
                           phi_lo_x, phi_hi_x, phi_lo_y, phi_hi_y):
        """Cost of the current parameters and its gradient.

        ``snap`` is the environment position frozen at dwell entry.
        Returns (cost, d/dtheta, d/dphi_x, d/dphi_y).
        """
        if env_kind == ENV_CONVOY:
            # env_par: [sigma, delta_target, delta_known]
            dx = phix - snap_x
            dy = phiy - snap_y
            cost = dx * dx + dy * dy
            gpx = 2.0 * dx
            gpy = 2.0 * dy
            gt = 0.0
            if env_par[2] != 0.0:
                if kind == KIND_CYCLIC_PURSUIT:
                    scale = ring_coeff * theta
                    dsc = ring_coeff
                else:
                    scale = theta
                    dsc = 1.0
                err = scale - env_par[1]
                cost += err * err
                gt = 2.0 * err * dsc
            return cost, gt, gpx, gpy
        # env_par: [goal_x, goal_y, rho, push_offset, teleport, hug_scale, goal_tol]
        # snap is the approach/march waypoint, resolved by the caller at
        # dwell entry; clamp it onto the feasible phi box
        qx = min(max(snap_x, phi_lo_x), phi_hi_x)
        qy = min(max(snap_y, phi_lo_y), phi_hi_y)
        dx = phix - qx
        dy = phiy - qy
        # shrink the behavior scale below the detection radius so the
        # ensemble stays in contact with the box while it marches
        if kind == KIND_CYCLIC_PURSUIT:
            scale = ring_coeff * theta
            dsc = ring_coeff
        else:
            scale = theta
            dsc = 1.0
        err = scale - env_par[5]
        cost = dx * dx + dy * dy + err * err
        return cost, 2.0 * err * dsc, 2.0 * dx, 2.0 * dy

    @dec
    def dwell_kernel(kind, pos, edges, deltas, leader, theta, phi, bounds,
                     rot_c, rot_s, ring_coeff,
                     env_kind, env_vec, env_par, snap_x, snap_y,
                     noise, arena, dt, eps_energy, ogd_rate,
                     max_steps, min_steps, ctrl_buf, energies):
        """Run one dwell: integrate robots, environment, and the parameter
        gradient flow until the energy threshold fires or the step budget
        ends.

        Mutates ``pos``, ``phi``, and ``env_vec`` in place; fills
        ``energies[k]`` with the post-step energy of step k. The energy
        interrupt is honored from step ``min_steps`` on (entry checks are
        the caller's job). Returns (steps, exit_code, exit_energy, theta).
        """
        n = pos.shape[0]
        steps = 0
        code = EXIT_STEPS
        e_now = energy_kernel(kind, pos, edges, deltas, leader, theta,
                              phi[0], phi[1], ring_coeff)
        for k in range(max_steps):
            control_kernel(kind, pos, edges, deltas, leader, theta,
                           phi[0], phi[1], rot_c, rot_s, ring_coeff, ctrl_buf)
            cost, gt, gpx, gpy = tuning_grad_kernel(
                kind, pos, env_kind, snap_x, snap_y, env_par,
                theta, phi[0], phi[1], ring_coeff,
                bounds[2], bounds[3], bounds[4], bounds[5])
            # box coupling uses the centroid displacement over this step and
            # the robot-to-box distances before it
            mind = 1e300
            cbx = 0.0
            cby = 0.0
            if env_kind == ENV_BOX:
                for i in range(n):
                    dx = pos[i, 0] - env_vec[0]
                    dy = pos[i, 1] - env_vec[1]
                    d = math.sqrt(dx * dx + dy * dy)
                    if d < mind:
                        mind = d
                    cbx += pos[i, 0]
                    cby += pos[i, 1]
                cbx /= n
                cby /= n
            for i in range(n):
                pos[i, 0] += dt * ctrl_buf[i, 0]
                pos[i, 1] += dt * ctrl_buf[i, 1]
            if env_kind == ENV_CONVOY:
                env_vec[0] += dt * (env_vec[2] + env_par[0] * noise[k, 0])
                env_vec[1] += dt * (env_vec[3] + env_par[0] * noise[k, 1])
                for ax in range(2):
                    lo = arena[2 * ax]
                    hi = arena[2 * ax + 1]
                    if env_vec[ax] < lo:
                        env_vec[ax] = 2.0 * lo - env_vec[ax]
                        env_vec[2 + ax] = -env_vec[2 + ax]
                    elif env_vec[ax] > hi:
                        env_vec[ax] = 2.0 * hi - env_vec[ax]
                        env_vec[2 + ax] = -env_vec[2 + ax]
                    if env_vec[ax] < lo:
                        env_vec[ax] = lo
                    elif env_vec[ax] > hi:
                        env_vec[ax] = hi
            else:
                if mind <= env_par[2]:
                    cax = 0.0
                    cay = 0.0
                    for i in range(n):
                        cax += pos[i, 0]
                        cay += pos[i, 1]
                    cax /= n
                    cay /= n
                    if env_par[4] != 0.0:
                        env_vec[0] = cax
                        env_vec[1] = cay
                    else:
                        env_vec[0] += cax - cbx
                        env_vec[1] += cay - cby
                gx = env_vec[0] - env_par[0]
                gy = env_vec[1] - env_par[1]
                if math.sqrt(gx * gx + gy * gy) <= env_par[6]:
                    steps = k + 1
                    energies[k] = energy_kernel(kind, pos, edges, deltas, leader,
                                                theta, phi[0], phi[1], ring_coeff)
                    e_now = energies[k]
                    code = EXIT_MISSION_DONE
                    break
            theta = min(max(theta - dt * ogd_rate * gt, bounds[0]), bounds[1])
            phi[0] = min(max(phi[0] - dt * ogd_rate * gpx, bounds[2]), bounds[3])
            phi[1] = min(max(phi[1] - dt * ogd_rate * gpy, bounds[4]), bounds[5])
            e_now = energy_kernel(kind, pos, edges, deltas, leader, theta,
                                  phi[0], phi[1], ring_coeff)
            energies[k] = e_now
            steps = k + 1
            if steps >= min_steps and e_now <= eps_energy:
                code = EXIT_ENERGY
                break
        return steps, code, e_now, theta

    return control_kernel, energy_kernel, tuning_grad_kernel, dwell_kernel


KERNELS_PY = _build(None)
KERNELS_JIT = _build(numba.njit) if HAVE_NUMBA else None

if BACKEND == "numba":
    control_kernel, energy_kernel, tuning_grad_kernel, dwell_kernel = KERNELS_JIT
else:
    control_kernel, energy_kernel, tuning_grad_kernel, dwell_kernel = KERNELS_PY


def active_backend() -> str:
    return BACKEND
