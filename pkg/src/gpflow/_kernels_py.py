"""Pure numpy implementation of the stencil kernels.

Same call signatures as the compiled ``_kernels_c`` module. Arrays are
``(2, n, n)`` complex128 indexed ``[component, iy, ix]``; ``w`` holds the real
multiplication fields ``V_i + rho_i``. Sums are unweighted (no h^2).
"""

import numpy as np

BACKEND = "python"


def laplacian(u, h, out):
    """5-point Laplacian of a single ``(n, n)`` component with zero ghosts."""
    out[...] = -4.0 * u
    out[:, 1:] += u[:, :-1]
    out[:, :-1] += u[:, 1:]
    out[1:, :] += u[:-1, :]
    out[:-1, :] += u[1:, :]
    out *= 1.0 / (h * h)


def lz(u, coords, h, out):
    """Central-difference ``-i (x d/dy - y d/dx)`` of one ``(n, n)`` component."""
    dy = np.zeros_like(u)
    dy[1:, :] += u[:-1, :]
    dy[:-1, :] -= u[1:, :]
    dx = np.zeros_like(u)
    dx[:, 1:] += u[:, :-1]
    dx[:, :-1] -= u[:, 1:]
    # dy, dx currently hold u[-1] - u[+1]
    x = coords[None, :]
    y = coords[:, None]
    out[...] = (-1j / (2.0 * h)) * (y * dx - x * dy)


def apply_shifted(u, w, coords, h, omega1, omega2, beta, shift, scale, out):
    """out = shift * u + scale * H u."""
    lap = np.empty_like(u[0])
    rot = np.empty_like(u[0])
    for c, om in ((0, omega1), (1, omega2)):
        laplacian(u[c], h, lap)
        hu = -0.5 * lap + w[c] * u[c] + beta * u[1 - c]
        if om != 0.0:
            lz(u[c], coords, h, rot)
            hu -= om * rot
        if shift != 0.0:
            out[c] = shift * u[c] + scale * hu
        else:
            out[c] = scale * hu


def apply_shifted_dot(u, w, coords, h, omega1, omega2, beta, shift, scale, out):
    """Same as :func:`apply_shifted`, also returns ``Re sum conj(u) * out``."""
    apply_shifted(u, w, coords, h, omega1, omega2, beta, shift, scale, out)
    return float(np.sum(u.real * out.real) + np.sum(u.imag * out.imag))


def cg_update(x, r, p, ap, alpha):
    """x += alpha p; r -= alpha Ap; return sum |r|^2."""
    x += alpha * p
    r -= alpha * ap
    return float(np.sum(r.real * r.real) + np.sum(r.imag * r.imag))


def cg_direction(p, r, beta):
    """p = r + beta p (in place)."""
    p *= beta
    p += r
