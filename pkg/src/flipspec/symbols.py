"""Generating functions for multilevel Toeplitz matrices.

A symbol is a d-variate function f : [-pi, pi]^d -> C given by a closed-form
evaluator, a sparse table of Fourier coefficients t_k (k in Z^d), or both.
The coefficient table is what matrix assembly consumes; the evaluator is what
grid sampling consumes.  Built-ins cover the experiments shipped with the
package: a banded two-level symbol, fractional diffusion symbols built from
shifted Grunwald weights, and a three-level upwind convection-diffusion
stencil.

Contents
--------
as_sizes / total_dim      multi-index helpers (validated size tuples)
Symbol                    evaluator + coefficients + band
fourier_coefficients      coefficient extraction by tensor FFT
constant_symbol, laplace1d_symbol, ex1_symbol
grunwald_symbol           one-level fractional symbol f_gamma
fractional_symbol         two-level fractional diffusion symbol (with shift)
convection_diffusion_symbol
real_part_symbol          (f + conj f)/2, conjugate-symmetric coefficients
p_beta_truncation         four-coefficient band truncation of f_beta
named_symbol              string registry used by the CLI
coefficients_to_csv       export table rows k_1..k_d, re, im
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AliasingError, DomainError, ParameterError

_DOMAIN_SLACK = 1e-12
_PRUNE_REL = 1e-14

# Default one-level quadrature size for symbols with slowly decaying
# coefficients (the fractional family); aliasing ~ m^-(1+gamma).
_QUAD_1D = 4096


def as_sizes(n) -> tuple[int, ...]:
    """Validate and normalize a multi-index of level sizes to a tuple."""
    if np.isscalar(n):
        n = (n,)
    sizes = tuple(int(v) for v in n)
    if len(sizes) < 1:
        raise ParameterError("multi-index needs at least one level")
    if any(v < 1 for v in sizes):
        raise ParameterError(f"level sizes must be >= 1, got {sizes}")
    return sizes


def total_dim(n) -> int:
    """Product of the level sizes, d_n = n_1 * ... * n_d."""
    return math.prod(as_sizes(n))


@dataclass(frozen=True)
class Symbol:
    """A d-variate generating function.

    Parameters
    ----------
    dims : int
        Number of variables d.
    evaluator : callable or None
        Vectorized closed form, called as ``evaluator(theta_1, ..., theta_d)``
        with broadcastable arrays.  When None, evaluation falls back to the
        trigonometric sum of the coefficient table.
    coefficients : dict
        Sparse table mapping k tuples to complex t_k.  May be empty for
        evaluator-only symbols.
    name : str
        Identifier used in output headers.
    """

    dims: int
    evaluator: object = None
    coefficients: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        if self.dims < 1:
            raise ParameterError("symbol needs dims >= 1")
        for k in self.coefficients:
            if len(k) != self.dims:
                raise ParameterError(f"coefficient index {k} does not have {self.dims} levels")

    @property
    def band(self) -> tuple[int, ...]:
        """Per-level half-bandwidth: largest |k_l| with t_k stored."""
        if not self.coefficients:
            return (0,) * self.dims
        return tuple(max(abs(k[l]) for k in self.coefficients) for l in range(self.dims))

    @property
    def has_real_coefficients(self) -> bool:
        return all(abs(complex(v).imag) == 0.0 for v in self.coefficients.values())

    def coefficient(self, k) -> complex:
        return self.coefficients.get(tuple(k), 0.0)

    def eval(self, points):
        """Evaluate at one point (length-d sequence) or a batch (N, d) array.

        Coordinates must lie in [-pi, pi] componentwise.  Returns a complex
        scalar for a single point, a complex (N,) array for a batch.
        """
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        if single:
            pts = pts[None, :]
        if pts.ndim != 2 or pts.shape[1] != self.dims:
            raise DomainError(f"expected points with {self.dims} coordinates, got shape {pts.shape}")
        if np.any(np.abs(pts) > np.pi + _DOMAIN_SLACK):
            bad = pts[np.argmax(np.max(np.abs(pts), axis=1))]
            raise DomainError(f"point {tuple(bad)} outside [-pi, pi]^{self.dims}")
        coords = [pts[:, l] for l in range(self.dims)]
        if self.evaluator is not None:
            vals = np.asarray(self.evaluator(*coords), dtype=complex)
            vals = np.broadcast_to(vals, (pts.shape[0],)).copy()
        else:
            vals = np.zeros(pts.shape[0], dtype=complex)
            for k, t in self.coefficients.items():
                phase = np.zeros(pts.shape[0])
                for kl, c in zip(k, coords):
                    if kl:
                        phase = phase + kl * c
                vals += t * np.exp(1j * phase)
        return vals[0] if single else vals

    def trig_sum(self, points):
        """Evaluate the stored coefficient table as a trigonometric sum.

        Same calling convention as ``eval``; ignores the closed form.  Used
        by consistency checks.
        """
        return Symbol(self.dims, None, self.coefficients, self.name).eval(points)


def _next_pow2(v: int) -> int:
    return 1 << max(0, int(v - 1)).bit_length()


def fourier_coefficients(symbol: Symbol, band, m=None) -> dict:
    """Coefficient table of a symbol by tensor FFT of equispaced samples.

    Computes t_k = (2 pi)^-d integral of f(theta) exp(-i<k, theta>) over
    [-pi, pi]^d, for all |k_l| <= q_l, by sampling f on an m_1 x ... x m_d
    periodic lattice.  Exact to machine precision for trigonometric
    polynomials whose band fits inside the quadrature band.

    Parameters
    ----------
    symbol : Symbol
        Needs an evaluator (or a coefficient table to re-sum).
    band : int or tuple
        Per-level half-bandwidth q of the requested table.
    m : int or tuple, optional
        Samples per level.  Must satisfy m_l >= 2 q_l + 1.  Default: 4096
        for one-level symbols, else the next power of two >= 2 q_l + 2
        (at least 64) per level.

    Returns
    -------
    dict mapping k tuples to complex t_k; entries whose magnitude falls
    below 1e-14 of the largest one are pruned.
    """
    d = symbol.dims
    q = (band,) * d if np.isscalar(band) else tuple(int(v) for v in band)
    if len(q) != d or any(v < 0 for v in q):
        raise ParameterError(f"invalid band {band} for a {d}-level symbol")
    if m is None:
        if d == 1:
            mm = (max(_QUAD_1D, _next_pow2(2 * q[0] + 2)),)
        else:
            mm = tuple(_next_pow2(max(2 * ql + 2, 64)) for ql in q)
    else:
        mm = (m,) * d if np.isscalar(m) else tuple(int(v) for v in m)
    for ql, ml in zip(q, mm):
        if ml < 2 * ql + 1:
            raise AliasingError(f"m={ml} too small for band q={ql} (need m >= 2q+1)")

    axes = [2.0 * np.pi * np.arange(ml) / ml for ml in mm]
    mesh = np.meshgrid(*axes, indexing="ij")
    # wrap to [-pi, pi] so the evaluator's domain check stays happy
    pts = np.stack([np.where(a > np.pi, a - 2.0 * np.pi, a).ravel() for a in mesh], axis=1)
    samples = symbol.eval(pts).reshape(mm)
    that = np.fft.fftn(samples) / math.prod(mm)

    out = {}
    ranges = [range(-ql, ql + 1) for ql in q]
    idx = np.meshgrid(*ranges, indexing="ij")
    flat_ks = np.stack([a.ravel() for a in idx], axis=1)
    for krow in flat_ks:
        k = tuple(int(v) for v in krow)
        out[k] = complex(that[tuple(kl % ml for kl, ml in zip(k, mm))])
    peak = max(abs(v) for v in out.values()) if out else 0.0
    if peak > 0.0:
        out = {k: v for k, v in out.items() if abs(v) >= _PRUNE_REL * peak}
    return out


def _realified(coeffs: dict, scale=None) -> dict:
    # cast coefficient tables that are real by construction; tiny imaginary
    # parts are quadrature round-off
    if not coeffs:
        return {}
    peak = scale or max(abs(v) for v in coeffs.values())
    worst = max(abs(complex(v).imag) for v in coeffs.values())
    if worst > 1e-10 * max(peak, 1.0):
        raise ParameterError(f"expected real coefficients, largest imaginary part {worst:.3e}")
    return {k: float(complex(v).real) for k, v in coeffs.items()}


# ---------------------------------------------------------------------------
# built-in symbols


def constant_symbol(value, dims=1) -> Symbol:
    """f identically equal to ``value``."""
    value = complex(value)
    coeffs = {(0,) * dims: value.real if value.imag == 0 else value}
    return Symbol(dims, lambda *th: np.full_like(th[0], value, dtype=complex),
                  coeffs, name=f"constant({value.real:g})")


def laplace1d_symbol() -> Symbol:
    """f(theta) = 2 - 2 cos(theta), the one-level Laplacian stencil."""
    return Symbol(1, lambda t: 2.0 - 2.0 * np.cos(t) + 0j,
                  {(0,): 2.0, (1,): -1.0, (-1,): -1.0}, name="laplace1d")


def ex1_symbol() -> Symbol:
    """Two-level banded example f(t1, t2) = 4 + e^{i t1} + e^{i t2}."""
    return Symbol(2, lambda t1, t2: 4.0 + np.exp(1j * t1) + np.exp(1j * t2),
                  {(0, 0): 4.0, (1, 0): 1.0, (0, 1): 1.0}, name="ex1")


def grunwald_symbol(gamma: float) -> Symbol:
    """One-level fractional symbol of order gamma in (1, 2).

    f_gamma(theta) = -[(2 - gamma (1 - e^{-i theta}))/2] * (1 + e^{i (theta + pi)})^gamma
    with the principal branch of the power; the removable zero at theta = 0
    is set to 0 directly.  Minus its Fourier coefficients are the shifted
    Grunwald weights, t_k = -w_{k+1}, supported on k >= -1.
    """
    g = float(gamma)
    if not (1.0 < g < 2.0):
        raise ParameterError(f"gamma must lie in (1, 2), got {g}")

    def evaluator(theta):
        theta = np.asarray(theta, dtype=float)
        z = 1.0 + np.exp(1j * (theta + np.pi))
        with np.errstate(divide="ignore", invalid="ignore"):
            power = np.exp(g * np.log(z))
        power = np.where(np.abs(z) == 0.0, 0.0, power)
        bracket = (2.0 - g * (1.0 - np.exp(-1j * theta))) / 2.0
        return -bracket * power

    return Symbol(1, evaluator, {}, name=f"grunwald({g:g})")


def grunwald_coefficients(gamma: float, band: int, m: int = _QUAD_1D) -> dict:
    """Real coefficient table {k: t_k} of f_gamma for -1 <= k <= band.

    The exact symbol has no support below k = -1 (it is e^{-i theta} times a
    power series in e^{i theta}), so quadrature residue there is dropped
    rather than kept as noise.
    """
    table = fourier_coefficients(grunwald_symbol(gamma), band=max(int(band), 1), m=m)
    return {k[0]: v for k, v in _realified(table).items() if k[0] >= -1}


def fractional_symbol(alpha: float, beta: float, n1: int, n2: int, M: int,
                      include_shift: bool = True) -> Symbol:
    """Two-level symbol of the fractional diffusion coefficient matrix.

    f(t1, t2) = f_alpha(t1) + (h_x^alpha / h_y^beta) f_beta(t2) + 2 h_x^alpha / dt
    with h_x = 1/(n1+1), h_y = 1/(n2+1), dt = 1/M.  The identity shift is
    folded into t_(0,0) so the matrix is exactly Toeplitz; pass
    ``include_shift=False`` to drop it from both evaluator and table.
    Coefficients are supported on the cross {(k,0)} union {(0,k)} with
    k >= -1 up to the level size minus one.
    """
    for name, v in (("alpha", alpha), ("beta", beta)):
        if not (1.0 < float(v) < 2.0):
            raise ParameterError(f"{name} must lie in (1, 2), got {v}")
    if min(n1, n2, M) < 1:
        raise ParameterError("n1, n2, M must be positive")
    hx, hy, dt = 1.0 / (n1 + 1), 1.0 / (n2 + 1), 1.0 / M
    ratio = hx**alpha / hy**beta
    shift = 2.0 * hx**alpha / dt if include_shift else 0.0

    fa, fb = grunwald_symbol(alpha), grunwald_symbol(beta)
    ca = grunwald_coefficients(alpha, max(n1 - 1, 1))
    cb = grunwald_coefficients(beta, max(n2 - 1, 1))

    coeffs = {(k, 0): v for k, v in ca.items()}
    for k, v in cb.items():
        key = (0, k)
        coeffs[key] = coeffs.get(key, 0.0) + ratio * v
    coeffs[(0, 0)] = coeffs.get((0, 0), 0.0) + shift

    def evaluator(t1, t2):
        return fa.evaluator(t1) + ratio * fb.evaluator(t2) + shift

    tag = "on" if include_shift else "off"
    return Symbol(2, evaluator, coeffs,
                  name=f"frac(alpha={alpha:g},beta={beta:g},n1={n1},n2={n2},M={M},shift={tag})")


def convection_diffusion_symbol(n1: int, n2: int, n3: int) -> Symbol:
    """Three-level upwind convection-diffusion symbol.

    Separable, f(t1, t2, t3) = f1(t1) + f2(t2) + f3(t3), with the seven
    stencil coefficients depending on the mesh widths h = 1/(n_l + 1):
    the diagonal carries a = 6 + 2 h_x + h_y + 1.5 h_z, each level carries
    one weighted lower neighbor and one unit upper neighbor.
    """
    if min(n1, n2, n3) < 1:
        raise ParameterError("level sizes must be positive")
    hx, hy, hz = 1.0 / (n1 + 1), 1.0 / (n2 + 1), 1.0 / (n3 + 1)
    a = 6.0 + 2.0 * hx + hy + 1.5 * hz
    b, c = -1.0 - 2.0 * hx, -1.0
    d, e = -1.0 - hy, -1.0
    f, g = -1.0 - 1.5 * hz, -1.0
    coeffs = {
        (0, 0, 0): a,
        (1, 0, 0): b, (-1, 0, 0): c,
        (0, 1, 0): d, (0, -1, 0): e,
        (0, 0, 1): f, (0, 0, -1): g,
    }

    def evaluator(t1, t2, t3):
        return (a
                + b * np.exp(1j * t1) + c * np.exp(-1j * t1)
                + d * np.exp(1j * t2) + e * np.exp(-1j * t2)
                + f * np.exp(1j * t3) + g * np.exp(-1j * t3))

    return Symbol(3, evaluator, coeffs, name=f"convdiff(n1={n1},n2={n2},n3={n3})")


def real_part_symbol(f: Symbol) -> Symbol:
    """The real part (f + conj f)/2 as a symbol.

    Coefficients t'_k = (t_k + conj(t_{-k}))/2 are conjugate-symmetric by
    construction (t'_{-k} = conj(t'_k) exactly), so the assembled Toeplitz
    matrix is Hermitian, and real symmetric for real input tables.
    """
    if not f.coefficients:
        raise ParameterError("real_part_symbol needs a coefficient table")
    out = {}
    for k in f.coefficients:
        if k in out:
            continue
        mk = tuple(-v for v in k)
        a = complex(f.coefficients.get(k, 0.0))
        b = complex(f.coefficients.get(mk, 0.0))
        out[k] = (a + b.conjugate()) / 2.0
        out[mk] = (b + a.conjugate()) / 2.0
    peak = max(abs(v) for v in out.values())
    out = {k: (v.real if abs(v.imag) == 0.0 else v) for k, v in out.items()
           if abs(v) >= _PRUNE_REL * peak}

    evaluator = None
    if f.evaluator is not None:
        evaluator = lambda *th: (np.asarray(f.evaluator(*th), dtype=complex)
                                 + np.conj(f.evaluator(*th))) / 2.0
    return Symbol(f.dims, evaluator, out, name=f"Re[{f.name or 'f'}]")


def p_beta_truncation(beta: float, n2: int) -> Symbol:
    """Band truncation of f_beta to the four coefficients k = -1, 0, 1, 2.

    The truncated symbol does not vanish at theta = 0 (the full f_beta
    does), which is what makes its real part usable as a preconditioner
    factor.  ``n2`` is the level size the truncation will be assembled at;
    it does not change the coefficients.
    """
    if int(n2) < 1:
        raise ParameterError("n2 must be positive")
    table = grunwald_coefficients(beta, band=8)
    kept = {(k,): table[k] for k in (-1, 0, 1, 2)}
    return Symbol(1, None, kept, name=f"p_beta({beta:g})")


def named_symbol(ident: str, *, n=None, alpha=1.8, beta=1.6, M=None,
                 value=1.0, include_shift=True) -> Symbol:
    """Look up a built-in symbol by CLI identifier.

    Identifiers: ``ex1``, ``frac``, ``convdiff``, ``constant``, ``laplace1d``.
    ``frac`` needs n=(n1, n2) and optionally M (default n1); ``convdiff``
    needs n=(n1, n2, n3).
    """
    ident = ident.lower()
    if ident == "ex1":
        return ex1_symbol()
    if ident == "laplace1d":
        return laplace1d_symbol()
    if ident == "constant":
        dims = len(as_sizes(n)) if n is not None else 1
        return constant_symbol(value, dims)
    if ident == "frac":
        sizes = as_sizes(n)
        if len(sizes) != 2:
            raise ParameterError("frac symbol needs a two-level size n1,n2")
        return fractional_symbol(alpha, beta, sizes[0], sizes[1],
                                 M if M is not None else sizes[0], include_shift)
    if ident == "convdiff":
        sizes = as_sizes(n)
        if len(sizes) != 3:
            raise ParameterError("convdiff symbol needs a three-level size n1,n2,n3")
        return convection_diffusion_symbol(*sizes)
    raise ParameterError(f"unknown symbol identifier {ident!r}")


def coefficients_to_csv(symbol: Symbol, path, header: str = "") -> None:
    """Write the coefficient table as CSV rows k_1,...,k_d,re,im."""
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(f"# {header}\n")
        cols = ",".join(f"k_{l + 1}" for l in range(symbol.dims))
        fh.write(f"{cols},re,im\n")
        for k in sorted(symbol.coefficients):
            v = complex(symbol.coefficients[k])
            ks = ",".join(str(int(x)) for x in k)
            fh.write(f"{ks},{v.real!r},{v.imag!r}\n")
