"""Preconditioners for the flipped multilevel Toeplitz systems.

Two families.  Structured Toeplitz preconditioners assemble a real
symmetric positive definite T_n(h) and apply its inverse by a dense
Cholesky solve: the symmetric part T(f_R), the two-level Laplacian variant
built from 2 - 2 cos theta on both levels, and the tetra-diagonal band
truncation variant.  Circulant Kronecker sums take the absolute value of
each level's Frobenius-optimal circulant and add them up; the whole sum is
diagonalized by one d-dimensional DFT, so applying the inverse (or any
power) costs a pair of FFTs.

Contents
--------
optimal_circulant         first column of the Frobenius-closest circulant
circulant_abs             |eigenvalues| via length-n DFT
CirculantKronSum          eigen-tensor container with FFT solves
build_circulant_kron_sum
apply_inverse_circulant
ToeplitzPreconditioner    symbol + lazy dense Cholesky factor
build_toepfr              T(f_R) for a given symbol
build_p22                 Laplacian-on-both-levels variant
build_p2beta              band-truncation variant
apply_inverse_toeplitz
preconditioned_spectrum   eigenvalues of P^{-1} S via symmetric surrogate
write_circulant_spectrum_csv
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .errors import (IndefiniteError, NotSPDError, ParameterError, ShapeError,
                     SymmetryError)
from .symbols import (Symbol, as_sizes, fractional_symbol, laplace1d_symbol,
                      p_beta_truncation, real_part_symbol, total_dim)
from .operators import ToeplitzOperator

__all__ = [
    "optimal_circulant",
    "circulant_abs",
    "CirculantKronSum",
    "build_circulant_kron_sum",
    "apply_inverse_circulant",
    "ToeplitzPreconditioner",
    "build_toepfr",
    "build_p22",
    "build_p2beta",
    "apply_inverse_toeplitz",
    "preconditioned_spectrum",
    "write_circulant_spectrum_csv",
]


def optimal_circulant(coefficients: dict, n: int) -> np.ndarray:
    """First column of the circulant closest in Frobenius norm to T_n.

    c_j = ((n - j) t_j + j t_{j-n}) / n for j = 0..n-1, from a one-level
    coefficient table (dict k -> t_k or array-like pairs).
    """
    n = int(n)
    if n < 1:
        raise ParameterError("circulant size must be >= 1")
    table = {}
    for k, t in coefficients.items():
        k = int(k[0]) if isinstance(k, tuple) else int(k)
        if abs(k) <= n - 1:
            table[k] = complex(t)
    c = np.zeros(n, dtype=complex)
    for j in range(n):
        c[j] = ((n - j) * table.get(j, 0.0) + j * table.get(j - n, 0.0)) / n
    if all(v.imag == 0.0 for v in table.values()):
        return c.real
    return c


def circulant_abs(c) -> np.ndarray:
    """Eigenvalues of (C^T C)^{1/2} for the circulant with first column c.

    These are the moduli of the DFT of c, listed in DFT order (not sorted),
    which keeps them aligned with the Fourier modes for kron-sum assembly.
    """
    return np.abs(np.fft.fft(np.asarray(c)))


class CirculantKronSum:
    """Sum over levels of |C_{n_l}| acting on its own level.

    Diagonalized by the d-dimensional unitary DFT with eigen-tensor
    lambda(k_1,...,k_d) = sum_l |lambda^{(l)}_{k_l}|.  Immutable; the apply
    methods are reentrant.
    """

    def __init__(self, level_eigs, sizes):
        self.sizes = as_sizes(sizes)
        if len(level_eigs) != len(self.sizes):
            raise ShapeError("one eigenvalue vector per level required")
        self.level_eigs = [np.asarray(v, dtype=float) for v in level_eigs]
        for v, nl in zip(self.level_eigs, self.sizes):
            if v.shape != (nl,):
                raise ShapeError(f"level eigenvalue vector has shape {v.shape}, expected ({nl},)")
        tensor = np.zeros(self.sizes)
        for axis, v in enumerate(self.level_eigs):
            shape = [1] * len(self.sizes)
            shape[axis] = len(v)
            tensor = tensor + v.reshape(shape)
        peak = float(tensor.max())
        low = float(tensor.min())
        if low <= 1e-14 * max(peak, 1.0):
            raise IndefiniteError(f"combined eigenvalue {low:.3e} not positive "
                                  f"(max {peak:.3e})")
        self.eigen_tensor = tensor

    @property
    def dim(self) -> int:
        return total_dim(self.sizes)

    def _spectral_apply(self, x, power: float):
        x = np.asarray(x)
        if x.shape != (self.dim,):
            raise ShapeError(f"expected a vector of length {self.dim}, got shape {x.shape}")
        xhat = np.fft.fftn(x.reshape(self.sizes))
        out = np.fft.ifftn(xhat * self.eigen_tensor**power)
        return out.real.ravel() if not np.iscomplexobj(x) else out.ravel()

    def apply(self, x):
        return self._spectral_apply(x, 1.0)

    def apply_inverse(self, r):
        """Solve C z = r through the Fourier diagonalization."""
        return self._spectral_apply(r, -1.0)

    def apply_inverse_sqrt(self, r):
        return self._spectral_apply(r, -0.5)


def build_circulant_kron_sum(level_tables, n) -> CirculantKronSum:
    """Kron-sum preconditioner from per-level one-level coefficient tables.

    Each table generates the level's Toeplitz factor; its Frobenius-optimal
    circulant is replaced by its absolute value and the results are summed
    across levels.  Raises if the combined eigen-tensor is not positive.
    """
    sizes = as_sizes(n)
    if len(level_tables) != len(sizes):
        raise ShapeError(f"{len(sizes)} level tables required, got {len(level_tables)}")
    eigs = [circulant_abs(optimal_circulant(tab, nl))
            for tab, nl in zip(level_tables, sizes)]
    return CirculantKronSum(eigs, sizes)


def apply_inverse_circulant(p: CirculantKronSum, r):
    return p.apply_inverse(r)


# ---------------------------------------------------------------------------
# SPD Toeplitz preconditioners


class ToeplitzPreconditioner:
    """T_n(h) for a real nonnegative symbol h, solved by dense Cholesky.

    The dense matrix and its factor are materialized lazily on first use and
    cached; afterwards apply_inverse is reentrant.  Building checks that the
    coefficient table is real and symmetric (t_{-k} = t_k), which is what
    makes the assembled matrix real symmetric.
    """

    def __init__(self, symbol: Symbol, n):
        self.sizes = as_sizes(n)
        self.symbol = symbol
        peak = max((abs(complex(v)) for v in symbol.coefficients.values()), default=0.0)
        if peak == 0.0:
            raise ParameterError("preconditioner symbol has no coefficients")
        for k, v in symbol.coefficients.items():
            v = complex(v)
            mirror = complex(symbol.coefficients.get(tuple(-x for x in k), 0.0))
            if abs(v.imag) > 1e-12 * peak or abs(v - mirror.conjugate()) > 1e-12 * peak:
                raise SymmetryError(f"symbol coefficient t_{k} breaks real symmetry")
        self.operator = ToeplitzOperator(symbol.coefficients, self.sizes)
        self._dense = None
        self._factor = None

    @property
    def dim(self) -> int:
        return total_dim(self.sizes)

    def dense(self) -> np.ndarray:
        if self._dense is None:
            a = self.operator.dense()
            self._dense = (a + a.T) / 2.0
        return self._dense

    def cholesky(self) -> np.ndarray:
        """Lower factor L with L L^T = T_n(h); raises NotSPDError on failure."""
        if self._factor is None:
            a = self.dense()
            try:
                self._factor = np.linalg.cholesky(a)
            except np.linalg.LinAlgError:
                smallest = float(np.linalg.eigvalsh(a)[0])
                raise NotSPDError(f"preconditioner {self.symbol.name or 'T(h)'} is not positive "
                                  f"definite: smallest pivot {smallest:.6e}") from None
        return self._factor

    def apply(self, x):
        return self.operator.matvec(x)

    def apply_inverse(self, r):
        r = np.asarray(r)
        if r.shape != (self.dim,):
            raise ShapeError(f"expected a vector of length {self.dim}, got shape {r.shape}")
        return cho_solve((self.cholesky(), True), r)


def build_toepfr(f: Symbol, n) -> ToeplitzPreconditioner:
    """T(f_R), the Toeplitz matrix of the real part of f."""
    return ToeplitzPreconditioner(real_part_symbol(f), n)


def _two_level_laplacian_like(level2: Symbol, ratio: float, shift: float,
                              name: str) -> Symbol:
    # 2 - 2 cos theta_1 on level 1, `ratio` * level2 on level 2, plus shift
    lap = laplace1d_symbol()
    coeffs = {(k[0], 0): v for k, v in lap.coefficients.items()}
    for k, v in level2.coefficients.items():
        key = (0, k[0])
        coeffs[key] = coeffs.get(key, 0.0) + ratio * complex(v).real
    coeffs[(0, 0)] = coeffs.get((0, 0), 0.0) + shift

    def evaluator(t1, t2):
        v2 = Symbol(1, None, level2.coefficients).eval(np.stack([np.ravel(t2)], axis=1))
        v2 = v2.reshape(np.shape(t2)) if np.ndim(t2) else v2[0]
        return 2.0 - 2.0 * np.cos(t1) + ratio * np.real(v2) + shift

    return Symbol(2, evaluator, coeffs, name=name)


def _fractional_mesh(alpha, beta, n1, n2, M, include_shift):
    for nm, v in (("alpha", alpha), ("beta", beta)):
        if not (1.0 < float(v) < 2.0):
            raise ParameterError(f"{nm} must lie in (1, 2), got {v}")
    if min(int(n1), int(n2), int(M)) < 1:
        raise ParameterError("n1, n2, M must be positive")
    hx, hy = 1.0 / (n1 + 1), 1.0 / (n2 + 1)
    shift = 2.0 * hx**alpha * M if include_shift else 0.0
    return hx**alpha / hy**beta, shift


def build_p22(alpha, beta, n1, n2, M, include_shift: bool = True) -> ToeplitzPreconditioner:
    """Both fractional levels replaced by the discrete Laplacian symbol.

    h(t1, t2) = 2 - 2 cos t1 + (h_x^alpha / h_y^beta)(2 - 2 cos t2) plus the
    2 h_x^alpha / dt identity shift, so preconditioner and system matrix
    describe the same time-stepped problem.  The shift toggle must match the
    one used for the system symbol.
    """
    ratio, shift = _fractional_mesh(alpha, beta, n1, n2, M, include_shift)
    sym = _two_level_laplacian_like(laplace1d_symbol(), ratio, shift,
                                    name=f"p22(alpha={alpha:g},beta={beta:g})")
    return ToeplitzPreconditioner(sym, (n1, n2))


def build_p2beta(alpha, beta, n1, n2, M, include_shift: bool = True) -> ToeplitzPreconditioner:
    """Level 2 carries the real part of the tetra-diagonal truncation.

    The four retained coefficients k = -1..2 symmetrize to the band -2..2;
    unlike the full symbol the truncation does not vanish at t2 = 0, which
    keeps the factor well conditioned as the shift goes to zero.
    """
    ratio, shift = _fractional_mesh(alpha, beta, n1, n2, M, include_shift)
    level2 = real_part_symbol(p_beta_truncation(beta, n2))
    sym = _two_level_laplacian_like(level2, ratio, shift,
                                    name=f"p2beta(alpha={alpha:g},beta={beta:g})")
    return ToeplitzPreconditioner(sym, (n1, n2))


def apply_inverse_toeplitz(p: ToeplitzPreconditioner, r):
    return p.apply_inverse(r)


# ---------------------------------------------------------------------------
# preconditioned spectra


def preconditioned_spectrum(p, s) -> np.ndarray:
    """Eigenvalues of P^{-1} S for symmetric S and SPD P, ascending.

    Works on the symmetric similarity surrogate L^{-1} S L^{-T} (Cholesky
    factor for Toeplitz preconditioners, Fourier square root for circulant
    kron-sums), so only a symmetric eigensolver is involved.
    """
    s = np.asarray(s, dtype=float)
    if isinstance(p, ToeplitzPreconditioner):
        ell = p.cholesky()
        z = solve_triangular(ell, s, lower=True)
        w = solve_triangular(ell, z.T, lower=True).T
    elif isinstance(p, CirculantKronSum):
        cols = np.stack([p.apply_inverse_sqrt(c) for c in s.T], axis=1)
        w = np.stack([p.apply_inverse_sqrt(c) for c in cols], axis=0)
    else:
        raise ParameterError(f"unsupported preconditioner type {type(p).__name__}")
    w = (w + w.T) / 2.0
    return np.linalg.eigvalsh(w)


def write_circulant_spectrum_csv(p: CirculantKronSum, path, header: str = "") -> None:
    """Eigen-tensor dump, rows k_1..k_d, lambda, row-major mode order."""
    d = len(p.sizes)
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(f"# {header}\n")
        cols = ",".join(f"k_{l + 1}" for l in range(d))
        fh.write(f"{cols},lambda\n")
        flat = p.eigen_tensor.ravel()
        for i, modes in enumerate(zip(*np.unravel_index(np.arange(flat.size), p.sizes))):
            ks = ",".join(str(int(k)) for k in modes)
            fh.write(f"{ks},{float(flat[i])!r}\n")
