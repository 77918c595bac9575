"""Complex-coefficient polynomial algebra.

Univariate (:class:`Poly1`), Laurent (:class:`LaurentPoly`) and sparse
multivariate (:class:`MultiPoly`, :class:`BivarPoly`) polynomials, Sylvester
resultants, companion-matrix root finding, the Weierstrass (tangent
half-angle) substitution and determinants of Laurent matrix families.

Elimination and determinant expansion are done by evaluation and
interpolation: the target polynomial is sampled on a grid of scaled roots of
unity, the numeric Sylvester determinants (or matrix determinants) are taken
with LAPACK, and the coefficients are recovered with an FFT.  For the low
degrees met in one-dimensional two-band chains this is both faster and
better conditioned than fraction-free symbolic expansion, and it produces
the same polynomial.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import ConfigError, ConvergenceError, NumericalError

__all__ = [
    "TRIM_RTOL",
    "CLEANUP_RTOL",
    "MAX_WORKING_DEGREE",
    "DegreeOverflowError",
    "Poly1",
    "LaurentPoly",
    "MultiPoly",
    "BivarPoly",
    "BlochMatrixFamily",
    "EliminationResult",
    "sylvester_matrix",
    "resultant",
    "resultant_eliminate",
    "poly_roots",
    "weierstrass_real_conditions",
    "poly_det",
]

#: Relative threshold below which trailing (highest-degree) coefficients of
#: a :class:`Poly1` are dropped.
TRIM_RTOL = 1e-14
#: Relative threshold used to clean up coefficients after eliminations.
CLEANUP_RTOL = 1e-12
#: Largest polynomial degree an elimination may produce.
MAX_WORKING_DEGREE = 64


class DegreeOverflowError(NumericalError):
    """An elimination would exceed :data:`MAX_WORKING_DEGREE`."""


# ---------------------------------------------------------------------------
# univariate polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Poly1:
    """Dense univariate polynomial with complex coefficients.

    Parameters
    ----------
    coeffs : array_like
        Coefficients, lowest degree first.  Trailing coefficients smaller
        than ``TRIM_RTOL * max|coeff|`` are trimmed.
    var : str
        Name of the variable (informational only).
    """

    coeffs: np.ndarray
    var: str = "x"

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coeffs, dtype=complex)).ravel().copy()
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        scale = np.max(np.abs(c))
        if scale > 0:
            keep = np.nonzero(np.abs(c) > TRIM_RTOL * scale)[0]
            c = c[: keep[-1] + 1]
        else:
            c = np.zeros(1, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_roots(cls, roots, lead=1.0, var="x") -> "Poly1":
        """Polynomial ``lead * prod(x - r)``."""
        return cls(lead * npoly.polyfromroots(np.asarray(roots, dtype=complex)), var)

    @property
    def degree(self) -> int:
        """Degree; the zero polynomial has degree ``-1``."""
        return -1 if self.is_zero() else self.coeffs.size - 1

    @property
    def lead(self) -> complex:
        return complex(self.coeffs[-1])

    def is_zero(self) -> bool:
        return self.coeffs.size == 1 and self.coeffs[0] == 0

    def __call__(self, x):
        return npoly.polyval(x, self.coeffs)

    def _coerce(self, other):
        if isinstance(other, Poly1):
            return other.coeffs
        return np.array([complex(other)])

    def __add__(self, other):
        return Poly1(npoly.polyadd(self.coeffs, self._coerce(other)), self.var)

    __radd__ = __add__

    def __sub__(self, other):
        return Poly1(npoly.polysub(self.coeffs, self._coerce(other)), self.var)

    def __rsub__(self, other):
        return Poly1(npoly.polysub(self._coerce(other), self.coeffs), self.var)

    def __neg__(self):
        return Poly1(-self.coeffs, self.var)

    def __mul__(self, other):
        return Poly1(npoly.polymul(self.coeffs, self._coerce(other)), self.var)

    __rmul__ = __mul__

    def deriv(self) -> "Poly1":
        if self.coeffs.size == 1:
            return Poly1([0.0], self.var)
        return Poly1(npoly.polyder(self.coeffs), self.var)

    def __repr__(self):
        return f"Poly1({np.array2string(self.coeffs, precision=6)}, var={self.var!r})"


def _require_nonzero(p: Poly1, name: str):
    if p.is_zero():
        raise ConfigError(f"{name} is the zero polynomial")


def sylvester_matrix(f_coeffs, g_coeffs) -> np.ndarray:
    """Sylvester matrix of two coefficient vectors (lowest degree first).

    The formal degrees are taken from the vector lengths, so leading zeros
    are honoured.  Works on stacked inputs of shape ``(..., n + 1)`` and
    ``(..., m + 1)``, returning ``(..., n + m, n + m)``.
    """
    f = np.asarray(f_coeffs, dtype=complex)
    g = np.asarray(g_coeffs, dtype=complex)
    n = f.shape[-1] - 1
    m = g.shape[-1] - 1
    batch = np.broadcast_shapes(f.shape[:-1], g.shape[:-1])
    size = n + m
    S = np.zeros(batch + (size, size), dtype=complex)
    fr = np.broadcast_to(f[..., ::-1], batch + (n + 1,))
    gr = np.broadcast_to(g[..., ::-1], batch + (m + 1,))
    for i in range(m):
        S[..., i, i : i + n + 1] = fr
    for i in range(n):
        S[..., m + i, i : i + m + 1] = gr
    return S


def _det(S: np.ndarray):
    if S.shape[-1] == 0:
        return np.ones(S.shape[:-2], dtype=complex)
    return np.linalg.det(S)


def resultant(f: Poly1, g: Poly1) -> complex:
    """Resultant of two univariate polynomials.

    Defined as ``a_n**m * b_m**n * prod_{i,j} (xi_i - eta_j)`` and computed
    as the determinant of the Sylvester matrix.

    Raises
    ------
    ConfigError
        If either input is the zero polynomial.

    Examples
    --------
    >>> resultant(Poly1([-2, 1]), Poly1([-5, 1]))  # (x - 2), (x - 5)
    (-3+0j)
    """
    _require_nonzero(f, "f")
    _require_nonzero(g, "g")
    return complex(_det(sylvester_matrix(f.coeffs, g.coeffs)))


def poly_roots(p: Poly1) -> np.ndarray:
    """All roots of ``p`` (with multiplicity) from companion-matrix eigenvalues.

    Raises
    ------
    ConfigError
        If ``p`` has degree < 1.
    ConvergenceError
        If the eigenvalue solver fails or a root violates the residual bound
        ``|p(z)| <= 1e-8 * max|c| * (1 + |z|)**deg``.
    """
    if p.degree < 1:
        raise ConfigError("poly_roots needs a polynomial of degree >= 1")
    c = p.coeffs
    # exact zero roots are split off; the companion matrix of the rest is
    # better conditioned
    nz = int(np.argmax(np.abs(c) > 0))
    core = c[nz:]
    try:
        roots = npoly.polyroots(core) if core.size > 1 else np.zeros(0, complex)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceError(f"companion eigenvalue solver failed: {exc}") from exc
    roots = np.concatenate([np.zeros(nz, dtype=complex), np.asarray(roots, dtype=complex)])
    deg = p.degree
    scale = np.max(np.abs(c))
    resid = np.abs(npoly.polyval(roots, c))
    bound = 1e-8 * scale * (1.0 + np.abs(roots)) ** deg
    if np.any(~np.isfinite(roots)) or np.any(resid > bound):
        raise ConvergenceError("polynomial roots failed the residual check")
    return roots


# ---------------------------------------------------------------------------
# Laurent polynomials and matrix families
# ---------------------------------------------------------------------------


def _clean_terms(terms: Mapping, rtol: float = 0.0) -> dict:
    out = {k: complex(v) for k, v in terms.items() if v != 0}
    if rtol > 0 and out:
        scale = max(abs(v) for v in out.values())
        out = {k: v for k, v in out.items() if abs(v) > rtol * scale}
    return out


@dataclass(frozen=True, eq=False)
class LaurentPoly:
    """Sparse Laurent polynomial ``sum_k c_k beta**k`` (k may be negative)."""

    terms: Mapping[int, complex] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "terms", {int(k): v for k, v in _clean_terms(self.terms).items()})

    @classmethod
    def constant(cls, c) -> "LaurentPoly":
        return cls({0: c})

    @classmethod
    def monomial(cls, k: int, c=1.0) -> "LaurentPoly":
        return cls({k: c})

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def min_exp(self) -> int:
        return min(self.terms) if self.terms else 0

    @property
    def max_exp(self) -> int:
        return max(self.terms) if self.terms else 0

    def valuation(self) -> int:
        """Lowest exponent carrying a nonzero coefficient."""
        return self.min_exp

    def __call__(self, beta):
        beta = np.asarray(beta, dtype=complex)
        if self.min_exp < 0 and np.any(beta == 0):
            raise ConfigError("Laurent polynomial evaluated at beta = 0")
        out = np.zeros(beta.shape, dtype=complex)
        for k, c in self.terms.items():
            out = out + c * beta**k
        return out if out.shape else complex(out)

    def _other(self, other) -> "LaurentPoly":
        return other if isinstance(other, LaurentPoly) else LaurentPoly.constant(other)

    def __add__(self, other):
        o = self._other(other)
        t = dict(self.terms)
        for k, v in o.terms.items():
            t[k] = t.get(k, 0) + v
        return LaurentPoly(t)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._other(other))

    def __rsub__(self, other):
        return self._other(other) - self

    def __mul__(self, other):
        o = self._other(other)
        t: dict = {}
        for (k1, v1), (k2, v2) in itertools.product(self.terms.items(), o.terms.items()):
            t[k1 + k2] = t.get(k1 + k2, 0) + v1 * v2
        return LaurentPoly(t)

    __rmul__ = __mul__

    def cleared(self, var: str = "beta") -> tuple[Poly1, int]:
        """Return ``(P, p)`` with ``self = P(beta) / beta**p`` and ``P(0) != 0``."""
        if not self.terms:
            return Poly1([0.0], var), 0
        p = -self.min_exp
        c = np.zeros(self.max_exp - self.min_exp + 1, dtype=complex)
        for k, v in self.terms.items():
            c[k - self.min_exp] = v
        return Poly1(c, var), p

    def __repr__(self):
        inner = ", ".join(f"{k}: {v:.6g}" for k, v in sorted(self.terms.items()))
        return f"LaurentPoly({{{inner}}})"


class BlochMatrixFamily:
    """Square matrix-valued Laurent polynomial ``M(beta) = sum_k C_k beta**k``.

    Parameters
    ----------
    coefficients : mapping int -> array_like
        Coefficient matrices keyed by the power of ``beta``.
    name : str, optional
        Label used in reports.
    """

    def __init__(self, coefficients: Mapping[int, np.ndarray], name: str = ""):
        mats = {int(k): np.array(v, dtype=complex) for k, v in coefficients.items()}
        if not mats:
            raise ConfigError("a matrix family needs at least one coefficient")
        shapes = {m.shape for m in mats.values()}
        if len(shapes) != 1:
            raise ConfigError("coefficient matrices have inconsistent shapes")
        (shape,) = shapes
        if len(shape) != 2 or shape[0] != shape[1]:
            raise ConfigError("coefficient matrices must be square")
        self.size = shape[0]
        self.coefficients = {k: v for k, v in mats.items() if np.any(v != 0)} or {0: next(iter(mats.values()))}
        self.name = name

    @classmethod
    def from_entries(cls, size: int, entries: Mapping[tuple[int, int], LaurentPoly], name=""):
        coeffs: dict[int, np.ndarray] = {}
        for (r, c), lp in entries.items():
            for k, v in lp.terms.items():
                coeffs.setdefault(k, np.zeros((size, size), dtype=complex))[r, c] += v
        if not coeffs:
            coeffs = {0: np.zeros((size, size), dtype=complex)}
        return cls(coeffs, name)

    @property
    def entries(self) -> dict[tuple[int, int], LaurentPoly]:
        """Nonzero entries as Laurent polynomials."""
        out = {}
        for r in range(self.size):
            for c in range(self.size):
                lp = LaurentPoly({k: m[r, c] for k, m in self.coefficients.items()})
                if not lp.is_zero():
                    out[(r, c)] = lp
        return out

    @property
    def min_exp(self) -> int:
        return min(self.coefficients)

    @property
    def max_exp(self) -> int:
        return max(self.coefficients)

    def __call__(self, beta) -> np.ndarray:
        """Evaluate at a scalar or an array of ``beta`` (stacked on axis 0)."""
        b = np.asarray(beta, dtype=complex)
        if self.min_exp < 0 and np.any(b == 0):
            raise ConfigError("matrix family evaluated at beta = 0")
        out = np.zeros(b.shape + (self.size, self.size), dtype=complex)
        for k, m in self.coefficients.items():
            out = out + (b**k)[..., None, None] * m
        return out

    def transform(self, left: np.ndarray, right: np.ndarray, name=None) -> "BlochMatrixFamily":
        """Family ``left @ M(beta) @ right``."""
        return BlochMatrixFamily(
            {k: left @ m @ right for k, m in self.coefficients.items()},
            self.name if name is None else name,
        )

    def block(self, rows, cols, name=None) -> "BlochMatrixFamily":
        rows = np.asarray(rows)
        cols = np.asarray(cols)
        if rows.size != cols.size:
            raise ConfigError("block selection must be square")
        return BlochMatrixFamily(
            {k: m[np.ix_(rows, cols)] for k, m in self.coefficients.items()},
            self.name if name is None else name,
        )

    def __add__(self, other: "BlochMatrixFamily"):
        coeffs = {k: m.copy() for k, m in self.coefficients.items()}
        for k, m in other.coefficients.items():
            coeffs[k] = coeffs.get(k, 0) + m
        return BlochMatrixFamily(coeffs, self.name)

    def __repr__(self):
        return f"BlochMatrixFamily(size={self.size}, exps={sorted(self.coefficients)}, name={self.name!r})"


# ---------------------------------------------------------------------------
# multivariate polynomials
# ---------------------------------------------------------------------------


class MultiPoly:
    """Sparse polynomial in named variables with complex coefficients.

    Parameters
    ----------
    variables : sequence of str
        Variable names; exponent tuples follow this order.
    terms : mapping tuple -> complex
        Nonnegative integer exponent tuples mapped to coefficients.
    """

    def __init__(self, variables: Sequence[str], terms: Mapping[tuple, complex]):
        self.variables = tuple(variables)
        nv = len(self.variables)
        clean = {}
        for k, v in terms.items():
            k = tuple(int(e) for e in k)
            if len(k) != nv or min(k, default=0) < 0:
                raise ConfigError(f"bad exponent tuple {k} for variables {self.variables}")
            if v != 0:
                clean[k] = clean.get(k, 0) + complex(v)
        self.terms = {k: v for k, v in clean.items() if v != 0}

    # -- constructors -----------------------------------------------------
    @classmethod
    def variable(cls, variables, name, coeff=1.0):
        variables = tuple(variables)
        exp = tuple(1 if v == name else 0 for v in variables)
        return cls(variables, {exp: coeff})

    @classmethod
    def constant(cls, variables, c):
        variables = tuple(variables)
        return cls(variables, {(0,) * len(variables): c})

    def _like(self, terms):
        return MultiPoly(self.variables, terms)

    # -- structure --------------------------------------------------------
    def index(self, var: str) -> int:
        try:
            return self.variables.index(var)
        except ValueError:
            raise ConfigError(f"unknown variable {var!r}; have {self.variables}") from None

    def degree(self, var: str) -> int:
        i = self.index(var)
        return max((k[i] for k in self.terms), default=0)

    def min_degree(self, var: str) -> int:
        i = self.index(var)
        return min((k[i] for k in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def scale(self) -> float:
        return max((abs(v) for v in self.terms.values()), default=0.0)

    def cleanup(self, rtol: float = CLEANUP_RTOL) -> "MultiPoly":
        return self._like(_clean_terms(self.terms, rtol))

    def coefficients_in(self, var: str) -> list["MultiPoly"]:
        """Coefficients with respect to ``var``, as polynomials in the others."""
        i = self.index(var)
        rest = self.variables[:i] + self.variables[i + 1 :]
        out = [dict() for _ in range(self.degree(var) + 1)]
        for k, v in self.terms.items():
            out[k[i]][k[:i] + k[i + 1 :]] = v
        return [MultiPoly(rest, t) for t in out]

    def shift_down(self, var: str, power: int) -> "MultiPoly":
        """Divide by ``var**power`` (requires the monomial content to allow it)."""
        i = self.index(var)
        if power > self.min_degree(var):
            raise ConfigError(f"{var}**{power} does not divide the polynomial")
        return self._like({k[:i] + (k[i] - power,) + k[i + 1 :]: v for k, v in self.terms.items()})

    # -- evaluation -------------------------------------------------------
    def __call__(self, *values):
        if len(values) != len(self.variables):
            raise ConfigError(f"expected {len(self.variables)} values, got {len(values)}")
        vals = np.broadcast_arrays(*[np.asarray(v, dtype=complex) for v in values])
        out = np.zeros(vals[0].shape if vals else (), dtype=complex)
        if not self.terms:
            return out if out.shape else 0j
        # cache powers of each variable
        pw = []
        for j, v in enumerate(vals):
            dmax = max(k[j] for k in self.terms)
            p = [np.ones_like(v)]
            for _ in range(dmax):
                p.append(p[-1] * v)
            pw.append(p)
        for k, c in self.terms.items():
            term = c
            for j, e in enumerate(k):
                if e:
                    term = term * pw[j][e]
            out = out + term
        return out if out.shape else complex(out)

    # -- arithmetic -------------------------------------------------------
    def _other(self, other):
        if isinstance(other, MultiPoly):
            if other.variables != self.variables:
                raise ConfigError(f"variable mismatch {self.variables} vs {other.variables}")
            return other
        return MultiPoly.constant(self.variables, other)

    def __add__(self, other):
        o = self._other(other)
        t = dict(self.terms)
        for k, v in o.terms.items():
            t[k] = t.get(k, 0) + v
        return self._like(t)

    __radd__ = __add__

    def __neg__(self):
        return self._like({k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._other(other))

    def __rsub__(self, other):
        return self._other(other) - self

    def __mul__(self, other):
        o = self._other(other)
        t: dict = {}
        for (k1, v1), (k2, v2) in itertools.product(self.terms.items(), o.terms.items()):
            k = tuple(a + b for a, b in zip(k1, k2))
            t[k] = t.get(k, 0) + v1 * v2
        return self._like(t)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ConfigError("negative powers are not polynomial")
        out = MultiPoly.constant(self.variables, 1.0)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def compose(self, mapping: Mapping[str, "MultiPoly"], new_variables: Sequence[str]) -> "MultiPoly":
        """Substitute each variable by a polynomial in ``new_variables``."""
        new_variables = tuple(new_variables)
        subs = []
        for v in self.variables:
            s = mapping.get(v)
            if s is None:
                s = MultiPoly.variable(new_variables, v)
            elif not isinstance(s, MultiPoly):
                s = MultiPoly.constant(new_variables, s)
            if s.variables != new_variables:
                raise ConfigError("substitutions must share the new variable tuple")
            subs.append(s)
        powers: list[dict[int, MultiPoly]] = [dict() for _ in subs]

        def power(j, e):
            if e not in powers[j]:
                powers[j][e] = subs[j] ** e
            return powers[j][e]

        out = MultiPoly(new_variables, {})
        for k, c in self.terms.items():
            term = MultiPoly.constant(new_variables, c)
            for j, e in enumerate(k):
                if e:
                    term = term * power(j, e)
            out = out + term
        return out

    def real_part(self) -> "MultiPoly":
        """Real part for real values of all variables."""
        return self._like({k: v.real for k, v in self.terms.items()})

    def imag_part(self) -> "MultiPoly":
        """Imaginary part for real values of all variables."""
        return self._like({k: v.imag for k, v in self.terms.items()})

    def to_poly1(self) -> Poly1:
        if len(self.variables) != 1:
            raise ConfigError("only univariate polynomials convert to Poly1")
        d = self.degree(self.variables[0])
        c = np.zeros(d + 1, dtype=complex)
        for (e,), v in self.terms.items():
            c[e] = v
        return Poly1(c, self.variables[0])

    def __repr__(self):
        return f"MultiPoly({self.variables}, {len(self.terms)} terms)"


class BivarPoly(MultiPoly):
    """Polynomial ``P(beta, E)`` representing ``f = P / beta**p``.

    Parameters
    ----------
    terms : mapping (i_beta, i_E) -> complex
    pole_order_p : int
        The power of ``beta`` cleared from the Laurent function ``f``.
    """

    def __init__(self, terms: Mapping[tuple[int, int], complex], pole_order_p: int = 0):
        super().__init__(("beta", "E"), terms)
        if pole_order_p < 0:
            raise ConfigError("pole order must be nonnegative")
        self.pole_order_p = int(pole_order_p)

    @classmethod
    def from_multipoly(cls, mp: MultiPoly, pole_order_p: int = 0) -> "BivarPoly":
        if mp.variables != ("beta", "E"):
            raise ConfigError("BivarPoly needs variables ('beta', 'E')")
        return cls(mp.terms, pole_order_p)

    def _like(self, terms):
        return BivarPoly(terms, self.pole_order_p)

    def evaluate_f(self, beta, E):
        """Un-cleared value ``P(beta, E) / beta**p``."""
        beta = np.asarray(beta, dtype=complex)
        return self(beta, E) / beta**self.pole_order_p

    def in_beta(self, E) -> Poly1:
        """``P(., E)`` as a polynomial in ``beta`` at fixed numeric ``E``."""
        d = self.degree("beta")
        c = np.zeros(d + 1, dtype=complex)
        for (i, j), v in self.terms.items():
            c[i] += v * E**j
        return Poly1(c, "beta")

    def in_E(self, beta) -> Poly1:
        """``P(beta, .)`` as a polynomial in ``E`` at fixed numeric ``beta``."""
        d = self.degree("E")
        c = np.zeros(d + 1, dtype=complex)
        for (i, j), v in self.terms.items():
            c[j] += v * beta**i
        return Poly1(c, "E")

    def deriv_beta(self) -> "BivarPoly":
        """``dP/dbeta`` (same pole bookkeeping)."""
        return BivarPoly({(i - 1, j): i * v for (i, j), v in self.terms.items() if i > 0}, self.pole_order_p)

    def __mul__(self, other):
        res = MultiPoly.__mul__(self, other)
        p = self.pole_order_p + (other.pole_order_p if isinstance(other, BivarPoly) else 0)
        return BivarPoly(res.terms, p)

    __rmul__ = __mul__

    def rotated(self, phase) -> "BivarPoly":
        """``P(beta * phase, E)``."""
        return BivarPoly({(i, j): v * phase**i for (i, j), v in self.terms.items()}, self.pole_order_p)

    def __repr__(self):
        return f"BivarPoly({len(self.terms)} terms, deg_beta={self.degree('beta')}, deg_E={self.degree('E')}, p={self.pole_order_p})"


# ---------------------------------------------------------------------------
# elimination
# ---------------------------------------------------------------------------


@dataclass
class EliminationResult:
    """Outcome of :func:`resultant_eliminate`.

    Attributes
    ----------
    poly : Poly1 or MultiPoly
        The eliminant in the surviving variable(s).
    content_stripped : dict
        Powers of surviving variables divided out of the inputs before
        elimination, ``{"f": {...}, "g": {...}}``.
    degree_bounds : dict
        Degree bound used for each surviving variable.
    """

    poly: object
    content_stripped: dict
    degree_bounds: dict

    def __call__(self, *values):
        return self.poly(*values)


def _strip_monomial_content(p: MultiPoly, survivors) -> tuple[MultiPoly, dict]:
    stripped = {}
    for v in survivors:
        k = p.min_degree(v)
        if k > 0:
            p = p.shift_down(v, k)
            stripped[v] = k
    return p, stripped


def _coefficient_grid(p: MultiPoly, var: str, grid_values):
    """Evaluate the ``var``-coefficients of ``p`` on a tensor grid of survivors."""
    coeffs = p.coefficients_in(var)
    return np.stack([c(*grid_values) for c in coeffs], axis=-1)


def resultant_eliminate(f: MultiPoly, g: MultiPoly, eliminate: str, radius: float = 1.0) -> EliminationResult:
    """Eliminate ``eliminate`` from ``f`` and ``g`` via a Sylvester resultant.

    The resultant is a polynomial in the surviving variables.  It is computed
    by evaluating numeric Sylvester determinants on a tensor grid of
    ``radius``-scaled roots of unity (one axis per surviving variable, sized
    by the standard degree bound) and interpolating with an FFT.

    Parameters
    ----------
    f, g : MultiPoly
        Polynomials over the same variable tuple; both must depend on
        ``eliminate``.
    eliminate : str
        Variable to eliminate.
    radius : float
        Radius of the sampling circles.

    Returns
    -------
    EliminationResult
        ``poly`` is a :class:`Poly1` for one surviving variable, else a
        :class:`MultiPoly`.

    Raises
    ------
    ConfigError
        If an input does not depend on ``eliminate``.
    DegreeOverflowError
        If a degree bound exceeds :data:`MAX_WORKING_DEGREE`.
    """
    if f.variables != g.variables:
        raise ConfigError("f and g must share the variable tuple")
    f.index(eliminate)
    survivors = [v for v in f.variables if v != eliminate]
    if f.degree(eliminate) < 1 or g.degree(eliminate) < 1:
        raise ConfigError(f"both polynomials must depend on {eliminate!r}")
    f, sf = _strip_monomial_content(f, survivors)
    g, sg = _strip_monomial_content(g, survivors)
    n, m = f.degree(eliminate), g.degree(eliminate)
    bounds = {v: n * g.degree(v) + m * f.degree(v) for v in survivors}
    for v, d in bounds.items():
        if d > MAX_WORKING_DEGREE:
            raise DegreeOverflowError(f"eliminant degree bound {d} in {v!r} exceeds {MAX_WORKING_DEGREE}")
    axes = [radius * np.exp(2j * np.pi * np.arange(bounds[v] + 1) / (bounds[v] + 1)) for v in survivors]
    mesh = np.meshgrid(*axes, indexing="ij") if axes else []
    fc = _coefficient_grid(f, eliminate, mesh)
    gc = _coefficient_grid(g, eliminate, mesh)
    vals = _det(sylvester_matrix(fc, gc))
    if not survivors:
        poly = Poly1([complex(vals)], "const")
        return EliminationResult(poly, {"f": sf, "g": sg}, bounds)
    coeffs = np.fft.fftn(vals) / vals.size
    for ax, v in enumerate(survivors):
        shape = [1] * len(survivors)
        shape[ax] = bounds[v] + 1
        coeffs = coeffs / (radius ** np.arange(bounds[v] + 1)).reshape(shape)
    scale = np.max(np.abs(coeffs))
    terms = {
        idx: coeffs[idx] for idx in zip(*np.nonzero(np.abs(coeffs) > CLEANUP_RTOL * scale))
    } if scale > 0 else {}
    mp = MultiPoly(survivors, terms)
    poly = mp.to_poly1() if len(survivors) == 1 else mp
    return EliminationResult(poly, {"f": sf, "g": sg}, bounds)


def weierstrass_real_conditions(G: MultiPoly, beta_var: str = "beta", phase_var: str = "u"):
    """Real conditions equivalent to ``G(beta, e^{i theta}) = 0``.

    ``G`` is a polynomial in ``beta`` and ``u = e^{i theta}``.  With
    ``beta = x + i y`` and the tangent half-angle form
    ``u = (1 + i t) / (1 - i t)`` (equivalently ``cos = (1 - t^2)/(1 + t^2)``,
    ``sin = 2t/(1 + t^2)``), the denominator ``(1 - i t)**deg_u`` is cleared
    and the result split into real and imaginary parts.

    Returns
    -------
    (MultiPoly, MultiPoly)
        ``Re`` and ``Im`` parts as real-coefficient polynomials in
        ``(x, y, t)``; for real ``x, y, t`` they are the real and imaginary
        parts of ``(1 - i t)**deg_u * G``.
    """
    new = ("x", "y", "t")
    x = MultiPoly.variable(new, "x")
    y = MultiPoly.variable(new, "y")
    t = MultiPoly.variable(new, "t")
    D = G.degree(phase_var)
    num = 1 + 1j * t
    den = 1 - 1j * t
    beta_sub = x + 1j * y
    by_u = G.coefficients_in(phase_var)
    out = MultiPoly(new, {})
    for b, coeff in enumerate(by_u):
        if coeff.is_zero():
            continue
        cb = coeff.compose({beta_var: beta_sub}, new)
        out = out + cb * (num**b) * (den ** (D - b))
    return out.real_part(), out.imag_part()


# ---------------------------------------------------------------------------
# determinants of Laurent matrix families
# ---------------------------------------------------------------------------


def poly_det(M, shift: str = "E", radius: float = 1.0) -> BivarPoly:
    """Characteristic polynomial ``det(M(beta) - E)`` with the pole cleared.

    Parameters
    ----------
    M : BlochMatrixFamily or square nested sequence of LaurentPoly
    shift : str
        Name of the spectral variable (kept for interface symmetry; the
        returned polynomial always uses ``("beta", "E")``).

    Returns
    -------
    BivarPoly
        ``P`` and ``p`` with ``det(M(beta) - E) = P(beta, E) / beta**p`` and
        ``P(0, E)`` not identically zero.
    """
    if not isinstance(M, BlochMatrixFamily):
        rows = list(M)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ConfigError("poly_det needs a square matrix")
        entries = {}
        for i, r in enumerate(rows):
            for j, e in enumerate(r):
                lp = e if isinstance(e, LaurentPoly) else LaurentPoly.constant(e)
                if not lp.is_zero():
                    entries[(i, j)] = lp
        M = BlochMatrixFamily.from_entries(n, entries)
    n = M.size
    # per-row pole order and degree bounds
    row_min = np.zeros(n, dtype=int)
    row_max = np.zeros(n, dtype=int)
    for k, m in M.coefficients.items():
        nz = np.any(m != 0, axis=1)
        row_min[nz] = np.minimum(row_min[nz], k)
        row_max[nz] = np.maximum(row_max[nz], k)
    p0 = int(-row_min.sum())
    dbeta = int(p0 + row_max.sum())
    nb, ne = dbeta + 1, n + 1
    bs = radius * np.exp(2j * np.pi * np.arange(nb) / nb)
    es = np.exp(2j * np.pi * np.arange(ne) / ne)
    Mb = M(bs)  # (nb, n, n)
    vals = np.linalg.det(Mb[:, None, :, :] - es[None, :, None, None] * np.eye(n)) * bs[:, None] ** p0
    coeffs = np.fft.fft2(vals) / vals.size
    coeffs = coeffs / (radius ** np.arange(nb))[:, None]
    scale = np.max(np.abs(coeffs))
    coeffs[np.abs(coeffs) <= CLEANUP_RTOL * scale] = 0
    nzb = np.nonzero(np.any(coeffs != 0, axis=1))[0]
    shift_b = min(int(nzb[0]), p0) if nzb.size else 0
    terms = {(int(i) - shift_b, int(j)): coeffs[i, j] for i, j in zip(*np.nonzero(coeffs))}
    return BivarPoly(terms, p0 - shift_b)
