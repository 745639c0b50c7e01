"""Dense symmetric-matrix utilities.

Everything here operates on small (dim <= 8) double-precision symmetric
matrices: PSD tests with a scale-aware tolerance, the semidefinite order,
the star operation A - A(A+B)^{-1}A, real Fourier matrices and their
Kronecker squares (which diagonalize block-circulant matrices), spectral
decompositions with a reproducible sign convention, and permutation-block
sparsity patterns.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidProblemError, NumericalError

DEFAULT_TOL = 1e-9


def symmetrize(m):
    """Return (M + M^T)/2 as a float array; absorbs input rounding."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidProblemError(f"expected a square matrix, got shape {m.shape}")
    return 0.5 * (m + m.T)


def is_psd(m, tol=DEFAULT_TOL):
    """Scale-aware PSD test: lambda_min >= -tol*(1 + |trace|/dim)."""
    m = symmetrize(m)
    lam_min = float(np.linalg.eigvalsh(m)[0])
    scale = 1.0 + abs(float(np.trace(m))) / m.shape[0]
    return lam_min >= -tol * scale


def psd_leq(a, b, tol=DEFAULT_TOL):
    """True iff a <= b in the semidefinite order (b - a is PSD)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise InvalidProblemError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return is_psd(b - a, tol)


def pd_inverse(a):
    """Symmetric inverse of a PD matrix via Cholesky solves."""
    a = symmetrize(a)
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"matrix is not positive definite: {exc}") from exc
    inv = np.linalg.solve(chol.T, np.linalg.solve(chol, np.eye(a.shape[0])))
    return 0.5 * (inv + inv.T)


def logdet_pd(a):
    """log det of a PD matrix via Cholesky; raises on non-PD input."""
    a = symmetrize(a)
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"matrix is not positive definite: {exc}") from exc
    return 2.0 * float(np.sum(np.log(np.diag(chol))))


def star(a, b):
    """The map A - A(A+B)^{-1}A (symmetric in A and B)."""
    a = symmetrize(a)
    b = symmetrize(b)
    if a.shape != b.shape:
        raise InvalidProblemError(f"dimension mismatch: {a.shape} vs {b.shape}")
    try:
        out = a - a @ np.linalg.solve(a + b, a)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"A+B is singular: {exc}") from exc
    return 0.5 * (out + out.T)


def kron(a, b):
    """Kronecker product."""
    return np.kron(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def real_fourier(m):
    """Orthogonal real DFT basis of size m.

    Column 0 is the constant vector 1/sqrt(m); then cos/sin pairs for each
    harmonic; for even m the last column is the alternating Nyquist vector.
    F_m F_m^T = I, and F_m diagonalizes every m x m circulant, so
    kron(F_m, F_2) diagonalizes block-circulant matrices of 2x2 blocks.
    """
    if m < 1:
        raise InvalidProblemError(f"real_fourier needs m >= 1, got {m}")
    j = np.arange(m)
    f = np.zeros((m, m))
    f[:, 0] = 1.0 / np.sqrt(m)
    col = 1
    for h in range(1, (m - 1) // 2 + 1):
        f[:, col] = np.sqrt(2.0 / m) * np.cos(2.0 * np.pi * h * j / m)
        f[:, col + 1] = np.sqrt(2.0 / m) * np.sin(2.0 * np.pi * h * j / m)
        col += 2
    if m % 2 == 0:
        f[:, m - 1] = ((-1.0) ** j) / np.sqrt(m)
    return f


@dataclass(frozen=True)
class BlockPattern:
    """Permutation-block sparsity pattern: k leading 2x2 blocks after perm.

    perm uses 1-based indices (matching the JSON schema); pair j owns source
    indices (perm[2j], perm[2j+1]) in 0-based perm positions, the rest are
    singletons.
    """

    perm: tuple
    k: int

    def __post_init__(self):
        perm = tuple(int(i) for i in self.perm)
        object.__setattr__(self, "perm", perm)
        n = len(perm)
        if sorted(perm) != list(range(1, n + 1)):
            raise InvalidProblemError(f"perm must be a permutation of 1..{n}: {perm}")
        if not (0 <= self.k <= n // 2):
            raise InvalidProblemError(f"pair count k={self.k} out of range for L={n}")

    @property
    def dim(self):
        return len(self.perm)

    def pairs(self):
        """0-based index pairs of the k coupled blocks."""
        return [(self.perm[2 * j] - 1, self.perm[2 * j + 1] - 1) for j in range(self.k)]

    def singletons(self):
        """0-based indices outside every pair."""
        return [self.perm[i] - 1 for i in range(2 * self.k, self.dim)]


def conforms_to_pattern(m, p, tol=DEFAULT_TOL):
    """True iff every off-pattern entry of m vanishes within tol.

    Off-diagonal entry (i, j) may be nonzero only when {i, j} is one of the
    pattern's pairs; diagonal entries are always free.
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (p.dim, p.dim):
        raise InvalidProblemError(f"matrix shape {m.shape} does not match pattern dim {p.dim}")
    allowed = {frozenset(pair) for pair in p.pairs()}
    scale = 1.0 + float(np.max(np.abs(m)))
    for i in range(p.dim):
        for j in range(i + 1, p.dim):
            if frozenset((i, j)) in allowed:
                continue
            if abs(m[i, j]) > tol * scale or abs(m[j, i]) > tol * scale:
                return False
    return True


def block_submatrix(m, p, j):
    """The 2x2 submatrix of pair j (1-based) under pattern p."""
    if not (1 <= j <= p.k):
        raise InvalidProblemError(f"pair index {j} out of range 1..{p.k}")
    m = np.asarray(m, dtype=float)
    a, b = p.pairs()[j - 1]
    return m[np.ix_([a, b], [a, b])].copy()


def is_block_circulant(m, tol=DEFAULT_TOL):
    """True iff m is circulant in symmetric 2x2 blocks.

    Layout: block (i, j) equals C_{(j-i) mod nb} where C_t are the first
    block row's 2x2 blocks, each of the form [[a, b], [b, a]], and
    C_t == C_{(nb-t) mod nb} (overall symmetry).
    """
    m = np.asarray(m, dtype=float)
    dim = m.shape[0]
    if dim % 2 != 0:
        raise InvalidProblemError(f"block-circulant test needs even dim, got {dim}")
    nb = dim // 2
    scale = 1.0 + float(np.max(np.abs(m)))
    blocks = [m[0:2, 2 * t : 2 * t + 2] for t in range(nb)]
    for t, blk in enumerate(blocks):
        if abs(blk[0, 0] - blk[1, 1]) > tol * scale or abs(blk[0, 1] - blk[1, 0]) > tol * scale:
            return False
        if np.max(np.abs(blk - blocks[(nb - t) % nb])) > tol * scale:
            return False
    for i in range(nb):
        for j in range(nb):
            expect = blocks[(j - i) % nb]
            if np.max(np.abs(m[2 * i : 2 * i + 2, 2 * j : 2 * j + 2] - expect)) > tol * scale:
                return False
    return True


def block_circulant_eigvals(m):
    """Eigenvalues of a block-circulant matrix via its Fourier conjugation.

    Conjugates by G = kron(F_nb, F_2) and reads the diagonal; raises if the
    conjugated matrix is not numerically diagonal.
    """
    m = np.asarray(m, dtype=float)
    dim = m.shape[0]
    if dim % 2 != 0:
        raise InvalidProblemError(f"even dimension required, got {dim}")
    g = kron(real_fourier(dim // 2), real_fourier(2))
    conj = g.T @ m @ g
    off = conj - np.diag(np.diag(conj))
    if np.max(np.abs(off)) > 1e-8 * (1.0 + float(np.max(np.abs(m)))):
        raise InvalidProblemError("matrix is not block-circulant (conjugation not diagonal)")
    return np.diag(conj).copy()


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigendecomposition with eigenvalues sorted descending and each
    eigenvector's first nonzero component made positive."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)


def spectral(m):
    """Spectral decomposition of a symmetric matrix, sign-normalized."""
    m = symmetrize(m)
    lam, vec = np.linalg.eigh(m)
    order = np.argsort(lam)[::-1]
    lam = lam[order]
    vec = vec[:, order]
    for c in range(vec.shape[1]):
        col = vec[:, c]
        nz = np.nonzero(np.abs(col) > 1e-12)[0]
        if nz.size and col[nz[0]] < 0:
            vec[:, c] = -col
    return SpectralDecomposition(eigenvalues=lam, eigenvectors=vec)
