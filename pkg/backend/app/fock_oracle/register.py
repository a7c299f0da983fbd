"""
Truncated multimode Fock register and the gates acting on it.

Mode order is (MIR, s_1, z_1, s_2, z_2, ...); the state vector is stored as an
ndarray with one axis per mode so every gate acts on a handful of axes.
"""
import logging
from dataclasses import dataclass, replace
from typing import Callable, Sequence, Tuple

import numpy as np
from scipy import linalg, sparse, special
from scipy.sparse.linalg import expm_multiply

from ..eos_core import waveplate_matrix
from ..errors import OracleEnvelopeExceeded, TruncationBreach

logger = logging.getLogger(__name__)

TAIL_LIMIT = 1e-8
NORM_TOL = 1e-10


def ladder(cutoff: int) -> sparse.csr_matrix:
    """Truncated annihilation operator on |0> .. |cutoff>."""
    return sparse.diags(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1, format="csr", dtype=complex)


@dataclass(frozen=True, eq=False)
class TruncatedRegister:
    labels: Tuple[str, ...]
    cutoffs: Tuple[int, ...]
    psi: np.ndarray
    leaked: float = 0.0

    @classmethod
    def product(cls, mir_vector: np.ndarray, n_channels: int, mir_cutoff: int, nir_cutoff: int) -> "TruncatedRegister":
        """MIR state times vacuum in every NIR mode."""
        labels = ["mir"]
        cutoffs = [mir_cutoff]
        for i in range(1, n_channels + 1):
            labels += [f"s{i}", f"z{i}"]
            cutoffs += [nir_cutoff, nir_cutoff]
        psi = np.zeros([c + 1 for c in cutoffs], dtype=complex)
        vec = np.asarray(mir_vector, dtype=complex)[: mir_cutoff + 1]
        psi[(slice(None),) + (0,) * (2 * n_channels)] = vec
        leaked = max(0.0, 1.0 - float(np.sum(np.abs(vec) ** 2)))
        return cls(tuple(labels), tuple(cutoffs), psi, leaked)

    @property
    def n_channels(self) -> int:
        return (len(self.labels) - 1) // 2

    def axis(self, label: str) -> int:
        return self.labels.index(label)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.psi) ** 2)))

    def populations(self, label: str) -> np.ndarray:
        ax = self.axis(label)
        other = tuple(i for i in range(self.psi.ndim) if i != ax)
        return np.sum(np.abs(self.psi) ** 2, axis=other)

    def tail_mass(self) -> float:
        """Largest population sitting in any mode's top two levels."""
        return max(float(np.sum(self.populations(label)[-2:])) for label in self.labels)

    def checked(self, gate: str) -> "TruncatedRegister":
        tail = self.tail_mass()
        if tail > TAIL_LIMIT or self.leaked > TAIL_LIMIT:
            raise TruncationBreach(
                f"After {gate}: tail mass {tail:.3e}, leaked norm {self.leaked:.3e} (limit {TAIL_LIMIT})"
            )
        return self


def _apply_sub(psi: np.ndarray, axes: Sequence[int], func: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Run func on the (sub, rest) matricization with ``axes`` as rows."""
    k = len(axes)
    moved = np.moveaxis(psi, list(axes), list(range(k)))
    shape = moved.shape
    sub = int(np.prod(shape[:k]))
    out = func(moved.reshape(sub, -1)).reshape(shape)
    return np.moveaxis(out, list(range(k)), list(axes))


def _kron_chain(mats) -> sparse.csr_matrix:
    out = mats[0]
    for m in mats[1:]:
        out = sparse.kron(out, m, format="csr")
    return out


def _embedded(cutoffs: Sequence[int], position: int, op) -> sparse.csr_matrix:
    mats = [sparse.identity(c + 1, dtype=complex, format="csr") for c in cutoffs]
    mats[position] = op
    return _kron_chain(mats)


def _with_norm(reg: TruncatedRegister, psi: np.ndarray, norm_before: float, gate: str) -> TruncatedRegister:
    loss = max(0.0, norm_before ** 2 - float(np.sum(np.abs(psi) ** 2)))
    return replace(reg, psi=psi, leaked=reg.leaked + loss).checked(gate)


def squeeze_generator(cutoffs: Sequence[int], zeta: complex, alpha_tilde: Sequence[complex]) -> sparse.csr_matrix:
    """zeta* a_MIR B - h.c. with B = sum_i alpha~_i a_i, on (MIR, s_1, .., s_k)."""
    a = [_embedded(cutoffs, i, ladder(c)) for i, c in enumerate(cutoffs)]
    B = sum(complex(at) * a[i + 1] for i, at in enumerate(alpha_tilde))
    G = np.conj(zeta) * (a[0] @ B)
    return (G - G.conj().T).tocsr()


def _squeeze_on(reg: TruncatedRegister, axes: Sequence[int], zeta: complex, alpha_tilde) -> np.ndarray:
    cutoffs = [reg.cutoffs[ax] for ax in axes]
    G = squeeze_generator(cutoffs, zeta, alpha_tilde)
    return _apply_sub(reg.psi, axes, lambda m: expm_multiply(G, m))


def collective_basis(alpha_tilde: Sequence[complex]) -> np.ndarray:
    """Unitary T whose first column is conj(alpha~), so the passive gate R_T maps a_1 onto B."""
    at = np.asarray(alpha_tilde, dtype=complex)
    if at.size == 1:
        return np.array([[np.conj(at[0])]])
    if at.size == 2:
        return np.array([[np.conj(at[0]), -at[1]], [np.conj(at[1]), at[0]]])
    raise OracleEnvelopeExceeded("The collective-mode route is implemented for at most two channels")


def apply_multimode_squeeze(reg: TruncatedRegister, zeta: complex, alpha_tilde: Sequence[complex],
                            route: str = "generator") -> TruncatedRegister:
    """
    exp(zeta* a_MIR sum_i alpha~_i a_{i,s} - h.c.).

    ``generator`` exponentiates the truncated multimode generator directly;
    ``collective`` rotates the s modes so B is a single mode, applies a
    two-mode squeeze on (MIR, B) and rotates back.
    """
    norm = reg.norm()
    s_axes = [reg.axis(f"s{i}") for i in range(1, reg.n_channels + 1)]
    if route == "generator":
        psi = _squeeze_on(reg, [reg.axis("mir")] + s_axes, zeta, alpha_tilde)
        return _with_norm(reg, psi, norm, "multimode squeeze")
    if route != "collective":
        raise ValueError(f"Unknown squeeze route {route!r}")
    T = collective_basis(alpha_tilde)
    rotated = apply_passive(reg, [f"s{i}" for i in range(1, reg.n_channels + 1)], T.conj().T)
    squeezed = replace(rotated, psi=_squeeze_on(rotated, [reg.axis("mir"), s_axes[0]], zeta, [1.0]))
    back = apply_passive(squeezed, [f"s{i}" for i in range(1, reg.n_channels + 1)], T)
    return _with_norm(reg, back.psi, norm, "collective squeeze")


def _passive_block(G: np.ndarray, N: int) -> np.ndarray:
    """exp(i H) restricted to the two-mode shell n_0 + n_1 = N, H = sum G_jk a_j^dag a_k."""
    i = np.arange(N + 1)
    H = np.diag(G[0, 0] * i + G[1, 1] * (N - i)).astype(complex)
    up = np.sqrt((i[:-1] + 1) * (N - i[:-1]))
    H[i[:-1] + 1, i[:-1]] = G[0, 1] * up
    H[i[:-1], i[:-1] + 1] = G[1, 0] * up
    return linalg.expm(1j * H)


def _two_mode_action(T: np.ndarray, c0: int, c1: int) -> Callable[[np.ndarray], np.ndarray]:
    G = -1j * linalg.logm(T)
    G = 0.5 * (G + G.conj().T)
    blocks = [_passive_block(G, N) for N in range(c0 + c1 + 1)]

    def act(m: np.ndarray) -> np.ndarray:
        block = m.reshape(c0 + 1, c1 + 1, -1)
        out = np.zeros_like(block)
        for N, U_N in enumerate(blocks):
            n0 = np.arange(max(0, N - c1), min(c0, N) + 1)
            U = U_N[np.ix_(n0, n0)]
            out[n0, N - n0, :] = np.tensordot(U, block[n0, N - n0, :], axes=(1, 0))
        return out.reshape(m.shape)

    return act


def apply_passive(reg: TruncatedRegister, labels: Sequence[str], T: np.ndarray) -> TruncatedRegister:
    """
    Number-conserving gate with U a_k^dag U^dag = sum_j T_jk a_j^dag (so coherent
    amplitudes map as v -> T v), exact on every photon-number shell inside the cutoffs.
    """
    T = np.asarray(T, dtype=complex)
    axes = [reg.axis(label) for label in labels]
    if len(axes) == 1:
        phase = np.angle(T[0, 0])
        c = reg.cutoffs[axes[0]]
        factor = np.exp(1j * phase * np.arange(c + 1))
        shape = [1] * reg.psi.ndim
        shape[axes[0]] = c + 1
        return replace(reg, psi=reg.psi * factor.reshape(shape))
    if len(axes) != 2:
        raise OracleEnvelopeExceeded("Passive gates are implemented on one or two modes")

    act = _two_mode_action(T, reg.cutoffs[axes[0]], reg.cutoffs[axes[1]])
    norm = reg.norm()
    psi = _apply_sub(reg.psi, axes, act)
    return _with_norm(reg, psi, norm, f"passive gate on {tuple(labels)}")


def displacement_matrix(beta: complex, cutoff: int) -> np.ndarray:
    """Exact <m|D(beta)|n> for m, n <= cutoff."""
    x = abs(beta) ** 2
    m = np.arange(cutoff + 1)[:, None]
    n = np.arange(cutoff + 1)[None, :]
    lo, hi = np.minimum(m, n), np.maximum(m, n)
    k = hi - lo
    base = np.where(m >= n, beta, -np.conj(beta))
    with np.errstate(divide="ignore", invalid="ignore"):
        log_ratio = 0.5 * (special.gammaln(lo + 1) - special.gammaln(hi + 1))
        power = np.where(k == 0, 1.0 + 0j, base ** k)
    lag = special.eval_genlaguerre(lo, k, x)
    return np.exp(log_ratio - 0.5 * x) * power * lag


def apply_displacement(reg: TruncatedRegister, label: str, beta: complex) -> TruncatedRegister:
    """D(beta) on one mode."""
    if beta == 0:
        return reg
    ax = reg.axis(label)
    c = reg.cutoffs[ax]
    if c < abs(beta) ** 2 + 8 * abs(beta):
        raise TruncationBreach(f"Cutoff {c} on {label} is too small for a displacement by |beta|={abs(beta):.3g}")
    D = displacement_matrix(beta, c)
    norm = reg.norm()
    psi = np.moveaxis(np.tensordot(D, reg.psi, axes=(1, ax)), 0, ax)
    return _with_norm(reg, psi, norm, f"displacement on {label}")


def waveplate_transfer(phi: float, theta: float) -> np.ndarray:
    """Coherent-amplitude map (s, z) -> T (s, z) of a retarder, T = e^{-i phi/2} conj(W)."""
    return np.exp(-0.5j * phi) * np.conj(waveplate_matrix(phi, theta))


def apply_waveplate(reg: TruncatedRegister, channel: int, phi: float, theta: float) -> TruncatedRegister:
    """The retarder of one channel acting on its (s, z) pair."""
    T = waveplate_transfer(phi, theta)
    return apply_passive(reg, [f"s{channel}", f"z{channel}"], T)


def waveplate_heisenberg_residual(phi: float, theta: float, cutoff: int = 8) -> float:
    """
    max |U^dag a_j U - sum_k T_jk a_k| over two-mode inputs with at most
    ``cutoff`` photons, where T = e^{-i phi/2} conj(W).
    """
    T = waveplate_transfer(phi, theta)
    dim = cutoff + 1
    U = _two_mode_action(T, cutoff, cutoff)(np.eye(dim * dim, dtype=complex))
    a = ladder(cutoff).toarray()
    eye = np.eye(dim)
    modes = [np.kron(a, eye), np.kron(eye, a)]
    totals = np.add.outer(np.arange(dim), np.arange(dim)).ravel()
    cols = totals <= cutoff
    worst = 0.0
    for j in range(2):
        lhs = U.conj().T @ modes[j] @ U
        rhs = T[j, 0] * modes[0] + T[j, 1] * modes[1]
        worst = max(worst, float(np.max(np.abs((lhs - rhs)[:, cols]))))
    return worst
