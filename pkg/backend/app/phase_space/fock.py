"""Truncated Fock-basis building blocks shared by the state families."""
from typing import List

import numpy as np
from scipy import special


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def number_operator(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def coherent_vector(alpha: complex, dim: int) -> np.ndarray:
    """Fock amplitudes e^{-|a|^2/2} a^n / sqrt(n!), built by the stable ratio recursion."""
    vec = np.empty(dim, dtype=complex)
    vec[0] = np.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, dim):
        vec[n] = vec[n - 1] * alpha / np.sqrt(n)
    return vec


def squeezed_vacuum_vector(r: float, phase: float, dim: int) -> np.ndarray:
    """S(r e^{i phase})|0> with S(xi) = exp((conj(xi) a^2 - xi a^dag^2) / 2)."""
    vec = np.zeros(dim, dtype=complex)
    ratio = -np.exp(1j * phase) * np.tanh(r)
    amp = 1.0 / np.sqrt(np.cosh(r))
    for k in range(0, (dim + 1) // 2):
        n = 2 * k
        if n >= dim:
            break
        vec[n] = amp
        # sqrt((2k+2)!) / (2^{k+1} (k+1)!) over sqrt((2k)!) / (2^k k!)
        amp = amp * ratio * np.sqrt((n + 1) * (n + 2)) / (2 * (k + 1))
    return vec


def hermite_functions(n_max: int, x: np.ndarray) -> np.ndarray:
    """
    <x|n> for n = 0..n_max in the X = (a + a^dag)/2 convention, shape (n_max+1, *x.shape).

    Uses the normalized three-term recursion so high orders never overflow.
    """
    x = np.asarray(x, dtype=float)
    xi = np.sqrt(2.0) * x
    out = np.empty((n_max + 1,) + x.shape)
    out[0] = (2.0 / np.pi) ** 0.25 * np.exp(-x ** 2)
    if n_max >= 1:
        out[1] = np.sqrt(2.0) * xi * out[0]
    for k in range(1, n_max):
        out[k + 1] = np.sqrt(2.0 / (k + 1)) * xi * out[k] - np.sqrt(k / (k + 1)) * out[k - 1]
    return out


def laguerre_sequence(order: int, k_max: int, x: np.ndarray) -> List[np.ndarray]:
    """L_k^{(order)}(x) for k = 0..k_max via the upward recursion."""
    seq = [np.ones_like(x)]
    if k_max >= 1:
        seq.append(1.0 + order - x)
    for k in range(1, k_max):
        seq.append(((2 * k + 1 + order - x) * seq[k] - (k + order) * seq[k - 1]) / (k + 1))
    return seq


def diagonal_laguerre_sums(rho: np.ndarray, x: np.ndarray, alternate: bool) -> List[np.ndarray]:
    """
    S_d(x) = sum_k rho[k+d, k] sqrt(k!/(k+d)!) (+-1)^k L_k^{(d)}(x) for every offset d.

    Displacement matrix elements and Wigner basis functions of |m><n| are both
    this sum times a monomial in the phase-space variable.
    """
    dim = rho.shape[0]
    x = np.asarray(x, dtype=float)
    sums = []
    for d in range(dim):
        k = np.arange(dim - d)
        coeff = rho[k + d, k] * np.exp(0.5 * (special.gammaln(k + 1) - special.gammaln(k + d + 1)))
        if alternate:
            coeff = coeff * np.where(k % 2 == 0, 1.0, -1.0)
        total = np.zeros(x.shape, dtype=complex)
        for kk, lag in enumerate(laguerre_sequence(d, dim - d - 1, x)):
            if coeff[kk] != 0:
                total = total + coeff[kk] * lag
        sums.append(total)
    return sums


def numeric_char0(rho: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Symmetric characteristic function Tr(rho D(gamma))."""
    gamma = np.asarray(gamma, dtype=complex)
    r2 = np.abs(gamma) ** 2
    sums = diagonal_laguerre_sums(rho, r2, alternate=False)
    with np.errstate(divide="ignore"):
        log_abs = np.log(np.abs(gamma))
    phase = np.exp(1j * np.angle(gamma))
    out = sums[0] * np.exp(-0.5 * r2)
    for d in range(1, len(sums)):
        # |gamma|^d e^{-|gamma|^2/2} combined before multiplying to keep the product finite
        mag = np.exp(d * log_abs - 0.5 * r2)
        out = out + mag * (((-1) ** d) * np.conj(phase) ** d * sums[d] + phase ** d * np.conj(sums[d]))
    return out


def numeric_wigner(rho: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Wigner function of a truncated density matrix by the Laguerre expansion."""
    z = np.asarray(z, dtype=complex)
    r2 = np.abs(z) ** 2
    sums = diagonal_laguerre_sums(rho, 4.0 * r2, alternate=True)
    with np.errstate(divide="ignore"):
        log_abs = np.log(2.0 * np.abs(z))
    phase = np.exp(-1j * np.angle(z))
    out = np.real(sums[0]) * np.exp(-2.0 * r2)
    for d in range(1, len(sums)):
        mag = np.exp(d * log_abs - 2.0 * r2)
        out = out + 2.0 * np.real(mag * phase ** d * sums[d])
    return (2.0 / np.pi) * out


def wigner_basis(m: int, n: int, z: np.ndarray) -> np.ndarray:
    """Wigner function of the operator |m><n| (complex for m != n)."""
    z = np.asarray(z, dtype=complex)
    if m < n:
        return np.conj(wigner_basis(n, m, z))
    d = m - n
    r2 = np.abs(z) ** 2
    lag = special.eval_genlaguerre(n, d, 4.0 * r2)
    log_pref = 0.5 * (special.gammaln(n + 1) - special.gammaln(m + 1))
    with np.errstate(divide="ignore"):
        mag = np.exp(log_pref + d * np.log(2.0 * np.abs(z)) - 2.0 * r2) if d else np.exp(log_pref - 2.0 * r2)
    phase = np.exp(-1j * d * np.angle(z))
    return (2.0 / np.pi) * ((-1) ** n) * mag * phase * lag


def fock_moments(rho: np.ndarray):
    """(<X>, <Y>, Var X, Var Y) of a truncated density matrix."""
    dim = rho.shape[0]
    a = annihilation(dim)
    mean_a = np.trace(rho @ a)
    mean_a2 = np.trace(rho @ a @ a)
    mean_n = np.real(np.trace(rho @ number_operator(dim)))
    mx, my = float(np.real(mean_a)), float(np.imag(mean_a))
    var_x = (2 * np.real(mean_a2) + 2 * mean_n + 1) / 4 - mx ** 2
    var_y = (-2 * np.real(mean_a2) + 2 * mean_n + 1) / 4 - my ** 2
    return mx, my, float(var_x), float(var_y)
