"""Independent reference implementations used only by the tests.

Nothing here imports the package: channels are built from Kraus operators,
circuits are simulated on density matrices with the Born rule, and the
design matrix is checked against finite differences of exact probabilities.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.linalg import expm

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = [I2, X, Y, Z]


def basis(n: int) -> list[np.ndarray]:
    """Normalized Pauli strings, qubit 1 leftmost, in lexicographic digit order."""
    d = 2**n
    out = []
    for digits in itertools.product(range(4), repeat=n):
        m = np.array([[1.0 + 0j]])
        for a in digits:
            m = np.kron(m, PAULIS[a])
        out.append(m / np.sqrt(d))
    return out


def ptm_from_map(channel, n: int) -> np.ndarray:
    """R_ab = tr(B_a channel(B_b)) for an arbitrary operator map."""
    B = basis(n)
    R = np.empty((len(B), len(B)))
    for b, Bb in enumerate(B):
        img = channel(Bb)
        for a, Ba in enumerate(B):
            R[a, b] = np.trace(Ba @ img).real
    return R


def kraus_map(kraus):
    def apply(rho):
        return sum(K @ rho @ K.conj().T for K in kraus)

    return apply


def chain(*maps):
    """Compose operator maps; the last argument acts first."""

    def apply(rho):
        for m in reversed(maps):
            rho = m(rho)
        return rho

    return apply


def ad_kraus(e0: float):
    return [np.array([[1, 0], [0, np.sqrt(1 - e0)]], dtype=complex), np.array([[0, np.sqrt(e0)], [0, 0]], dtype=complex)]


def pauli_kraus(e1: float, e2: float, e3: float):
    return [np.sqrt(1 - e1 - e2 - e3) * I2, np.sqrt(e1) * X, np.sqrt(e2) * Y, np.sqrt(e3) * Z]


def rot_unitary(axis: str, theta: float) -> np.ndarray:
    sigma = {"x": X, "y": Y, "z": Z}[axis]
    return expm(-0.5j * theta * sigma)


def pauli2_kraus(q):
    """q lists the 15 non-identity weights in lexicographic (qubit 1, qubit 2) order."""
    pairs = [(a, b) for a in range(4) for b in range(4)][1:]
    ops = [np.sqrt(1 - sum(q)) * np.eye(4, dtype=complex)]
    ops += [np.sqrt(w) * np.kron(PAULIS[a], PAULIS[b]) for w, (a, b) in zip(q, pairs)]
    return ops


def noise_1q_map(p):
    """AD(e0) . Pauli(e1,e2,e3) . Rx(e4) . Ry(e5) . Rz(e6) with Rz acting first."""
    return chain(
        kraus_map(ad_kraus(p[0])),
        kraus_map(pauli_kraus(p[1], p[2], p[3])),
        kraus_map([rot_unitary("x", p[4])]),
        kraus_map([rot_unitary("y", p[5])]),
        kraus_map([rot_unitary("z", p[6])]),
    )


def noise_2q_map(p):
    ad = [np.kron(a, b) for a in ad_kraus(p[0]) for b in ad_kraus(p[1])]

    def local(q):
        return rot_unitary("x", q[0]) @ rot_unitary("y", q[1]) @ rot_unitary("z", q[2])

    rot = np.kron(local(p[17:20]), local(p[20:23]))
    return chain(kraus_map(ad), kraus_map(pauli2_kraus(p[2:17])), kraus_map([rot]))


def noise_1q_ptm(p) -> np.ndarray:
    return ptm_from_map(noise_1q_map(p), 1)


def noise_2q_ptm(p) -> np.ndarray:
    return ptm_from_map(noise_2q_map(p), 2)


def random_1q_params(rng, scale=0.3):
    probs = rng.random(4) * scale
    probs[1:4] *= 1.0 / max(1.0, probs[1:4].sum())
    return np.concatenate([probs, rng.uniform(-np.pi, np.pi, 3)])


def random_2q_params(rng, scale=0.3):
    ad = rng.random(2) * scale
    q = rng.random(15)
    q *= rng.random() * 0.9 / q.sum()
    return np.concatenate([ad, q, rng.uniform(-np.pi, np.pi, 6)])


# --- Born-rule circuit simulation on density matrices -----------------------

GX = expm(-0.25j * np.pi * X)
GY = expm(-0.25j * np.pi * Y)
UNITARIES_1Q = {
    "pauli_xyz": {"X": X, "Y": Y, "Z": Z},
    "i_x90_y90": {"I": I2, "Gx": GX, "Gy": GY},
    "i_h_t": {
        "I": I2,
        "H": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
        "T": np.diag([1, np.exp(0.25j * np.pi)]),
    },
}


def born_probabilities(gates, unitaries, rho, effects, noise=None):
    """Probabilities tr(P_mu rho_out), with optional per-gate noise maps applied after each gate."""
    for label in gates:
        U = unitaries[label]
        rho = U @ rho @ U.conj().T
        if noise is not None:
            rho = noise[label](rho)
    return np.array([np.trace(P @ rho).real for P in effects])


def offset_rho(a: float) -> np.ndarray:
    return np.array([[1, 0], [0, 0]], dtype=complex) + a / np.sqrt(2) * (X + Y - Z)


def computational_effects(n: int):
    d = 2**n
    return [np.diag(np.eye(d)[k]).astype(complex) for k in range(d)]


def stat_distance(p, q) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(p) - np.asarray(q))))
