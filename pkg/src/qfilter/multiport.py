"""Beam-splitter mesh synthesis for small unitaries.

A lossless linear-optical multiport implementing an N x N unitary can be
built from two-mode beam-splitter layers.  A layer acting on modes
``(p, q)`` with transmissivity ``t``, reflectivity ``r`` (``t^2 + r^2 = 1``)
and phase ``phi`` embeds into the identity as

    rows/cols p, q  ->  [[t*e^{i phi}, r*e^{i phi}],
                         [-r,          t         ]]

so a real layer (phi = 0) is an ordinary rotation.  :func:`decompose`
factors a unitary into at most N(N-1)/2 such layers plus a diagonal of
residual phases using triangular nulling (last column first); the phase
diagonal multiplies on the input side, i.e. the matrix reconstructed by
:func:`recompose` is ``(product of layers, leftmost applied last) @
diag(exp(i * output_phases))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InternalConsistencyError

__all__ = [
    "BeamSplitterLayer",
    "MeshProgram",
    "embed_layer",
    "decompose",
    "recompose",
]

#: Layers with |r| below this are numerically the identity and are dropped.
IDENTITY_DROP_TOL = 1e-12
#: Inputs to decompose must be unitary to within this residual.
UNITARITY_TOL = 1e-9


@dataclass(frozen=True)
class BeamSplitterLayer:
    """One two-mode mixing layer of a mesh.

    Attributes
    ----------
    p, q:
        1-based mode indices with p < q.
    t, r:
        Real transmissivity and reflectivity, ``t^2 + r^2 = 1`` within
        1e-12.  ``r`` may be negative; the sign convention keeps the layer
        phase inside (-pi/2, pi/2].
    phi:
        Phase applied to the p-row of the mixing block, radians.
    """

    p: int
    q: int
    t: float
    r: float
    phi: float = 0.0

    def __post_init__(self) -> None:
        if not (isinstance(self.p, int) and isinstance(self.q, int)):
            raise DomainError("mode indices must be integers")
        if not 1 <= self.p < self.q:
            raise DomainError(
                f"mode indices must satisfy 1 <= p < q, got p={self.p}, q={self.q}"
            )
        closure = self.t * self.t + self.r * self.r
        if abs(closure - 1.0) > 1e-12:
            raise DomainError(
                f"a lossless layer needs t^2 + r^2 = 1 within 1e-12, got {closure!r}"
            )


@dataclass(frozen=True)
class MeshProgram:
    """An ordered beam-splitter factorization of a unitary.

    ``recompose(program)`` multiplies the embedded layers in list order
    (so the *last* layer in the list acts on the input state first) and
    then applies ``diag(exp(i * output_phases))`` on the input side.
    """

    layers: tuple[BeamSplitterLayer, ...]
    output_phases: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "layers", tuple(self.layers))
        object.__setattr__(
            self, "output_phases", tuple(float(p) for p in self.output_phases)
        )
        dim = len(self.output_phases)
        if dim < 2:
            raise DomainError("a mesh program needs at least 2 modes")
        for layer in self.layers:
            if layer.q > dim:
                raise DomainError(
                    f"layer acts on mode {layer.q} but the program has {dim} modes"
                )

    @property
    def dim(self) -> int:
        """Number of optical modes."""
        return len(self.output_phases)


def embed_layer(layer: BeamSplitterLayer, dim: int = 4) -> np.ndarray:
    """Embed a two-mode layer into a `dim` x `dim` identity.

    With phi = 0 the embedded block is the real rotation
    ``[[t, r], [-r, t]]``.
    """
    if layer.q > dim:
        raise DomainError(
            f"layer acts on mode {layer.q} but the embedding has {dim} modes"
        )
    mat = np.eye(dim, dtype=complex)
    phase = np.exp(1j * layer.phi)
    p, q = layer.p - 1, layer.q - 1
    mat[p, p] = layer.t * phase
    mat[p, q] = layer.r * phase
    mat[q, p] = -layer.r
    mat[q, q] = layer.t
    return mat


def _nulling_pairs(dim: int) -> list[tuple[int, int]]:
    """Triangular nulling order: clear the last column first, top-down pairs."""
    return [(p, q) for q in range(dim, 1, -1) for p in range(q - 1, 0, -1)]


def decompose(unitary: np.ndarray) -> MeshProgram:
    """Factor a unitary into beam-splitter layers plus residual phases.

    Uses triangular nulling: for each mode pair, a layer is chosen so that
    left-multiplying by its adjoint zeroes one above-diagonal entry; what
    remains at the end is a phase diagonal.  Layers that are numerically
    the identity (|r| < 1e-12) are omitted, so the result has at most
    N(N-1)/2 layers and ``recompose`` reproduces the input within 1e-9.

    Raises
    ------
    DomainError
        If the input is not square (N >= 2) or not unitary within 1e-9;
        the message reports the unitarity residual.
    """
    work = np.asarray(unitary, dtype=complex).copy()
    if work.ndim != 2 or work.shape[0] != work.shape[1] or work.shape[0] < 2:
        raise DomainError(f"expected a square matrix of size >= 2, got {work.shape}")
    dim = work.shape[0]
    residual = float(
        np.max(np.abs(work.conj().T @ work - np.eye(dim, dtype=complex)))
    )
    if residual > UNITARITY_TOL:
        raise DomainError(
            f"matrix is not unitary within {UNITARITY_TOL:g} "
            f"(unitarity residual {residual:.3e})"
        )
    layers: list[BeamSplitterLayer] = []
    for p, q in _nulling_pairs(dim):
        a = work[p - 1, q - 1]
        b = work[q - 1, q - 1]
        if abs(a) < 1e-15 and abs(b) < 1e-15:
            continue
        if abs(b) < 1e-15:
            t, r, phi = 0.0, 1.0, 0.0
        else:
            phi0 = float(np.angle(a) - np.angle(b)) if abs(a) > 0.0 else 0.0
            phi0 = (phi0 + np.pi) % (2.0 * np.pi) - np.pi
            scale = np.hypot(abs(a), abs(b))
            t, r = abs(b) / scale, abs(a) / scale
            # Fold the phase into (-pi/2, pi/2] by flipping the sign of r.
            if phi0 > np.pi / 2:
                phi, r = phi0 - np.pi, -r
            elif phi0 <= -np.pi / 2:
                phi, r = phi0 + np.pi, -r
            else:
                phi = phi0
        if abs(r) < IDENTITY_DROP_TOL:
            continue
        layer = BeamSplitterLayer(p, q, float(t), float(r), float(phi))
        layers.append(layer)
        work = embed_layer(layer, dim).conj().T @ work
    off_diag = float(np.max(np.abs(work - np.diag(np.diag(work)))))
    if off_diag > UNITARITY_TOL:
        raise InternalConsistencyError(
            f"triangular nulling left off-diagonal residue {off_diag:.3e}"
        )
    phases = tuple(float(x) for x in np.angle(np.diag(work)))
    return MeshProgram(tuple(layers), phases)


def recompose(program: MeshProgram) -> np.ndarray:
    """Multiply a mesh program back into its unitary matrix."""
    dim = program.dim
    mat = np.eye(dim, dtype=complex)
    for layer in program.layers:
        mat = mat @ embed_layer(layer, dim)
    return mat @ np.diag(np.exp(1j * np.asarray(program.output_phases)))
