"""Coordinates for finite-dimensional matrix models.

Fixes an orthonormal basis of the algebra under ``<u, v> = tau(v* u)``
(scaled matrix units), so that elements, tensors over the algebra and the
sharp action all become plain numpy arrays:

* an algebra element is a vector in C^D;
* a tensor ``u (x) v`` is the outer product of the two coordinate vectors,
  and the tensor-trace inner product is the Frobenius pairing;
* left sharp multiplication by a basis tensor ``f_a (x) f_b`` acts on a
  coordinate matrix C as ``L_a C R_b^T`` with the left/right multiplication
  matrices of the algebra.
"""

from __future__ import annotations

import numpy as np

from .trace import MatrixModel


class MatrixCoordinates:
    def __init__(self, model: MatrixModel):
        self.model = model
        basis = []
        off = 0
        for k, lam in model.blocks:
            scale = np.sqrt(k / lam)
            for p in range(k):
                for q in range(k):
                    E = np.zeros((model.dim, model.dim), dtype=complex)
                    E[off + p, off + q] = scale
                    basis.append(E)
            off += k
        self.basis = basis
        self.D = len(basis)
        B = np.stack(basis)
        # coords(u)_a = tau(f_a^* u) = sum_{ij} conj(f_a[i,j]) w_j u[i,j]
        self._coord = np.einsum("aij,j->aij", B.conj(), model.weights)
        self._coord = self._coord.reshape(self.D, -1)
        self.left = np.zeros((self.D, self.D, self.D), dtype=complex)
        self.right = np.zeros((self.D, self.D, self.D), dtype=complex)
        for a in range(self.D):
            for b in range(self.D):
                self.left[a, :, b] = self.coords(basis[a] @ basis[b])
                self.right[a, :, b] = self.coords(basis[b] @ basis[a])
        self.unit = self.coords(np.eye(model.dim, dtype=complex))

    def coords(self, mat: np.ndarray) -> np.ndarray:
        return self._coord @ np.asarray(mat, dtype=complex).reshape(-1)

    def mat(self, coords: np.ndarray) -> np.ndarray:
        acc = np.zeros((self.model.dim, self.model.dim), dtype=complex)
        for c, f in zip(coords, self.basis):
            acc += c * f
        return acc

    def sharp_translates(self, row: np.ndarray) -> np.ndarray:
        """All left sharp translates ``(f_a (x) f_b) # row`` of a coordinate row.

        ``row`` has shape (n, D, D); the result has shape (D*D, n*D*D) with
        one flattened translate per basis tensor.
        """
        out = np.einsum("axy,jyz,bwz->abjxw", self.left, row, self.right)
        n = row.shape[0]
        return out.reshape(self.D * self.D, n * self.D * self.D)
