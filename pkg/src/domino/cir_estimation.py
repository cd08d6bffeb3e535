"""CIR recovery from CSI observed on a partial subcarrier set.

Convention: unitary DFT, forward kernel ``exp(-j 2 pi n k / N) / sqrt(N)``,
so ``H = F h`` and ``h = F^H H`` when every bin is observed.  The least
squares estimator solves ``min || F[K, L] h - H ||`` over a fixed tap support
``L``, which is far more accurate than zero-filling the guard bands and
inverting when the channel is sparse.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IllConditioned, LayoutMismatch
from .frames import Cir, CsiFrame, SubcarrierLayout, TapSet

DEFAULT_N_TAPS = 32
COND_BOUND = 1e8


def dft_submatrix(layout, tapset):
    """Rows of the unitary DFT for the active subcarriers, columns for the taps."""
    k = layout.active_array[:, None]
    n = tapset.array[None, :]
    return np.exp(-2j * np.pi * (k * n % layout.n_fft) / layout.n_fft) / np.sqrt(layout.n_fft)


@dataclass(frozen=True, eq=False)
class LsOperator:
    matrix: np.ndarray
    layout: SubcarrierLayout
    tapset: TapSet
    ridge: float

    def __post_init__(self):
        self.matrix.flags.writeable = False

    @property
    def first_row(self):
        """Weights that map CSI to the estimate of the first tap in the set."""
        return self.matrix[0]

    def apply(self, values):
        """Estimate taps for one frame's values or a ``(frames, active)`` stack."""
        return np.asarray(values) @ self.matrix.T


def default_ridge(gram):
    return 1e-6 * np.trace(gram).real / gram.shape[0]


def build_ls_operator(layout, tapset=None, ridge=None, cond_bound=COND_BOUND):
    """Precompute ``(F^H F + ridge I)^-1 F^H`` for ``F = F[active, taps]``.

    ``ridge=None`` picks a tiny Tikhonov term scaled to the Gram diagonal;
    pass ``ridge=0`` for the plain least squares solution, in which case a
    Gram condition number above ``cond_bound`` raises ``IllConditioned``.
    """
    tapset = TapSet.contiguous(min(DEFAULT_N_TAPS, layout.n_fft)) if tapset is None else tapset
    if len(tapset) > layout.n_active:
        raise ValueError("more taps than active subcarriers: LS is underdetermined")
    if tapset.taps[-1] >= layout.n_fft:
        raise ValueError("tap index beyond the DFT length")
    F = dft_submatrix(layout, tapset)
    gram = F.conj().T @ F
    if ridge is None:
        ridge = default_ridge(gram)
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    if ridge == 0:
        cond = np.linalg.cond(gram)
        if not cond < cond_bound:
            raise IllConditioned(f"Gram condition number {cond:.3g} exceeds {cond_bound:.3g}")
    matrix = np.linalg.solve(gram + ridge * np.eye(len(tapset)), F.conj().T)
    return LsOperator(matrix, layout, tapset, float(ridge))


def estimate_cir_ls(op, frame):
    if frame.layout != op.layout:
        raise LayoutMismatch("frame layout differs from the operator's layout")
    return Cir(op.apply(frame.values), frame.layout.ts, op.tapset.array)


def zero_fill(values, layout):
    """Place active-subcarrier values into full-length DFT vectors (last axis)."""
    values = np.asarray(values)
    full = np.zeros(values.shape[:-1] + (layout.n_fft,), dtype=np.complex128)
    full[..., layout.active_array] = values
    return full


def estimate_cir_idft(frame):
    """Zero-fill the inactive bins and apply the unitary inverse DFT (all N taps)."""
    taps = np.fft.ifft(zero_fill(frame.values, frame.layout), norm="ortho")
    return Cir(taps, frame.layout.ts)


def synth_from_taps(x, layout, tapset):
    """Frame whose CSI is exactly ``F[active, taps] @ x``."""
    return CsiFrame(dft_submatrix(layout, tapset) @ np.asarray(x), layout)


def nmse_db(estimate, truth):
    estimate, truth = np.asarray(estimate), np.asarray(truth)
    err = np.sum(np.abs(estimate - truth) ** 2)
    return 10 * np.log10(err / np.sum(np.abs(truth) ** 2))
