"""Grid-based Wigner transform and its inverse.

Forward:  W(x,p) = (1/2 pi hbar) int e^{-i p y / hbar} rho(x + y/2, x - y/2) dy,
evaluated per x-row by FFT over the offset variable y on a uniform grid with
the conjugate momentum grid dp * dy = 2 pi hbar / n_p.  The inverse applies
e^{+i p y / hbar} with the dp measure, which makes the roundtrip exact at
grid level (the convention is fixed by that roundtrip requirement).
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass

import numpy as np

from .kernels import (GaussPolyKernel, KernelError, KernelSpec, diagonal_center,
                      envelope_scale, eval_kernel)

_MAGIC = b"OPCWIG01"


class WindowTooSmall(KernelError):
    def __init__(self, msg: str, suggested_window: float):
        super().__init__(msg)
        self.suggested_window = suggested_window


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """W(x,p) on uniform grids; real for Hermitian kernels."""

    x: np.ndarray        # n_x uniform nodes
    p: np.ndarray        # n_p uniform nodes, conjugate to the offset grid
    values: np.ndarray   # (n_x, n_p) real
    hbar: float
    dy: float            # offset-grid spacing the transform used
    imag_residue: float  # max |Im| / max |W| before the real cast

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def dp(self) -> float:
        return float(self.p[1] - self.p[0])

    def integral(self) -> float:
        """Grid estimate of the trace identity integral W dx dp."""
        return float(self.values.sum() * self.dx * self.dp)

    def offsets(self) -> np.ndarray:
        n = self.p.size
        return (np.arange(n) - n // 2) * self.dy


@dataclass(frozen=True)
class KernelSlices:
    """Kernel samples in offset representation: values[i,j] = rho(x_i + y_j/2, x_i - y_j/2)."""

    x: np.ndarray
    y_offsets: np.ndarray
    values: np.ndarray  # (n_x, n_y) complex

    def points(self) -> tuple[np.ndarray, np.ndarray]:
        X, Y = np.meshgrid(self.x, self.y_offsets, indexing="ij")
        return X + Y / 2.0, X - Y / 2.0


def default_windows(spec: KernelSpec) -> tuple[float, float]:
    """(x-window, y-offset-window) large enough for the kernel's decay."""
    sx = envelope_scale(spec)
    if isinstance(spec.family, GaussPolyKernel):
        sy = 1.0 / np.sqrt(2.0 * spec.family.gauss.A)
    else:
        sy = spec.family.envelope
    lx = max(abs(diagonal_center(spec)) + 8.0 * sx, 4.0 * sy)
    return lx, 2.0 * lx


def _offset_slices(spec: KernelSpec, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    X, Y = np.meshgrid(x, y, indexing="ij")
    return eval_kernel(spec, X + Y / 2.0, X - Y / 2.0)


def wigner_forward(spec: KernelSpec, n_x: int = 128, n_p: int = 256,
                   window: float | None = None,
                   window_y: float | None = None) -> PhaseSpaceGrid:
    """Transform the kernel to W(x,p) on an n_x x n_p grid.

    Raises WindowTooSmall if the kernel has not decayed below 1e-10 of its
    peak at the grid boundary.
    """
    if n_p % 2 or n_x < 2 or n_p < 4:
        raise ValueError("need n_x >= 2 and even n_p >= 4")
    if window is None or window_y is None:
        lx, ly = default_windows(spec)
        window = window if window is not None else lx
        window_y = window_y if window_y is not None else max(ly, 2 * window)
    c = diagonal_center(spec)
    x = c + np.linspace(-window, window, n_x)
    dy = 2.0 * window_y / n_p
    j = np.arange(n_p)
    y = (j - n_p // 2) * dy

    f = _offset_slices(spec, x, y)
    peak = float(np.max(np.abs(f)))
    edge = max(float(np.max(np.abs(f[0, :]))), float(np.max(np.abs(f[-1, :]))),
               float(np.max(np.abs(f[:, 0]))), float(np.max(np.abs(f[:, -1]))))
    if peak > 0 and edge > 1e-10 * peak:
        raise WindowTooSmall(
            f"kernel boundary value {edge:.2e} exceeds 1e-10 of peak {peak:.2e}; "
            "enlarge the window", suggested_window=1.5 * window)

    sign_j = np.where(j % 2 == 0, 1.0, -1.0)
    phase = (-1j) ** (n_p % 4)  # e^{-i pi n/2} for even n
    F = phase * sign_j[None, :] * np.fft.fft(sign_j[None, :] * f, axis=1)
    W = F * (dy / (2.0 * np.pi * spec.hbar))
    residue = float(np.max(np.abs(W.imag)) / max(np.max(np.abs(W.real)), 1e-300))
    dp = 2.0 * np.pi * spec.hbar / (n_p * dy)
    p = (j - n_p // 2) * dp
    return PhaseSpaceGrid(x=x, p=p, values=W.real.copy(), hbar=spec.hbar, dy=dy,
                          imag_residue=residue)


def wigner_inverse(grid: PhaseSpaceGrid) -> KernelSlices:
    """Reconstruct kernel samples rho(x + y/2, x - y/2) from W(x,p)."""
    n = grid.p.size
    k = np.arange(n)
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    phase = (1j) ** (n % 4)  # e^{+i pi n/2} for even n
    f = phase * sign[None, :] * np.fft.ifft(sign[None, :] * grid.values.astype(complex),
                                            axis=1) * n * grid.dp
    return KernelSlices(x=grid.x.copy(), y_offsets=grid.offsets(), values=f)


def write_csv(grid: PhaseSpaceGrid, fh) -> None:
    """x,p,W rows (row-major over x then p), 17 significant digits."""
    fh.write("# opcert-wigner/1\n")
    fh.write(f"# hbar={grid.hbar:.17g} dy={grid.dy:.17g}\n")
    fh.write("x,p,w\n")
    for i, xv in enumerate(grid.x):
        for kk, pv in enumerate(grid.p):
            fh.write(f"{xv:.17g},{pv:.17g},{grid.values[i, kk]:.17g}\n")


def read_csv(fh) -> PhaseSpaceGrid:
    header = fh.readline()
    if not header.startswith("# opcert-wigner/1"):
        raise ValueError("not an opcert wigner CSV")
    meta = dict(item.split("=") for item in fh.readline().lstrip("# ").split())
    fh.readline()  # column names
    data = np.loadtxt(fh, delimiter=",")
    x = np.unique(data[:, 0])
    p = np.unique(data[:, 1])
    values = data[:, 2].reshape(x.size, p.size)
    return PhaseSpaceGrid(x=x, p=p, values=values, hbar=float(meta["hbar"]),
                          dy=float(meta["dy"]), imag_residue=0.0)


def write_binary(grid: PhaseSpaceGrid, fh) -> None:
    """Magic, uint64 dims, float64 hbar and dy, then x, p, W row-major (LE float64)."""
    fh.write(_MAGIC)
    fh.write(struct.pack("<QQdd", grid.x.size, grid.p.size, grid.hbar, grid.dy))
    fh.write(grid.x.astype("<f8").tobytes())
    fh.write(grid.p.astype("<f8").tobytes())
    fh.write(grid.values.astype("<f8").tobytes())


def read_binary(fh) -> PhaseSpaceGrid:
    if fh.read(len(_MAGIC)) != _MAGIC:
        raise ValueError("not an opcert wigner binary file")
    n_x, n_p, hbar, dy = struct.unpack("<QQdd", fh.read(32))
    x = np.frombuffer(fh.read(8 * n_x), dtype="<f8")
    p = np.frombuffer(fh.read(8 * n_p), dtype="<f8")
    w = np.frombuffer(fh.read(8 * n_x * n_p), dtype="<f8").reshape(n_x, n_p)
    return PhaseSpaceGrid(x=x.copy(), p=p.copy(), values=w.copy(), hbar=hbar, dy=dy,
                          imag_residue=0.0)


def to_bytes(grid: PhaseSpaceGrid) -> bytes:
    buf = io.BytesIO()
    write_binary(grid, buf)
    return buf.getvalue()


def to_csv_text(grid: PhaseSpaceGrid) -> str:
    buf = io.StringIO()
    write_csv(grid, buf)
    return buf.getvalue()
