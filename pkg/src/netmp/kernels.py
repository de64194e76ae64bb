"""Backend selection for the hot kernels.

The compiled Cython extension is used when present; otherwise the numpy
implementation in `_kernels_py` takes over.  Set NETMP_BACKEND=python to
force the fallback (used by the benchmark and the parity tests).
"""
from __future__ import annotations

import os

from netmp import _kernels_py

if os.environ.get("NETMP_BACKEND") == "python":
    _impl = _kernels_py
else:
    try:
        from netmp import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

BACKEND: str = _impl.BACKEND_NAME

seg_sum = _impl.seg_sum
seg_prod = _impl.seg_prod
excl_prod = _impl.excl_prod
nb_apply = _impl.nb_apply
percolation_sweep = _impl.percolation_sweep
ising_sweep = _impl.ising_sweep
spectral_sweep = _impl.spectral_sweep
sigma_counts = _impl.sigma_counts
jacobi_eigenvalues = _impl.jacobi_eigenvalues
