"""Select the kernel core at import time.

The compiled Cython extension is preferred; the pure NumPy twin is used when
the extension is missing or when ``SPECSHIFT_FORCE_PURE=1`` is set in the
environment.  Both expose the same functions with identical semantics; the
active choice is reported by ``backend_name``.
"""

import os

if os.environ.get("SPECSHIFT_FORCE_PURE", "") == "1":
    from . import _pykernels as _impl

    backend_name = "pure"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]

        backend_name = "compiled"
    except ImportError:
        from . import _pykernels as _impl

        backend_name = "pure"

besselk = _impl.besselk
besselk_general = _impl.besselk_general
matern_scalar = _impl.matern_scalar
matern_vector = _impl.matern_vector
gaussian_cross = _impl.gaussian_cross
gaussian_gram = _impl.gaussian_gram
matern_cross = _impl.matern_cross
matern_gram = _impl.matern_gram
