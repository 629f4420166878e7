"""Kernel lane selection.

The compiled extension is preferred when importable; the numpy reference
lane is the fallback. Set PINYINTYPO_KERNELS=py (or =c) to force a lane —
useful for the parity tests and the lane benchmark.
"""

import os

from . import reference

_FORCED = os.environ.get("PINYINTYPO_KERNELS", "").strip().lower()

_compiled = None
if _FORCED != "py":
    try:
        from . import _core as _compiled
    except ImportError:
        _compiled = None
        if _FORCED == "c":
            raise ImportError(
                "PINYINTYPO_KERNELS=c but the compiled kernel is not built; "
                "run 'pip install -e .' or 'python setup.py build_ext --inplace'"
            )

_active = _compiled if _compiled is not None else reference

BACKEND = "c" if _active is not reference else "py"

gru_seq_forward = _active.gru_seq_forward
gru_seq_backward = _active.gru_seq_backward
decoder_seq_forward = _active.decoder_seq_forward
decoder_seq_backward = _active.decoder_seq_backward


def available_backends():
    out = {"py": reference}
    if _compiled is not None:
        out["c"] = _compiled
    return out
