"""animo: dyadic heart-rate mood sharing.

Heart-rate -> mood-band classification, an ephemeral one-to-one relay,
a deterministic behavior simulator, and replay analytics over the
relay's append-only event log.
"""

from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
