"""Ansatz-based QCNN simulator and quantum-to-quantum transfer learning.

The heavy lifting lives in the C++ extension module ``aqcnn._core``; this
package re-exports its public surface.
"""

from ._core import (
    ModelSpec,
    accuracy_drop,
    batch_loss,
    build_model,
    ccnn_total_params,
    fit,
    gradients,
    measured_probs,
    positive_transfer,
    rpr,
    run_transfer,
    statevector,
    survivor_bloch,
    write_synthetic_idx,
)

__all__ = [
    "ModelSpec",
    "accuracy_drop",
    "batch_loss",
    "build_model",
    "ccnn_total_params",
    "fit",
    "gradients",
    "measured_probs",
    "positive_transfer",
    "rpr",
    "run_transfer",
    "statevector",
    "survivor_bloch",
    "write_synthetic_idx",
]
