"""qumulus: multi-paradigm quantum circuit simulation.

Subpackages
-----------
linalg
    Permanent, hafnian, torontonian, Clements and Takagi decompositions.
qubit
    State-vector / density-matrix qubit circuits with adjoint gradients.
photonic
    Fock (basis and tensor), Gaussian, bosonic and time-domain photonic backends.
mbqc
    Measurement patterns, transpilation, standardisation and execution.
mps
    Matrix-product-state simulation with bond truncation.
distributed
    State-vector simulation partitioned across ranks.
cli
    Command-line driver.
"""

from .errors import (
    NumericalGuardError,
    PatternError,
    QumulusError,
    SchemaError,
    TransportError,
    UnsupportedGateError,
)

__version__ = "0.1.0"

__all__ = [
    "NumericalGuardError",
    "PatternError",
    "QumulusError",
    "SchemaError",
    "TransportError",
    "UnsupportedGateError",
    "__version__",
]
