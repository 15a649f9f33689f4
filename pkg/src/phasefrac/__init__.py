"""phasefrac: a finite element solver for quasi-static brittle fracture
using a phase field description of the crack.

The package is organized as:

* :mod:`phasefrac.constitutive` - energy splits, degradation, stress/tangent,
  history field, phase-equation source terms.
* :mod:`phasefrac.elements` - element kinds, shape functions, quadrature.
* :mod:`phasefrac.fem` - element systems, global assembly, Dirichlet handling.
* :mod:`phasefrac.solver` - load stepping, monolithic and staggered schemes.
* :mod:`phasefrac.mesh_io` - mesh model, generators, native/.inp readers,
  VTK and CSV writers.
* :mod:`phasefrac.cases` - ready-to-run benchmark case catalog.
* :mod:`phasefrac.cli` - the ``phasefrac`` command line front end.
"""

from .constitutive import (
    ElasticProps,
    Formulation,
    FractureProps,
    MaterialModel,
    SplitScheme,
    TraceConvention,
)

__version__ = "0.1.0"

__all__ = [
    "ElasticProps",
    "FractureProps",
    "MaterialModel",
    "SplitScheme",
    "Formulation",
    "TraceConvention",
    "__version__",
]
