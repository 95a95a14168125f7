"""Stationary states of perturbed Lindblad generators.

Superoperators are explicit ``d^2 x d^2`` matrices on column-stacked
density matrices. The main entry points are

* :func:`build_generator` / :class:`LindbladSpec` for generators,
* :func:`time_average_projector` for the kernel projector, its
  constrained inverse and a family of orthogonal stationary states,
* :func:`expand` for the order-by-order stationary state of ``L0 + eps L1``,
* :func:`stability_report` and :func:`ppt_test` for spectral and
  entanglement checks.
"""
from ._backend import BACKEND
from .asymptotics import AveragingData, constrained_inverse, stationary_family, time_average_projector
from .entanglement import EntanglementReport, first_order_state, first_order_witness, ppt_test
from .errors import (
    LindpertError,
    NotInRangeError,
    NumericalDegeneracyError,
    UnsupportedStructureError,
    ValidationError,
)
from .linalg import BipartiteDims, devectorize, partial_trace, partial_transpose, vectorize
from .model import LindbladSpec, Superop, build_dual, build_generator, combine, evolve
from .perturbation import (
    PerturbationResult,
    ReducedGenerator,
    expand,
    expand_degenerate,
    expand_unique,
    reduced_generator,
    validate_against_direct,
)
from .scenarios import Scenario, make_example, random_instance
from .stability import StabilityReport, exact_spectrum, first_order_shifts, obstruction_scan, stability_report

__version__ = "0.1.0"
