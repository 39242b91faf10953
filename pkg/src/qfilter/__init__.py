"""Optimal unambiguous quantum-state filtering.

Given three pure states with prior probabilities, this package answers,
end to end, the question "is the system in state 1, or in the set
{state 2, state 3}?" with zero error tolerance:

* :mod:`qfilter.filter_core` — closed-form optimal failure probabilities
  and the measurement-regime classification;
* :mod:`qfilter.designer` — success/failure vectors and the 4x4 unitary
  realizing the optimal measurement on four optical modes;
* :mod:`qfilter.multiport` — beam-splitter mesh synthesis for that
  unitary (and resynthesis for verification);
* :mod:`qfilter.simulator` — exact port statistics and Monte Carlo
  audit of the designed measurement;
* :mod:`qfilter.oracle` — independent brute-force verification plus
  comparisons against full three-state identification;
* :mod:`qfilter.cli` — the ``qfilter`` command-line tool.
"""

from .designer import (
    MeasurementDesign,
    build_L,
    complete_unitary,
    design,
    embed_inputs,
    failure_phases,
    failure_vectors,
    success_vectors,
)
from .errors import (
    DegeneratePriorError,
    DegenerateSubspaceError,
    DomainError,
    InconsistentSolutionError,
    InfeasibleError,
    InternalConsistencyError,
    InvalidEnsembleError,
    InvalidStateError,
    NoUnitaryError,
    QFilterError,
)
from .filter_core import (
    FilterSolution,
    Regime,
    average_overlap_A,
    classify_regime,
    m_matrix,
    solve,
)
from .multiport import (
    BeamSplitterLayer,
    MeshProgram,
    decompose,
    embed_layer,
    recompose,
)
from .oracle import (
    ComparisonRecord,
    OracleResult,
    appendix_residuals,
    brute_force_filter,
    compare,
    three_state_Q,
    two_state_Q,
)
from .simulator import (
    SimulationReport,
    port_probabilities,
    sample,
    von_neumann_baseline,
)
from .states import (
    Ensemble,
    OverlapSet,
    StateVector,
    ensemble_from_overlaps,
    gram_matrix,
    overlaps,
    parallel_component_norm2,
    projector_23,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # states
    "StateVector",
    "Ensemble",
    "OverlapSet",
    "overlaps",
    "gram_matrix",
    "projector_23",
    "parallel_component_norm2",
    "ensemble_from_overlaps",
    # filter core
    "Regime",
    "FilterSolution",
    "average_overlap_A",
    "classify_regime",
    "solve",
    "m_matrix",
    # designer
    "MeasurementDesign",
    "failure_phases",
    "failure_vectors",
    "build_L",
    "success_vectors",
    "embed_inputs",
    "complete_unitary",
    "design",
    # multiport
    "BeamSplitterLayer",
    "MeshProgram",
    "embed_layer",
    "decompose",
    "recompose",
    # simulator
    "SimulationReport",
    "port_probabilities",
    "sample",
    "von_neumann_baseline",
    # oracle
    "OracleResult",
    "ComparisonRecord",
    "brute_force_filter",
    "appendix_residuals",
    "three_state_Q",
    "two_state_Q",
    "compare",
    # errors
    "QFilterError",
    "InvalidStateError",
    "InvalidEnsembleError",
    "DegenerateSubspaceError",
    "DegeneratePriorError",
    "InternalConsistencyError",
    "InconsistentSolutionError",
    "InfeasibleError",
    "NoUnitaryError",
    "DomainError",
]
