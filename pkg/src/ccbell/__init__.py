"""Bell inequalities from one-way communication complexity.

Exact distributional complexity of small problems, construction of
correlation boxes from quantum one-way protocols, and evaluation of the
resulting nonlinear Bell inequalities.
"""

from ccbell.problems import CommProblem, rac21, index_problem, from_json, success_probability
from ccbell.classical_cc import CCCurve, optimal_success, complexity, cc_curve, pumped_bound, repetitions_needed
from ccbell.quantum import (
    QState,
    BinaryMeasurement,
    QuantumProtocol,
    phi_plus,
    isotropic,
    werner,
    box_from_protocol,
    rac_quantum_protocol,
    index_quantum_protocol,
)
from ccbell.correlations import CorrelationBox, BoxSummary, summarize, check_nonsignaling, mix, lhv_membership
from ccbell.protocol_sim import PiBProtocol, compile_protocol, exact_success, simulate, guaranteed_success
from ccbell.bell import (
    BellReport,
    AsymptoticFamily,
    lhs,
    evaluate,
    rac_inequality,
    noise_threshold,
    asymptotic_vsp,
    asymptotic_phm,
    fig3_curves,
)

__version__ = "0.1.0"
