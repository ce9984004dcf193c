"""Data models for ambiset."""

# Configuration models
from ambiset.models.config import (
    AmbisetConfig,
    ConfigManager,
    EnvironmentSettings,
    OutputFormat,
)

# Convergence experiments
from ambiset.models.convergence import (
    ConvergenceRule,
    MetrizationReport,
    PEquivalenceReport,
    SemicontinuityResult,
    SetSequence,
    TailTransferCheck,
)

# Linear programs
from ambiset.models.lp import Bound, Constraint, LinearProgram, LpSolution, LpStatus, Relation, Sense, TransportSolution

# Core models
from ambiset.models.measures import AmbiguitySet, DiscreteMeasure, TestFunction

# Problem files
from ambiset.models.problem import ProblemFile, ProblemOptions
from ambiset.models.reports import (
    CounterexampleReport,
    DirectedDistanceReport,
    DualDistanceReport,
    GeneralizedDistanceReport,
    KantorovichPotential,
    MembershipReport,
    TransportPlan,
)
from ambiset.models.space import BasePoint, FiniteMetricSpace

__all__ = [
    # Core
    "FiniteMetricSpace",
    "BasePoint",
    "DiscreteMeasure",
    "AmbiguitySet",
    "TestFunction",
    # Linear programs
    "LinearProgram",
    "Constraint",
    "Bound",
    "Relation",
    "Sense",
    "LpStatus",
    "LpSolution",
    "TransportSolution",
    # Reports
    "TransportPlan",
    "KantorovichPotential",
    "DirectedDistanceReport",
    "GeneralizedDistanceReport",
    "DualDistanceReport",
    "MembershipReport",
    "CounterexampleReport",
    # Convergence
    "SetSequence",
    "ConvergenceRule",
    "MetrizationReport",
    "PEquivalenceReport",
    "SemicontinuityResult",
    "TailTransferCheck",
    # Problem files
    "ProblemFile",
    "ProblemOptions",
    # Configuration
    "AmbisetConfig",
    "EnvironmentSettings",
    "ConfigManager",
    "OutputFormat",
]
