"""Positive eigenpairs of nonlocal semilinear evolution equations in mild form."""
from .config import ConfigDocument, build_instance, load_config, parse_config
from .eigensolver import (EigenpairCertificate, SolverConfig, independent_path, solve, sweep,
                          verify_certificate)
from .errors import (ConeViolation, ConfigError, DimensionMismatch, DomainExceeded,
                     EvaluationError, ExpressionError, ExpressionSyntaxError, MildEigError,
                     NegativeTime, NoMass, QuadratureMismatch, SchemaError, UnknownFunction,
                     UnknownVariable, ValidationError)
from .expr import Expression, parse_expression
from .lattice import (ConeMembership, ConeStatus, ConeTolerance, GridFunction, Trajectory,
                      clamp_to_cone, is_in_cone, norm_C, norm_sup, order_leq, rescale_to_norm)
from .mild import MildConfig, Quadrature, apply_G, apply_H, apply_T, duhamel, residual
from .problem import (CertificateData, HypothesisReport, Nonlinearity, ProblemInstance,
                      check_hypotheses, compute_H4, eval_B, eval_f, paper_example)
from .semigroup import AxiomReport, SemigroupHandle, SemigroupKind, check_axioms, estimate_D

__all__ = [
    "ConfigDocument", "build_instance", "load_config", "parse_config",
    "EigenpairCertificate", "SolverConfig", "independent_path", "solve", "sweep",
    "verify_certificate", "ConeViolation", "ConfigError", "DimensionMismatch",
    "DomainExceeded", "EvaluationError", "ExpressionError", "ExpressionSyntaxError",
    "MildEigError", "NegativeTime", "NoMass", "QuadratureMismatch", "SchemaError",
    "UnknownFunction", "UnknownVariable", "ValidationError", "Expression",
    "parse_expression", "ConeMembership", "ConeStatus", "ConeTolerance", "GridFunction",
    "Trajectory", "clamp_to_cone", "is_in_cone", "norm_C", "norm_sup", "order_leq",
    "rescale_to_norm", "MildConfig", "Quadrature", "apply_G", "apply_H", "apply_T",
    "duhamel", "residual", "CertificateData", "HypothesisReport", "Nonlinearity",
    "ProblemInstance", "check_hypotheses", "compute_H4", "eval_B", "eval_f",
    "paper_example", "AxiomReport", "SemigroupHandle", "SemigroupKind", "check_axioms",
    "estimate_D",
]

__version__ = "0.1.0"
