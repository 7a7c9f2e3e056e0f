"""
Execution manager: certificate-gated placement, variant selection and
in-process execution of site plans
"""

from .certificates import (
    AuthorityRegistry,
    Certificate,
    issue_certificate,
    token_valid,
    verify_certificates,
)
from .datagen import generate_database
from .engine import Engine, Relation, evaluate_plan
from .executor import ExecutionResult, execute_plan
from .nodes import NodeExecutorInfo, default_nodes, load_node_registry
from .variants import (
    Binding,
    ExecutionPlan,
    ImplementationVariant,
    builtin_variants,
    load_variants,
    select_variants,
    variant_classes,
)

__all__ = [
    "AuthorityRegistry",
    "Binding",
    "Certificate",
    "Engine",
    "ExecutionPlan",
    "ExecutionResult",
    "ImplementationVariant",
    "NodeExecutorInfo",
    "Relation",
    "builtin_variants",
    "default_nodes",
    "evaluate_plan",
    "execute_plan",
    "generate_database",
    "issue_certificate",
    "load_node_registry",
    "load_variants",
    "select_variants",
    "token_valid",
    "variant_classes",
]
