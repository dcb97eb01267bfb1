"""Canonical forms of maximal experiments and their mediated counterparts."""
from .builders import build_even_completion, build_odd_completion
from .canonical import (
    BranchForm,
    CanonicalForm,
    all_bipartitions,
    bipartition_label,
    canonicalize,
    compute_G,
    support_strings,
)
from .instances import (
    build_three_support_instance,
    odd_case_i_instance,
    odd_case_ii_instance,
    perturbed,
    random_even_instance,
    single_device_instance,
    three_support_b01,
)
from .pipeline import NONE, Branch, CompletionArtifact, run_pipeline, summarized_povm
from .verify import Check, Transcript, finalize, position_obstruction, verify, verify_mediation, verify_triple


def build_completion(t):
    """Even or odd construction, picked from the device count."""
    if t.m == 2 * t.n:
        return finalize(build_even_completion(t))
    return finalize(build_odd_completion(t))


__all__ = [
    "NONE",
    "Branch",
    "BranchForm",
    "CanonicalForm",
    "Check",
    "CompletionArtifact",
    "Transcript",
    "all_bipartitions",
    "bipartition_label",
    "build_completion",
    "build_even_completion",
    "build_odd_completion",
    "build_three_support_instance",
    "canonicalize",
    "compute_G",
    "finalize",
    "odd_case_i_instance",
    "odd_case_ii_instance",
    "perturbed",
    "position_obstruction",
    "random_even_instance",
    "run_pipeline",
    "single_device_instance",
    "summarized_povm",
    "support_strings",
    "three_support_b01",
    "verify",
    "verify_mediation",
    "verify_triple",
]
