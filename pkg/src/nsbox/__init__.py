"""Exact no-signalling boxes, time-ordered attacks and their evaluation."""
from .attacks import (
    ClassicalJoint,
    assemble_divisible,
    build_tons_extension,
    divisible_extension,
    majority_attack,
    majority_family,
    prefix_code_attack,
    prefix_code_family,
)
from .boolean import BooleanFunction, from_selector
from .box import Box, PartySpec, make_pr, make_uniform, marginal, mix_noise, tensor
from .evaluate import bias_report, divisible_majority_guess, guessing_probability, lemma2_closed_form
from .oracle import best_prefix_attack, optimal_tons_attack
from .verify import ViolationReport, check_extension, check_no_signalling, check_tons

__all__ = [
    "Box",
    "PartySpec",
    "make_pr",
    "make_uniform",
    "marginal",
    "mix_noise",
    "tensor",
    "ViolationReport",
    "check_no_signalling",
    "check_tons",
    "check_extension",
    "BooleanFunction",
    "from_selector",
    "ClassicalJoint",
    "assemble_divisible",
    "build_tons_extension",
    "divisible_extension",
    "majority_attack",
    "majority_family",
    "prefix_code_attack",
    "prefix_code_family",
    "guessing_probability",
    "lemma2_closed_form",
    "divisible_majority_guess",
    "bias_report",
    "optimal_tons_attack",
    "best_prefix_attack",
]
