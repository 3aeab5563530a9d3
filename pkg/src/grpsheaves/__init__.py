"""Finite group sites, sheaves on them, and the comparison with G-sets."""
from .groups import AxiomError, FiniteGroup, GSet, Subgroup, BUILTIN_GROUPS
from .fincat import BudgetExceeded, FinCat, Presheaf
from .report import Report

__all__ = ["AxiomError", "BUILTIN_GROUPS", "BudgetExceeded", "FinCat", "FiniteGroup", "GSet", "Presheaf",
           "Report", "Subgroup"]
