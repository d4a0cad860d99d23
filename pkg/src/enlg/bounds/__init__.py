"""Value computations for extended nonlocal games."""

from .hierarchy import (
    HierarchyResult,
    build_hierarchy_sdp,
    moment_structure,
    qc_upper_bound,
    strategy_moment_matrix,
)
from .words import CanonicalWord, HierarchyLevel, canonicalize, word_set
from .nonsignaling import NonSignalingResult, build_nonsignaling_sdp, nonsignaling_value
from .seesaw import SeesawResult, extract_alice_povm, seesaw_lower_bound
from .unentangled import monogamy_unentangled_value, unentangled_value
