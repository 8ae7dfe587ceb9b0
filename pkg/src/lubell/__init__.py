"""Lubell function, chain partitions and exact forbidden-subposet search in the Boolean lattice."""

from .chains import (ChainBlockReport, enumerate_chains, lubell_monte_carlo, lubell_via_chains, min_partition,
                     minmax_partition, partition_by_deleted_element)
from .claims import ClaimResult, verify_all
from .family import (SetFamily, construct_c1, construct_c2, construct_c3, construction, diamond_free_fast, dk_bounds,
                     is_pattern_free, load_family, lubell, lubell_size_bound, middle_levels, sigma)
from .poset import (HostPoset, PosetPattern, butterfly, chain, diamond, embeds, fork, harp, j_poset, n_poset,
                    parse_pattern_spec)
from .search import (CanonicalForm, SearchConfig, SearchOutcome, canonical_form, enumerate_maximal_pfree,
                     find_family_of_size, la_exact, max_lubell, verify_extremal_uniqueness)

__version__ = "0.1.0"
