"""
Built-in map profiles.

This module contains predefined linear maps that can be used by name
wherever a map JSON file is accepted.
"""
import json
import logging
import os
from typing import Dict

from toral.dynamics import MapSpec

logger = logging.getLogger(__name__)

# Surface automorphisms
CATMAP = MapSpec(kind="toral_auto_2d", matrix=((2, 1), (1, 1)))
SECOND_AUTOMORPHISM = MapSpec(kind="toral_auto_2d", matrix=((3, 2), (1, 1)))

# Expanding maps
EXPANDING = MapSpec(kind="toral_endo_2d", matrix=((6, 3), (3, 3)))
DOUBLING = MapSpec(kind="doubling_1d")

# Products on T^4
CATMAP_SQUARED_PRODUCT = MapSpec(kind="product_4d", factors=(CATMAP, CATMAP))
DISTINCT_PRODUCT = MapSpec(kind="product_4d", factors=(CATMAP, SECOND_AUTOMORPHISM))


# Default map for experiments
DEFAULT_MAP = CATMAP

BUILTIN_MAPS: Dict[str, MapSpec] = {
    "catmap": CATMAP,
    "second": SECOND_AUTOMORPHISM,
    "expanding": EXPANDING,
    "doubling": DOUBLING,
    "catmap-product": CATMAP_SQUARED_PRODUCT,
    "distinct-product": DISTINCT_PRODUCT,
}


def to_json(spec: MapSpec) -> str:
    """
    Convert a map profile to its JSON description.

    Args:
        spec (MapSpec): Map profile to convert.

    Returns:
        str: Compact JSON accepted by ``load_map``.

    Example:
        >>> to_json(CATMAP)
        '{"kind":"toral_auto_2d","matrix":[[2,1],[1,1]]}'
    """
    return spec.model_dump_json(exclude_none=True)


def load_map(ref: str) -> MapSpec:
    """
    Resolve a map reference.

    Args:
        ref (str): Built-in name (see BUILTIN_MAPS) or path to a JSON file. A missing file
            named after a built-in map resolves to that map, with a warning.

    Returns:
        MapSpec: Validated description.

    Raises:
        FileNotFoundError: If ref is neither a built-in name nor an existing file.
        pydantic.ValidationError: If the JSON does not describe a valid map.
    """
    if ref in BUILTIN_MAPS:
        return BUILTIN_MAPS[ref]
    stem = os.path.splitext(os.path.basename(ref))[0]
    if not os.path.exists(ref) and stem in BUILTIN_MAPS:
        logger.warning(f"Map file {ref} not found; using the built-in map '{stem}'")
        return BUILTIN_MAPS[stem]
    with open(ref, encoding="utf-8") as handle:
        return MapSpec.model_validate(json.load(handle))
