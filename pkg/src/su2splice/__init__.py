"""SU(2) representations of knot exteriors and torus-glued 3-manifolds."""

from .catalog import CatalogEntry, load_catalog, load_entry, standard_entries, torus_knot, two_bridge
from .errors import Su2SpliceError
from .groups import FPGroup, RepAssignment, klein_group
from .homology import (NORMAL_FORM, GluingMatrix, PeripheralHomologyData, SlopeClass, filling_homology,
                       normalize_order4_gluing, smith_normal_form, splice_homology)
from .klein import KleinRepTarget, classify_by_bruteforce, glue_with_klein_bundle, realize_klein_rep
from .pillowcase import SIGMA, TAU, PillowPoint, Polyline
from .splice import SpliceProblem, intersect_images, normalized_problem, search_nonabelian, verify_certificate
from .su2 import UnitQuaternion
from .tracing import TracedCurve, trace_pillowcase_image

__version__ = "0.1.0"

__all__ = [
    "CatalogEntry", "FPGroup", "GluingMatrix", "KleinRepTarget", "NORMAL_FORM", "PeripheralHomologyData",
    "PillowPoint", "Polyline", "RepAssignment", "SIGMA", "SlopeClass", "SpliceProblem", "Su2SpliceError",
    "TAU", "TracedCurve", "UnitQuaternion", "classify_by_bruteforce", "filling_homology",
    "glue_with_klein_bundle", "intersect_images", "klein_group", "load_catalog", "load_entry",
    "normalize_order4_gluing", "normalized_problem", "realize_klein_rep", "search_nonabelian",
    "smith_normal_form", "splice_homology", "standard_entries", "torus_knot", "trace_pillowcase_image",
    "two_bridge", "verify_certificate",
]
