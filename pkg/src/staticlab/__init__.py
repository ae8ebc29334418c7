"""Warped-product models, curvature oracles and local classification of
four-dimensional spaces carrying a potential of the form
``nabla df = f (Rc - R/3 g) + x Rc + y g``.
"""

from .catalog import CatalogEntry, build_entry, entry_ids
from .classify import classify, eigen_multiplicity, obstruction_values
from .models import Potential, WarpedModel, ricci_closed_form
from .ode import integrate_f_second_order, integrate_h3, integrate_h4
from .oracle import codazzi_residual_fd, ricci_fd
from .verify import Specialization, master_residual, verify

__version__ = "0.1.0"

__all__ = [
    "CatalogEntry", "Potential", "Specialization", "WarpedModel", "build_entry",
    "classify", "codazzi_residual_fd", "eigen_multiplicity", "entry_ids",
    "integrate_f_second_order", "integrate_h3", "integrate_h4", "master_residual",
    "obstruction_values", "ricci_closed_form", "ricci_fd", "verify",
]
