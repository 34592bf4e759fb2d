"""Differential calculi on finite group lattices."""
from .coset import CosetDiagram, build_coset_diagram, reduction_relations
from .forms import Delta, Form, d, forms_equal, normal_form, theta
from .gauge import GaugeField, ModuleConnection, yang_mills, yang_mills_action
from .groups import GroupTable, build_group, parse_spec
from .lattice import GroupLattice, classification_report, is_bicovariant
from .lincon import LinearConnection, torsion, torsion_report
from .vector_fields import DiscreteVF, VectorField, make_discrete

__all__ = [
    "CosetDiagram", "build_coset_diagram", "reduction_relations",
    "Delta", "Form", "d", "forms_equal", "normal_form", "theta",
    "GaugeField", "ModuleConnection", "yang_mills", "yang_mills_action",
    "GroupTable", "build_group", "parse_spec",
    "GroupLattice", "classification_report", "is_bicovariant",
    "LinearConnection", "torsion", "torsion_report",
    "DiscreteVF", "VectorField", "make_discrete",
]
