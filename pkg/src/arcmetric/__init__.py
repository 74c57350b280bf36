"""Exact arc contact orders and inner-metric estimation for germ models.

The package decides, within an explicit sampling budget, whether a
semialgebraic germ is normally embedded: outer contact orders of arcs are
computed exactly on truncated Puiseux series, inner contact orders come
from a pancake chain metric or mesh geodesics, and a mismatch between the
two is a certified witness against normal embedding.
"""

from .arcs import (
    Arc,
    FitError,
    ReparametrizationError,
    norm_series,
    outer_contact_order,
    outer_point_to_arc_order,
    random_arcs,
    rational_unit_vector,
    reparametrize_by_distance,
    squared_norm,
)
from .config import ENV_CONFIG_VAR, ConfigError, RunConfig
from .criterion import (
    CriterionReport,
    LipschitzProbe,
    ScatterReport,
    UltrametricReport,
    Verdict,
    compare_orders,
    distance_table_csv,
    lipschitz_probe,
    scatter_csv,
    tangency_scatter,
    ultrametric_check,
    verdict,
    verdict_json_text,
)
from .fit import geometric_scales, golden_section_min, loglog_slope, snap_to_rational
from .germs import (
    Adjacency,
    GermError,
    GermModel,
    Monomial,
    PancakeDecomposition,
    RationalMap,
    SamplingStrategy,
    Sheet,
    builtin,
    point_at_radius,
    sample_arcs,
)
from .germspec import (
    GermSpecError,
    germ_spec_json,
    parse_arc,
    parse_arc_text,
    parse_germ_spec,
    parse_series,
    parse_series_text,
    serialize_arc,
    serialize_germ,
    serialize_series,
)
from .inner import (
    InnerOrderEstimate,
    inner_contact_order,
    inner_distance,
    inner_point_to_arc_order,
    pancake_distance,
)
from .mesh import MeshError, PointGraph, inner_distance_numeric, mesh_at_scale
from .puiseux import (
    ContactOrder,
    ExactnessError,
    PuiseuxSeries,
    RamificationError,
    binomial_series,
    inverse_unit,
)

__version__ = "0.1.0"

__all__ = [
    "Adjacency",
    "Arc",
    "ConfigError",
    "ContactOrder",
    "CriterionReport",
    "ENV_CONFIG_VAR",
    "ExactnessError",
    "FitError",
    "GermError",
    "GermModel",
    "GermSpecError",
    "InnerOrderEstimate",
    "LipschitzProbe",
    "MeshError",
    "Monomial",
    "PancakeDecomposition",
    "PointGraph",
    "PuiseuxSeries",
    "RamificationError",
    "RationalMap",
    "ReparametrizationError",
    "RunConfig",
    "SamplingStrategy",
    "ScatterReport",
    "Sheet",
    "UltrametricReport",
    "Verdict",
    "binomial_series",
    "builtin",
    "compare_orders",
    "distance_table_csv",
    "geometric_scales",
    "germ_spec_json",
    "golden_section_min",
    "inner_contact_order",
    "inner_distance",
    "inner_distance_numeric",
    "inner_point_to_arc_order",
    "inverse_unit",
    "lipschitz_probe",
    "loglog_slope",
    "mesh_at_scale",
    "norm_series",
    "outer_contact_order",
    "outer_point_to_arc_order",
    "pancake_distance",
    "parse_arc",
    "parse_arc_text",
    "parse_germ_spec",
    "parse_series",
    "parse_series_text",
    "point_at_radius",
    "random_arcs",
    "rational_unit_vector",
    "reparametrize_by_distance",
    "sample_arcs",
    "scatter_csv",
    "serialize_arc",
    "serialize_germ",
    "serialize_series",
    "snap_to_rational",
    "squared_norm",
    "tangency_scatter",
    "ultrametric_check",
    "verdict",
    "verdict_json_text",
    "__version__",
]
