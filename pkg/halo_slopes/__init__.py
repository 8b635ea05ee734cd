"""halo-slopes - slopes of overconvergent quaternionic forms near the boundary of weight space."""

__version__ = "1.0.0"
__author__ = "halo-slopes developers"
__description__ = "Fredholm series, Newton polygons and halo decompositions for U_p on definite quaternion algebras"

from .config import RunConfig, load_config
from .modules.classical_space import classical_hecke_matrix, compare_classicality, slope_multiset
from .modules.coset_data import CosetDataset, gen_synthetic, parse_dataset
from .modules.distribution_module import hecke_matrix_overconv, u_v_matrix
from .modules.fredholm_newton import LambdaSeries, fredholm_series, halo_report, newton_polygon

__all__ = [
    "RunConfig",
    "load_config",
    "CosetDataset",
    "gen_synthetic",
    "parse_dataset",
    "hecke_matrix_overconv",
    "u_v_matrix",
    "classical_hecke_matrix",
    "compare_classicality",
    "slope_multiset",
    "LambdaSeries",
    "fredholm_series",
    "halo_report",
    "newton_polygon",
]
