"""Validated normal-form certificates for planar analytic saddles.

The package computes, in outward-rounded interval arithmetic, a certificate
(flatness order, change-of-variables bounds, convergence radii, the norm
constant K0 and the flow-perturbation constant kappa) for a polynomial
saddle, and uses it to enclose in closed form where a trajectory exits a
neighbourhood of the saddle and how long the passage takes — the regime
where numerical integrators break down.
"""

from .interval import (
    AmbiguousInteger,
    DivisionByZeroInterval,
    DomainError,
    Interval,
    IntervalError,
    format_interval,
)
from .series import MajorantSeries1, MultiIndex, TruncatedSeries2, compose_shift, majorant_collapse
from .prep import DiagField, NotAFixedPoint, NotASaddle, RawField, diagonalize, eigen_enclose, translate
from .flatness import (
    FlatnessData,
    NoFlatOrder,
    ResonantDivisor,
    compute_N,
    compute_flatness,
    divisor,
    flatness_order,
    omega,
)
from .normal_form import (
    Certificate,
    CertificationFailed,
    GeometricFit,
    HeuristicConfig,
    certify,
    compute_A,
    compute_K0,
    compute_kappa,
    derive_orders,
    fit_geometric,
    phi_inverse_bound,
    phi_residuals,
    solve_g_hat,
    solve_phi,
    verify_G_convergence,
    verify_phi_convergence,
)
from .flyby import (
    EntryPoint,
    FlybyResult,
    LeftValidityDomain,
    StraddlesStableManifold,
    enter_box,
    exit_enclosure,
    exit_to_original,
    flyby,
    graphic_laps,
)
from .fileformats import (
    certificate_from_text,
    certificate_to_text,
    parse_config_file,
    parse_field_file,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
