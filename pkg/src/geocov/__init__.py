"""Coverage analysis of geostationary satellite networks.

Satellites are modeled as a binomial point process on the geostationary
circle.  The package computes satellite visibility and distance
distributions, interference Laplace transforms and coverage probabilities
(both the exact binomial forms and their Poisson-limit approximations),
and cross-validates everything with a Monte Carlo link simulator and real
two-line-element snapshots.
"""

from geocov.geometry import (
    GeometryContext,
    TerminalPosition,
    case_probabilities,
    invisibility_latitude,
    p_int,
    p_vis,
    psi,
    r_max,
    r_min,
    r_vis_max,
    radius_at_arc_fraction,
    visible_arc_length,
)
from geocov.distances import DistanceKind, DistanceLaw, cdf, pdf, quantile, sample
from geocov.channel import (
    FadingLaw,
    NetworkConfig,
    default_network_config,
    nakagami_cdf,
    nakagami_cdf_approx,
    path_loss,
    pt_from_eirp_density,
    sample_fading,
    sinr,
)
from geocov.analysis import (
    CoverageMethod,
    CoverageResult,
    QuadratureConvergenceError,
    QuadratureSpec,
    arc_integral,
    coverage_bpp,
    coverage_ppp,
    coverage_rayleigh,
    laplace_interference_bpp,
    laplace_interference_ppp,
)
from geocov.montecarlo import (
    Constellation,
    TrialOutcome,
    VisibilityCase,
    draw_constellation,
    estimate,
    estimate_curve,
    run_trial,
)
from geocov.tle import (
    GeoSnapshot,
    TleRecord,
    average_visible_count,
    parse_tle,
    subsatellite_longitude,
)

__version__ = "0.1.0"
