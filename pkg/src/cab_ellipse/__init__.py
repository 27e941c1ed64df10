"""Multiple ellipse detection with a collective-animal-behavior optimizer."""

from .cab import CAB, Bounds, CabConfig, ScoredPosition, default_rho
from .detector import (
    Detection,
    DetectorConfig,
    EllipseDetector,
    InvalidCandidate,
    TooFewEdgePixels,
    detect,
    distinctiveness,
    extract,
    similarity_threshold,
)
from .edges import CannyConfig, canny, edge_vector
from .evaluation import EvalWeights, RunReport, error_score, multiple_error, success_rate
from .geometry import (
    ConicCoeffs,
    DegenerateConfiguration,
    EllipseParams,
    NotAnEllipse,
    conic_to_ellipse,
    ellipse_through,
    fit_conic_five_points,
    point_on_ellipse,
)
from .pnm import ImageFormatError, load_gray, save_gray
from .raster import mea_quadrant, rasterize
from .synth import SceneSpec, Shape, add_salt_pepper, render

__version__ = "0.1.0"
