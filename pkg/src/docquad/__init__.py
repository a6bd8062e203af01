"""Document quadrilateral detection from fast-Hough lines, ranked by edge
contour quality and inside/outside color contrast."""

from .detector import COMBINED, CONTOUR, DetectionResult, DetectorConfig, detect
from .geometry import Quad, Template

__version__ = "0.1.0"

__all__ = ["COMBINED", "CONTOUR", "DetectionResult", "DetectorConfig", "Quad", "Template", "detect"]
