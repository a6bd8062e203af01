"""Exception hierarchy for the detector and its tooling."""


class DocQuadError(Exception):
    """Base class for all errors raised by this package."""


class DecodeError(DocQuadError):
    pass


class ImageTooSmall(DocQuadError):
    pass


class ParallelLines(DocQuadError):
    pass


class DegenerateQuad(DocQuadError):
    pass


class PointAtInfinity(DocQuadError):
    pass


class DegenerateBorder(DocQuadError):
    pass


class EmptyRegion(DocQuadError):
    pass


class NotEnoughLines(DocQuadError):
    pass


class NoFeasibleSample(DocQuadError):
    pass


class MissingAnnotation(DocQuadError):
    pass


class MalformedAnnotation(DocQuadError):
    pass
