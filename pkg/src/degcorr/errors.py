"""Exception hierarchy shared by all modules."""


class DegcorrError(Exception):
    """Base class for all package errors."""


class InvalidNode(DegcorrError, ValueError):
    pass


class SelfLoop(DegcorrError, ValueError):
    pass


class EdgeListFormatError(DegcorrError, ValueError):
    pass


class NoEdges(DegcorrError, ValueError):
    """A metric normalised by the directed edge count was asked of an edgeless graph."""


class TransformDomain(DegcorrError, ValueError):
    pass


class RadiusTooLarge(DegcorrError, ValueError):
    """The connection ball wraps onto itself on the torus (2R >= n**(1/d))."""


class InfiniteMoment(DegcorrError, ValueError):
    pass


class InsufficientConditioning(DegcorrError, RuntimeError):
    """Too few Monte Carlo draws hit the conditioning event d_o = k."""


class InvalidConfig(DegcorrError, ValueError):
    pass
