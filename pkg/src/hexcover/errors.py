"""Exception types raised by the planner, geometry and simulator."""


class HexCoverError(Exception):
    """Base class for all package errors."""


class ConflictingObservation(HexCoverError):
    """A hex already in the explored map was reported with a different status."""


class NoPath(HexCoverError):
    """A* found no route through explored free hexes."""


class DegenerateCenters(HexCoverError, ValueError):
    pass


class CirclesTooClose(HexCoverError, ValueError):
    """Inner tangents do not exist for circles closer than twice the radius."""


class ChordTooLong(HexCoverError, ValueError):
    pass


class AnchorOffCircle(HexCoverError, ValueError):
    pass


class PlacementFailure(HexCoverError):
    """Obstacle generation gave up after too many rejected samples."""


class Stuck(HexCoverError):
    """The planner asked the robot to enter a hex that is occupied in ground truth."""


class ConfigError(HexCoverError, ValueError):
    pass


class Collision(HexCoverError):
    """A sampled pose fell inside an obstacle disc."""
