"""Exception hierarchy shared by every module."""


class WeylForgeError(Exception):
    """Base class; the CLI maps these to exit code 2."""


class PointOnSupport(WeylForgeError):
    """Evaluation point lies on (or within tolerance of) the source support."""


class InvalidCurve(WeylForgeError):
    """A profile curve violates the pole, positivity or embeddedness conditions."""


class InvalidMeasure(WeylForgeError):
    pass


class DegenerateArea(WeylForgeError):
    pass


class IllConditioned(WeylForgeError):
    pass


class PathBlocked(WeylForgeError):
    pass


class Inadmissible(WeylForgeError):
    """The admissibility inequality alpha >= |beta'| fails somewhere."""

    def __init__(self, theta, chi_value, message=None):
        self.theta = float(theta)
        self.chi_value = float(chi_value)
        if message is None:
            message = (
                f"inadmissible: alpha >= |beta'| violated at theta={self.theta:.6f} "
                f"(chi={self.chi_value:.3e})"
            )
        super().__init__(message)


class OrderUndetectable(WeylForgeError):
    def __init__(self, theta, stable_order):
        self.theta = float(theta)
        self.stable_order = int(stable_order)
        super().__init__(
            f"vanishing order of chi at theta={self.theta:.6f} exceeds the "
            f"stable spectral order {self.stable_order}"
        )


class RootFindFailure(WeylForgeError):
    def __init__(self, theta, reason):
        self.theta = float(theta)
        super().__init__(f"r = beta*u root find failed at theta={self.theta:.6f}: {reason}")


class NoConvergence(WeylForgeError):
    pass


class SourceCollision(WeylForgeError):
    pass


class NotMorse(WeylForgeError):
    pass
