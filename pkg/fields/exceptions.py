class GffxError(Exception):
    """Base class for errors raised by the lattice and field code."""


class DimensionError(GffxError, ValueError):
    """The lattice dimension is below 3, where the Green's function diverges."""


class DomainError(GffxError, ValueError):
    """A site set, box or parameter lies outside the supported range."""


class QuadratureError(GffxError):
    def __init__(self, message, achieved):
        super().__init__(f'{message} (achieved error {achieved:.3e})')
        self.achieved = achieved


class CovarianceError(GffxError):
    """The Green covariance is not numerically positive definite."""

    def __init__(self, message, min_pivot):
        super().__init__(f'{message} (minimum pivot {min_pivot:.3e})')
        self.min_pivot = min_pivot


class TruncationError(GffxError):
    """The start point or target set touches the truncation boundary."""


class SolverError(GffxError):
    pass


class ConfigError(GffxError):
    def __init__(self, errors):
        self.errors = dict(errors)
        detail = '; '.join(f'{key}: {" ".join(map(str, msgs))}' for key, msgs in self.errors.items())
        super().__init__(f'invalid experiment config: {detail}')


class ReplicateError(GffxError):
    """A replicate failed; ``partial`` holds the results completed before it, in index order."""

    def __init__(self, index, partial, cause):
        super().__init__(f'replicate {index} failed: {cause}')
        self.index = index
        self.partial = partial
        self.cause = cause
