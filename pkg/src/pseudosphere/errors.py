"""Exception hierarchy shared by all pseudosphere modules."""


class PseudosphereError(Exception):
    """Base class for all library errors."""


class AxisOutOfRange(PseudosphereError):
    """Differentiation axis does not exist on the grid."""


class GridTooSmall(PseudosphereError):
    """Grid has fewer nodes than the stencil width requires."""


class NonFiniteEntry(PseudosphereError):
    """A field or matrix contains NaN or infinite entries."""


class TooFewPoints(PseudosphereError):
    """Point cloud too small for the requested span computation."""


class DegenerateImmersion(PseudosphereError):
    """Induced metric is (numerically) singular."""


class SeedDegenerate(PseudosphereError):
    """Seed basis does not span the normal space after projection."""


class NotHorospherical(PseudosphereError):
    """Chart fails the horospherical metric check (g11 = 1, g1j = 0)."""


class RankAmbiguous(PseudosphereError):
    """Second singular value sits in the band where rank 1 and rank 2
    cannot be told apart at the configured threshold."""


class NoDegeneracy(PseudosphereError):
    """Mixed second-form rows vanish; no distinguished normal direction."""


class KernelVanishes(PseudosphereError):
    """The kernel-defining coefficient pair vanishes at some node."""


class LeftDomain(PseudosphereError):
    """An integral curve exited the grid before the check finished."""


class DomainViolation(PseudosphereError):
    """Requested domain violates a closed-form validity guard."""


class PivotLoss(PseudosphereError):
    """Algebraic constraint solve lost its pivot (divisor too small)."""


class BlowUp(PseudosphereError):
    """Evolved fields exceeded the blow-up bound."""


class PathInconsistency(PseudosphereError):
    """Frame integration along transposed path orders disagrees."""


class SpecMismatch(PseudosphereError):
    """Base surface and surface spec describe different cases."""


class OriginSingularity(PseudosphereError):
    """Cartesian chart requested points with polar radius below range."""


class ConfigError(PseudosphereError):
    """Invalid command-line / run configuration."""
