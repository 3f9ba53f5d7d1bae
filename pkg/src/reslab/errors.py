"""Exception hierarchy shared by all reslab modules."""


class ReslabError(Exception):
    """Base class for all reslab numeric and usage errors."""


# --- numeric kernel ---
class StepUnderflow(ReslabError):
    """Integrator needed a step below the configured minimum."""


class NonFiniteField(ReslabError):
    """Right-hand side returned NaN or Inf."""


class NoConvergence(ReslabError):
    """Quadrature refinement budget exhausted."""


class DegenerateInput(ReslabError):
    """Polynomial input has no usable coefficients."""


class IllConditioned(ReslabError):
    """Least-squares design matrix condition number above bound."""


# --- layer validity ---
class TooCloseToBifurcation(ReslabError):
    """Requested t is inside the excluded collar around t*."""


class TauTooSmall(ReslabError):
    """Series seed requested below its reliable range."""


class FitFailed(ReslabError):
    """Pole refinement could not satisfy the fit invariants."""


class OutOfLayer(ReslabError):
    """Evaluation point outside the asymptotic layer's validity window."""


class RegularizationUnstable(ReslabError):
    """Finite-part extraction varies beyond tolerance across cutoffs."""


class NearPole(ReslabError):
    """Argument within the exclusion radius of a lattice point."""


class NoRealRoot(ReslabError):
    """Cubic has no usable real root for the period integral."""


class BeyondValidity(ReslabError):
    """Cascade index exceeds the validity bound."""


class OutOfWindow(ReslabError):
    """Intermediate-layer argument too close to a pole."""


# --- frozen system / averaged layer ---
class EmptyLevel(ReslabError):
    """Energy level intersects no orbit."""


class NoClosedComponent(ReslabError):
    """Level set has no bounded loop around the reference center."""


class WrongRootPattern(ReslabError):
    """Quartic root pattern is not two real + one complex pair."""


class NoBracket(ReslabError):
    """Requested action value unattainable at this time."""


class BranchTrackingFailed(ReslabError):
    """Square-root branch could not be continued around the orbit curve."""


class NeitherVariantConsistent(ReslabError):
    """No radicand variant reproduces the frozen-system orbit."""


# --- matcher / simulator ---
class EmptyOverlap(ReslabError):
    """Requested overlap window is empty or invalid."""


class InsufficientPoints(ReslabError):
    """Not enough reports for a scaling fit."""


class NoSpikes(ReslabError):
    """Run contains no detected spikes."""


class TooFewCycles(ReslabError):
    """Run contains too few complete oscillation cycles."""


class NoValidLayer(ReslabError):
    """Point falls in no layer's validity window."""
