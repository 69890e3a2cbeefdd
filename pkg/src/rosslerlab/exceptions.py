"""Exception hierarchy shared by all modules.

Every error carries a stable ``code`` so the command-line front end can map
it to an exit status without string matching.
"""


class RosslerError(Exception):
    code = "error"


class DegenerateFixedPoints(RosslerError):
    code = "degenerate_fixed_points"


class ConversionUndefined(RosslerError):
    code = "conversion_undefined"


class NotSaddleFocus(RosslerError):
    code = "not_saddle_focus"


class OffSection(RosslerError):
    code = "off_section"


class UndefinedAtPole(RosslerError):
    code = "undefined_at_pole"


class BlowUp(RosslerError):
    code = "blow_up"


class StepUnderflow(RosslerError):
    code = "step_underflow"


class NoDiscontinuityFound(RosslerError):
    code = "no_discontinuity_found"


class NoCrossing(RosslerError):
    code = "no_crossing"


class LoopTooCoarse(RosslerError):
    code = "loop_too_coarse"


class LoopHitsDiscontinuity(RosslerError):
    code = "loop_hits_discontinuity"


class UndecidedPoint(RosslerError):
    code = "undecided_point"


class NonGenericProjection(RosslerError):
    code = "non_generic_projection"


class DegenerateDiagram(RosslerError):
    code = "degenerate_diagram"
