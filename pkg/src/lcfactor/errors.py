"""Exception hierarchy.

Every error carries a short snake_case ``code`` that the CLI embeds in
its JSON error objects.
"""


class LCError(ValueError):
    code = "lc_error"


class IncidentCenter(LCError):
    """Center lies on the plane where a non-incident pair is required."""

    code = "incident_center"


class NonIncidentCenter(LCError):
    code = "non_incident_center"


class CoincidentPlanes(LCError):
    code = "coincident_planes"


class RankDeficient(LCError):
    """Camera matrix does not have row rank 3."""

    code = "rank_deficient"


class Unnormalizable(LCError):
    code = "unnormalizable"


class NotPinhole(LCError):
    code = "not_pinhole"


class NotAffine(LCError):
    code = "not_affine"


class NoBranchAccepted(LCError):
    """No candidate branch passed both the trig identity and the reconstruction check."""

    code = "no_branch_accepted"


class RankDeficientSystem(LCError):
    code = "rank_deficient_system"


class NotReducible(LCError):
    code = "not_reducible"


class DegenerateAffine(LCError):
    code = "degenerate_affine"


class Singular(LCError):
    code = "singular"


class AllLinesParallel(LCError):
    code = "all_lines_parallel"


class ParallelLines(LCError):
    code = "parallel_lines"


class NotUnit(LCError):
    code = "not_unit"


class ImagePointAtInfinity(LCError):
    code = "image_point_at_infinity"


class InternalConsistencyError(LCError):
    code = "internal_consistency"
