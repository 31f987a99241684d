"""Single entry point dispatching on the design kind."""

from __future__ import annotations

from .fuzzy import estimate_fuzzy
from .kink import estimate_kink
from .models import DesignKind, RddEstimate, RddRequest
from .sharp import estimate_sharp


def estimate(request: RddRequest) -> RddEstimate:
    """Run the estimator for ``request.design_kind``."""
    if request.design_kind is DesignKind.FUZZY:
        return estimate_fuzzy(request)
    if request.design_kind is DesignKind.KINK:
        return estimate_kink(request)
    return estimate_sharp(request)
