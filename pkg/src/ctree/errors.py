"""Exception hierarchy with stable machine-readable codes.

The HTTP service maps each class to a status code; the ``code`` attribute
travels in error response bodies so clients can branch on it.
"""

from __future__ import annotations


class CtreeError(Exception):
    code = "internal"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class ValidationError(CtreeError):
    code = "validation"


class NotFoundError(CtreeError):
    code = "not_found"


class LifecycleError(CtreeError):
    """Operation on a node or session in a terminal state."""

    code = "lifecycle"


class StructuralError(CtreeError):
    """Tree-shape violation: root deletion, unresolved children, bad branch point."""

    code = "structural"


class VolatilityError(CtreeError):
    """Volatile node given a disposition other than merge or purge."""

    code = "volatility_contract"


class ConfigurationError(CtreeError):
    code = "configuration"


class TransportError(CtreeError):
    """Provider call failed after exhausting retries."""

    code = "transport"

    def __init__(self, message: str, detail: str | None = None):
        super().__init__(message)
        self.detail = detail


class IntegrityError(CtreeError):
    """Event log sequence gap or corrupt record."""

    code = "integrity"


class ContractError(CtreeError):
    """Persistence contract violation, e.g. compacting a node that was never purged."""

    code = "contract"
