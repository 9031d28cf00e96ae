"""
Exception types raised by the entanglement toolkit
"""


class EntanglementError(ValueError):
    """Base class for all toolkit errors"""


class NotHermitian(EntanglementError):
    """Matrix fails the relative Hermiticity check"""


class NotNormalized(EntanglementError):
    """Pure-state amplitudes do not have unit norm"""


class InvalidDensityMatrix(EntanglementError):
    """Matrix is not Hermitian, unit-trace and positive semidefinite"""


class NotUnit(EntanglementError):
    """Measurement direction is not a unit vector"""


class NotOrthogonal(EntanglementError):
    """Measurement directions of one party are not orthogonal"""


class InvalidCount(EntanglementError):
    """Count argument outside its allowed range"""


class ConfigInvalid(EntanglementError):
    """Experiment configuration violates a precondition"""


class LabelMismatch(EntanglementError):
    """Tallies for different statistics cannot be merged"""


class StateFileError(EntanglementError):
    """State file cannot be parsed"""


class SettingsFileError(EntanglementError):
    """Settings file cannot be parsed or holds invalid directions"""
