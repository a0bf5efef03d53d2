"""Exception hierarchy.

Every error carries the process exit code the command-line front end maps it
to, so the code table lives in one place (see ``EXIT_CODES``).
"""


class QPMError(Exception):
    exit_code = 1


class ConfigError(QPMError):
    exit_code = 3


class ModelFileError(ConfigError):
    """Malformed dispersion-model or run-config file."""

    def __init__(self, path, message, line=None):
        self.path = str(path)
        self.line = line
        where = f"{self.path}:{line}" if line is not None else self.path
        super().__init__(f"{where}: {message}")


# dispersion
class OutOfValidityRange(QPMError):
    exit_code = 10

    def __init__(self, message, wavelength_nm=None, temperature_c=None):
        self.wavelength_nm = wavelength_nm
        self.temperature_c = temperature_c
        super().__init__(message)


class UnknownPolarization(QPMError):
    exit_code = 11


class StencilOutOfRange(OutOfValidityRange):
    exit_code = 12


class NonConverged(QPMError):
    exit_code = 13


# phase matching
class NonPositiveMismatch(QPMError):
    exit_code = 14


# root finding
class NoRootInBracket(QPMError):
    exit_code = 2

    def __init__(self, message, level=None, scan=None):
        self.level = level
        self.scan = scan
        super().__init__(message)


class MultipleRoots(QPMError):
    exit_code = 15

    def __init__(self, message, brackets=()):
        self.brackets = list(brackets)
        super().__init__(message)


class DegenerateRoot(QPMError):
    exit_code = 16


class NonUnique(MultipleRoots):
    exit_code = 17


# spectra
class NormalizationError(QPMError):
    exit_code = 20


class NonPhysical(QPMError):
    exit_code = 21


class DegenerateSpectrum(QPMError):
    exit_code = 22


class EmptySpectrum(QPMError):
    exit_code = 23


class FractionOutOfRange(QPMError):
    exit_code = 24


class InsufficientRange(QPMError):
    exit_code = 25


# metrology
class NoFringeFound(QPMError):
    exit_code = 30


class GainImplied(QPMError):
    exit_code = 31


class InvalidReflectivity(QPMError):
    exit_code = 32


class InvalidIndex(QPMError):
    exit_code = 33


class InvalidContrast(QPMError):
    exit_code = 34


class NegativeNetRate(QPMError):
    exit_code = 35


def _all_errors(cls=QPMError):
    out = [cls]
    for sub in cls.__subclasses__():
        out.extend(_all_errors(sub))
    return out


EXIT_CODES = {cls.__name__: cls.exit_code for cls in _all_errors()}
