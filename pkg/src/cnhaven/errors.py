"""Exception types shared across the package."""


class CnHavenError(Exception):
    """Base class for all cnhaven errors."""


class InputTooShort(CnHavenError):
    """Hash input shorter than the minimum the algorithm reads."""


class BadSeedLength(CnHavenError):
    """AES key-schedule seed is not exactly 32 bytes."""


class Misaligned(CnHavenError):
    """Scratchpad offset not a multiple of 16."""


class OutOfBounds(CnHavenError):
    """Scratchpad offset outside the buffer."""


class BadHashId(CnHavenError):
    """hash_id does not fit the configured pipeline depth."""


class ConfigInvalid(CnHavenError):
    """Pipeline configuration violates its invariants."""


class Deadlock(CnHavenError):
    """Simulator found no runnable event while work remains."""


class MalformedTrace(CnHavenError):
    """Trace file or record stream violates the trace format."""


class JobError(CnHavenError):
    """Mining job file is malformed or inconsistent."""
