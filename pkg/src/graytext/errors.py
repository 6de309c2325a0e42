"""Exception types shared across the package."""


class GraytextError(Exception):
    """Base class for every error this package raises on purpose."""


class InvalidGrayLevel(GraytextError):
    """A gray sample or gray-level set member fell outside [0, 255]."""


class MissingGlyph(GraytextError):
    """The font cannot shape one or more characters of the word."""


class ZeroArea(GraytextError):
    """Rasterization produced no ink (empty or whitespace-only word)."""


class OutOfBounds(GraytextError):
    """A placement does not fit inside the image it was applied to."""


class EmptyCandidates(GraytextError):
    """No usable gray level remains after the margin filter."""


class NoFit(GraytextError):
    """No placement can keep the word (mask and quad) inside the background.

    Distinct from abandonment: abandonment means every tried placement had an
    empty candidate set; NoFit means there was nothing to try.
    """


class EmptyLibrary(GraytextError):
    """No usable font was found."""


class EmptyPool(GraytextError):
    """No usable background image was found."""


class EmptyCorpus(GraytextError):
    """The word list contains no words."""


class DatasetError(GraytextError):
    """A dataset file is missing or unreadable.

    Carries enough context to point at the offending file (and line, for
    line-oriented files).
    """

    def __init__(self, message: str, *, file: str | None = None, line: int | None = None):
        self.file = file
        self.line = line
        where = ""
        if file is not None:
            where = f" [{file}" + (f":{line}" if line is not None else "") + "]"
        super().__init__(message + where)
