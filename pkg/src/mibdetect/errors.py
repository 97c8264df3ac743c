"""Exception hierarchy.

Every error raised by the library derives from :class:`MibError`; the CLI
prints ``error[<ClassName>]: <message>`` for any of them.
"""


class MibError(Exception):
    """Base class for all library errors."""

    @property
    def kind(self):
        return type(self).__name__


class EmptyFile(MibError):
    pass


class MissingColumn(MibError):
    def __init__(self, column):
        super().__init__(f"header lacks column {column!r}")
        self.column = column


class BadValue(MibError):
    def __init__(self, row, column, value):
        super().__init__(f"row {row}, column {column}: bad value {value!r}")
        self.row = row
        self.column = column
        self.value = value


class UnknownFeature(MibError):
    pass


class ClassTooSmall(MibError):
    def __init__(self, label, count, k):
        super().__init__(f"class {label!r} has {count} rows, needs at least {k}")
        self.label = label
        self.count = count
        self.k = k


class EmptyDataset(MibError):
    pass


class SchemaMismatch(MibError):
    pass


class InvalidConfig(MibError):
    pass


class EmptyCounts(MibError):
    pass


class LengthMismatch(MibError):
    pass


class BadN(MibError):
    pass


class EmptyInput(MibError):
    pass


class EmptyMatrix(MibError):
    pass


class UnknownLabel(MibError):
    pass


class MissingSupport(MibError):
    pass


class NoOobVotes(MibError):
    pass


class ModelFormatError(MibError):
    pass
