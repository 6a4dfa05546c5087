"""Exception types shared across the package.

Everything raised on purpose derives from DamagesegError so the CLI can
map failures to a single nonzero exit path with a readable message.
"""


class DamagesegError(Exception):
    pass


class ParameterError(DamagesegError):
    """A caller-supplied parameter is outside its documented domain."""


class DimensionMismatchError(DamagesegError):
    def __init__(self, what, shape_a, shape_b):
        super().__init__(f"{what}: shapes {shape_a} and {shape_b} do not match")
        self.shape_a = shape_a
        self.shape_b = shape_b


class LabelDecodeError(DamagesegError):
    """A label PNG holds values outside the allowed set."""


class ManifestError(DamagesegError):
    """Manifest contents violate an invariant."""


class GeneratorError(DamagesegError):
    """The generator protocol contract was violated."""
