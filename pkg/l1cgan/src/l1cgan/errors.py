"""Exception hierarchy. Everything raised on purpose derives from L1cganError."""


class L1cganError(Exception):
    pass


class ConfigError(L1cganError):
    pass


class DataError(L1cganError):
    pass


class TrainError(L1cganError):
    pass


class ServeError(L1cganError):
    pass
