"""Exception hierarchy shared by every module."""


class StakeweightError(Exception):
    """Base class for all errors raised by this package."""


class EmptySetError(StakeweightError, ValueError):
    def __init__(self, what="validator set"):
        super().__init__(f"{what} is empty")


class DuplicateAddressError(StakeweightError, ValueError):
    def __init__(self, address):
        self.address = address
        super().__init__(f"duplicate validator address {address!r}")


class NegativeStakeError(StakeweightError, ValueError):
    def __init__(self, address, stake=None):
        self.address = address
        self.stake = stake
        super().__init__(f"negative stake for validator {address!r}: {stake}")


class SchemaError(StakeweightError, ValueError):
    def __init__(self, field, reason):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")


class OutOfRangeError(StakeweightError, ValueError):
    pass


class InvalidHorizonError(StakeweightError, ValueError):
    pass


class ValidatorIndexError(StakeweightError, IndexError):
    pass


class DuplicateIndexError(StakeweightError, ValueError):
    pass


class FetchError(StakeweightError):
    """Anything that goes wrong while talking to a chain endpoint."""


class NetworkError(FetchError):
    pass


class PaginationError(FetchError):
    pass


class MalformedResponseError(FetchError):
    pass
