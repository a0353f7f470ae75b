"""
Error hierarchy for the bridgelab toolkit

Every error carries the process exit code the CLI should use.
"""


class BridgeLabError(Exception):
    """Base error"""
    exit_code = 1


class ConfigError(BridgeLabError, ValueError):
    """Invalid hyperparameters, grids or experiment configuration"""
    exit_code = 2


class ShapeError(BridgeLabError, ValueError):
    """Dimension mismatch between matrices"""

    @classmethod
    def mismatch(cls, what: str, left: tuple, right: tuple) -> "ShapeError":
        return cls(f"{what}: shape {tuple(left)} does not match shape {tuple(right)}")


class ContractError(BridgeLabError, ValueError):
    """Violated precondition that is not a shape problem"""


class DataError(BridgeLabError):
    """Missing or unusable dataset"""
    exit_code = 3


class IdxParseError(DataError):
    """Malformed IDX file"""

    def __init__(self, message: str, offset: int, path: str | None = None):
        self.offset = offset
        self.path = path
        where = f" in {path}" if path else ""
        super().__init__(f"{message} at byte offset {offset}{where}")


class DivergenceError(BridgeLabError):
    """Training produced a non-finite loss or non-finite weights"""
    exit_code = 4

    def __init__(self, message: str, epoch: int, batch: int, config_echo: str | None = None):
        self.reason = message
        self.epoch = epoch
        self.batch = batch
        self.config_echo = config_echo
        text = f"{message} (epoch {epoch}, batch {batch})"
        if config_echo:
            text += f"\n{config_echo}"
        super().__init__(text)

    def with_config(self, config_echo: str) -> "DivergenceError":
        return DivergenceError(self.reason, self.epoch, self.batch, config_echo)
