"""Underwater wireless optical OFDM link simulator and configuration-learning workbench."""

from . import channel, config, dataset, linksim, mlcore, phy, switchopt, turbo
from .errors import ContractError, DomainError, ParseError, SchemaError, UwocError

__version__ = "0.1.0"

__all__ = [
    "channel", "config", "dataset", "linksim", "mlcore", "phy",
    "switchopt", "turbo",
    "ContractError", "DomainError", "ParseError", "SchemaError", "UwocError",
    "__version__",
]
