import logging

logger = logging.getLogger(__name__)

# registers the selection strategies and the reporters under their configuration names
from featprop.plugins import helpers, regularizers, reporters, strategies, trainers  # noqa: E402,F401

__version__ = '0.1.0'
