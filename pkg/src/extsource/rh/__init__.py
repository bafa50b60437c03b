"""Lambda-functions, level curves and the model and local parametrices."""

from .lambdas import *  # noqa: F401,F403
from .curves import *  # noqa: F401,F403
from .model import *  # noqa: F401,F403
