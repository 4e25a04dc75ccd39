"""Python access to the hqfno core library."""

import json

from . import _hqfno
from ._hqfno import ConfigError, DataError, LoadError, NumericError, ShapeError
from ._hqfno import field_errors, fim_eigenvalues, fourier_support, generate_fields, h_star, iou, speed_for

__all__ = [
    "ConfigError", "DataError", "LoadError", "NumericError", "ShapeError", "Model",
    "count_params", "field_errors", "fim_eigenvalues", "fourier_support", "generate_fields",
    "h_star", "iou", "resolve_config", "speed_for",
]


def resolve_config(user=None):
    """Defaults overlaid with `user`; unknown keys raise ConfigError."""
    return json.loads(_hqfno.resolve_config(json.dumps(user or {})))


def count_params(**model):
    return _hqfno.count_params(json.dumps(model))


class Model:
    def __init__(self, inner):
        self._m = inner

    @classmethod
    def random(cls, seed=0, **model):
        return cls(_hqfno.Model.random(json.dumps(model), seed))

    @classmethod
    def load(cls, path):
        return cls(_hqfno.Model.load(str(path)))

    def save(self, path):
        self._m.save(str(path))

    @property
    def config(self):
        return json.loads(self._m.config())

    def trainable_count(self):
        return self._m.trainable_count()

    def make_input(self, power, speed, grid):
        """(1, C_in, X, Y, Z) input for one process point."""
        return self._m.make_input(power, speed, *grid)

    def predict(self, x):
        """(B, C_in, X, Y, Z) -> (T / T_ref, alpha), each (B, 1, X, Y, Z)."""
        return self._m.predict(x)
