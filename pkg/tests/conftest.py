"""Fixtures compartidas de la suite."""
import math

import numpy as np
import pytest

from app import create_app
from app.src.catalog import build_metric
from app.src.numdiff import StencilConfig

SEED = 20240601


@pytest.fixture(scope="session")
def app():
    app = create_app()
    app.config.update(TESTING=True)
    return app


@pytest.fixture()
def client(app):
    return app.test_client()


@pytest.fixture(scope="session")
def stencil():
    return StencilConfig()


@pytest.fixture(scope="session")
def fd_only():
    # fuerza la ruta por diferencias aun si la metrica tiene chorro exacto
    return StencilConfig(use_exact=False)


@pytest.fixture(scope="session")
def schwarzschild():
    return build_metric("schwarzschild")


@pytest.fixture(scope="session")
def eds():
    return build_metric("eds")


@pytest.fixture(scope="session")
def kasner():
    return build_metric("kasner")


@pytest.fixture(scope="session")
def ltb():
    return build_metric("ltb")


@pytest.fixture()
def ltb_point():
    return np.array([1.0, 1.0, math.pi / 2, 3.0])
