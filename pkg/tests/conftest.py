import os

import pytest

from locsplit.fields import NumberFieldAbs
from locsplit.instance_io import parse_instance
from locsplit.polys import PolyOverQ

INSTANCES = os.path.join(os.path.dirname(__file__), os.pardir, "instances")


def instance_path(name):
    return os.path.join(INSTANCES, name)


@pytest.fixture
def gauss():
    """t must be a norm from Q(i) away from {real, 2}."""
    return parse_instance("entry: P=t; g=x^2+1; b=1\nS: real, 2\n")


@pytest.fixture
def gaussian_field():
    return NumberFieldAbs(PolyOverQ((1, 0, 1)))


@pytest.fixture
def real_quadratic_instance():
    return parse_instance("entry: P=t^2-2; g=x^2-a; b=1\nS: real, 2\ntarget: real t=0 eps=1\n")
