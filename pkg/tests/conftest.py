import numpy as np
import pytest

from ptkk._kernels import pv_hilbert


@pytest.fixture(scope="session", autouse=True)
def warm_kernel():
    # first call JIT-compiles the numba backend; keep that out of timed tests
    pv_hilbert(np.linspace(0.0, 1.0, 16))


def contour_residue(response, center: complex, radius: float = 1e-3, n: int = 2048) -> complex:
    """Residue by direct contour integration: (2 pi i)^-1 times the loop
    integral of the response on a small circle, trapezoid in the angle
    parameterization.  Independent of the numerator/denominator-derivative
    formula it cross-checks."""
    theta = np.linspace(0.0, 2.0 * np.pi, n + 1)
    z = center + radius * np.exp(1j * theta)
    integrand = response(z) * 1j * radius * np.exp(1j * theta)
    dtheta = theta[1] - theta[0]
    integral = np.sum((integrand[1:] + integrand[:-1]) / 2) * dtheta
    return complex(integral / (2j * np.pi))
