"""Evaluating a chain with u-bit floats and reading the certified error.

The float pipeline first shifts rewards so every reward rate is at least
one.  It then rounds every number to u+1 significant bits and runs the
same elimination as the exact solver.  From 1000 N^2 bits on it states an
error bound.
"""

from __future__ import annotations

import random
import warnings

from boundedmem import mp_value, mp_value_float
from boundedmem.approx import CertificateWarning, certificate_floor
from boundedmem.generators import random_chain

chain = random_chain(random.Random(3), n=3)
exact = mp_value(chain)
print("exact value:", exact, f"({float(exact):.6f})")

# %% Low precision: an answer, but no certificate.
with warnings.catch_warnings(record=True) as caught:
    warnings.simplefilter("always")
    for u in (8, 32, 128):
        result = mp_value_float(chain, u)
        print(f"u={u:4}: error {float(abs(result.value - exact)):.3e}")
print("warnings raised:", sum(issubclass(w.category, CertificateWarning) for w in caught))

# %% At the certificate floor the bound is attached to the result.
u = certificate_floor(3)
result = mp_value_float(chain, u)
err = abs(result.value - exact)


def log2(x) -> str:
    # Too small for a float, so compare bit lengths instead.
    return "-inf" if x == 0 else str(x.numerator.bit_length() - x.denominator.bit_length())


print(f"u={u}: shift {result.shift}, shifted reward bound about {float(result.c_shifted):.4f}")
print(f"  log2 error {log2(err)}, log2 bound {log2(result.bound)}, within: {err <= result.bound}")
