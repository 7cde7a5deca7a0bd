"""Composition statistics of the compiled two-qubit Clifford group."""

import json
import time

from eoqubits.compiler.clifford import two_qubit_cliffords

t = time.perf_counter()
stats = two_qubit_cliffords().statistics()
stats["build_seconds"] = round(time.perf_counter() - t, 2)
print(json.dumps(stats, indent=2, sort_keys=True))
