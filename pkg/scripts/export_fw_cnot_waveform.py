"""Write the FW-CNOT voltage schedule as JSON and a 0.5 ns CSV trace."""

import sys
from pathlib import Path

from eoqubits.compiler.gates import build_fw_cnot
from eoqubits.waveform import emit_schedule

out = Path(sys.argv[1] if len(sys.argv) > 1 else "runs/waveform")
out.mkdir(parents=True, exist_ok=True)
sched = emit_schedule(build_fw_cnot())
sched.to_json(out / "fw_cnot.json")
sched.to_csv(out / "fw_cnot.csv", 0.5)
print(f"{len(sched.segments('X'))} barrier pulses, {sched.duration:.0f} ns -> {out}")
