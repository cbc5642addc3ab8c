"""End-to-end classification at desk scale, beams versus one antenna.

Runs 120 simulated examples (about a minute per mode on one core) and
prints both held-out confusion matrices.
"""
from microbeam import profile_defaults
from microbeam.experiment import run_experiment

config = profile_defaults("desk")
for mode in ("beams", "single"):
    cm = run_experiment(config, mode)
    print(f"\n{mode}:")
    print(cm.as_table())
