"""Simulate one Class-1 scene and look at its spectrograms.

Writes PGM images (positive Doppler up, time to the right) for both beams
and for a single antenna into ./demo_out, and prints how the energy splits
between approaching (negative Doppler) and receding (positive) halves.
"""
from pathlib import Path

from microbeam import beam_weights, profile_defaults, selection_weights
from microbeam.dsp import half_plane_energy, process_beam
from microbeam.fileio import render_pgm
from microbeam.scene import dataset_plan, synthesize

out = Path("demo_out")
out.mkdir(exist_ok=True)

config = profile_defaults("desk")
plan = dataset_plan(config.scene, config.radar)[0]          # first example is Class 1
for w in plan.scene.walkers:
    print(f"walker at {w.azimuth_deg:.0f} deg: {w.radial_speed_mps:+.2f} m/s, gait {w.gait_hz:.2f} Hz")

cube = synthesize(plan.scene, config.radar)
geometry = config.radar.geometry
views = {f"beam_{a:.0f}": beam_weights(geometry, a) for a in config.look_angles}
views["antenna_0"] = selection_weights(geometry, 0)

for name, weights in views.items():
    spec = process_beam(cube, weights, config.processing)
    neg, pos = half_plane_energy(spec)
    (out / f"{name}.pgm").write_bytes(render_pgm(spec.power))
    print(f"{name:10s} approaching share {neg / (neg + pos):.2f} -> {out / (name + '.pgm')}")
