"""How well can four elements tell two walkers apart?

Prints the array gain toward a set of azimuths for the two look angles
used by the dataset, then repeats it for a narrow 10 degree pair.
"""
import numpy as np

from microbeam import ArrayGeometry, array_response

geometry = ArrayGeometry(num_elements=4, spacing_wavelengths=0.5)
azimuths = np.arange(60.0, 121.0, 5.0)

for looks in ((75.0, 105.0), (85.0, 95.0)):
    print(f"\nlook angles {looks[0]:.0f} / {looks[1]:.0f} deg   (gain in dB relative to M^2)")
    print("azimuth  " + "  ".join(f"{a:6.0f}" for a in azimuths))
    for look in looks:
        gains = [20 * np.log10(max(abs(array_response(geometry, look, a)), 1e-12) / geometry.num_elements)
                 for a in azimuths]
        print(f"beam {look:3.0f}  " + "  ".join(f"{g:6.1f}" for g in gains))
    tilt = 20 * np.log10(abs(array_response(geometry, looks[0], looks[0]))
                         / abs(array_response(geometry, looks[0], looks[1])))
    print(f"rejection of the other walker: {tilt:.1f} dB")
