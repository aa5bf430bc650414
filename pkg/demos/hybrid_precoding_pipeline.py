#!/usr/bin/env python3
"""One full pass of the location-based multiple-access pipeline.

Draws multipath channels for a handful of users, sweeps a location codebook
and a DFT codebook to build the two analog precoders, estimates effective
channels, designs ZF and WMMSE digital precoders, and prints the resulting
sum rates next to the fully-digital ZF reference.

Run:  python3 demos/hybrid_precoding_pipeline.py
"""

import numpy as np

from ldma import ArrayConfig, Location, SystemConfig
from ldma.channel import ScatterRegion, sample_near_channel
from ldma.codebook import analog_precoder, build_dft_codebook, build_polar_codebook, sweep_assign
from ldma.performance import spectrum_efficiency
from ldma.precoding import (
    PrecoderSet,
    estimate_effective_channel,
    fully_digital_zf,
    wmmse_precoder,
    zf_precoder,
)

ARRAY = ArrayConfig.half_wavelength(257, 30e9)
K = 4
RICIAN = 31.6
rng = np.random.default_rng(3)

# users on the broadside ray, concentrated where distance resolution exists
u = rng.uniform(1 / 100, 1 / 4, K)
users = [Location(1 / ui, 0.0) for ui in u]
scatter = ScatterRegion(4.0, 100.0, -np.pi / 3, np.pi / 3)
channels = [sample_near_channel(ARRAY, loc, 5, RICIAN, scatter, rng) for loc in users]
print("user distances [m]:", np.round(sorted(loc.distance for loc in users), 1))

location_cb = build_polar_codebook(ARRAY, r_min=4.0, coherence_target=0.7)
dft_cb = build_dft_codebook(ARRAY)
print(f"codebooks: location {location_cb.size} codewords, DFT {dft_cb.size}")

front_ends = {}
for name, cb in (("location", location_cb), ("far-field", dft_cb)):
    assignment = sweep_assign(channels, cb)
    front_ends[name] = analog_precoder(cb, assignment, K)
    labels = [cb.labels[assignment.user_to_codeword[k]] for k in range(K)]
    pretty = [(round(a, 3), None if r is None else round(r, 1)) for a, r in labels]
    print(f"  {name} beams (angle, distance): {pretty}")

print(f"\n{'snr':>5} {'loc-zf':>8} {'loc-wmmse':>10} {'far-zf':>8} {'far-wmmse':>10} {'full-zf':>9}")
for snr_db in (0.0, 10.0, 20.0):
    sys = SystemConfig(num_users=K, total_power=1.0, noise_variance=10 ** (-snr_db / 10))
    row = [f"{snr_db:5.0f}"]
    for name in ("location", "far-field"):
        analog = front_ends[name]
        eff = estimate_effective_channel(analog, channels)
        zf = zf_precoder(eff, sys, analog)
        row.append(f"{spectrum_efficiency(channels, zf, sys).sum_rate:8.2f}")
        wm = wmmse_precoder(eff, sys, analog)
        rate = spectrum_efficiency(
            channels, wm.precoders, sys.with_allocation(wm.power_allocation)
        ).sum_rate
        row.append(f"{rate:10.2f}")
    full = fully_digital_zf(channels, sys)
    full_set = PrecoderSet(analog=full, digital=np.eye(K, dtype=complex), power_diag=np.ones(K))
    row.append(f"{spectrum_efficiency(channels, full_set, sys).sum_rate:9.2f}")
    print(" ".join(row))

print("\nMonte Carlo versions of this comparison:")
print("  ldma run configs/linear_multipath.json --out runs/ --workers 4")
print("  ldma run configs/uniform_cell.json --out runs/ --workers 4")
