"""Writes the sample inputs under data/ (seeded, reproducible)."""
import json
import math
import pathlib

import numpy as np

# (A, mu, sigma, B, lambda or None when capped) for the 99th-percentile fits.
FITS = {
    "astro-ph": (2.19, 1.61, 0.817, 0.158, 1.21),
    "comp-sci": (11.4, 1.56, 0.741, 0.379, None),
    "cond-mat": (4.6, 1.83, 0.802, 0.279, 0.916),
    "hep": (3.71, 1.37, 0.725, 0.277, None),
    "math": (6.25, 1.91, 0.927, 0.452, 0.439),
    "oth-phys": (5.04, 1.76, 0.805, 0.259, None),
}
VOL = {"s1": 0.0281, "s2": 0.200}


def u(p, t):
    A, mu, sigma, B, lam = p
    s = t + 1.0
    f = A * math.exp(-((math.log(s) - mu) ** 2) / (2 * sigma * sigma)) / (s * sigma * math.sqrt(2 * math.pi))
    g = B * (math.tanh(lam * t) if lam is not None else (1.0 if t > 0 else 0.0))
    return f + g


def main():
    out = pathlib.Path(__file__).resolve().parent.parent / "data"
    out.mkdir(exist_ok=True)
    rng = np.random.default_rng(2019)

    rows = ["eprint_id,discipline,submit_year,age,citations_in_year"]
    for k in range(600):
        disc = list(FITS)[k % 6]
        year = int(rng.integers(2000, 2020))
        # Per-eprint lognormal attention multiplier with unit mean.
        scale = rng.lognormal(-0.5, 1.0)
        eid = f"{year % 100:02d}{(k // 6) % 12 + 1:02d}.{k:05d}"
        for age in range(2019 - year + 1):
            c = int(rng.poisson(scale * u(FITS[disc], age)))
            rows.append(f"{eid},{disc},{year},{age},{c}")
    (out / "sample_long.csv").write_text("\n".join(rows) + "\n")

    rows = ["t,m_hat"]
    for t in range(1, 25):
        m = math.sqrt(VOL["s2"] * math.log(t / VOL["s1"] + 1.0))
        rows.append(f"{t},{m * (1.0 + 0.01 * rng.standard_normal()):.6f}")
    (out / "astro_ph_mseries.csv").write_text("\n".join(rows) + "\n")

    fits = []
    for d, (A, mu, sigma, B, lam) in FITS.items():
        fits.append({"discipline": d, "A": A, "mu": mu, "sigma": sigma, "B": B,
                     "lambda": lam, "lambda_capped": lam is None})
    (out / "arxiv_p99_fits.json").write_text(json.dumps({"fits": fits}, indent=2) + "\n")
    (out / "astro_ph_vol.json").write_text(json.dumps(VOL, indent=2) + "\n")


if __name__ == "__main__":
    main()
