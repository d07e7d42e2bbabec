#!/usr/bin/env python3
"""Generate the synthetic benchmark route (180 months, 2009-01 .. 2023-12).

Seasonal counts on a piecewise level with a low baseline and episodic
surges, so the stationary SNR sits near 1 as on the real routes. The last
regime is a level shift that starts inside the validation tail and climbs
above every historic surge.

    python3 make_synthetic.py > synthetic.csv
"""

import argparse
import math

import numpy as np

START_YEAR = 2009
MONTHS = 180
BASE = 400.0

# (first month index, last month index inclusive, level)
EPISODES = [
    (26, 33, 2600.0),    # 2011-03 .. 2011-10
    (53, 64, 1100.0),    # 2013-06 .. 2014-05
    (77, 85, 3000.0),    # 2015-06 .. 2016-02
    (111, 122, 1100.0),  # 2018-04 .. 2019-03
    (135, 137, 150.0),   # 2020-04 .. 2020-06
    (146, 153, 1100.0),  # 2021-03 .. 2021-10
]
SHIFT_ONSET = 161  # 2022-06
SHIFT_LEVEL = 3500.0
SHIFT_CLIMB = 20.0  # per month after onset


def level(t: int) -> float:
    if t >= SHIFT_ONSET:
        return SHIFT_LEVEL + SHIFT_CLIMB * (t - SHIFT_ONSET)
    for first, last, value in EPISODES:
        if first <= t <= last:
            return value
    return BASE


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--seed", type=int, default=20240901)
    parser.add_argument("--route", default="SYN")
    parser.add_argument("--noise", type=float, default=0.12)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    print("route,year,month,value")
    for t in range(MONTHS):
        year, month = START_YEAR + t // 12, t % 12 + 1
        season = 1.0 + 0.45 * math.sin(2.0 * math.pi * (month - 4) / 12.0)
        mean = level(t) * season * math.exp(rng.normal(0.0, args.noise))
        print(f"{args.route},{year},{month},{int(rng.poisson(mean))}")


if __name__ == "__main__":
    main()
