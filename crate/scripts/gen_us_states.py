#!/usr/bin/env python3
"""Write a synthetic one-to-many migration table: Texas to the other
contiguous states (Rhode Island and DC left out), projected to Albers
equal-area metres. Volumes come from a simple gravity model, so the table
is deterministic and needs no external data."""

import csv
import math
import sys

ORIGIN = ("TX", 31.0, -99.9)

# state, lat, lon, population in thousands (2000)
STATES = [
    ("AL", 32.8, -86.8, 4447), ("AZ", 34.2, -111.7, 5131), ("AR", 34.9, -92.4, 2673),
    ("CA", 37.2, -119.5, 33872), ("CO", 39.0, -105.5, 4301), ("CT", 41.6, -72.7, 3406),
    ("DE", 39.0, -75.5, 784), ("FL", 28.6, -82.4, 15982), ("GA", 32.7, -83.4, 8186),
    ("ID", 44.4, -114.6, 1294), ("IL", 40.0, -89.2, 12419), ("IN", 39.9, -86.3, 6080),
    ("IA", 42.1, -93.5, 2926), ("KS", 38.5, -98.4, 2688), ("KY", 37.5, -85.3, 4042),
    ("LA", 31.1, -92.0, 4469), ("ME", 45.4, -69.2, 1275), ("MD", 39.0, -76.8, 5296),
    ("MA", 42.3, -71.8, 6349), ("MI", 44.3, -85.4, 9938), ("MN", 46.3, -94.3, 4919),
    ("MS", 32.7, -89.7, 2845), ("MO", 38.4, -92.5, 5595), ("MT", 47.0, -109.6, 902),
    ("NE", 41.5, -99.8, 1711), ("NV", 39.3, -116.6, 1998), ("NH", 43.7, -71.6, 1236),
    ("NJ", 40.2, -74.7, 8414), ("NM", 34.4, -106.1, 1819), ("NY", 42.9, -75.5, 18976),
    ("NC", 35.6, -79.4, 8049), ("ND", 47.5, -100.5, 642), ("OH", 40.3, -82.8, 11353),
    ("OK", 35.6, -97.5, 3451), ("OR", 43.9, -120.6, 3421), ("PA", 40.9, -77.8, 12281),
    ("SC", 33.9, -80.9, 4012), ("SD", 44.4, -100.2, 755), ("TN", 35.9, -86.4, 5689),
    ("UT", 39.3, -111.7, 2233), ("VT", 44.1, -72.7, 609), ("VA", 37.5, -78.9, 7079),
    ("WA", 47.4, -120.5, 5894), ("WV", 38.6, -80.6, 1808), ("WI", 44.6, -89.9, 5364),
    ("WY", 43.0, -107.6, 494),
]

R = 6371000.0
LAT1, LAT2, LAT0, LON0 = 29.5, 45.5, 23.0, -96.0


def albers(lat, lon):
    p1, p2, p0 = (math.radians(v) for v in (LAT1, LAT2, LAT0))
    n = (math.sin(p1) + math.sin(p2)) / 2
    c = math.cos(p1) ** 2 + 2 * n * math.sin(p1)
    rho0 = R * math.sqrt(c - 2 * n * math.sin(p0)) / n
    rho = R * math.sqrt(c - 2 * n * math.sin(math.radians(lat))) / n
    theta = n * math.radians(lon - LON0)
    return rho * math.sin(theta), rho0 - rho * math.cos(theta)


def main(out):
    assert len(STATES) == 46
    ox, oy = albers(ORIGIN[1], ORIGIN[2])
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["id", "x", "y", "volume", "role"])
    w.writerow([ORIGIN[0], f"{ox:.1f}", f"{oy:.1f}", "", "origin"])
    for sid, lat, lon, pop in STATES:
        x, y = albers(lat, lon)
        d_km = math.hypot(x - ox, y - oy) / 1000.0
        volume = round(pop * 2000.0 / d_km)
        w.writerow([sid, f"{x:.1f}", f"{y:.1f}", volume, "destination"])


if __name__ == "__main__":
    if len(sys.argv) > 1:
        with open(sys.argv[1], "w") as f:
            main(f)
    else:
        main(sys.stdout)
