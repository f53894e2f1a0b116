"""Stopped local-time profiles and their CSV form."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


@dataclass
class ProfileRealization:
    """Local times at the instant the local time at ``origin`` reaches ``height``.

    ``values[i]`` is the local time at site ``left_end + i``; the support
    ``[left_end, right_end]`` is exactly the set of sites with positive local
    time. ``truncated`` marks a profile whose construction hit a budget; such
    a profile is incomplete and must be treated as censored.
    """

    origin: int
    height: float
    left_end: int
    right_end: int
    values: np.ndarray
    route: str
    flags: dict = field(default_factory=dict)
    truncated: bool = False

    def __getitem__(self, k: int) -> float:
        if k < self.left_end or k > self.right_end:
            return 0.0
        return float(self.values[k - self.left_end])

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.left_end, self.right_end + 1)

    def as_dict(self) -> dict[int, float]:
        return {int(k): float(v) for k, v in zip(self.sites, self.values)}


def write_profile_csv(profile: ProfileRealization, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["site", "local_time", "route"])
        for k, v in zip(profile.sites, profile.values):
            out.writerow([int(k), repr(float(v)), profile.route])


def read_profile_csv(path) -> dict[int, float]:
    with open(path, newline="") as fh:
        return {int(row["site"]): float(row["local_time"]) for row in csv.DictReader(fh)}
