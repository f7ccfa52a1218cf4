"""Synthetic data matching the per-class feature statistics.

Two generators live here.  `generate_dataset` draws feature vectors
directly from per-class profiles (clamped normals for process and user
counts, correlated through a Gaussian copula, ratio always derived).
`generate_process_list` goes one level
lower and fabricates a whole tasklist-style listing whose extracted
features follow the same profile, which is what the service and parser
demos feed on.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .features import FeatureVector, Label, LabeledDataset, LabeledSample
from .proclist import (
    ARCH_X64,
    ARCH_X86,
    TASKLIST_TABULAR,
    ProcessEntry,
    ProcessList,
    serialize_process_list,
)

SYNTHETIC_ORIGIN = "synthetic"


@dataclass(frozen=True)
class FeatureProfile:
    """Clamped-normal profile for one integer feature."""

    min: int
    max: int
    mean: float
    std: float

    def __post_init__(self):
        if self.min > self.max:
            raise ValueError(f"min {self.min} exceeds max {self.max}")
        if self.std < 0:
            raise ValueError("negative std")


@dataclass(frozen=True)
class ClassProfile:
    """Marginal profiles for one class plus their joint correlation.

    The published statistics are marginal only; hosts plainly do not
    draw the two counts independently (busier machines carry more
    distinct accounts), so the joint is a Gaussian copula with the given
    correlation between the underlying normals.  The marginals are
    untouched by it.
    """

    process_count: FeatureProfile
    user_count: FeatureProfile
    correlation: float = 0.0

    def __post_init__(self):
        if not -1.0 <= self.correlation <= 1.0:
            raise ValueError("correlation outside [-1, 1]")


SAFE_PROFILE = ClassProfile(
    process_count=FeatureProfile(min=9, max=305, mean=89.2, std=60.7),
    user_count=FeatureProfile(min=1, max=17, mean=2.5, std=1.8),
    correlation=0.8,
)

UNSAFE_PROFILE = ClassProfile(
    process_count=FeatureProfile(min=11, max=56, mean=30.6, std=11.65),
    user_count=FeatureProfile(min=1, max=4, mean=2.9, std=1.0),
    correlation=0.3,
)


@dataclass(frozen=True)
class GenConfig:
    n_safe: int = 324
    n_unsafe: int = 60
    seed: int = 0
    safe_profile: ClassProfile = field(default=SAFE_PROFILE)
    unsafe_profile: ClassProfile = field(default=UNSAFE_PROFILE)

    def __post_init__(self):
        if self.n_safe < 0 or self.n_unsafe < 0:
            raise ValueError("negative sample count")
        if self.n_safe + self.n_unsafe < 1:
            raise ValueError("nothing to generate")


def _clamp_round(z: float, profile: FeatureProfile, upper: int | None = None) -> int:
    hi = profile.max if upper is None else min(profile.max, upper)
    value = int(np.rint(profile.mean + profile.std * z))
    return int(np.clip(value, profile.min, hi))


def _draw_pair(rng: np.random.Generator, profile: ClassProfile) -> tuple[int, int]:
    """One (process_count, user_count) draw from the class joint."""
    rho = profile.correlation
    z1 = rng.standard_normal()
    z2 = rho * z1 + np.sqrt(1.0 - rho * rho) * rng.standard_normal()
    pc = _clamp_round(z1, profile.process_count)
    uc = _clamp_round(z2, profile.user_count, upper=pc)
    return pc, uc


def _draw_class(rng, profile: ClassProfile, n: int, label: Label):
    samples = []
    for _ in range(n):
        pc, uc = _draw_pair(rng, profile)
        samples.append(LabeledSample(
            features=FeatureVector.from_counts(pc, uc),
            label=label,
            origin=SYNTHETIC_ORIGIN,
        ))
    return samples


def generate_dataset(config: GenConfig | None = None) -> LabeledDataset:
    """Draw a labeled dataset, safe samples first, then unsafe."""
    config = config or GenConfig()
    rng = np.random.default_rng(config.seed)
    samples = _draw_class(rng, config.safe_profile, config.n_safe, Label.TARGET)
    samples += _draw_class(rng, config.unsafe_profile, config.n_unsafe, Label.SANDBOX)
    return LabeledDataset(samples=tuple(samples))


_SERVICE_OWNERS = (
    r"NT AUTHORITY\SYSTEM",
    r"NT AUTHORITY\LOCAL SERVICE",
    r"NT AUTHORITY\NETWORK SERVICE",
)

_USER_OWNER_POOL = tuple(rf"CORP\user{i:02d}" for i in range(1, 15))

_NAME_POOL = (
    "smss.exe", "csrss.exe", "wininit.exe", "services.exe", "lsass.exe",
    "svchost.exe", "svchost.exe", "svchost.exe", "winlogon.exe",
    "explorer.exe", "spoolsv.exe", "taskhostw.exe", "dwm.exe",
    "SearchIndexer.exe", "RuntimeBroker.exe", "conhost.exe", "ctfmon.exe",
    "chrome.exe", "chrome.exe", "OUTLOOK.EXE", "EXCEL.EXE", "WINWORD.EXE",
    "Teams.exe", "OneDrive.exe", "sqlservr.exe", "w3wp.exe", "java.exe",
    "powershell.exe", "cmd.exe", "notepad.exe",
)


def generate_process_list(label: Label, seed: int = 0,
                          profile: ClassProfile | None = None) -> str:
    """Fabricate a tasklist-style listing for one host of the given class.

    The listing parses cleanly and its features land inside the class
    profile: process count and distinct-owner count are drawn exactly the
    way `generate_dataset` draws them, then enough named entries are laid
    down to realize those counts.
    """
    if profile is None:
        profile = SAFE_PROFILE if label == Label.TARGET else UNSAFE_PROFILE
    rng = np.random.default_rng(seed)
    pc, uc = _draw_pair(rng, profile)

    if label == Label.SANDBOX:
        # analysis VMs run the sample elevated, so every owner is visible:
        # the NT AUTHORITY accounts plus the analyst user
        uc = max(2, uc)
        owners = list(_SERVICE_OWNERS[:uc - 1])
        extra = uc - len(owners)
        owners.extend(str(o) for o in rng.choice(_USER_OWNER_POOL, size=extra,
                                                 replace=False))
        blank_share = 0.0
    else:
        # a workstation listing taken as a normal user shows blank owners
        # on most rows, one corporate account, and a few service accounts
        owners = [str(rng.choice(_USER_OWNER_POOL))]
        pool = list(_SERVICE_OWNERS) + [o for o in _USER_OWNER_POOL if o != owners[0]]
        owners.extend(pool[:uc - 1])
        blank_share = 0.6

    entries = [ProcessEntry(pid=0, ppid=0, name="[System Process]")]
    pids = rng.choice(np.arange(4, 32768, 4), size=pc, replace=False)
    for i in range(pc):
        # every distinct owner appears at least once, the rest mix
        # random owners with blank rows per the class template
        if i < uc:
            owner = owners[i]
        elif rng.random() < blank_share:
            owner = None
        else:
            owner = owners[int(rng.integers(uc))]
        svc = owner in _SERVICE_OWNERS
        entries.append(ProcessEntry(
            pid=int(pids[i]),
            ppid=int(pids[int(rng.integers(i))]) if i else 4,
            name=str(rng.choice(_NAME_POOL)),
            arch=ARCH_X64 if rng.random() < 0.85 else ARCH_X86,
            session=0 if svc else 1,
            owner=owner,
        ))
    plist = ProcessList(entries=tuple(entries), source_id=f"synthetic-{int(label)}-{seed}",
                        format=TASKLIST_TABULAR)
    return serialize_process_list(plist)
