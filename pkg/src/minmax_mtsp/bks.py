"""Registry of best-known objective values per (instance name, m)."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources


@dataclass(frozen=True)
class BksEntry:
    name: str
    m: int
    value: float
    optimal: bool


class BksRegistry:
    def __init__(self, entries: list[BksEntry]):
        self._by_key: dict[tuple[str, int], BksEntry] = {}
        for e in entries:
            key = (e.name, e.m)
            if key in self._by_key:
                raise ValueError(f"duplicate registry entry for {key}")
            if e.value <= 0:
                raise ValueError(f"non-positive best-known value for {key}")
            self._by_key[key] = e

    def __len__(self):
        return len(self._by_key)

    def get(self, name: str, m: int) -> BksEntry | None:
        return self._by_key.get((name, m))

    def gap_pct(self, name: str, m: int, best: float) -> float | None:
        """100 * (best - BKS) / BKS, or None when the pair is unknown."""
        e = self.get(name, m)
        if e is None:
            return None
        return 100.0 * (best - e.value) / e.value

    @classmethod
    def from_csv_text(cls, text: str) -> "BksRegistry":
        entries = []
        for row in csv.DictReader(text.splitlines()):
            entries.append(BksEntry(name=row["name"], m=int(row["m"]),
                                    value=float(row["bks"]),
                                    optimal=row.get("optimal", "0") == "1"))
        return cls(entries)

    @classmethod
    def from_file(cls, path: str) -> "BksRegistry":
        with open(path) as fh:
            return cls.from_csv_text(fh.read())

    @classmethod
    def default(cls) -> "BksRegistry":
        text = resources.files("minmax_mtsp").joinpath("data/bks.csv").read_text()
        return cls.from_csv_text(text)
