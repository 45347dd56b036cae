"""Benchmark presets: ingestion options and batch settings per UCI dataset.

The raw UCI files have no header line; the presets still consume the first
line as a header (``header=True``). The resulting row counts (e.g. 957
Tic-Tac-Toe rows) give split sizes whose floor arithmetic reproduces each
preset's batch count.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

__all__ = ["Preset", "PRESETS", "get_preset"]


@dataclass(frozen=True)
class Preset:
    name: str
    filename: str
    batch_size: int
    batch_count: Optional[int]
    feature_names: Tuple[str, ...]
    class_column: int = -1
    header: bool = True
    delimiter: Optional[str] = ","
    drop_columns: Tuple[int, ...] = ()
    test_filename: Optional[str] = None
    expected_rows: Optional[int] = None
    generated: bool = False
    notes: str = ""

    def load_options(self):
        return dict(header=self.header, names=self.feature_names,
                    class_column=self.class_column, drop_columns=self.drop_columns,
                    delimiter=self.delimiter, name=self.name)


_TTT = tuple(f"{r}-{c}" for r in ("top", "middle", "bottom") for c in ("left", "middle", "right"))

PRESETS = {
    p.name: p for p in [
        Preset("tic-tac-toe", "tic-tac-toe.data", 100, 8, _TTT,
               expected_rows=957, generated=True),
        Preset("balance-scale", "balance-scale.data", 25, 21,
               ("left-weight", "left-distance", "right-weight", "right-distance"),
               class_column=0, expected_rows=624, generated=True),
        Preset("car", "car.data", 100, 15,
               ("buying", "maint", "doors", "persons", "lug_boot", "safety"),
               expected_rows=1727),
        Preset("chess", "krkopt.data", 100, 246,
               ("wk-file", "wk-rank", "wr-file", "wr-rank", "bk-file", "bk-rank"),
               expected_rows=28055, generated=True),
        Preset("nursery", "nursery.data", 100, 113,
               ("parents", "has_nurs", "form", "children", "housing", "finance",
                "social", "health"),
               expected_rows=12959),
        Preset("monk", "monks.train", 25, 13,
               ("a1", "a2", "a3", "a4", "a5", "a6"),
               class_column=0, delimiter=None, drop_columns=(7,),
               test_filename="monks.test", expected_rows=414,
               notes="pre-split; batch count pinned to 13"),
    ]
}


def get_preset(name):
    key = name.strip().lower().replace("_", "-")
    aliases = {"tictactoe": "tic-tac-toe", "balance": "balance-scale", "krkopt": "chess",
               "car-evaluation": "car", "monks": "monk"}
    key = aliases.get(key, key)
    if key not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    return PRESETS[key]
