"""Small helpers shared by the experiment scripts."""

import csv
import os
import sys
import time
from dataclasses import asdict, fields

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
RESULTS = os.path.join(ROOT, "results")


def add_config_args(parser, config_cls):
    """One ``--field`` flag per dataclass field, typed from the default."""
    for f in fields(config_cls):
        default = f.default if f.default is not f.default_factory else f.default_factory()
        flag = "--" + f.name.replace("_", "-")
        if isinstance(default, bool):
            parser.add_argument(flag, action="store_true", default=default)
        elif isinstance(default, tuple):
            parser.add_argument(flag, nargs="+", type=type(default[0]) if default else str, default=None)
        else:
            parser.add_argument(flag, type=type(default), default=None)


def config_from_args(config_cls, args, base=None):
    base = base or config_cls()
    values = asdict(base)
    for f in fields(config_cls):
        v = getattr(args, f.name, None)
        if v is not None and v is not False:
            values[f.name] = tuple(v) if isinstance(values[f.name], tuple) else v
    return config_cls(**values)


def write_rows(path, header, rows):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {path}", file=sys.stderr)


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.t0
