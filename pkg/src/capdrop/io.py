"""Atomic file output, droplet CSV and SVG polylines, result JSON."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Sequence

import numpy as np

from .geometry import PolyDroplet

__all__ = [
    "atomic_write",
    "header_lines",
    "droplet_csv",
    "read_droplet_csv",
    "droplet_svg",
    "result_to_dict",
    "droplet_to_dict",
    "droplet_from_dict",
    "dumps",
]


def atomic_write(path: str | Path, text: str) -> None:
    """Write ``text`` to a temporary file in the target directory, then
    rename it over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def header_lines(cfg_hash: str, rng_seed: int | None, **extra) -> list[str]:
    from . import SCHEMA_VERSION, __version__

    lines = [f"capdrop {__version__} schema {SCHEMA_VERSION}", f"config_hash {cfg_hash}", f"rng_seed {rng_seed}"]
    lines += [f"{k} {v}" for k, v in extra.items()]
    return lines


def _fmt(x: float) -> str:
    return repr(float(x))


def droplet_csv(p: PolyDroplet, header: Sequence[str] = ()) -> str:
    """Columns ``x,y,contact_flag,s``; ``s`` is empty for free vertices."""
    buf = io.StringIO()
    for line in header:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "contact_flag", "s"])
    for (x, y), c, s in zip(p.vertices, p.contact, p.params):
        w.writerow([_fmt(x), _fmt(y), int(c), _fmt(s) if c else ""])
    return buf.getvalue()


def read_droplet_csv(path: str | Path, container=None) -> PolyDroplet:
    """Read a droplet CSV.  Contact vertices without an ``s`` value are
    projected onto ``container`` to recover their boundary parameter."""
    rows = [ln for ln in Path(path).read_text().splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.DictReader(rows)
    if reader.fieldnames is None or not {"x", "y", "contact_flag"} <= set(reader.fieldnames):
        raise ValueError(f"{path}: expected columns x,y,contact_flag")
    xs, flags, params = [], [], []
    for i, row in enumerate(reader, start=2):
        try:
            xs.append((float(row["x"]), float(row["y"])))
            flags.append(int(row["contact_flag"]) != 0)
            s = row.get("s") or ""
            params.append(float(s) if s.strip() else math.nan)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"{path}: bad value on data row {i}: {exc}") from None
    v = np.array(xs)
    contact = np.array(flags)
    par = np.array(params)
    missing = contact & np.isnan(par)
    if missing.any():
        if container is None:
            raise ValueError(f"{path}: contact vertices need an s column or a container")
        par[missing], _ = container.project(v[missing])
    return PolyDroplet(v, contact, par)


def droplet_svg(p: PolyDroplet, container=None, width: float = 480.0) -> str:
    """SVG with the droplet boundary (wetted arc highlighted) and optionally
    the container wall."""
    pts = [p.vertices]
    if container is not None and container.closed:
        pts.append(container.points)
    allp = np.vstack(pts)
    lo, hi = allp.min(0), allp.max(0)
    span = float(max(hi - lo)) or 1.0
    pad = 0.05 * span
    scale = width / (span + 2 * pad)
    height = (hi[1] - lo[1] + 2 * pad) * scale

    def path(v, closed):
        xy = [((x - lo[0] + pad) * scale, (hi[1] - y + pad) * scale) for x, y in v]
        d = "M " + " L ".join(f"{x:.3f},{y:.3f}" for x, y in xy)
        return d + (" Z" if closed else "")

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}">']
    if container is not None and container.closed:
        parts.append(f'<path d="{path(container.points, True)}" fill="none" stroke="#888" stroke-width="1"/>')
    parts.append(f'<path d="{path(p.vertices, True)}" fill="#9cf" stroke="#036" stroke-width="1"/>')
    run = p.contact_run
    if len(run) > 1:
        parts.append(f'<path d="{path(p.vertices[run], False)}" fill="none" stroke="#c30" stroke-width="2"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def droplet_to_dict(p: PolyDroplet) -> dict:
    return {
        "vertices": p.vertices.tolist(),
        "contact": p.contact.astype(int).tolist(),
        "params": [_clean(float(s)) for s in p.params],
    }


def droplet_from_dict(d: dict) -> PolyDroplet:
    params = [math.nan if s is None else s for s in d["params"]]
    return PolyDroplet(np.array(d["vertices"], dtype=float), np.array(d["contact"], dtype=bool), np.array(params, dtype=float))


def result_to_dict(r, cfg: dict, header: Sequence[str]) -> dict:
    return {
        "header": list(header),
        "config": cfg,
        "energy": {k: _clean(float(v)) for k, v in r.energy.as_dict().items()},
        "converged": bool(r.converged),
        "iterations": int(r.iterations),
        "message": r.message,
        "contact_point": None if r.contact_point is None else [float(x) for x in r.contact_point],
        "contact_param": r.contact_param,
        "young_residuals": [float(x) for x in r.young_residuals],
        "multiplier": _clean(float(r.multiplier)),
        "seed_index": int(r.seed_index),
        "seed_energies": [_clean(float(e)) for e in r.seed_energies],
        "droplet": droplet_to_dict(r.droplet),
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"
