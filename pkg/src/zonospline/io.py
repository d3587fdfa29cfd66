"""JSON documents for configurations and tilings.

Exact numbers are written as strings (``"3"``, ``"-1/2"``) and every document
is serialized canonically (sorted keys, fixed indentation, trailing newline),
so save -> load -> save is byte-identical.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

from .exact import GeometryError, HeightFunction, PointConfig, format_scalar, to_scalar
from .tiling import Tile, ZonotopalTiling

CONFIG_FORMAT = "zonospline-config/1"
TILING_FORMAT = "zonospline-tiling/1"


class DocumentError(ValueError):
    """A document is malformed, inconsistent or refers to the wrong configuration."""


@dataclass(frozen=True)
class ConfigDocument:
    config: PointConfig
    heights: HeightFunction | None = None
    seed: int | None = None

    def to_json(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"format": CONFIG_FORMAT, **_config_body(self.config)}
        if self.heights is not None:
            doc["heights"] = [format_scalar(v) for v in self.heights.values]
        if self.seed is not None:
            doc["seed"] = self.seed
        return doc


@dataclass(frozen=True)
class TilingDocument:
    tiling: ZonotopalTiling

    @property
    def config_hash(self) -> str:
        return config_hash(self.tiling.config)

    def to_json(self) -> dict[str, Any]:
        t = self.tiling
        grouped: dict[str, list[dict[str, list[int]]]] = {}
        for k in range(t.max_order + 1):
            grouped[str(k)] = [{"I": list(tile.I), "B": list(tile.B)} for tile in t.order(k)]
        return {
            "format": TILING_FORMAT,
            "config_hash": self.config_hash,
            "config": _config_body(t.config),
            "heights": None if t.heights is None else [format_scalar(v) for v in t.heights.values],
            "max_order": t.max_order,
            "tiles": grouped,
        }


def _config_body(config: PointConfig) -> dict[str, Any]:
    return {"dim": config.dim, "points": [[format_scalar(c) for c in p] for p in config.points]}


def canonical_bytes(doc: Any) -> bytes:
    return (json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def config_hash(config: PointConfig) -> str:
    """sha256 over the canonical bytes of the points-only configuration body."""
    return hashlib.sha256(canonical_bytes(_config_body(config))).hexdigest()


def _parse_json(text: str) -> Any:
    try:
        # Decimal literals become exact rationals instead of binary floats.
        return json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc}") from exc


def _number(value: Any, where: str) -> Fraction:
    if isinstance(value, (bool, list, dict)) or value is None:
        raise DocumentError(f"{where}: expected a number, got {value!r}")
    try:
        return to_scalar(value)
    except GeometryError as exc:
        raise DocumentError(f"{where}: {exc}") from exc


def _index_list(value: Any, where: str) -> list[int]:
    if not isinstance(value, list) or not all(isinstance(v, int) and not isinstance(v, bool)
                                              for v in value):
        raise DocumentError(f"{where}: expected a list of integer indices")
    return value


def parse_config(doc: Any) -> ConfigDocument:
    if not isinstance(doc, dict):
        raise DocumentError("configuration document must be a JSON object")
    fmt = doc.get("format", CONFIG_FORMAT)
    if fmt != CONFIG_FORMAT:
        raise DocumentError(f"unsupported configuration format {fmt!r}")
    if "dim" not in doc:
        raise DocumentError("configuration document is missing 'dim'")
    dim = doc["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise DocumentError(f"'dim' must be a positive integer, got {dim!r}")
    pts = doc.get("points")
    if not isinstance(pts, list):
        raise DocumentError("configuration document is missing the 'points' list")
    rows = []
    for i, p in enumerate(pts):
        if not isinstance(p, list):
            raise DocumentError(f"points[{i}] must be a list of coordinates")
        if len(p) != dim:
            raise DocumentError(f"points[{i}] has {len(p)} coordinates, expected dim={dim}")
        rows.append(tuple(_number(c, f"points[{i}]") for c in p))
    try:
        config = PointConfig(dim, tuple(rows))
    except GeometryError as exc:
        raise DocumentError(str(exc)) from exc
    heights = None
    if doc.get("heights") is not None:
        hs = doc["heights"]
        if not isinstance(hs, list) or len(hs) != config.n:
            raise DocumentError(f"'heights' must list one value per point ({config.n})")
        heights = HeightFunction(tuple(_number(v, f"heights[{i}]") for i, v in enumerate(hs)))
    seed = doc.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
        raise DocumentError(f"'seed' must be an integer, got {seed!r}")
    return ConfigDocument(config, heights, seed)


def load_config(path: str | Path) -> tuple[PointConfig, HeightFunction | None]:
    cd = read_config_document(path)
    return cd.config, cd.heights


def read_config_document(path: str | Path) -> ConfigDocument:
    return parse_config(_parse_json(Path(path).read_text(encoding="utf-8")))


def load_heights(path: str | Path, config: PointConfig) -> HeightFunction:
    """Heights from a JSON list or from the 'heights' field of an object."""
    doc = _parse_json(Path(path).read_text(encoding="utf-8"))
    if isinstance(doc, dict):
        doc = doc.get("heights")
    if not isinstance(doc, list) or len(doc) != config.n:
        raise DocumentError(f"height file must list one value per point ({config.n})")
    return HeightFunction(tuple(_number(v, f"heights[{i}]") for i, v in enumerate(doc)))


def save_config(path: str | Path, config: PointConfig, heights: HeightFunction | None = None,
                seed: int | None = None) -> None:
    Path(path).write_bytes(canonical_bytes(ConfigDocument(config, heights, seed).to_json()))


def parse_tiling(doc: Any) -> ZonotopalTiling:
    if not isinstance(doc, dict):
        raise DocumentError("tiling document must be a JSON object")
    if doc.get("format") != TILING_FORMAT:
        raise DocumentError(f"unsupported tiling format {doc.get('format')!r}")
    for key in ("config_hash", "config", "max_order", "tiles"):
        if key not in doc:
            raise DocumentError(f"tiling document is missing {key!r}")
    cd = parse_config(dict(doc["config"], heights=doc.get("heights")))
    config = cd.config
    if config_hash(config) != doc["config_hash"]:
        raise DocumentError("config hash does not match the embedded configuration")
    max_order = doc["max_order"]
    full = config.n - config.dim - 1
    if not isinstance(max_order, int) or isinstance(max_order, bool) or not 0 <= max_order <= full:
        raise DocumentError(f"'max_order' must be an integer in [0, {full}]")
    groups = doc["tiles"]
    if not isinstance(groups, dict):
        raise DocumentError("'tiles' must map orders to tile lists")
    tiles = []
    for order, items in groups.items():
        if not order.isdigit() or int(order) > max_order or not isinstance(items, list):
            raise DocumentError(f"bad tile group {order!r}")
        for j, item in enumerate(items):
            where = f"tiles[{order}][{j}]"
            if not isinstance(item, dict) or set(item) != {"I", "B"}:
                raise DocumentError(f"{where}: expected an object with keys I and B")
            I = _index_list(item["I"], where + ".I")
            B = _index_list(item["B"], where + ".B")
            if len(I) != int(order) or len(B) != config.dim + 1 or len(set(I)) != len(I):
                raise DocumentError(f"{where}: wrong shape for an order-{order} tile")
            if any(not 0 <= i < config.n for i in I + B):
                raise DocumentError(f"{where}: index out of range")
            try:
                tiles.append(Tile.make(config, I, B))
            except GeometryError as exc:
                raise DocumentError(f"{where}: {exc}") from exc
    return ZonotopalTiling(config, tiles, cd.heights, max_order)


def load_tiling(path: str | Path) -> ZonotopalTiling:
    return parse_tiling(_parse_json(Path(path).read_text(encoding="utf-8")))


def tiling_bytes(tiling: ZonotopalTiling) -> bytes:
    return canonical_bytes(TilingDocument(tiling).to_json())


def save_tiling(path: str | Path, tiling: ZonotopalTiling) -> None:
    Path(path).write_bytes(tiling_bytes(tiling))
