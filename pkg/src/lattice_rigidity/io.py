"""JSON file formats for contexts, orders, lattices, polynomials and points.

Ring elements are encoded as an integer (m = 1, or the constant coefficient)
or as a list of m integers (coefficients in the Galois-ring basis).
"""

from __future__ import annotations

import hashlib
import json
import warnings
from pathlib import Path
from typing import Any, Mapping

from .errors import ValidationError
from .genval import PolynomialO, WittPoint
from .groups import group_order, make_group
from .orders import Lattice, Order, make_lattice, make_order
from .witt import ArithmeticContext, make_context


def read_json(path) -> tuple[Any, str]:
    """Parse a JSON file; returns (data, sha256 of the raw bytes)."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        data = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc
    return data, hashlib.sha256(raw).hexdigest()


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _int(data: Mapping, key: str, default=None) -> int:
    v = data.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ValidationError(f"field {key!r} must be an integer")
    return v


def context_from(data: Mapping | None, p: int | None = None, m: int | None = None, N: int | None = None) -> ArithmeticContext:
    """Context from a record {p, m, N, modulus}; explicit arguments win."""
    data = dict(data or {})
    if p is not None:
        data["p"] = p
    if m is not None:
        data["m"] = m
    if N is not None:
        data["N"] = N
    if "p" not in data:
        raise ValidationError("no prime given (field 'p' or --p)")
    modulus = data.get("modulus")
    if modulus is not None and m is not None and len(modulus) != m + 1:
        modulus = None
    return make_context(_int(data, "p"), _int(data, "m", 1), _int(data, "N", 8), modulus)


def order_from(data: Mapping, ctx: ArithmeticContext) -> Order:
    """Order from a record.

    Either {"group": "(1 2),(1 2 3)"} for a group order, or
    {"structure_constants": d x d x d, "identity": [...], "labels": [...],
    "generators": [labels], "ext_exponent": c}.
    """
    if not isinstance(data, Mapping):
        raise ValidationError("order record must be an object")
    if "group" in data:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return group_order(make_group(data["group"]), ctx)
    try:
        constants = data["structure_constants"]
        identity = data["identity"]
    except KeyError as exc:
        raise ValidationError(f"order record lacks {exc}") from exc
    labels = data.get("labels")
    gens = data.get("generators")
    if gens is not None:
        lab = list(labels) if labels is not None else [f"b{i}" for i in range(len(constants))]
        try:
            gens = [lab.index(g) if isinstance(g, str) else int(g) for g in gens]
        except ValueError as exc:
            raise ValidationError(f"unknown generator label: {exc}") from exc
    ext = data.get("ext_exponent")
    try:
        return make_order(ctx, constants, identity, labels=labels, generators=gens, ext_exponent=ext)
    except (TypeError, IndexError) as exc:
        raise ValidationError(f"malformed structure constants: {exc}") from exc


def lattice_from(data: Mapping, order: Order) -> Lattice:
    if not isinstance(data, Mapping) or "matrices" not in data:
        raise ValidationError("lattice record needs 'matrices'")
    mats = data["matrices"]
    if isinstance(mats, Mapping):
        mats = {str(k): v for k, v in mats.items()}
    try:
        return make_lattice(order, mats)
    except (TypeError, IndexError) as exc:
        raise ValidationError(f"malformed representation matrices: {exc}") from exc


def polynomial_from(data: Mapping, ctx: ArithmeticContext) -> PolynomialO:
    return PolynomialO.from_dict(ctx, data)


def point_from(data: Mapping, ctx: ArithmeticContext) -> WittPoint:
    try:
        coords = data["digits"]
        l = data.get("l")
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed point record: {exc}") from exc
    pt = WittPoint.from_ints(ctx, coords, l)
    if "n" in data and data["n"] != pt.n:
        raise ValidationError("point record: n does not match the digit lists")
    return pt


def parse_point(text: str, ctx: ArithmeticContext, l: int | None = None) -> WittPoint:
    """``"1:0,0"``: coordinates separated by commas, digits by colons (packed ints)."""
    try:
        coords = [[int(d) for d in c.split(":")] for c in text.split(",")]
    except ValueError as exc:
        raise ValidationError(f"bad point {text!r}") from exc
    return WittPoint.from_ints(ctx, coords, l)


def parse_element(text: str, ctx: ArithmeticContext):
    """An integer or a JSON list of m integers."""
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"bad ring element {text!r}") from exc
    return ctx.decode(obj)
