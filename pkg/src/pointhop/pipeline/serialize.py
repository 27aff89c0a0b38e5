"""Model file: ``PHM1`` | u16 version | u32-length JSON config | u8 unit count |
per unit (u8 kind, u32 input dim, u32 output dim, u32 effective filters,
f64 bias, f64 mean[in], f64 filters[out][in], u32 n_eig, f64 eigenvalues) |
u16 layout entries (u8 unit, u8 pooling, u32 offset, u32 length) | u32 CRC32.
"""

from __future__ import annotations

import json

from pointhop.binfmt import Reader, Writer
from pointhop.errors import DataError
from pointhop.pipeline.model import (
    MODEL_FORMAT_VERSION,
    POOLINGS,
    FeatureLayout,
    LayoutEntry,
    PointHopConfig,
    PointHopModel,
    check_dimension_chain,
)
from pointhop.saab import SaabFilterBank

MODEL_MAGIC = b"PHM1"

_KINDS = ("saab", "pca")


def save_model(model: PointHopModel) -> bytes:
    w = Writer(MODEL_MAGIC, MODEL_FORMAT_VERSION)
    config_json = json.dumps(model.config.as_dict(), sort_keys=True, separators=(",", ":"))
    w.raw(config_json.encode("utf-8"))
    w.pack("B", len(model.banks))
    for bank in model.banks:
        w.pack(
            "BIIId",
            _KINDS.index(bank.kind),
            bank.input_dim,
            bank.output_dim,
            bank.n_effective,
            bank.bias,
        )
        w.array(bank.mean)
        w.array(bank.filters)
        w.pack("I", len(bank.eigenvalues))
        w.array(bank.eigenvalues)
    w.pack("H", len(model.layout.entries))
    for e in model.layout.entries:
        w.pack("BBII", e.unit, POOLINGS.index(e.pooling), e.offset, e.length)
    return w.finish()


def load_model(data: bytes, *, reader_version: int = MODEL_FORMAT_VERSION) -> PointHopModel:
    r = Reader(data, MODEL_MAGIC, reader_version)
    try:
        config = PointHopConfig.from_dict(json.loads(r.raw().decode("utf-8")))
    except (UnicodeDecodeError, json.JSONDecodeError, TypeError) as exc:
        raise DataError("model config block is not valid JSON") from exc
    (n_units,) = r.unpack("B")
    banks = []
    for _ in range(n_units):
        kind, in_dim, out_dim, n_effective, bias = r.unpack("BIIId")
        if kind >= len(_KINDS):
            raise DataError(f"unknown filter bank kind {kind}")
        mean = r.array((in_dim,))
        filters = r.array((out_dim, in_dim))
        (n_eig,) = r.unpack("I")
        eigenvalues = r.array((n_eig,))
        banks.append(
            SaabFilterBank(
                filters=filters,
                bias=bias,
                mean=mean,
                eigenvalues=eigenvalues,
                kind=_KINDS[kind],
                n_effective=n_effective,
            )
        )
    (n_entries,) = r.unpack("H")
    entries = []
    for _ in range(n_entries):
        unit, pooling, offset, length = r.unpack("BBII")
        if pooling >= len(POOLINGS):
            raise DataError(f"unknown pooling code {pooling}")
        entries.append(LayoutEntry(unit, POOLINGS[pooling], offset, length))
    r.done()
    model = PointHopModel(
        config=config,
        banks=tuple(banks),
        layout=FeatureLayout(tuple(entries)),
        format_version=r.version,
    )
    check_dimension_chain(model)
    return model
