"""Classifier file: ``PHC1`` | u16 version | u8 kind | u32 classes | u32 features |
kind body | u32 CRC32.

Forest body: u32 trees, u32 max_depth (0 = unlimited), u32 min_leaf,
i32 max_features (-1 = sqrt), u64 seed, then per tree u32 nodes followed by
i64 feature, f64 threshold, i64 left, i64 right, f64 value[nodes][classes].

Linear body: f64 reg, f64 weights[features][classes], f64 bias[classes],
f64 mean[features], f64 scale[features].
"""

from __future__ import annotations

from pointhop.binfmt import Reader, Writer
from pointhop.classify.forest import DecisionTree, ForestParams, RandomForestModel
from pointhop.classify.linear import LinearClassifierModel
from pointhop.errors import DataError

CLASSIFIER_MAGIC = b"PHC1"
CLASSIFIER_FORMAT_VERSION = 1

_FOREST, _LINEAR = 0, 1

Classifier = RandomForestModel | LinearClassifierModel


def save_classifier(model: Classifier) -> bytes:
    w = Writer(CLASSIFIER_MAGIC, CLASSIFIER_FORMAT_VERSION)
    if isinstance(model, RandomForestModel):
        w.pack("BII", _FOREST, model.n_classes, model.n_features)
        p = model.params
        w.pack(
            "IIIiQ",
            p.n_trees,
            p.max_depth or 0,
            p.min_leaf,
            -1 if p.max_features == "sqrt" else int(p.max_features),
            model.seed,
        )
        for tree in model.trees:
            w.pack("I", tree.n_nodes)
            w.array(tree.feature, "<i8")
            w.array(tree.threshold)
            w.array(tree.left, "<i8")
            w.array(tree.right, "<i8")
            w.array(tree.value)
    elif isinstance(model, LinearClassifierModel):
        w.pack("BII", _LINEAR, model.n_classes, model.n_features)
        w.pack("d", model.reg)
        w.array(model.weights)
        w.array(model.bias)
        w.array(model.mean)
        w.array(model.scale)
    else:
        raise TypeError(f"unsupported classifier {type(model).__name__}")
    return w.finish()


def load_classifier(
    data: bytes, *, reader_version: int = CLASSIFIER_FORMAT_VERSION
) -> Classifier:
    r = Reader(data, CLASSIFIER_MAGIC, reader_version)
    kind, n_classes, n_features = r.unpack("BII")
    if kind == _FOREST:
        n_trees, max_depth, min_leaf, max_features, seed = r.unpack("IIIiQ")
        params = ForestParams(
            n_trees=n_trees,
            max_depth=max_depth or None,
            min_leaf=min_leaf,
            max_features="sqrt" if max_features < 0 else max_features,
        )
        trees = []
        for _ in range(n_trees):
            (n_nodes,) = r.unpack("I")
            trees.append(
                DecisionTree(
                    feature=r.array((n_nodes,), "<i8"),
                    threshold=r.array((n_nodes,)),
                    left=r.array((n_nodes,), "<i8"),
                    right=r.array((n_nodes,), "<i8"),
                    value=r.array((n_nodes, n_classes)),
                )
            )
        r.done()
        return RandomForestModel(
            trees=tuple(trees),
            n_classes=n_classes,
            n_features=n_features,
            params=params,
            seed=seed,
        )
    if kind == _LINEAR:
        (reg,) = r.unpack("d")
        model = LinearClassifierModel(
            weights=r.array((n_features, n_classes)),
            bias=r.array((n_classes,)),
            mean=r.array((n_features,)),
            scale=r.array((n_features,)),
            reg=reg,
        )
        r.done()
        return model
    raise DataError(f"unknown classifier kind {kind}")
