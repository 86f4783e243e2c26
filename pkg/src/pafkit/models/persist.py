"""JSON persistence for fitted models, including nested ensembles.

Document layout::

    {"format_version": 1, "model_kind": "...", "schema_hash": "...",
     "seed": ..., "config": {...}, "params": {...}}

Ensemble params embed member documents recursively (without the header
fields). Loading a file with an unknown format version or model kind is an
error; scores of a reloaded model are bit-identical to the original's.
"""

import dataclasses
import hashlib
import json

import numpy as np

from ..errors import ModelFormatError
from .forest import ForestConfig, RandomForest
from .gbt import GbtConfig, GradientBoosting
from .logreg import LogRegConfig, LogisticRegression
from .mlp import Mlp, MlpConfig
from .tree import DecisionTree, Node, TreeConfig

FORMAT_VERSION = 1


def feature_space_hash(feature_names: list[str]) -> str:
    """Stable digest of an encoder's feature-name list; stored with models
    so a score-time feature mismatch is detectable."""
    return hashlib.sha256("\n".join(feature_names).encode("utf-8")).hexdigest()


def _node_to_dict(node: Node) -> dict:
    if node.is_leaf:
        return {"score": node.score}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "score": node.score,
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def _node_from_dict(d: dict) -> Node:
    if "left" not in d:
        return Node(score=float(d["score"]))
    return Node(
        feature=int(d["feature"]),
        threshold=float(d["threshold"]),
        score=float(d["score"]),
        left=_node_from_dict(d["left"]),
        right=_node_from_dict(d["right"]),
    )


def _tree_params(tree: DecisionTree) -> dict:
    return {"root": _node_to_dict(tree.root_), "n_features": tree.n_features_}


def _tree_restore(config: TreeConfig, params: dict) -> DecisionTree:
    tree = DecisionTree(config)
    tree.root_ = _node_from_dict(params["root"])
    tree.n_features_ = int(params["n_features"])
    return tree


def model_doc(model) -> dict:
    """Kind + config + params of a fitted model (recursive for ensembles)."""
    from .. import ensemble, imbalance

    if isinstance(model, LogisticRegression):
        return {
            "model_kind": "logreg",
            "config": dataclasses.asdict(model.config),
            "params": {"weights": model.weights_.tolist(), "bias": model.bias_},
        }
    if isinstance(model, DecisionTree):
        return {
            "model_kind": "tree",
            "config": dataclasses.asdict(model.config),
            "params": _tree_params(model),
        }
    if isinstance(model, RandomForest):
        return {
            "model_kind": "forest",
            "config": dataclasses.asdict(model.config),
            "params": {"trees": [_tree_params(t) for t in model.trees_]},
        }
    if isinstance(model, GradientBoosting):
        return {
            "model_kind": "gbt",
            "config": dataclasses.asdict(model.config),
            "params": {
                "base_score": model.base_score_,
                "n_features": model.n_features_,
                "trees": [_node_to_dict(t) for t in model.trees_],
            },
        }
    if isinstance(model, Mlp):
        return {
            "model_kind": "mlp",
            "config": dataclasses.asdict(model.config),
            "params": {
                "weights": [W.tolist() for W in model.weights_],
                "biases": [b.tolist() for b in model.biases_],
            },
        }
    if isinstance(model, imbalance.RusBoostClassifier):
        config = dataclasses.asdict(model.config)
        config["target_ratio"] = model.target_ratio
        return {
            "model_kind": "rusboost",
            "config": config,
            "params": {
                "stumps": [_tree_params(t) for t in model.stumps_],
                "alphas": list(model.alphas_),
            },
        }
    if isinstance(model, imbalance.AdaBoostClassifier):
        return {
            "model_kind": "adaboost",
            "config": dataclasses.asdict(model.config),
            "params": {
                "stumps": [_tree_params(t) for t in model.stumps_],
                "alphas": list(model.alphas_),
            },
        }
    if isinstance(model, imbalance.EasyEnsembleClassifier):
        config = dataclasses.asdict(model.config)
        config["n_subsets"] = model.n_subsets
        return {
            "model_kind": "easy_ensemble",
            "config": config,
            "params": {
                "members": [
                    {
                        "stumps": [_tree_params(t) for t in m.stumps_],
                        "alphas": list(m.alphas_),
                    }
                    for m in model.members_
                ]
            },
        }
    if isinstance(model, ensemble.VotingClassifier):
        return {
            "model_kind": "voting",
            "config": {},
            "params": {"members": [model_doc(m) for m in model.models]},
        }
    if isinstance(model, ensemble.StackedClassifier):
        return {
            "model_kind": "stacking",
            "config": {"n_folds": model.n_folds},
            "params": {
                "bases": [model_doc(m) for m in model.base_models],
                "meta": model_doc(model.meta_model),
            },
        }
    raise ModelFormatError(f"cannot persist models of type {type(model).__name__}")


def model_from_doc(doc: dict):
    from .. import ensemble, imbalance

    kind = doc.get("model_kind")
    config = doc.get("config", {})
    params = doc.get("params", {})
    if kind == "logreg":
        model = LogisticRegression(LogRegConfig(**config))
        model.weights_ = np.asarray(params["weights"], dtype=np.float64)
        model.bias_ = float(params["bias"])
        return model
    if kind == "tree":
        return _tree_restore(TreeConfig(**config), params)
    if kind == "forest":
        cfg = ForestConfig(
            n_trees=config["n_trees"],
            max_features=config["max_features"],
            tree=TreeConfig(**config["tree"]),
            bootstrap=config["bootstrap"],
        )
        model = RandomForest(cfg)
        model.trees_ = [_tree_restore(cfg.tree, p) for p in params["trees"]]
        return model
    if kind == "gbt":
        model = GradientBoosting(GbtConfig(**config))
        model.base_score_ = float(params["base_score"])
        model.n_features_ = int(params["n_features"])
        model.trees_ = [_node_from_dict(t) for t in params["trees"]]
        return model
    if kind == "mlp":
        config = dict(config)
        config["hidden_layers"] = tuple(config["hidden_layers"])
        model = Mlp(MlpConfig(**config))
        model.weights_ = [np.asarray(W, dtype=np.float64) for W in params["weights"]]
        model.biases_ = [np.asarray(b, dtype=np.float64) for b in params["biases"]]
        return model
    if kind in ("adaboost", "rusboost", "easy_ensemble"):
        config = dict(config)
        extra = {
            key: config.pop(key)
            for key in ("target_ratio", "n_subsets")
            if key in config
        }
        cfg = imbalance.BoostConfig(
            n_estimators=config["n_estimators"],
            base_tree=TreeConfig(**config["base_tree"]),
        )

        def restore_boost(boost_params, model):
            model.stumps_ = [
                _tree_restore(cfg.base_tree, p) for p in boost_params["stumps"]
            ]
            model.alphas_ = [float(a) for a in boost_params["alphas"]]
            return model

        if kind == "adaboost":
            return restore_boost(params, imbalance.AdaBoostClassifier(cfg))
        if kind == "rusboost":
            model = imbalance.RusBoostClassifier(cfg, target_ratio=extra["target_ratio"])
            return restore_boost(params, model)
        model = imbalance.EasyEnsembleClassifier(cfg, n_subsets=extra["n_subsets"])
        model.members_ = [
            restore_boost(p, imbalance.AdaBoostClassifier(cfg)) for p in params["members"]
        ]
        return model
    if kind == "voting":
        return ensemble.VotingClassifier([model_from_doc(m) for m in params["members"]])
    if kind == "stacking":
        model = ensemble.StackedClassifier(
            [model_from_doc(m) for m in params["bases"]], n_folds=config["n_folds"]
        )
        model.meta_model = model_from_doc(params["meta"])
        return model
    raise ModelFormatError(f"unknown model kind {kind!r}")


def save_model(model, path, schema_hash: str = "", seed: int = 0) -> None:
    doc = model_doc(model)
    doc = {
        "format_version": FORMAT_VERSION,
        "model_kind": doc["model_kind"],
        "schema_hash": schema_hash,
        "seed": seed,
        "config": doc["config"],
        "params": doc["params"],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unknown model format version {version!r}")
    return model_from_doc(doc)
