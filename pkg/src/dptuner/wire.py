"""Wire format shared by the HTTP service and the trace replayer.

One parser turns a WireQuery JSON object into an engine QueryRequest, and
one serializer turns an EngineResponse back into JSON. Keeping a single
code path guarantees service requests and recorded traces replay
identically.
"""

from __future__ import annotations

from typing import Optional

from .engine import EngineResponse, QueryRequest, TranslatorChoice
from .formulas import Formula, formula_from_dict, formula_to_dict
from .mechanisms import BETA_DEFAULT, Tolerance
from .queries import QueryTarget


class WireError(ValueError):
    pass


def parse_target(obj) -> QueryTarget:
    if obj is None:
        return QueryTarget.pairs("all")
    if not isinstance(obj, dict):
        raise WireError("target must be an object")
    kind = obj.get("kind", "pairs")
    if kind == "pairs":
        return QueryTarget.pairs(obj.get("filter", "all"))
    if kind == "baseTable":
        dataset = obj.get("dataset")
        if not dataset:
            raise WireError("baseTable target needs a dataset id")
        return QueryTarget.base_table(dataset)
    raise WireError(f"unknown target kind: {kind}")


def target_to_dict(target: QueryTarget) -> dict:
    if target.kind == "pairs":
        return {"kind": "pairs", "filter": target.pair_filter}
    return {"kind": "baseTable", "dataset": target.dataset_id}


def parse_wire_query(obj: dict, default_beta: float = BETA_DEFAULT) -> QueryRequest:
    if not isinstance(obj, dict):
        raise WireError("query must be a JSON object")
    qtype = obj.get("type")
    if qtype not in ("LC", "LCC", "LCT"):
        raise WireError(f"unknown query type: {qtype}")
    try:
        alpha = float(obj["alpha"])
    except (KeyError, TypeError, ValueError):
        raise WireError("query needs a numeric alpha") from None
    beta = obj.get("beta")
    tol = Tolerance(alpha, float(beta) if beta is not None else default_beta)
    target = parse_target(obj.get("target"))

    formula: Optional[Formula] = None
    formulas: tuple[Formula, ...] = ()
    if qtype in ("LC", "LCC"):
        if "formula" not in obj:
            raise WireError(f"{qtype} query needs a formula")
        formula = formula_from_dict(obj["formula"])
    else:
        raw = obj.get("formulas")
        if not isinstance(raw, list) or not raw:
            raise WireError("LCT query needs a non-empty formulas list")
        formulas = tuple(formula_from_dict(f) for f in raw)

    kwargs: dict = {}
    if qtype == "LCC":
        if "c" not in obj:
            raise WireError("LCC query needs a threshold c")
        kwargs["threshold"] = float(obj["c"])
        kwargs["direction"] = obj.get("direction", ">")
        kwargs["translator"] = TranslatorChoice.from_dict(obj.get("translator"))
    if qtype == "LCT":
        kwargs["k"] = int(obj.get("k", 1))
        kwargs["order"] = obj.get("order", "largest")

    return QueryRequest(
        type=qtype,
        target=target,
        tolerance=tol,
        formula=formula,
        formulas=formulas,
        **kwargs,
    )


def response_to_dict(req: QueryRequest, resp: EngineResponse) -> dict:
    answer = resp.answer
    if resp.status == "answered" and req.type == "LCT":
        answer = {
            "indices": list(resp.answer),
            "formulas": [formula_to_dict(req.formulas[i]) for i in resp.answer],
        }
    elif resp.status == "answered" and req.type == "LC":
        answer = float(resp.answer)
    elif resp.status == "answered":
        answer = bool(resp.answer)
    return {
        "status": resp.status,
        "answer": answer,
        "spent_total": resp.spent_total,
        "estimate_checked": resp.estimate_checked,
    }
