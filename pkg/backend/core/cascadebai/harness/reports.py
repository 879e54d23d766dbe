# backend/core/cascadebai/harness/reports.py
# ------------------------------------------------------------
# Bound reports for one instance: gap table, upper-bound terms,
# lower bound and the observation-count parameters.
# Output is a plain dict (JSON-ready) with a text renderer on top.
# ------------------------------------------------------------

from __future__ import annotations

import json
from typing import Any

import pandas as pd

from ..errors import ZeroMinWeight
from ..models.bounds import (
    mu_lower_analytic,
    mu_upper_analytic,
    n1_case_bound,
    upper_bound_terms,
)
from ..models.instance import Instance, gaps, rho
from .config import InstanceSpec


def bounds_report(instance_spec: InstanceSpec | Instance) -> dict[str, Any]:
    instance = instance_spec.build() if isinstance(instance_spec, InstanceSpec) else instance_spec
    profile = gaps(instance)
    report = upper_bound_terms(instance, profile)
    K = instance.K

    try:
        n1_ceiling: float | None = n1_case_bound(K, instance.w_star, instance.w_min, instance.delta)
    except ZeroMinWeight:
        n1_ceiling = None

    table = pd.DataFrame({
        "item": range(instance.L),
        "input_index": instance.to_user_indices(range(instance.L)),
        "weight": instance.weights,
        "gap": profile.deltas,
        "adjusted_gap": profile.bar_deltas,
        "threshold": profile.thresholds,
    })

    return {
        "instance": {
            "L": instance.L,
            "K": K,
            "delta": instance.delta,
            "epsilon": instance.epsilon,
            "k_prime": profile.k_prime,
            "rho": rho(instance.delta, instance.L),
        },
        "regime": report.regime.value,
        "terms": {
            "n1": report.n1,
            "n2": report.n2,
            "n3": report.n3,
            "n3_expanded": report.n3_expanded,
            "total": report.total,
            "k1": report.k1,
            "k2": report.k2,
            "n1_case_bound": n1_ceiling,
        },
        "lower_bound": report.lower_bound,
        "observations": {
            "k": list(range(1, K + 1)),
            "mu": report.mu.tolist(),
            "mu_tilde": report.mu_tilde.tolist(),
            "v": report.v.tolist(),
            "mu_floor": [mu_lower_analytic(k, instance.w_star) for k in range(1, K + 1)],
            "mu_tilde_ceiling": [mu_upper_analytic(k, instance.w_min) for k in range(1, K + 1)],
        },
        "m": report.m.tolist(),
        "sigma": profile.sigma.tolist(),
        "items": table.to_dict(orient="records"),
    }


def format_report(report: dict[str, Any], fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, default=float)

    inst = report["instance"]
    terms = report["terms"]
    lines = [
        f"instance: L={inst['L']} K={inst['K']} delta={inst['delta']} epsilon={inst['epsilon']} "
        f"K'={inst['k_prime']} rho={inst['rho']:.6g}",
        f"regime: {report['regime']}",
        "upper bound terms:",
    ]
    for key in ("n1", "n2", "n3", "n3_expanded", "total", "n1_case_bound"):
        value = terms[key]
        lines.append(f"  {key:<14} {'-' if value is None else f'{value:.6g}'}")
    lines.append(f"  K1={terms['k1']} K2={terms['k2']}")
    lb = report["lower_bound"]
    lines.append(f"lower bound: {'-' if lb is None else f'{lb:.6g}'}")
    lines.append("")
    lines.append(pd.DataFrame(report["observations"]).to_string(index=False, float_format=lambda x: f"{x:.6g}"))
    lines.append("")
    lines.append(pd.DataFrame(report["items"]).to_string(index=False, float_format=lambda x: f"{x:.6g}"))
    return "\n".join(lines)
