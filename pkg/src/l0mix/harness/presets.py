"""Parameter sets of the reference experiments, at full ("paper") and desk scale.

Each preset name maps to one or more labelled variants (for example one per
SNR, combiner, or update policy). Variants that end in ``lms`` run a single
plain-LMS filter on the same scenario and seeds, as a baseline.

Desk-scale values were chosen so each qualitative effect is visible on a
32-tap system in seconds:

* ``mu = 0.02``, about a third of the LMS bound ``2 / (L sigma_x^2)``;
* the kappa grid of ``exp1`` spans three decades, because the best kappa
  moves by about 1.6 decades between 10 and 40 dB;
* ``exp2`` keeps the 6000-sample SNR segments, since the gradient mixer's
  excess MSD decays like ``1 / (2 mu_c t)``, and uses ``mu_c = 1500``.
"""
from __future__ import annotations

from dataclasses import replace

from ..errors import ContractError
from ..filters import FilterParams
from ..sim import Scenario
from .config import CombinerSpec, ExperimentConfig, SweepSpec

PRESET_NAMES = ("exp1", "exp2", "exp3", "exp4", "pu_compare", "uneven")
SCALES = ("paper", "desk")

FULL_MU = 0.005
DESK_MU = 0.02
NEAR_SPARSE_EPS = 0.01
M4_KAPPAS = (0.0, 1e-6, 1e-5, 5e-5)

_SCALE = {
    "paper": dict(
        L=128, active=5, mu=FULL_MU, runs=100,
        exp1_horizon=15000, exp1_runs=100, sweep=(1e-6, 1e-4, 50),
        exp2_kappas=(5e-5, 5e-6), exp2_mu_c=3000.0, exp2_horizon=18000,
        fixed_horizon=12000, m4_horizon=15000, m4_runs=100,
    ),
    "desk": dict(
        L=32, active=2, mu=DESK_MU, runs=50,
        exp1_horizon=3000, exp1_runs=25, sweep=(5e-7, 5e-4, 16),
        exp2_kappas=(3e-5, 1.8e-6), exp2_mu_c=1500.0, exp2_horizon=18000,
        fixed_horizon=4000, m4_horizon=4000, m4_runs=25,
    ),
}


def _scenario(s, horizon, schedule, near_sparse=False):
    return Scenario(
        length=s["L"], n_active=s["active"], horizon=horizon, snr_schedule=schedule,
        near_sparse_eps=NEAR_SPARSE_EPS if near_sparse else 0.0,
    )


def _switching(horizon):
    seg = horizon // 3
    return ((0, 60.0), (seg, 40.0), (2 * seg, 20.0))


def _lms(cfg: ExperimentConfig) -> ExperimentConfig:
    return replace(
        cfg, filters=(FilterParams(cfg.filters[0].mu, 0.0, kind="lms"),),
        policy="full", combiner=CombinerSpec("none"),
    )


def _exp1(s):
    lo, hi, pts = s["sweep"]
    snrs = (10.0, 20.0, 30.0, 40.0)
    cfg = ExperimentConfig(
        scenario=_scenario(s, s["exp1_horizon"], ((0, snrs[0]),)),
        filters=(FilterParams(s["mu"], lo),),
        runs=s["exp1_runs"],
        sweep=SweepSpec(lo, hi, pts, snrs),
    )
    return {"sweep": cfg}


def _exp2(s):
    sc = _scenario(s, s["exp2_horizon"], _switching(s["exp2_horizon"]))
    cfg = ExperimentConfig(
        scenario=sc,
        filters=tuple(FilterParams(s["mu"], k) for k in s["exp2_kappas"]),
        combiner=CombinerSpec("grad", mu_c=s["exp2_mu_c"]),
        runs=s["runs"],
    )
    return {"combo": cfg, "lms": _lms(cfg)}


def _exp3(s):
    base = _exp2(s)["combo"]
    out = {}
    scenarios = {"switching": base.scenario}
    for snr in (20, 40):
        scenarios[f"snr{snr}"] = _scenario(s, s["fixed_horizon"], ((0, float(snr)),))
    combiners = {
        "grad1000": CombinerSpec("grad", mu_c=1000.0),
        "grad10000": CombinerSpec("grad", mu_c=10000.0),
        "rls": CombinerSpec("rls2"),
    }
    for sname, sc in scenarios.items():
        for cname, comb in combiners.items():
            out[f"{cname}_{sname}"] = replace(base, scenario=sc, policy="exclusive", combiner=comb)
        out[f"lms_{sname}"] = _lms(replace(base, scenario=sc))
    return out


def _m4(s, sc, policy):
    return ExperimentConfig(
        scenario=sc,
        filters=tuple(FilterParams(s["mu"], k) for k in M4_KAPPAS),
        policy=policy,
        combiner=CombinerSpec("softmax", rule="combined"),
        runs=s["m4_runs"],
    )


def _m4_scenarios(s):
    T = s["m4_horizon"]
    out = {f"snr{snr}": _scenario(s, T, ((0, float(snr)),)) for snr in (20, 40, 60)}
    out["nearsparse40"] = _scenario(s, T, ((0, 40.0),), near_sparse=True)
    return out


def _exp4(s):
    out = {}
    for name, sc in _m4_scenarios(s).items():
        cfg = _m4(s, sc, "exclusive")
        out[name] = cfg
        out[f"{name}_lms"] = _lms(cfg)
    return out


def _pu_compare(s):
    sc = _scenario(s, s["m4_horizon"], ((0, 20.0),), near_sparse=True)
    out = {p: _m4(s, sc, p) for p in ("exclusive", "full", "same")}
    out["lms"] = _lms(out["full"])
    return out


def _uneven(s):
    return {name: _m4(s, sc, "uneven") for name, sc in _m4_scenarios(s).items()}


_BUILDERS = {
    "exp1": _exp1, "exp2": _exp2, "exp3": _exp3, "exp4": _exp4,
    "pu_compare": _pu_compare, "uneven": _uneven,
}


def preset_variants(name: str, scale: str = "paper") -> dict[str, ExperimentConfig]:
    """All labelled configurations of one preset, in a stable order."""
    if name not in _BUILDERS:
        raise ContractError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
    if scale not in SCALES:
        raise ContractError(f"unknown scale {scale!r}; choose from {', '.join(SCALES)}")
    return _BUILDERS[name](_SCALE[scale])


def preset(name: str, scale: str = "paper", variant: str | None = None) -> ExperimentConfig:
    """One configuration of a preset; the first variant when ``variant`` is None."""
    variants = preset_variants(name, scale)
    if variant is None:
        return next(iter(variants.values()))
    try:
        return variants[variant]
    except KeyError:
        raise ContractError(
            f"preset {name!r} has no variant {variant!r}; choose from {', '.join(variants)}"
        ) from None
