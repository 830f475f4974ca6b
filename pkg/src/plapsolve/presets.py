"""Ready-made run configurations for the shipped applications.

One preset per application family: the quadratic Hardy potential on a
punctured box, the cylindrical Hardy potential, a bounded tabulated
potential, the critical constant potential on a strip, the divergent-forcing
strip construction, and utility solve/eigen/certify runs.  Constant weights
were calibrated by sampling the energy lower bound on the preset meshes and
halving the observed optimum.
"""

from __future__ import annotations

import copy
import json
from pathlib import Path

__all__ = ["names", "get", "write"]

_PRESETS: dict[str, dict] = {
    # linear manufactured problem with an analytic solution
    "manufactured_interval": {
        "subcommand": "solve",
        "domain": {"kind": "interval", "bounds": [[0.0, 1.0]]},
        "mesh": {"nodes_per_axis": [401]},
        "physics": {
            "p": 2.0,
            "q": 2.0,
            "potential": {"kind": "zero"},
            "weight": {"kind": "constant", "value": 0.45},
            "forcing": {"kind": "expression", "expr": "pi**2 * sin(pi*x)"},
        },
        "solver": {"eps0": 0.5, "ratio": 0.25, "steps": 7, "tol": 1e-9},
    },
    # quadratic Hardy potential, bounded punctured domain
    "hardy_quadratic": {
        "subcommand": "solve",
        "domain": {
            "kind": "punctured_box",
            "bounds": [[-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]],
            "puncture_radius": 0.05,
        },
        "mesh": {"nodes_per_axis": [21, 21, 21]},
        "physics": {
            "p": 2.0,
            "q": 1.8,
            "potential": {"kind": "quadratic_hardy"},
            "weight": {"kind": "constant", "value": 0.29},
            "forcing": {
                "kind": "expression",
                "expr": "exp(-4*((x-0.3)**2 + y**2 + (z+0.2)**2))",
            },
        },
        "solver": {"eps0": 0.5, "ratio": 0.25, "steps": 6, "tol": 1e-8},
    },
    # Hardy potential singular on a coordinate plane, p < 2
    "hardy_cylindrical": {
        "subcommand": "solve",
        "domain": {
            "kind": "box",
            "bounds": [[-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]],
        },
        "mesh": {
            "nodes_per_axis": [17, 17, 17],
            "singular_cap_radius": 0.1,
            "singular_axes": [0, 1],
        },
        "physics": {
            "p": 1.5,
            "q": 1.3,
            "potential": {"kind": "cylindrical_hardy", "k_axes": 2},
            "weight": {"kind": "constant", "value": 0.27},
            "forcing": {
                "kind": "expression",
                "expr": "sin(pi*x)*cos(0.5*pi*y)*sin(pi*z)",
            },
        },
        "solver": {"eps0": 0.5, "ratio": 0.25, "steps": 6, "tol": 2e-4, "max_iter": 2500, "delta0": 1e-4},
    },
    # bounded tabulated potential below the first eigenvalue, p = q
    "bounded_potential": {
        "subcommand": "solve",
        "domain": {"kind": "box", "bounds": [[0.0, 1.0], [0.0, 1.0]]},
        "mesh": {"nodes_per_axis": [33, 33]},
        "physics": {
            "p": 2.5,
            "q": 2.5,
            "potential": {"kind": "tabulated", "expr": "14.3*sin(pi*x)*sin(pi*y)"},
            "weight": {"kind": "constant", "value": 0.33},
            "forcing": {"kind": "expression", "expr": "sin(pi*x)*sin(2*pi*y)"},
        },
        "solver": {"eps0": 0.5, "ratio": 0.25, "steps": 6, "tol": 2e-5, "max_iter": 2500, "delta0": 1e-4},
    },
    # constant potential at the cross-section eigenvalue on a strip
    "strip_critical": {
        "subcommand": "solve",
        "domain": {
            "kind": "strip",
            "bounds": [[0.0, 1.0]],
            "m_axes": 3,
            "truncation_length": 2.0,
        },
        "mesh": {"nodes_per_axis": [9, 13, 13, 13]},
        "physics": {
            "p": 2.0,
            "q": 2.0,
            "potential": {"kind": "constant", "value": "lambda1_omega"},
            "weight": {"kind": "cylinder_decay", "value": 0.125, "p": 2.0},
            "forcing": {
                "kind": "expression",
                "expr": "sin(pi*x)*exp(-2*(y**2 + z**2 + w**2))",
            },
        },
        "solver": {"eps0": 0.5, "ratio": 0.25, "steps": 6, "tol": 1e-8},
    },
    # finite-dual-norm forcing whose solution has divergent gradient energy
    "blowup_strip": {
        "subcommand": "blowup",
        "domain": {
            "kind": "strip",
            "bounds": [[0.0, 1.0]],
            "m_axes": 1,
            "truncation_length": 48.0,
        },
        "mesh": {"nodes_per_axis": [17, 769]},
        "blowup": {"n_terms": 16, "length_per_bump": 6.0, "z_nodes_per_unit": 8.0},
    },
    # the full inequality certification suite
    "certify_suite": {
        "subcommand": "certify",
        "certify": {
            "checks": ["monotonicity", "power_mean", "hardy", "poincare", "cylinder"],
            "samples": 200,
            "pair_samples": 100000,
            "p_values": [1.5, 2.0, 3.0, 4.0],
        },
    },
    # first eigenvalue of the unit interval
    "eigen_interval": {
        "subcommand": "eigen",
        "domain": {"kind": "interval", "bounds": [[0.0, 1.0]]},
        "mesh": {"nodes_per_axis": [401]},
        "physics": {"p": 2.0},
    },
    # eigenvalue truncation sweep on a strip
    "eigen_strip_sweep": {
        "subcommand": "eigen",
        "domain": {
            "kind": "strip",
            "bounds": [[0.0, 1.0]],
            "m_axes": 1,
            "truncation_length": 8.0,
        },
        "mesh": {"nodes_per_axis": [33, 129]},
        "physics": {"p": 2.0},
        "eigen": {"l_values": [2.0, 4.0, 8.0]},
    },
    # admissibility report for the quadratic Hardy configuration
    "admissibility_hardy": {
        "subcommand": "admissibility",
        "domain": {
            "kind": "punctured_box",
            "bounds": [[-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]],
            "puncture_radius": 0.05,
        },
        "mesh": {"nodes_per_axis": [21, 21, 21]},
        "physics": {
            "p": 2.0,
            "q": 1.8,
            "potential": {"kind": "quadratic_hardy"},
            "weight": {"kind": "constant", "value": 0.29},
        },
    },
}


def names() -> list[str]:
    return sorted(_PRESETS)


def get(name: str) -> dict:
    """Deep copy of the named preset configuration."""
    if name not in _PRESETS:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(names())}")
    return copy.deepcopy(_PRESETS[name])


def write(name: str, path) -> Path:
    """Write the named preset to a JSON config file."""
    path = Path(path)
    path.write_text(json.dumps(get(name), indent=2, sort_keys=True) + "\n")
    return path
