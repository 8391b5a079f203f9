"""Regenerates the bundled case fixtures from pandapower's public network data.

Requires pandapower (only for this script; the library itself has no Python
dependencies). Run from the repo root:

    python tools/fixtures/make_fixtures.py

IEEE-30: bus/branch tables in per-unit on a 100 MVA base, taken from the
MATPOWER-style arrays. Off-nominal transformer taps are dropped (ratio 1.0).

European LV feeder (906 LV buses): one 11 kV source bus feeding bus 1 through
the 0.8 MVA substation transformer, modelled as a wye-wye series admittance
(phase shift dropped). Line sequence impedances are converted to 3x3 phase
admittance blocks; loads are the "on_peak_566" snapshot as constant-power
wye loads. Per-unit base: 1 MVA three-phase, 0.416 kV line-to-line, so a
per-phase power in p.u. is P_phase / (1/3 MVA).
"""

import json
import math
import warnings

import numpy as np

warnings.filterwarnings("ignore")

import pandapower as pp  # noqa: E402
import pandapower.networks as pn  # noqa: E402


def ieee30():
    net = pn.case_ieee30()
    pp.runpp(net)
    ppc = net._ppc
    base = float(ppc["baseMVA"])
    gen_p = {int(g[0]): float(g[1]) for g in ppc["gen"]}
    kinds = {3: "slack", 2: "pv", 1: "pq"}
    buses = []
    for row in ppc["bus"]:
        idx = int(row[0])
        kind = kinds[int(row[1])]
        vset = float(row[7]) if kind != "pq" else 1.0
        if kind == "slack":
            vset = 1.06
        buses.append({
            "id": idx + 1,
            "type": kind,
            "p_load": round(float(row[2]) / base, 10),
            "q_load": round(float(row[3]) / base, 10),
            "p_gen": round(gen_p.get(idx, 0.0) / base, 10) if kind == "pv" else 0.0,
            "v_setpoint": round(vset, 6),
            "shunt_g": round(float(row[4]) / base, 10),
            "shunt_b": round(float(row[5]) / base, 10),
        })
    # PV setpoints from the generator table
    for g in ppc["gen"]:
        buses[int(g[0])]["v_setpoint"] = float(g[5])
    branches = []
    for br in ppc["branch"]:
        branches.append({
            "from": int(br[0].real) + 1,
            "to": int(br[1].real) + 1,
            "r": round(float(br[2].real), 10),
            "x": round(float(br[3].real), 10),
            "b": round(abs(float(br[4].real)), 10),
        })
    return {
        "format_version": "1.0",
        "kind": "single_phase",
        "metadata": {
            "name": "ieee30",
            "source": "IEEE 30-bus test case (MATPOWER case_ieee30 tables via pandapower); "
                      "transformer off-nominal taps dropped",
        },
        "network": {"base_mva": base, "buses": buses, "branches": branches},
    }


def cplx(z):
    return [float(z.real), float(z.imag)]


def mat3(m):
    return [[cplx(m[i, j]) for j in range(3)] for i in range(3)]


def lv_feeder():
    net = pn.ieee_european_lv_asymmetric("on_peak_566")
    s_base = 1.0  # MVA, three-phase
    v_base = 0.416  # kV line-to-line
    z_base = v_base ** 2 / s_base

    buses = []
    for idx in net.bus.index:
        buses.append({"id": int(idx), "phases": "abc"})

    loads = {}
    for _, ld in net.asymmetric_load.iterrows():
        entry = loads.setdefault(int(ld.bus), {})
        for ph in "abc":
            p = float(ld[f"p_{ph}_mw"]) * 3.0 / s_base
            q = float(ld[f"q_{ph}_mvar"]) * 3.0 / s_base
            if p == 0.0 and q == 0.0:
                continue
            prev = entry.get(ph, {"p": [0.0, 0.0, 0.0], "q": [0.0, 0.0, 0.0]})
            prev["p"][0] += p
            prev["q"][0] += q
            entry[ph] = prev
    for b in buses:
        if b["id"] in loads:
            b["loads"] = loads[b["id"]]

    branches = []
    tr = net.trafo.iloc[0]
    zt_mag = tr.vk_percent / 100.0 * s_base / tr.sn_mva
    zt_r = tr.vkr_percent / 100.0 * s_base / tr.sn_mva
    zt = complex(zt_r, math.sqrt(zt_mag ** 2 - zt_r ** 2))
    branches.append({
        "from": int(tr.hv_bus),
        "to": int(tr.lv_bus),
        "phases": "abc",
        "y_series": mat3(np.eye(3) / zt),
    })
    for _, ln in net.line.iterrows():
        z1 = complex(ln.r_ohm_per_km, ln.x_ohm_per_km) * ln.length_km / z_base
        z0 = complex(ln.r0_ohm_per_km, ln.x0_ohm_per_km) * ln.length_km / z_base
        # Zabc = Z1*I + Zm*11^T with Zm = (Z0 - Z1)/3; closed-form inverse keeps
        # the admittance block exactly symmetric.
        zm = (z0 - z1) / 3.0
        y_off = -zm / (z1 * z0)
        y = np.full((3, 3), y_off, dtype=complex)
        np.fill_diagonal(y, 1.0 / z1 + y_off)
        branches.append({
            "from": int(ln.from_bus),
            "to": int(ln.to_bus),
            "phases": "abc",
            "y_series": mat3(y),
        })
    return {
        "format_version": "1.0",
        "kind": "three_phase",
        "metadata": {
            "name": "european_lv_feeder",
            "source": "IEEE European LV test feeder, on-peak snapshot 566 (via pandapower); "
                      "1 MVA / 0.416 kV base; substation transformer as wye-wye series "
                      "admittance without phase shift",
        },
        "network": {
            "base_mva": s_base,
            "source_bus": int(net.ext_grid.bus.iloc[0]),
            "source_voltage": {"magnitude": float(net.ext_grid.vm_pu.iloc[0]), "angle": 0.0},
            "buses": buses,
            "branches": branches,
        },
    }


if __name__ == "__main__":
    for name, case in (("ieee30.json", ieee30()), ("european_lv_feeder.json", lv_feeder())):
        with open(f"data/{name}", "w") as fh:
            json.dump(case, fh, indent=1, sort_keys=True)
            fh.write("\n")
        print("wrote", name)
