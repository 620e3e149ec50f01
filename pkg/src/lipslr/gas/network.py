"""Stationary gas network model: graph data, flow fixing and the MINLP builder.

Pressures are in bar and flows in kg/s.  Supplies are positive injections,
demands negative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..model import LinearPart, LipschitzMinlp, NonlinearityBinding, VariableSpec
from .physics import BAR, GasConstants, GasPipeOracle, PipeInfeasibleError

ARC_KINDS = ("pipe", "short-pipe", "valve", "compressor", "control-valve", "resistor")


@dataclass
class Node:
    name: str
    p_lo: float
    p_hi: float
    injection: float = 0.0


@dataclass
class Arc:
    name: str
    kind: str
    tail: str
    head: str
    q_lo: float
    q_hi: float
    length: float | None = None
    diameter: float | None = None
    friction: float | None = None
    dp_max: float | None = None

    def __post_init__(self):
        if self.kind not in ARC_KINDS:
            raise ValueError(f"arc {self.name!r}: unknown type {self.kind!r}")
        if self.kind == "resistor":
            self.kind = "short-pipe"
        if self.q_lo > self.q_hi:
            raise ValueError(f"arc {self.name!r}: flow bounds reversed")


@dataclass
class GasNetwork:
    nodes: list
    arcs: list
    constants: GasConstants = field(default_factory=GasConstants)

    def __post_init__(self):
        self.node_index = {n.name: k for k, n in enumerate(self.nodes)}
        if len(self.node_index) != len(self.nodes):
            raise ValueError("duplicate node names")
        if len({a.name for a in self.arcs}) != len(self.arcs):
            raise ValueError("duplicate arc names")
        for a in self.arcs:
            if a.tail not in self.node_index or a.head not in self.node_index:
                raise ValueError(f"arc {a.name!r}: unknown end node")

    @classmethod
    def from_dict(cls, data: dict) -> "GasNetwork":
        nodes = [Node(d["name"], float(d["p_min"]), float(d["p_max"]),
                      float(d.get("injection", 0.0))) for d in data["nodes"]]
        arcs = []
        for d in data["arcs"]:
            opt = {k: (None if d.get(k) is None else float(d[k]))
                   for k in ("length", "diameter", "friction", "dp_max")}
            arcs.append(Arc(d["name"], d["type"], d["from"], d["to"], float(d["q_min"]),
                            float(d["q_max"]), **opt))
        gc = GasConstants(**data.get("constants", {}))
        return cls(nodes, arcs, gc)

    def to_dict(self) -> dict:
        arcs = []
        for a in self.arcs:
            d = {"name": a.name, "type": a.kind, "from": a.tail, "to": a.head,
                 "q_min": a.q_lo, "q_max": a.q_hi}
            for k in ("length", "diameter", "friction", "dp_max"):
                if getattr(a, k) is not None:
                    d[k] = getattr(a, k)
            arcs.append(d)
        return {"constants": self.constants.to_dict(),
                "nodes": [{"name": n.name, "p_min": n.p_lo, "p_max": n.p_hi,
                           "injection": n.injection} for n in self.nodes],
                "arcs": arcs}

    def node(self, name: str) -> Node:
        return self.nodes[self.node_index[name]]

    def pipe_oracle(self, arc: Arc, fixed_flow=None) -> GasPipeOracle:
        return GasPipeOracle(arc.length, arc.diameter, arc.friction, self.constants, fixed_flow)

    def validate(self) -> list:
        issues = []
        if not _weakly_connected(self):
            issues.append("network is not weakly connected")
        for n in self.nodes:
            if n.p_lo > n.p_hi:
                issues.append(f"node {n.name!r}: pressure bounds reversed")
        for a in self.arcs:
            if a.kind in ("compressor", "control-valve") and a.q_lo < 0.0:
                issues.append(f"arc {a.name!r}: {a.kind} needs nonnegative flow")
            if a.kind in ("compressor", "control-valve") and a.dp_max is None:
                issues.append(f"arc {a.name!r}: missing dp_max")
            if a.kind == "pipe" and None in (a.length, a.diameter, a.friction):
                issues.append(f"arc {a.name!r}: pipe needs length, diameter and friction")
        return issues


def _weakly_connected(net: GasNetwork) -> bool:
    if not net.nodes:
        return True
    adj = {n.name: set() for n in net.nodes}
    for a in net.arcs:
        adj[a.tail].add(a.head)
        adj[a.head].add(a.tail)
    seen = {net.nodes[0].name}
    stack = [net.nodes[0].name]
    while stack:
        u = stack.pop()
        for v in adj[u] - seen:
            seen.add(v)
            stack.append(v)
    return len(seen) == len(net.nodes)


def fix_tree_flows(net: GasNetwork, tol: float = 1e-9) -> dict:
    """Flows forced by mass balance on arcs outside every cycle.

    Degree-one nodes are peeled repeatedly; the single remaining arc of a
    leaf carries the leaf's residual supply.
    """
    residual = {n.name: n.injection for n in net.nodes}
    incident = {n.name: [] for n in net.nodes}
    for k, a in enumerate(net.arcs):
        incident[a.tail].append(k)
        incident[a.head].append(k)
    alive = [True] * len(net.arcs)
    degree = {u: len(ks) for u, ks in incident.items()}
    fixed = {}
    queue = sorted((u for u, d in degree.items() if d == 1), key=net.node_index.get)
    while queue:
        u = queue.pop(0)
        if degree[u] != 1:
            continue
        k = next(k for k in incident[u] if alive[k])
        a = net.arcs[k]
        q = residual[u] if a.tail == u else -residual[u]
        if q < a.q_lo - tol or q > a.q_hi + tol:
            raise ValueError(f"arc {a.name!r}: balance forces flow {q:.6g} outside "
                             f"[{a.q_lo:.6g}, {a.q_hi:.6g}]")
        fixed[a.name] = q
        alive[k] = False
        residual[u] = 0.0
        degree[u] = 0
        w = a.head if a.tail == u else a.tail
        residual[w] += q if a.head == w else -q
        degree[w] -= 1
        if degree[w] == 1:
            queue.append(w)
        elif degree[w] == 0 and abs(residual[w]) > tol:
            raise ValueError(f"node {w!r}: supplies and demands do not balance")
    return fixed


@dataclass
class GasModelMap:
    pressure: dict
    flow: dict
    dp: dict
    valve: dict
    fixed_flows: dict
    pipes: list  # arc names in binding order


def _pipe_bounds(net, arc, fixed):
    pu = net.node(arc.tail)
    pv = net.node(arc.head)
    if arc.name in fixed:
        q_lo = q_hi = fixed[arc.name]
    else:
        q_lo, q_hi = arc.q_lo, arc.q_hi
    return pu, pv, q_lo, q_hi


def check_assumption(net: GasNetwork, arc: Arc, fixed: dict) -> list:
    """Violations of the admissible-pressure assumption for one pipe."""
    pu, pv, q_lo, q_hi = _pipe_bounds(net, arc, fixed)
    oracle = net.pipe_oracle(arc)
    pipe = oracle.pipe
    out = []
    qmax = max(abs(q_lo), abs(q_hi))
    floor = qmax / pipe.params.area * math.sqrt(net.constants.rst) / BAR
    ceil = net.constants.p_max / BAR
    for node in (pu, pv):
        if not (floor < node.p_lo and node.p_hi < ceil):
            out.append(f"pipe {arc.name!r}: pressure range of node {node.name!r} "
                       f"[{node.p_lo}, {node.p_hi}] not inside ({floor:.6g}, {ceil:.6g}) bar")
    if not out:
        try:
            pipe.outlet_range(pu.p_lo, pu.p_hi, q_lo, q_hi)
        except PipeInfeasibleError as exc:
            out.append(f"pipe {arc.name!r}: outlet pressure leaves the admissible interval ({exc})")
    return out


def gas_big_m(net: GasNetwork, fixed: dict | None = None) -> float:
    """``max`` over pipes of the bound-only Big-M formula (bar / kg/s)."""
    fixed = fixed or {}
    m = 0.0
    for a in net.arcs:
        if a.kind != "pipe":
            continue
        pu, pv, q_lo, q_hi = _pipe_bounds(net, a, fixed)
        m = max(m, net.pipe_oracle(a).pipe.big_m(pu.p_lo, pu.p_hi, q_lo, q_hi, pv.p_lo, pv.p_hi))
    return m


def build_minlp(net: GasNetwork, fix_flows: bool = True, box_filter: bool = True,
                local_weights: bool = True, use_gas_big_m: bool = False):
    """Returns ``(problem, map)`` for minimizing total compressor pressure increase."""
    issues = net.validate()
    fixed = fix_tree_flows(net) if fix_flows else {}
    for a in net.arcs:
        if a.kind == "pipe":
            issues += check_assumption(net, a, fixed)
    if issues:
        raise ValueError("invalid gas network: " + "; ".join(issues))

    variables = []
    pressure, flow, dp, valve = {}, {}, {}, {}
    for n in net.nodes:
        pressure[n.name] = len(variables)
        variables.append(VariableSpec(f"p[{n.name}]", n.p_lo, n.p_hi))
    for a in net.arcs:
        flow[a.name] = len(variables)
        lo, hi = (fixed[a.name], fixed[a.name]) if a.name in fixed else (a.q_lo, a.q_hi)
        variables.append(VariableSpec(f"q[{a.name}]", lo, hi))
    for a in net.arcs:
        if a.kind in ("compressor", "control-valve"):
            dp[a.name] = len(variables)
            variables.append(VariableSpec(f"dp[{a.name}]", 0.0, a.dp_max))
        elif a.kind == "valve":
            valve[a.name] = len(variables)
            variables.append(VariableSpec(f"o[{a.name}]", 0.0, 1.0, True))
    n = len(variables)
    rows, rhs = [], []

    def geq(coefs, b):
        r = np.zeros(n)
        for j, v in coefs:
            r[j] += v
        rows.append(r)
        rhs.append(b)

    def eq(coefs, b):
        geq(coefs, b)
        geq([(j, -v) for j, v in coefs], -b)

    for node in net.nodes:
        coefs = []
        for a in net.arcs:
            if a.tail == node.name:
                coefs.append((flow[a.name], 1.0))
            if a.head == node.name:
                coefs.append((flow[a.name], -1.0))
        if coefs:
            eq(coefs, node.injection)
    bindings, pipes = [], []
    for a in net.arcs:
        pu, pv = pressure[a.tail], pressure[a.head]
        if a.kind == "short-pipe":
            eq([(pv, 1.0), (pu, -1.0)], 0.0)
        elif a.kind == "compressor":
            eq([(pv, 1.0), (pu, -1.0), (dp[a.name], -1.0)], 0.0)
        elif a.kind == "control-valve":
            eq([(pv, 1.0), (pu, -1.0), (dp[a.name], 1.0)], 0.0)
        elif a.kind == "valve":
            o, q = valve[a.name], flow[a.name]
            tn, hn = net.node(a.tail), net.node(a.head)
            m = max(hn.p_hi - tn.p_lo, tn.p_hi - hn.p_lo, 0.0)
            geq([(q, -1.0), (o, a.q_hi)], 0.0)            # q <= q+ o
            geq([(q, 1.0), (o, -a.q_lo)], 0.0)            # q >= q- o
            geq([(pv, -1.0), (pu, 1.0), (o, -m)], -m)     # pv - pu <= M (1 - o)
            geq([(pv, 1.0), (pu, -1.0), (o, -m)], -m)     # pv - pu >= -M (1 - o)
        elif a.kind == "pipe":
            bindings.append(_pipe_binding(net, a, pu, pv, flow[a.name], fixed,
                                          box_filter, local_weights))
            pipes.append(a.name)
    c = np.zeros(n)
    for a in net.arcs:
        if a.kind == "compressor":
            c[dp[a.name]] = 1.0
    A = np.array(rows) if rows else np.zeros((0, n))
    problem = LipschitzMinlp(variables, LinearPart(c, A, np.array(rhs)), bindings, name="gas")
    if use_gas_big_m:
        problem.big_m = gas_big_m(net, fixed)
    return problem, GasModelMap(pressure, flow, dp, valve, fixed, pipes)


def _pipe_binding(net, arc, pu, pv, q_col, fixed, box_filter, local_weights):
    is_fixed = arc.name in fixed
    oracle = net.pipe_oracle(arc, fixed[arc.name] if is_fixed else None)
    inputs = (pu,) if is_fixed else (pu, q_col)
    head = net.node(arc.head)
    tail = net.node(arc.tail)
    if is_fixed:
        lo, hi = np.array([tail.p_lo]), np.array([tail.p_hi])
    else:
        lo, hi = np.array([tail.p_lo, arc.q_lo]), np.array([tail.p_hi, arc.q_hi])
    norm = oracle.local_norm(lo, hi)
    hook = (lambda box, o=oracle: o.local_norm(box.lower, box.upper)) if local_weights else None
    filt = (lambda box, o=oracle, h=head: o.keep_box(box.lower, box.upper, h.p_lo, h.p_hi)) \
        if box_filter else None
    return NonlinearityBinding(inputs, pv, oracle, 1.0, norm, hook, filt, name=f"pipe[{arc.name}]")


def network_state(net: GasNetwork, point, gmap: GasModelMap) -> dict:
    x = np.asarray(point, dtype=float)
    return {
        "pressure_bar": {k: float(x[j]) for k, j in gmap.pressure.items()},
        "flow_kg_s": {k: float(x[j]) for k, j in gmap.flow.items()},
        "compressor_dp_bar": {k: float(x[j]) for k, j in gmap.dp.items()
                              if any(a.name == k and a.kind == "compressor" for a in net.arcs)},
        "control_valve_dp_bar": {k: float(x[j]) for k, j in gmap.dp.items()
                                 if any(a.name == k and a.kind == "control-valve"
                                        for a in net.arcs)},
        "valve_open": {k: int(round(x[j])) for k, j in gmap.valve.items()},
    }


def verify_state(net: GasNetwork, state: dict, epsilon: float) -> dict:
    """Re-evaluate every pipe from the state and report outlet-pressure deviations (bar)."""
    dev = {}
    p = state["pressure_bar"]
    q = state["flow_kg_s"]
    for a in net.arcs:
        if a.kind != "pipe":
            continue
        pipe = net.pipe_oracle(a).pipe
        try:
            pv = pipe.p_out(p[a.tail] * BAR, q[a.name]) / BAR
            dev[a.name] = abs(pv - p[a.head])
        except PipeInfeasibleError:
            dev[a.name] = math.inf
    worst = max(dev.values(), default=0.0)
    return {"deviation_bar": dev, "max_deviation_bar": worst, "ok": worst <= epsilon}
