"""Network topology, incidence matrices, and the assembled global DAE.

Unknown vector layout (length = sum(2 n_cells) + 2 * n_pipes + n_nodes):

    x = [ z | mu | lambda ]

    z       all pipe differential states, pipe by pipe (densities then momenta)
    mu      one input pair per pipe: (inlet pressure, minus outlet momentum)
    lambda  one pressure-valued potential per node, ordered boundary nodes
            first, then compressor nodes (inlet before outlet per station),
            then internal nodes

Residual row layout mirrors it:

    pipe rows:  W dz/dt - (J - R(z)) e(z) - B mu          (one per state)
    port rows:  inlet:  mu_p - lambda(from-node)
                outlet: p_out(z) - lambda(to-node)        (two per pipe)
    node rows:  supply:   lambda - p_set(t)
                demand:   sum(outlet fluxes) - sum(inlet fluxes) - m_out(t)
                junction: the same balance with zero extraction
                station inlet node:   m_upstream - k(z) * m_downstream = 0
                station outlet node:  lambda - ratio * p_upstream(z)   (FC)
                                      lambda - p_set(t)                (FP)

All nonlinearity lives in e(z), the friction operator and the
state-dependent station couplings; the rows are linear in mu and lambda at
fixed z. The residual is a pure function of its arguments, so concurrent
evaluations (finite-difference Jacobian columns) are safe.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .compressor import (Assumption, CompressorModel, CompressorPortState,
                         Framework, external_power)
from .errors import ConfigurationError, StateError
from .gas import GasProperties, PipeField, hamiltonian
from .pipe import PipeSpec, PipeSystem, discretize_pipe


class NodeKind(str, Enum):
    SUPPLY = "supply"
    DEMAND = "demand"
    JUNCTION = "junction"
    COMPRESSOR_IN = "compressor-in"
    COMPRESSOR_OUT = "compressor-out"


BOUNDARY_KINDS = (NodeKind.SUPPLY, NodeKind.DEMAND)
COMPRESSOR_KINDS = (NodeKind.COMPRESSOR_IN, NodeKind.COMPRESSOR_OUT)


@dataclass
class Node:
    id: str
    kind: NodeKind
    compressor_id: str | None = None


@dataclass
class PipeEdge:
    """A pipe plus its attachment: gas flows from `from_node` to `to_node`."""

    spec: PipeSpec
    from_node: str
    to_node: str


@dataclass
class CompressorStation:
    """A station between an upstream pipe outlet and a downstream pipe inlet.

    `ratio` and `pressure` are the default setpoints for the two frameworks;
    scenario profiles override them per time.
    """

    id: str
    inlet_node: str
    outlet_node: str
    framework: Framework
    assumption: Assumption
    ratio: float | None = None
    pressure: float | None = None

    def __post_init__(self):
        self.framework = Framework(self.framework)
        self.assumption = Assumption(self.assumption)

    def default_setpoint(self) -> float | None:
        if self.framework is Framework.FIXED_RATIO:
            return self.ratio
        return self.pressure

    def model(self, kappa: float) -> CompressorModel:
        setpoint = self.default_setpoint()
        if setpoint is None:
            setpoint = 1.0  # placeholder; the bound scenario profile governs
        return CompressorModel(self.framework, self.assumption, setpoint, kappa)


@dataclass
class NetworkSpec:
    gas: GasProperties
    nodes: list[Node]
    pipes: list[PipeEdge]
    compressors: list[CompressorStation] = field(default_factory=list)

    def node_by_id(self, nid: str) -> Node:
        for nd in self.nodes:
            if nd.id == nid:
                return nd
        raise ConfigurationError(f"unknown node id {nid!r}")


@dataclass
class Violation:
    code: str
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self):
        if self.ok:
            return "topology valid"
        return "\n".join(f"[{v.code}] {v.message}" for v in self.violations)


def validate_topology(spec: NetworkSpec) -> ValidationReport:
    """Check all structural invariants; returns a report, never raises."""
    out: list[Violation] = []
    ids = [nd.id for nd in spec.nodes]
    known = set(ids)
    if len(known) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        out.append(Violation("duplicate-node", f"duplicate node ids: {dupes}"))

    pipe_ids = [pe.spec.id for pe in spec.pipes]
    if len(set(pipe_ids)) != len(pipe_ids):
        dupes = sorted({i for i in pipe_ids if pipe_ids.count(i) > 1})
        out.append(Violation("duplicate-pipe", f"duplicate pipe ids: {dupes}"))

    for pe in spec.pipes:
        for end in (pe.from_node, pe.to_node):
            if end not in known:
                out.append(Violation(
                    "unknown-node",
                    f"pipe {pe.spec.id!r} references undeclared node {end!r}"))

    out_degree = {nid: 0 for nid in known}   # pipe inlets attached (from)
    in_degree = {nid: 0 for nid in known}    # pipe outlets attached (to)
    for pe in spec.pipes:
        if pe.from_node in known:
            out_degree[pe.from_node] += 1
        if pe.to_node in known:
            in_degree[pe.to_node] += 1

    comp_nodes = {}
    for st in spec.compressors:
        for nid, want in ((st.inlet_node, NodeKind.COMPRESSOR_IN),
                          (st.outlet_node, NodeKind.COMPRESSOR_OUT)):
            if nid not in known:
                out.append(Violation(
                    "unknown-node",
                    f"compressor {st.id!r} references undeclared node {nid!r}"))
                continue
            nd = spec.node_by_id(nid)
            if nd.kind is not want:
                out.append(Violation(
                    "compressor-node-kind",
                    f"compressor {st.id!r}: node {nid!r} has kind {nd.kind.value}, "
                    f"expected {want.value}"))
            if nid in comp_nodes:
                out.append(Violation(
                    "compressor-node-shared",
                    f"node {nid!r} belongs to compressors {comp_nodes[nid]!r} and {st.id!r}"))
            comp_nodes[nid] = st.id
        if st.inlet_node == st.outlet_node:
            out.append(Violation(
                "compressor-degenerate",
                f"compressor {st.id!r} has identical end nodes"))

    for nd in spec.nodes:
        deg = out_degree.get(nd.id, 0) + in_degree.get(nd.id, 0)
        if nd.kind in COMPRESSOR_KINDS:
            if deg != 1:
                out.append(Violation(
                    "compressor-end-degree",
                    f"compressor end node {nd.id!r} has degree {deg}, expected 1"))
            elif nd.kind is NodeKind.COMPRESSOR_IN and in_degree[nd.id] != 1:
                out.append(Violation(
                    "compressor-end-orientation",
                    f"compressor inlet node {nd.id!r} must terminate a pipe"))
            elif nd.kind is NodeKind.COMPRESSOR_OUT and out_degree[nd.id] != 1:
                out.append(Violation(
                    "compressor-end-orientation",
                    f"compressor outlet node {nd.id!r} must start a pipe"))
            if nd.compressor_id is None or nd.id not in comp_nodes:
                out.append(Violation(
                    "compressor-node-unbound",
                    f"node {nd.id!r} is a compressor end but no station references it"))
        elif nd.kind in BOUNDARY_KINDS and deg < 1:
            out.append(Violation(
                "dangling-boundary",
                f"{nd.kind.value} node {nd.id!r} has no attached pipe"))

    if not any(nd.kind is NodeKind.SUPPLY for nd in spec.nodes):
        out.append(Violation("no-pressure-reference",
                             "network has no supply (pressure-specified) node"))

    # connectivity over pipes and compressor links
    if known and not out:
        parent = {nid: nid for nid in known}

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        def union(a, b):
            parent[find(a)] = find(b)

        for pe in spec.pipes:
            union(pe.from_node, pe.to_node)
        for st in spec.compressors:
            union(st.inlet_node, st.outlet_node)
        roots = {find(nid) for nid in known}
        if len(roots) > 1:
            out.append(Violation("disconnected",
                                 f"network splits into {len(roots)} components"))

    return ValidationReport(out)


def _node_classes(spec: NetworkSpec):
    boundary = [nd for nd in spec.nodes if nd.kind in BOUNDARY_KINDS]
    compressor = [nd for nd in spec.nodes if nd.kind in COMPRESSOR_KINDS]
    internal = [nd for nd in spec.nodes if nd.kind is NodeKind.JUNCTION]
    return boundary, compressor, internal


def incidence_matrices(spec: NetworkSpec):
    """0/1 incidence of pipe ports onto boundary, compressor, internal nodes.

    Columns are the pipe ports in declaration order, inlet then outlet per
    pipe; rows are the nodes of each class in declaration order.
    """
    report = validate_topology(spec)
    if not report.ok:
        raise ConfigurationError(f"invalid network:\n{report}")
    n_ports = 2 * len(spec.pipes)
    boundary, compressor, internal = _node_classes(spec)

    def build(nodes):
        A = np.zeros((len(nodes), n_ports), dtype=int)
        index = {nd.id: r for r, nd in enumerate(nodes)}
        for k, pe in enumerate(spec.pipes):
            if pe.from_node in index:
                A[index[pe.from_node], 2 * k] = 1
            if pe.to_node in index:
                A[index[pe.to_node], 2 * k + 1] = 1
        return A

    return build(boundary), build(compressor), build(internal)


@dataclass
class _StationBinding:
    station: CompressorStation
    model: CompressorModel
    pipe_up: int        # pipe whose outlet feeds the station
    pipe_down: int      # pipe fed by the station
    row_in: int         # momentum-rule row (at the inlet node)
    row_out: int        # pressure-rule row (at the outlet node)
    lam_out: int        # column of the outlet-node potential


class GlobalSystem:
    """Assembled network DAE with residual, Jacobian pattern and diagnostics."""

    def __init__(self, spec: NetworkSpec, n_cells_override: int | None = None):
        report = validate_topology(spec)
        if not report.ok:
            raise ConfigurationError(f"invalid network:\n{report}")
        self.spec = spec
        self.gas = spec.gas

        self.pipes: list[PipeSystem] = []
        for pe in spec.pipes:
            ps = pe.spec
            if n_cells_override is not None:
                ps = PipeSpec(ps.id, ps.length, ps.diameter, ps.friction, n_cells_override)
            self.pipes.append(discretize_pipe(ps, spec.gas))

        # --- unknown layout ------------------------------------------
        self.rho_sl, self.mom_sl = [], []
        off = 0
        for p in self.pipes:
            self.rho_sl.append(slice(off, off + p.n))
            self.mom_sl.append(slice(off + p.n, off + 2 * p.n))
            off += 2 * p.n
        self.n_z = off
        P = len(self.pipes)
        self.mu_p = [self.n_z + 2 * k for k in range(P)]
        self.mu_m = [self.n_z + 2 * k + 1 for k in range(P)]

        boundary, compressor, internal = _node_classes(spec)
        self.node_order = boundary + compressor + internal
        self.lam = {nd.id: self.n_z + 2 * P + i for i, nd in enumerate(self.node_order)}
        self.n_alg = 2 * P + len(self.node_order)
        self.n = self.n_z + self.n_alg

        # --- row layout ----------------------------------------------
        self.port_in_row = [self.n_z + 2 * k for k in range(P)]
        self.port_out_row = [self.n_z + 2 * k + 1 for k in range(P)]
        self.node_row = {nd.id: self.n_z + 2 * P + i for i, nd in enumerate(self.node_order)}

        # energy weights over the differential states
        self.energy_weights = np.concatenate([p.weights for p in self.pipes])

        # per-node attachments: (pipe index, is_outlet)
        self.attached: dict[str, list[tuple[int, bool]]] = {nd.id: [] for nd in spec.nodes}
        for k, pe in enumerate(spec.pipes):
            self.attached[pe.from_node].append((k, False))
            self.attached[pe.to_node].append((k, True))

        # --- station bindings ----------------------------------------
        self.stations: list[_StationBinding] = []
        for st in spec.compressors:
            ups = [k for k, isout in self.attached[st.inlet_node] if isout]
            dns = [k for k, isout in self.attached[st.outlet_node] if not isout]
            if len(ups) != 1 or len(dns) != 1:
                raise ConfigurationError(
                    f"compressor {st.id!r}: end nodes must attach exactly one "
                    "pipe outlet (inlet side) and one pipe inlet (outlet side)")
            self.stations.append(_StationBinding(
                station=st,
                model=st.model(spec.gas.isentropic_exponent),
                pipe_up=ups[0],
                pipe_down=dns[0],
                row_in=self.node_row[st.inlet_node],
                row_out=self.node_row[st.outlet_node],
                lam_out=self.lam[st.outlet_node],
            ))
        station_rows = {b.row_in for b in self.stations} | {b.row_out for b in self.stations}
        for nd in self.node_order:
            if nd.kind in COMPRESSOR_KINDS and self.node_row[nd.id] not in station_rows:
                raise ConfigurationError(f"compressor node {nd.id!r} has no station rows")

        # --- row kinds for residual scaling --------------------------
        kind = np.empty(self.n, dtype="U1")
        for k, p in enumerate(self.pipes):
            kind[self.rho_sl[k]] = "m"   # mass rows carry momentum-flux units
            kind[self.mom_sl[k]] = "p"   # momentum rows carry pressure units
        for k in range(P):
            kind[self.port_in_row[k]] = "p"
            kind[self.port_out_row[k]] = "p"
        for nd in self.node_order:
            kind[self.node_row[nd.id]] = "p" if nd.kind is NodeKind.SUPPLY else "m"
        for b in self.stations:
            kind[b.row_in] = "m"
            kind[b.row_out] = "p"
        self.row_kind = kind
        self.references = (1.0, 1.0)   # (p_ref, m_ref), set before solving

        self._colors = None

    # ------------------------------------------------------------------
    # required inputs
    # ------------------------------------------------------------------

    def required_inputs(self):
        """(id, kind) pairs the residual needs per evaluation time.

        Kinds: 'pressure' (supply nodes), 'momentum' (demand extractions),
        'ratio' / 'outlet-pressure' (station setpoints, keyed by station id).
        """
        req = []
        for nd in self.node_order:
            if nd.kind is NodeKind.SUPPLY:
                req.append((nd.id, "pressure"))
            elif nd.kind is NodeKind.DEMAND:
                req.append((nd.id, "momentum"))
        for b in self.stations:
            k = "ratio" if b.model.framework is Framework.FIXED_RATIO else "outlet-pressure"
            req.append((b.station.id, k))
        return req

    # ------------------------------------------------------------------
    # residual
    # ------------------------------------------------------------------

    def residual(self, x, zdot, t=0.0, inputs=None):
        """DAE residual F(x, dz/dt, t). `inputs` maps ids to sampled values.

        Pure function; differential rows carry the cell-measure weights so
        that the effort pairing of the differential block is the exact
        stored-energy rate.
        """
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise StateError("non-finite values in unknown vector")
        if inputs is None:
            inputs = {}
        if callable(inputs):
            inputs = inputs(t)
        try:
            return self._residual_core(x, np.asarray(zdot, dtype=float), inputs)
        except KeyError as exc:
            raise ConfigurationError(f"missing input value for {exc}") from exc

    def _residual_core(self, x, zdot, inputs):
        F = np.empty(self.n)
        for k, p in enumerate(self.pipes):
            rho = x[self.rho_sl[k]]
            mom = x[self.mom_sl[k]]
            mu_p = x[self.mu_p[k]]
            mu_m = x[self.mu_m[k]]
            pres = p.c2 * rho
            dx = p.dx

            m_full = np.empty(p.n + 1)
            m_full[:-1] = mom
            m_full[-1] = -mu_m
            F[self.rho_sl[k]] = dx * zdot[self.rho_sl[k]] + np.diff(m_full)

            rows = F[self.mom_sl[k]]
            fric = p.friction_force(rho, mom)
            rows[0] = 0.5 * dx * zdot[self.mom_sl[k]][0] + (pres[0] - mu_p) \
                + 0.5 * dx * fric[0]
            rows[1:] = dx * zdot[self.mom_sl[k]][1:] + np.diff(pres) + dx * fric[1:]

            F[self.port_in_row[k]] = mu_p - x[self.lam[self.spec.pipes[k].from_node]]
            F[self.port_out_row[k]] = (1.5 * pres[-1] - 0.5 * pres[-2]) \
                - x[self.lam[self.spec.pipes[k].to_node]]

        for nd in self.node_order:
            r = self.node_row[nd.id]
            if nd.kind is NodeKind.SUPPLY:
                F[r] = x[self.lam[nd.id]] - inputs[nd.id]
            elif nd.kind in COMPRESSOR_KINDS:
                continue  # station rows written below
            else:
                extraction = inputs[nd.id] if nd.kind is NodeKind.DEMAND else 0.0
                acc = -extraction
                for k, isout in self.attached[nd.id]:
                    if isout:
                        acc -= x[self.mu_m[k]]          # + m_L into the node
                    else:
                        acc -= x[self.mom_sl[k]][0]     # - m(0) leaving the node
                F[r] = acc

        for b in self.stations:
            sp = inputs[b.station.id]
            up = self.pipes[b.pipe_up]
            rho_up = x[self.rho_sl[b.pipe_up]]
            p1L = 1.5 * up.c2 * rho_up[-1] - 0.5 * up.c2 * rho_up[-2]
            m_down = x[self.mom_sl[b.pipe_down]][0]
            factor = b.model.inlet_match_factor(sp, p1L)
            F[b.row_in] = -x[self.mu_m[b.pipe_up]] - factor * m_down
            if b.model.framework is Framework.FIXED_RATIO:
                F[b.row_out] = x[b.lam_out] - sp * p1L
            else:
                F[b.row_out] = x[b.lam_out] - sp
        return F

    def steady_residual(self, x, inputs):
        return self._residual_core(np.asarray(x, float), np.zeros(self.n_z), inputs)

    def make_step_residual(self, z_prev, dt, inputs_mid):
        """Implicit-midpoint residual in the endpoint/midpoint unknowns.

        Unknowns: differential states at the step end, algebraic variables at
        the midpoint. Differential rows are collocated at the midpoint state,
        algebraic rows are enforced there too.
        """
        z_prev = np.asarray(z_prev, float)
        n_z = self.n_z

        def fun(x_new):
            x_eval = x_new.copy()
            z_new = x_new[:n_z]
            x_eval[:n_z] = 0.5 * (z_prev + z_new)
            zdot = (z_new - z_prev) / dt
            return self._residual_core(x_eval, zdot, inputs_mid)

        return fun

    # ------------------------------------------------------------------
    # Jacobian sparsity and coloring
    # ------------------------------------------------------------------

    def _pattern(self):
        """Structural (row, col) couplings of the residual, both solve modes."""
        ent: list[tuple[int, int]] = []
        for k, p in enumerate(self.pipes):
            n = p.n
            r0 = self.rho_sl[k].start
            m0 = self.mom_sl[k].start
            for i in range(n):
                row = r0 + i
                ent.append((row, r0 + i))            # d/dt
                ent.append((row, m0 + i))
                if i + 1 < n:
                    ent.append((row, m0 + i + 1))
                else:
                    ent.append((row, self.mu_m[k]))
            ent += [(m0, m0), (m0, r0), (m0, self.mu_p[k])]
            for j in range(1, n):
                row = m0 + j
                ent += [(row, m0 + j), (row, r0 + j - 1), (row, r0 + j)]
            ent += [(self.port_in_row[k], self.mu_p[k]),
                    (self.port_in_row[k], self.lam[self.spec.pipes[k].from_node])]
            ent += [(self.port_out_row[k], r0 + n - 1),
                    (self.port_out_row[k], r0 + n - 2),
                    (self.port_out_row[k], self.lam[self.spec.pipes[k].to_node])]
        for nd in self.node_order:
            r = self.node_row[nd.id]
            if nd.kind is NodeKind.SUPPLY:
                ent.append((r, self.lam[nd.id]))
            elif nd.kind in COMPRESSOR_KINDS:
                continue
            else:
                for k, isout in self.attached[nd.id]:
                    if isout:
                        ent.append((r, self.mu_m[k]))
                    else:
                        ent.append((r, self.mom_sl[k].start))
        for b in self.stations:
            up = self.pipes[b.pipe_up]
            last = self.rho_sl[b.pipe_up].start + up.n - 1
            ent += [(b.row_in, self.mu_m[b.pipe_up]),
                    (b.row_in, self.mom_sl[b.pipe_down].start)]
            state_dep = (b.model.framework is Framework.FIXED_PRESSURE
                         and b.model.assumption is Assumption.CONST_VELOCITY)
            if state_dep:
                ent += [(b.row_in, last), (b.row_in, last - 1)]
            ent.append((b.row_out, b.lam_out))
            if b.model.framework is Framework.FIXED_RATIO:
                ent += [(b.row_out, last), (b.row_out, last - 1)]
        return ent

    def jac_colors(self):
        """Column groups for one-sweep finite-difference Jacobians."""
        if self._colors is None:
            self._colors = color_columns(self._pattern(), self.n, self.n)
        return self._colors

    def row_scale(self):
        """Diagonal residual scaling: pressure rows / p_ref, momentum rows / m_ref."""
        p_ref, m_ref = self.references
        return np.where(self.row_kind == "p", p_ref, m_ref)

    # ------------------------------------------------------------------
    # consistent algebraic variables and derived records
    # ------------------------------------------------------------------

    def algebraic_solve(self, z, t, inputs, anchor=None):
        """Solve the port/node rows for (mu, lambda) at a frozen state z.

        The rows are linear in the algebraic unknowns; one dense solve gives
        the coupling-consistent port values used for records and for
        consistent-state construction. Topologies where the frozen-state
        rows alone do not pin every unknown (a junction feeding from several
        pipe outlets splits the flux through the dynamics, not the state)
        are resolved toward `anchor`: the returned values are the consistent
        point closest to the anchored algebraic variables.
        """
        if callable(inputs):
            inputs = inputs(t)
        z = np.asarray(z, float)
        na = self.n_alg
        base = self.n_z
        M = np.zeros((na, na))
        rhs = np.zeros(na)

        def col(i):
            return i - base

        for k, p in enumerate(self.pipes):
            rho = z[self.rho_sl[k]]
            r = self.port_in_row[k] - base
            M[r, col(self.mu_p[k])] = 1.0
            M[r, col(self.lam[self.spec.pipes[k].from_node])] = -1.0
            r = self.port_out_row[k] - base
            M[r, col(self.lam[self.spec.pipes[k].to_node])] = 1.0
            rhs[r] = p.outlet_pressure(rho)
        for nd in self.node_order:
            r = self.node_row[nd.id] - base
            if nd.kind is NodeKind.SUPPLY:
                M[r, col(self.lam[nd.id])] = 1.0
                rhs[r] = inputs[nd.id]
            elif nd.kind in COMPRESSOR_KINDS:
                continue
            else:
                extraction = inputs[nd.id] if nd.kind is NodeKind.DEMAND else 0.0
                acc = extraction
                for k, isout in self.attached[nd.id]:
                    if isout:
                        M[r, col(self.mu_m[k])] = -1.0
                    else:
                        acc += z[self.mom_sl[k]][0]
                rhs[r] = acc
        for b in self.stations:
            sp = inputs[b.station.id]
            up = self.pipes[b.pipe_up]
            p1L = up.outlet_pressure(z[self.rho_sl[b.pipe_up]])
            m_down = z[self.mom_sl[b.pipe_down]][0]
            r = b.row_in - base
            M[r, col(self.mu_m[b.pipe_up])] = -1.0
            rhs[r] = b.model.inlet_match_factor(sp, p1L) * m_down
            r = b.row_out - base
            M[r, col(b.lam_out)] = 1.0
            rhs[r] = sp * p1L if b.model.framework is Framework.FIXED_RATIO else sp

        base = np.zeros(na) if anchor is None else np.asarray(anchor, float)[-na:]
        try:
            alg = np.linalg.solve(M, rhs)
        except np.linalg.LinAlgError:
            delta = np.linalg.lstsq(M, rhs - M @ base, rcond=None)[0]
            alg = base + delta
        return np.concatenate([z, alg])

    def zdot_consistent(self, x, inputs):
        """Differential rates implied by the pipe rows at the given unknowns."""
        F = self._residual_core(np.asarray(x, float), np.zeros(self.n_z), inputs)
        return -F[: self.n_z] / self.energy_weights

    def effort_vector(self, z):
        e = np.empty(self.n_z)
        for k, p in enumerate(self.pipes):
            e[self.rho_sl[k]] = p.c2 * z[self.rho_sl[k]]
            e[self.mom_sl[k]] = z[self.mom_sl[k]]
        return e

    def energy_rate(self, z, zdot):
        """Exact stored-energy rate e' E dz/dt with the cell-measure E."""
        return float(np.dot(self.effort_vector(z) * self.energy_weights, zdot))

    def power_terms(self, x, inputs):
        """Exact split of the stored-energy rate at a consistent state.

        Returns a dict with 'rate', 'boundary', 'compressor', 'internal' and
        'dissipation'; rate = boundary + compressor + internal - dissipation
        holds to roundoff. Port discharge terms pair the outlet flux with the
        energy-conjugate (last cell-center) pressure.
        """
        if callable(inputs):
            raise ConfigurationError("power_terms expects sampled input values")
        x = np.asarray(x, float)
        z = x[: self.n_z]
        zdot = self.zdot_consistent(x, inputs)

        def port_power(k, isout):
            p = self.pipes[k]
            if isout:
                m_L = -x[self.mu_m[k]]
                return -p.conjugate_outlet_pressure(z[self.rho_sl[k]]) * m_L
            return x[self.mu_p[k]] * z[self.mom_sl[k]][0]

        parts = {"boundary": 0.0, "compressor": 0.0, "internal": 0.0}
        for nd in self.node_order:
            if nd.kind in BOUNDARY_KINDS:
                bucket = "boundary"
            elif nd.kind in COMPRESSOR_KINDS:
                bucket = "compressor"
            else:
                bucket = "internal"
            for k, isout in self.attached[nd.id]:
                parts[bucket] += port_power(k, isout)
        diss = sum(p.dissipation_rate(z[self.rho_sl[k]], z[self.mom_sl[k]])
                   for k, p in enumerate(self.pipes))
        parts["dissipation"] = diss
        parts["rate"] = self.energy_rate(z, zdot)
        return parts

    # ------------------------------------------------------------------
    # records
    # ------------------------------------------------------------------

    def record_names(self):
        names = []
        for pe in self.spec.pipes:
            pid = pe.spec.id
            names += [f"{pid}.in.p_Pa", f"{pid}.in.m", f"{pid}.out.p_Pa", f"{pid}.out.m"]
        names.append("H_total")
        for b in self.stations:
            names.append(f"{b.station.id}.power")
        return names

    def snapshot(self, z, t, inputs, anchor=None):
        """Port pressures/momenta, total energy and station powers at state z."""
        if callable(inputs):
            inputs = inputs(t)
        x = self.algebraic_solve(z, t, inputs, anchor)
        vals = []
        for k, p in enumerate(self.pipes):
            rho = z[self.rho_sl[k]]
            mom = z[self.mom_sl[k]]
            vals += [x[self.mu_p[k]], mom[0], p.outlet_pressure(rho), -x[self.mu_m[k]]]
        vals.append(self.hamiltonian_total(z))
        for b in self.stations:
            up = self.pipes[b.pipe_up]
            ports = CompressorPortState(
                p_in=up.outlet_pressure(z[self.rho_sl[b.pipe_up]]),
                m_feed=float(z[self.mom_sl[b.pipe_down]][0]),
            )
            _, term = external_power(b.model, ports, 0.0, 0.0,
                                     setpoint=inputs[b.station.id])
            vals.append(term)
        return dict(zip(self.record_names(), vals)), x

    def hamiltonian_total(self, z):
        total = 0.0
        for k, p in enumerate(self.pipes):
            fld = PipeField(z[self.rho_sl[k]], z[self.mom_sl[k]])
            total += hamiltonian(fld, self.gas, p.dx)
        return total

    def total_mass(self, z):
        return sum(float(p.dx * z[self.rho_sl[k]].sum()) for k, p in enumerate(self.pipes))

    def net_mass_influx(self, z_mid, x_new, inputs_mid):
        """Net mass inflow rate into all pipes: sum of m(0) + mu_m per pipe.

        This is exactly what the continuity rows telescope to, so evaluated
        at the midpoint state and algebraic values the cumulative ledger
        closes to solver precision. Junction and constant-momentum station
        exchanges cancel inside the sum; only boundary feeds/extractions and
        constant-velocity station injections remain.
        """
        total = 0.0
        for k in range(len(self.pipes)):
            total += float(z_mid[self.mom_sl[k]][0]) + float(x_new[self.mu_m[k]])
        return total

    def min_density(self, z):
        return min(float(z[self.rho_sl[k]].min()) for k in range(len(self.pipes)))

    def check_state(self, z, t):
        for k in range(len(self.pipes)):
            if not np.all(z[self.rho_sl[k]] > 0.0):
                raise StateError(
                    f"non-positive density in pipe {self.spec.pipes[k].spec.id!r} at t={t}")

    # ------------------------------------------------------------------

    def initial_guess(self, inputs0):
        """Flat initialization: supply density, net-demand momentum, supply potentials."""
        supplies = [nd.id for nd in self.node_order if nd.kind is NodeKind.SUPPLY]
        p_ref = inputs0[supplies[0]]
        m_est = sum(inputs0[nd.id] for nd in self.node_order if nd.kind is NodeKind.DEMAND)
        x = np.empty(self.n)
        rho0 = p_ref / self.gas.c2
        for k in range(len(self.pipes)):
            x[self.rho_sl[k]] = rho0
            x[self.mom_sl[k]] = m_est
            x[self.mu_p[k]] = p_ref
            x[self.mu_m[k]] = -m_est
        for nd in self.node_order:
            x[self.lam[nd.id]] = p_ref
        return x


def assemble(spec: NetworkSpec, n_cells_override: int | None = None) -> GlobalSystem:
    """Build the global DAE for a validated network description."""
    return GlobalSystem(spec, n_cells_override)


def residual(gsys: GlobalSystem, unknowns, zdot_candidate, t, inputs):
    """Module-level alias of GlobalSystem.residual."""
    return gsys.residual(unknowns, zdot_candidate, t, inputs)


def fuse_compressors(spec: NetworkSpec, ids=None) -> NetworkSpec:
    """Replace stations by plain junctions (the no-compressor baseline).

    Each station's node pair collapses into a single internal node, so the
    adjacent pipes couple through ordinary pressure continuity and flow
    balance.
    """
    keep = set(ids) if ids is not None else {st.id for st in spec.compressors}
    nodes = [Node(nd.id, nd.kind, nd.compressor_id) for nd in spec.nodes]
    pipes = [PipeEdge(pe.spec, pe.from_node, pe.to_node) for pe in spec.pipes]
    comps = []
    for st in spec.compressors:
        if st.id not in keep:
            comps.append(st)
            continue
        fused = f"{st.id}.junction"
        nodes = [nd for nd in nodes if nd.id not in (st.inlet_node, st.outlet_node)]
        nodes.append(Node(fused, NodeKind.JUNCTION))
        for pe in pipes:
            if pe.to_node == st.inlet_node:
                pe.to_node = fused
            if pe.from_node == st.outlet_node:
                pe.from_node = fused
    return NetworkSpec(spec.gas, nodes, pipes, comps)


def color_columns(pattern, n_rows, n_cols):
    """Greedy structural coloring: same-color columns share no residual row."""
    rows_of_col = [[] for _ in range(n_cols)]
    for r, c in pattern:
        rows_of_col[c].append(r)
    rows_of_col = [np.unique(np.array(rs, dtype=int)) for rs in rows_of_col]
    order = sorted(range(n_cols), key=lambda c: -len(rows_of_col[c]))
    colors: list[list[int]] = []
    occupied: list[np.ndarray] = []
    for c in order:
        rs = rows_of_col[c]
        for ci, occ in enumerate(occupied):
            if not occ[rs].any():
                colors[ci].append(c)
                occ[rs] = True
                break
        else:
            occ = np.zeros(n_rows, dtype=bool)
            occ[rs] = True
            occupied.append(occ)
            colors.append([c])
    return [np.array(sorted(cs), dtype=int) for cs in colors], rows_of_col
