"""Event-driven wave-front tracking for the two-fluid Lagrangian p-system.

The line is cut into regions with fixed ends (material interfaces at
``z = 0`` and ``z = m``, or walls with a prescribed velocity for the
half-line problems of the limit system). ``(p, v)`` is piecewise constant
with jumps only at fronts; across an interface the law changes but
``(p, v)`` does not, so the gap state between two fronts may straddle an
interface.

Fronts are kept in a doubly linked list ordered by position. Candidate
events (adjacent collisions, arrivals at a region end) sit in a heap and are
validated lazily when popped.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from .eos import GasState, PressureLaw
from .field import PiecewiseConstantField, total_variation
from .riemann import (
    RAREFACTION,
    SHOCK,
    Front,
    solve_boundary,
    solve_riemann,
    wave_fronts,
)

TIME_TIE = 1e-12
POS_TOL = 1e-11
POTENTIAL_K = 4.0


class FrontCapExceeded(RuntimeError):
    pass


class TVBlowUp(RuntimeError):
    pass


class DomainViolation(ValueError):
    """Initial total variation outside the configured envelope."""


@dataclass(frozen=True)
class Region:
    name: str
    lo: float
    hi: float
    law: PressureLaw


def two_fluid_regions(gas: PressureLaw, liquid: PressureLaw, m: float) -> list[Region]:
    return [
        Region("gas_left", -math.inf, 0.0, gas),
        Region("liquid", 0.0, m, liquid),
        Region("gas_right", m, math.inf, gas),
    ]


def gas_regions(gas: PressureLaw) -> list[Region]:
    return [Region("gas", -math.inf, math.inf, gas)]


@dataclass
class EventRecord:
    time: float
    type: str
    position: float
    inputs: list[int]
    outputs: list[int]
    potential_before: float = math.nan
    potential_after: float = math.nan

    def to_json(self) -> str:
        return json.dumps(
            {
                "time": self.time,
                "type": self.type,
                "position": self.position,
                "in": self.inputs,
                "out": self.outputs,
            }
        )


@dataclass
class FrontField:
    """Mutable front-tracking state; see :func:`init_fronts` to build one.

    ``wall_left`` / ``wall_right`` turn the outer ends of the first/last
    region into walls moving with ``wall_velocity``.
    """

    regions: list[Region]
    base_state: GasState
    eps: float
    t: float = 0.0
    wall_left: bool = False
    wall_right: bool = False
    wall_velocity: float = 0.0
    front_cap: int = 1_000_000
    tv_blowup: float = 10.0
    monitor_potential: bool = True
    keep_log: bool = False

    fronts: dict = field(default_factory=dict)
    nxt: dict = field(default_factory=dict)
    prv: dict = field(default_factory=dict)
    head: int | None = None
    tail: int | None = None
    tv0: float = 0.0
    tv: float = 0.0
    tv_ref: float = 0.0
    n_events: int = 0
    potential_log: list = field(default_factory=list)
    log: list = field(default_factory=list)
    _heap: list = field(default_factory=list)
    _sums: dict = field(default_factory=dict)
    _pot: dict = field(default_factory=dict)
    _seq: int = 0
    _next_id: int = 0

    def __post_init__(self):
        self._by_name = {r.name: r for r in self.regions}
        self.base_state = GasState(*self.base_state)
        if not self._sums:
            self._init_potential()

    # --- bookkeeping --------------------------------------------------------

    def copy(self) -> "FrontField":
        new = replace(
            self,
            regions=list(self.regions),
            fronts=dict(self.fronts),
            nxt=dict(self.nxt),
            prv=dict(self.prv),
            potential_log=list(self.potential_log),
            _sums=dict(self._sums),
            _pot=dict(self._pot),
            log=list(self.log),
            _heap=list(self._heap),
        )
        return new

    def region(self, name: str) -> Region:
        return self._by_name[name]

    def region_at(self, z: float) -> Region:
        for r in self.regions:
            if r.lo <= z < r.hi:
                return r
        return self.regions[-1] if z >= self.regions[-1].hi else self.regions[0]

    def interfaces(self) -> list[float]:
        return [r.hi for r in self.regions[:-1]]

    def strength(self, f: Front) -> float:
        return abs(f.right.p - f.left.p) * self._by_name[f.region].law.strength_weight()

    def ordered(self) -> Iterable[tuple[int, Front]]:
        i = self.head
        while i is not None:
            yield i, self.fronts[i]
            i = self.nxt[i]

    def __len__(self) -> int:
        return len(self.fronts)

    @property
    def last_state(self) -> GasState:
        return self.base_state if self.tail is None else self.fronts[self.tail].right

    def _state_left_of(self, i: int) -> GasState:
        return self.fronts[i].left

    def _insert(self, after: int | None, new: list[Front]) -> list[int]:
        ids = []
        nxt_id = self.head if after is None else self.nxt[after]
        prev = after
        for f in new:
            i = self._next_id
            self._next_id += 1
            self.fronts[i] = f
            self.prv[i] = prev
            if prev is None:
                self.head = i
            else:
                self.nxt[prev] = i
            prev = i
            ids.append(i)
        if prev is not None:
            self.nxt[prev] = nxt_id
            if nxt_id is None:
                self.tail = prev
            else:
                self.prv[nxt_id] = prev
        if len(self.fronts) > self.front_cap:
            raise FrontCapExceeded(f"{len(self.fronts)} fronts exceed the cap {self.front_cap}")
        return ids

    def _remove(self, ids: list[int]) -> int | None:
        """Unlink a contiguous run of fronts; returns the id before the run."""
        before = self.prv[ids[0]]
        after = self.nxt[ids[-1]]
        for i in ids:
            del self.fronts[i]
            del self.nxt[i]
            del self.prv[i]
        if before is None:
            self.head = after
        else:
            self.nxt[before] = after
        if after is None:
            self.tail = before
        else:
            self.prv[after] = before
        return before

    # --- event scheduling -------------------------------------------------

    def _push(self, t: float, kind: str, a: int, b: int | None):
        self._seq += 1
        heapq.heappush(self._heap, (t, self._seq, kind, a, b))

    def _schedule_pair(self, a: int | None, b: int | None):
        if a is None or b is None:
            return
        fa, fb = self.fronts[a], self.fronts[b]
        if fa.region != fb.region or fa.speed <= fb.speed:
            return
        gap = max(fb.position(self.t) - fa.position(self.t), 0.0)
        self._push(self.t + gap / (fa.speed - fb.speed), "pair", a, b)

    def _schedule_edge(self, i: int):
        f = self.fronts[i]
        r = self._by_name[f.region]
        if f.speed > 0.0 and math.isfinite(r.hi):
            t_hit = f.t0 + (r.hi - f.x0) / f.speed
        elif f.speed < 0.0 and math.isfinite(r.lo):
            t_hit = f.t0 + (r.lo - f.x0) / f.speed
        else:
            return
        if f.x0 == (r.hi if f.speed > 0 else r.lo):
            return
        self._push(max(t_hit, self.t), "edge", i, None)

    def _schedule_around(self, ids: list[int], before: int | None):
        after = self.nxt[ids[-1]] if ids else (self.head if before is None else self.nxt[before])
        if ids:
            self._schedule_pair(before, ids[0])
            self._schedule_pair(ids[-1], after)
            for i in ids:
                self._schedule_edge(i)
        else:
            self._schedule_pair(before, after)

    def _valid(self, ev) -> bool:
        _, _, kind, a, b = ev
        if a not in self.fronts:
            return False
        if kind == "pair":
            return b in self.fronts and self.nxt[a] == b
        return True

    def _pop_next(self):
        """Earliest valid event; ties within TIME_TIE go left to right."""
        heap = self._heap
        while heap and not self._valid(heap[0]):
            heapq.heappop(heap)
        if not heap:
            return None
        t0 = heap[0][0]
        batch = []
        while heap and heap[0][0] <= t0 + TIME_TIE:
            ev = heapq.heappop(heap)
            if self._valid(ev):
                batch.append(ev)
        batch.sort(key=lambda ev: (self.fronts[ev[3]].position(ev[0]), ev[1]))
        for ev in batch[1:]:
            heapq.heappush(heap, ev)
        return batch[0]

    def next_event_time(self) -> float:
        heap = self._heap
        while heap and not self._valid(heap[0]):
            heapq.heappop(heap)
        return heap[0][0] if heap else math.inf

    def _rebuild_schedule(self):
        self._heap = []
        ids = [i for i, _ in self.ordered()]
        for a, b in zip(ids[:-1], ids[1:]):
            self._schedule_pair(a, b)
        for i in ids:
            self._schedule_edge(i)

    # --- fans -------------------------------------------------------------

    def _chain(self, fronts: list[Front], left: GasState, right: GasState) -> list[Front]:
        """Force consecutive fronts to share their flanking states exactly."""
        if not fronts:
            return fronts
        out = [replace(fronts[0], left=left)]
        for f in fronts[1:]:
            out.append(replace(f, left=out[-1].right))
        out[-1] = replace(out[-1], right=right)
        return out

    def _fan(self, left: GasState, right: GasState, x: float, t: float, rl: Region, rr: Region):
        fan = solve_riemann(left, rl.law, right, rr.law)
        fronts = wave_fronts(fan.wave1, self.eps, x, t, rl.name) + wave_fronts(
            fan.wave2, self.eps, x, t, rr.name
        )
        return self._chain(fronts, left, right)

    def _potential(self, region: str) -> float:
        """Glimm functional of one region: strengths plus K times approaching products."""
        weight = self._by_name[region].law.strength_weight()
        s1 = s1_shock = s2 = s2_shock = 0.0
        total = 0.0
        q = 0.0
        for _, f in self.ordered():
            if f.region != region:
                continue
            s = abs(f.right.p - f.left.p) * weight
            shock = f.kind == SHOCK
            if f.family == 1:
                q += s * (s2 + (s1 if shock else s1_shock))
                s1 += s
                if shock:
                    s1_shock += s
            else:
                q += s * (s2 if shock else s2_shock)
                s2 += s
                if shock:
                    s2_shock += s
            total += s
        return total + POTENTIAL_K * q

    def potential(self) -> float:
        """Interaction potential recomputed from scratch over all regions."""
        return sum(self._potential(r.name) for r in self.regions)

    def _tv_of(self, fronts: Iterable[Front]) -> float:
        return sum(abs(f.right.p - f.left.p) + abs(f.right.v - f.left.v) for f in fronts)

    # --- event handlers ---------------------------------------------------

    def _gather(self, i: int, x: float, t: float, regions: set[str] | None) -> list[int]:
        group = [i]
        j = self.prv[i]
        while j is not None:
            f = self.fronts[j]
            if abs(f.position(t) - x) > POS_TOL or (regions is not None and f.region not in regions):
                break
            group.insert(0, j)
            j = self.prv[j]
        j = self.nxt[i]
        while j is not None:
            f = self.fronts[j]
            if abs(f.position(t) - x) > POS_TOL or (regions is not None and f.region not in regions):
                break
            group.append(j)
            j = self.nxt[j]
        return group

    def _class_sums(self, fronts: Iterable[Front]) -> tuple:
        """Strength sums ``(1-waves, 1-shocks, 2-waves, 2-shocks)``."""
        s1 = s1s = s2 = s2s = 0.0
        for f in fronts:
            s = self.strength(f)
            if f.family == 1:
                s1 += s
                if f.kind == SHOCK:
                    s1s += s
            else:
                s2 += s
                if f.kind == SHOCK:
                    s2s += s
        return s1, s1s, s2, s2s

    def _sums_left_of(self, j: int | None, region: str) -> tuple:
        """Class sums of the contiguous run of ``region`` fronts ending at ``j``."""
        run = []
        while j is not None:
            f = self.fronts[j]
            if f.region != region:
                break
            run.append(f)
            j = self.prv[j]
        return self._class_sums(run)

    def _approach(self, fronts: list[Front], left: tuple, right: tuple) -> float:
        """Approaching products of ``fronts`` among themselves and with outside sums."""
        q = 0.0
        for k, f in enumerate(fronts):
            s = self.strength(f)
            shock = f.kind == SHOCK
            if f.family == 1:
                q += s * (left[2] + (left[0] if shock else left[1]))
                q += s * (right[0] if shock else right[1])
            else:
                q += s * (left[2] if shock else left[3])
                q += s * (right[0] + (right[2] if shock else right[3]))
            for g in fronts[k + 1:]:
                if f.family == 2 and g.family == 1:
                    q += s * self.strength(g)
                elif f.family == g.family and (shock or g.kind == SHOCK):
                    q += s * self.strength(g)
        return q

    def _init_potential(self):
        self._sums = {r.name: self._class_sums(f for _, f in self.ordered() if f.region == r.name) for r in self.regions}
        self._pot = {r.name: self._potential(r.name) for r in self.regions}

    def region_potential(self, region: str) -> float:
        """Running value of the interaction potential of one region."""
        return self._pot[region]

    def _replace(self, group: list[int], new: list[Front], t: float, kind: str, x: float, before=None):
        old = [self.fronts[i] for i in group]
        if group:
            before = self.prv[group[0]]
        touched = sorted({f.region for f in old} | {f.region for f in new})
        deltas = {}
        if self.monitor_potential:
            for r in touched:
                o = [f for f in old if f.region == r]
                n = [f for f in new if f.region == r]
                left = self._sums_left_of(before, r)
                so = self._class_sums(o)
                sn = self._class_sums(n)
                tot = self._sums[r]
                right = tuple(a - b - c for a, b, c in zip(tot, left, so))
                dv = (sn[0] + sn[2] - so[0] - so[2]) + POTENTIAL_K * (
                    self._approach(n, left, right) - self._approach(o, left, right)
                )
                deltas[r] = dv
                self._sums[r] = tuple(a - b + c for a, b, c in zip(tot, so, sn))
        v_before = sum(self._pot.values()) if self.monitor_potential else math.nan
        if group:
            self._remove(group)
        ids = self._insert(before, new)
        for r, dv in deltas.items():
            self._pot[r] += dv
        change = self._tv_of(new) - self._tv_of(old)
        self.tv += change
        if kind.startswith("wall"):
            # variation injected through a wall is forcing, not blow-up
            self.tv_ref += max(change, 0.0)
        if self.tv > self.tv_blowup * self.tv_ref * (1.0 + 1e-12):
            raise TVBlowUp(f"total variation {self.tv:.4g} exceeds {self.tv_blowup} x reference {self.tv_ref:.4g}")
        v_after = sum(self._pot.values()) if self.monitor_potential else math.nan
        self.n_events += 1
        rec = EventRecord(t, kind, x, group, ids, v_before, v_after)
        if self.monitor_potential:
            self.potential_log.append(rec)
        if self.keep_log:
            self.log.append(rec)
        self._schedule_around(ids, before)
        return ids

    def _at_edge(self, x: float) -> tuple[str, float] | None:
        for xi in self.interfaces():
            if abs(x - xi) <= POS_TOL:
                return "interface", xi
        if self.wall_left and abs(x - self.regions[0].lo) <= POS_TOL:
            return "wall_left", self.regions[0].lo
        if self.wall_right and abs(x - self.regions[-1].hi) <= POS_TOL:
            return "wall_right", self.regions[-1].hi
        return None

    def _handle_collision(self, t: float, a: int):
        fa = self.fronts[a]
        x = fa.position(t)
        edge = self._at_edge(x)
        if edge is not None:
            return self._handle_edge(t, a, edge)
        group = self._gather(a, x, t, {fa.region})
        left = self.fronts[group[0]].left
        right = self.fronts[group[-1]].right
        r = self._by_name[fa.region]
        new = self._fan(left, right, x, t, r, r)
        self._replace(group, new, t, "collision", x)

    def _handle_edge(self, t: float, i: int, edge=None):
        f = self.fronts[i]
        if edge is None:
            r = self._by_name[f.region]
            xe = r.hi if f.speed > 0 else r.lo
            edge = self._at_edge(xe)
            if edge is None:
                return
        kind, xe = edge
        group = self._gather(i, xe, t, None)
        left = self.fronts[group[0]].left
        right = self.fronts[group[-1]].right
        if kind == "interface":
            rl = self._left_region_of(xe)
            rr = self._right_region_of(xe)
            new = self._fan(left, right, xe, t, rl, rr)
        elif kind == "wall_right":
            r = self.regions[-1]
            bf = solve_boundary("left", left, r.law, self.wall_velocity)
            new = self._chain(wave_fronts(bf.wave, self.eps, xe, t, r.name), left, bf.boundary_state)
        else:
            r = self.regions[0]
            bf = solve_boundary("right", right, r.law, self.wall_velocity)
            new = self._chain(wave_fronts(bf.wave, self.eps, xe, t, r.name), bf.boundary_state, right)
            self.base_state = bf.boundary_state
        self._replace(group, new, t, kind, xe)

    def _left_region_of(self, xe: float) -> Region:
        for r in self.regions:
            if r.hi == xe:
                return r
        raise KeyError(xe)

    def _right_region_of(self, xe: float) -> Region:
        for r in self.regions:
            if r.lo == xe:
                return r
        raise KeyError(xe)

    # --- public API -------------------------------------------------------

    def advance(self, t_target: float) -> "FrontField":
        if t_target < self.t:
            raise ValueError(f"cannot advance backwards from {self.t} to {t_target}")
        while True:
            ev = self._pop_next()
            if ev is None or ev[0] > t_target:
                if ev is not None:
                    heapq.heappush(self._heap, ev)
                break
            te, _, kind, a, _ = ev
            self.t = max(self.t, te)
            if kind == "pair":
                self._handle_collision(self.t, a)
            else:
                self._handle_edge(self.t, a)
        self.t = t_target
        return self

    def apply_walls(self) -> dict[str, float]:
        """Re-solve the wall Riemann problems with the current ``wall_velocity``.

        Fronts sitting on a wall are absorbed into the problem. Returns the
        boundary pressures keyed by side.
        """
        out = {}
        if self.wall_right:
            r = self.regions[-1]
            xe = r.hi
            if self.tail is not None and abs(self.fronts[self.tail].position(self.t) - xe) <= POS_TOL:
                group = self._gather(self.tail, xe, self.t, None)
                left = self.fronts[group[0]].left
            else:
                group = []
                left = self.last_state
            bf = solve_boundary("left", left, r.law, self.wall_velocity)
            new = self._chain(wave_fronts(bf.wave, self.eps, xe, self.t, r.name), left, bf.boundary_state)
            if group or new:
                self._replace(group, new, self.t, "wall_right", xe, before=self.tail)
            out["right"] = bf.p_b
        if self.wall_left:
            r = self.regions[0]
            xe = r.lo
            if self.head is not None and abs(self.fronts[self.head].position(self.t) - xe) <= POS_TOL:
                group = self._gather(self.head, xe, self.t, None)
                right = self.fronts[group[-1]].right
            else:
                group = []
                right = self.base_state
            bf = solve_boundary("right", right, r.law, self.wall_velocity)
            new = self._chain(wave_fronts(bf.wave, self.eps, xe, self.t, r.name), bf.boundary_state, right)
            self.base_state = bf.boundary_state
            if group or new:
                self._replace(group, new, self.t, "wall_left", xe, before=None)
            out["left"] = bf.p_b
        return out

    def next_wall_arrival(self) -> float:
        """Earliest time a front reaches an active wall (``inf`` if none)."""
        best = math.inf
        lo, hi = self.regions[0].lo, self.regions[-1].hi
        for _, f in self.ordered():
            if self.wall_right and f.speed > 0.0 and f.x0 < hi:
                best = min(best, f.t0 + (hi - f.x0) / f.speed)
            elif self.wall_left and f.speed < 0.0 and f.x0 > lo:
                best = min(best, f.t0 + (lo - f.x0) / f.speed)
        return best

    def solution_at(self, lo: float = -math.inf, hi: float = math.inf) -> PiecewiseConstantField:
        """``(p, v)`` at the current time as an exact step function on ``(lo, hi)``."""
        pos = []
        states = [tuple(self.base_state)]
        for _, f in self.ordered():
            pos.append(f.position(self.t))
            states.append(tuple(f.right))
        pc = PiecewiseConstantField.from_steps(pos, states)
        if math.isinf(lo) and math.isinf(hi):
            return pc
        return pc.restrict(lo, hi)

    def tau_field(self) -> PiecewiseConstantField:
        """``(tau, v)``; specific volume jumps at the interfaces as the law changes."""
        pv = self.solution_at()
        cuts = np.unique(np.concatenate([pv.breakpoints, self.interfaces()]))
        rows = []
        edges = np.concatenate([[-math.inf], cuts, [math.inf]])
        for lo, hi in zip(edges[:-1], edges[1:]):
            if math.isinf(lo) and math.isinf(hi):
                mid = 0.0
            elif math.isinf(lo):
                mid = hi - 1.0
            elif math.isinf(hi):
                mid = lo + 1.0
            else:
                mid = 0.5 * (lo + hi)
            p, v = pv(mid)
            rows.append((self.region_at(mid).law.tau(p), v))
        return PiecewiseConstantField.from_steps(cuts, rows)

    def traces(self) -> dict[str, GasState]:
        """One-sided ``(p, v)`` limits at every interface."""
        pv = self.solution_at()
        out = {}
        for k, xe in enumerate(self.interfaces()):
            tag = "0" if k == 0 else "m"
            out[f"{tag}-"] = GasState(*pv.left_limit(xe))
            out[f"{tag}+"] = GasState(*pv.right_limit(xe))
        return out

    def max_gas_speed(self) -> float:
        """Largest characteristic speed over states touching gas regions."""
        best = 0.0
        for r in self.regions:
            if r.name.startswith("gas"):
                for st in self._states_in(r.name):
                    best = max(best, r.law.char_speed(st.p))
        return best

    def _states_in(self, region: str) -> list[GasState]:
        states = []
        for _, f in self.ordered():
            if f.region == region:
                states.extend([f.left, f.right])
        if not states:
            r = self._by_name[region]
            z = r.lo + 1.0 if math.isinf(r.hi) else (r.hi - 1.0 if math.isinf(r.lo) else 0.5 * (r.lo + r.hi))
            states.append(GasState(*self.solution_at()(z)))
        return states

    def write_log(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for rec in self.log:
                fh.write(rec.to_json() + "\n")


# --- construction ------------------------------------------------------------


def init_fronts(
    datum: PiecewiseConstantField,
    eps: float,
    regions: list[Region],
    *,
    delta: float | None = None,
    t0: float = 0.0,
    **kwargs,
) -> FrontField:
    """Resolve every jump of a ``(p, v)`` datum into its (split) Riemann fan.

    Jumps at an interface use the two-law solver; all others the law of
    their region. With ``delta`` set, a datum whose gas total variation in
    ``(tau, v)`` reaches ``delta`` is rejected.
    """
    if eps <= 0:
        raise ValueError(f"accuracy parameter must be positive, got {eps}")
    ff = FrontField(regions=regions, base_state=GasState(*map(float, datum.values[0])), eps=eps, t=t0, **kwargs)
    if delta is not None:
        tv_g = gas_tv(ff, datum)
        if tv_g >= delta:
            raise DomainViolation(f"gas total variation {tv_g:.4g} is not below delta={delta}")
    edges = set(ff.interfaces())
    new: list[Front] = []
    for k, z in enumerate(datum.breakpoints):
        left = GasState(*map(float, datum.values[k]))
        right = GasState(*map(float, datum.values[k + 1]))
        if z in edges:
            rl, rr = ff._left_region_of(z), ff._right_region_of(z)
        else:
            rl = rr = ff.region_at(z)
        rl.law.check(left.p)
        rr.law.check(right.p)
        new.extend(ff._fan(left, right, float(z), t0, rl, rr))
    if new:
        ff._insert(None, new)
    ff.tv0 = ff.tv = ff.tv_ref = ff._tv_of(ff.fronts.values())
    ff._init_potential()
    ff._rebuild_schedule()
    return ff


def gas_tv(ff: FrontField, datum: PiecewiseConstantField) -> float:
    """TV of ``(tau, v)`` of a ``(p, v)`` datum over the gas regions."""
    total = 0.0
    for r in ff.regions:
        if not r.name.startswith("gas"):
            continue
        part = datum.restrict(r.lo, r.hi)
        tv_field = part.map(lambda row, law=r.law: (law.tau(row[0]), row[1]))
        total += total_variation(tv_field, r.lo, r.hi)
    return total


def advance(ff: FrontField, t_target: float) -> FrontField:
    return ff.advance(t_target)


def solution_at(ff: FrontField, lo: float = -math.inf, hi: float = math.inf) -> PiecewiseConstantField:
    return ff.solution_at(lo, hi)


def traces(ff: FrontField) -> dict[str, GasState]:
    return ff.traces()
