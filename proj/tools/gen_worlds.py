#!/usr/bin/env python3
"""Writes the three bundled worlds (maps + scenarios) into data/."""

import json
import math
from pathlib import Path

RES = 0.1
ROOT = Path(__file__).resolve().parent.parent / "data"


class Grid:
    def __init__(self, w_m, h_m):
        self.w = round(w_m / RES)
        self.h = round(h_m / RES)
        self.cells = [["#"] * self.w for _ in range(self.h)]  # cells[y][x], y up

    def _span(self, a, b, n):
        return range(max(0, round(a / RES)), min(n, round(b / RES)))

    def carve(self, x0, y0, x1, y1, label="."):
        for y in self._span(y0, y1, self.h):
            for x in self._span(x0, x1, self.w):
                self.cells[y][x] = label

    def fill(self, x0, y0, x1, y1):
        self.carve(x0, y0, x1, y1, "#")

    def relabel(self, x0, y0, x1, y1, label):
        for y in self._span(y0, y1, self.h):
            for x in self._span(x0, x1, self.w):
                if self.cells[y][x] != "#":
                    self.cells[y][x] = label

    def chamfer(self, cx, cy, size, quadrant):
        """Fills the triangle of side `size` m in the given corner (quadrant as (sx, sy))."""
        sx, sy = quadrant
        n = round(size / RES)
        ix, iy = round(cx / RES), round(cy / RES)
        for j in range(n):
            for i in range(n - j):
                x = ix + (i if sx > 0 else -1 - i)
                y = iy + (j if sy > 0 else -1 - j)
                if 0 <= x < self.w and 0 <= y < self.h:
                    self.cells[y][x] = "#"

    def close_border(self):
        for x in range(self.w):
            self.cells[0][x] = self.cells[self.h - 1][x] = "#"
        for y in range(self.h):
            self.cells[y][0] = self.cells[y][self.w - 1] = "#"

    def text(self):
        rows = ["resolution %g" % RES, "labels yes"]
        for y in reversed(range(self.h)):
            rows.append("".join(self.cells[y]))
        return "\n".join(rows) + "\n"


def pose(x, y, heading_deg):
    return [x, y, round(math.radians(heading_deg), 6)]


def write(name, grid, routes, agents):
    grid.close_border()
    (ROOT / "maps").mkdir(parents=True, exist_ok=True)
    (ROOT / "scenarios").mkdir(parents=True, exist_ok=True)
    (ROOT / "maps" / f"{name}.map").write_text(grid.text())
    scenario = {
        "name": name,
        "map": f"../maps/{name}.map",
        "robot_routes": [{"start": s, "goal": g} for s, g in routes],
        "agents": [{"start": a[0], "waypoints": a[1:] + [a[0]]} for a in agents],
    }
    (ROOT / "scenarios" / f"{name}.json").write_text(json.dumps(scenario, indent=2) + "\n")


def corridor_loop():
    g = Grid(24, 16)
    g.carve(1, 1, 23, 15, "C")
    g.fill(3.4, 3.4, 20.6, 12.6)
    # Open bay widening the bottom corridor.
    g.carve(8, 3.4, 16, 6.6, "O")
    g.relabel(8, 1, 16, 6.6, "O")
    # Bends: chamfered outer corners, labelled as curves.
    for cx, cy, q in [(1, 1, (1, 1)), (23, 1, (-1, 1)), (23, 15, (-1, -1)), (1, 15, (1, -1))]:
        g.chamfer(cx, cy, 1.2, q)
    for x0, y0 in [(1, 1), (19.6, 1), (19.6, 11.6), (1, 11.6)]:
        g.relabel(x0, y0, x0 + 3.4, y0 + 3.4, "U")
    routes = [
        (pose(6.0, 2.2, 0), [21.8, 9.0]),
        (pose(21.8, 6.0, 90), [6.0, 13.8]),
        (pose(18.0, 13.8, 180), [2.2, 4.0]),
        (pose(2.2, 10.0, -90), [18.0, 2.2]),
    ]
    ring = [[2.3, 2.3], [21.7, 2.3], [21.7, 13.7], [2.3, 13.7]]
    agents = [
        [[10.0, 2.0]] + ring,
        [[21.6, 8.0]] + ring[2:] + ring[:2],
        [[12.0, 14.0]] + list(reversed(ring)),
        [[2.0, 8.0]] + [ring[0], ring[3], ring[2], ring[1]],
        [[9.0, 5.0], [15.0, 5.5], [9.0, 2.0]],
    ]
    write("corridor_loop", g, routes, agents)


def open_hall():
    g = Grid(24, 16)
    g.carve(1, 1, 23, 15, "O")
    g.relabel(12, 1, 23, 15, "B")
    # Pillar field on a staggered grid.
    for row, y in enumerate([3.0, 5.4, 7.8, 10.2, 12.6]):
        xs = [13.4, 16.0, 18.6, 21.2] if row % 2 == 0 else [14.7, 17.3, 19.9]
        for x in xs:
            g.fill(x - 0.3, y - 0.3, x + 0.3, y + 0.3)
    # A short partition in the open half.
    g.fill(6.0, 10.0, 6.3, 15.0)
    routes = [
        (pose(2.0, 2.5, 0), [22.2, 13.5]),
        (pose(2.0, 8.0, 0), [22.2, 8.6]),
        (pose(22.2, 1.8, 180), [2.5, 13.5]),
        (pose(3.0, 13.0, -45), [22.2, 4.2]),
    ]
    agents = [
        [[4.0, 4.0], [10.0, 4.0], [10.0, 9.0], [4.0, 9.0]],
        [[12.2, 2.0], [12.2, 14.0]],
        [[15.3, 8.0], [15.3, 14.0], [15.3, 2.0]],
        [[20.5, 2.0], [20.5, 14.0]],
        [[8.0, 12.5], [11.5, 6.5], [22.0, 6.6]],
        [[22.0, 11.4], [13.0, 11.4]],
    ]
    write("open_hall", g, routes, agents)


def hospital():
    g = Grid(28, 16)
    # Main corridor and the lobby.
    g.carve(1, 6.8, 22, 9.2, "C")
    g.carve(22, 1, 27, 15, "O")
    # Branch corridor going south, joining at a bend.
    g.carve(8, 1, 10.4, 6.8, "C")
    g.relabel(7, 5.6, 11.4, 9.2, "U")
    g.relabel(1, 6.8, 3.4, 9.2, "C")
    # Wards north of the corridor with beds; doors onto the corridor.
    for x0 in [1.0, 8.2, 15.4]:
        g.carve(x0, 9.4, x0 + 6.6, 15, "B")
        g.carve(x0 + 2.7, 9.2, x0 + 3.9, 9.4, "B")
        for bx in [x0 + 0.6, x0 + 4.8]:
            g.fill(bx, 12.2, bx + 1.0, 14.4)
    # Storage room south of the corridor, east of the branch.
    g.carve(11.0, 1, 21.8, 6.6, "O")
    g.carve(16.0, 6.6, 17.2, 6.8, "O")
    g.fill(13.0, 2.5, 14.5, 4.0)
    g.fill(18.5, 3.0, 20.0, 4.5)
    routes = [
        (pose(4.3, 11.0, -90), [25.0, 4.0]),
        (pose(9.2, 1.8, 90), [18.7, 11.5]),
        (pose(25.0, 13.0, 180), [2.0, 8.0]),
        (pose(11.5, 11.0, -90), [16.0, 2.0]),
    ]
    agents = [
        [[2.0, 7.6], [21.5, 7.6], [25.0, 10.0], [21.5, 8.4], [2.0, 8.4]],
        [[15.0, 8.4], [2.0, 8.4], [2.0, 7.6], [21.5, 7.6]],
        [[23.0, 2.0], [26.0, 14.0], [23.0, 14.0], [26.0, 2.0]],
        [[9.2, 2.0], [9.2, 8.0], [20.0, 8.0], [9.2, 8.0]],
        [[24.0, 8.0], [12.0, 8.0], [24.0, 8.0]],
        [[18.7, 11.0], [18.7, 8.0], [6.0, 8.0], [18.7, 8.0]],
    ]
    write("hospital", g, routes, agents)


if __name__ == "__main__":
    corridor_loop()
    open_hall()
    hospital()
