"""Slow, loop-based reference implementations used as test oracles.

They share no code with the package: plain Python loops, ``math`` and
hand-written scanners.
"""

import math

GRID = 1000


# -- clustering ---------------------------------------------------------------


def dbscan_oracle(points, eps, min_pts):
    """Brute-force DBSCAN: full pairwise eps-graph, union-find over core
    points, border points attached to the earliest-numbered adjacent cluster.

    Returns (clusters as sorted index lists, noise list)."""
    n = len(points)
    unit = [(x / GRID, y / GRID) for x, y in points]
    nbr = [[j for j in range(n) if (unit[i][0] - unit[j][0]) ** 2 + (unit[i][1] - unit[j][1]) ** 2 <= eps * eps] for i in range(n)]
    core = [len(nbr[i]) >= min_pts for i in range(n)]

    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(n):
        if core[i]:
            for j in nbr[i]:
                if core[j]:
                    ri, rj = find(i), find(j)
                    if ri != rj:
                        parent[max(ri, rj)] = min(ri, rj)

    order = {}
    for i in range(n):
        if core[i] and find(i) not in order:
            order[find(i)] = len(order)
    label = [-1] * n
    for i in range(n):
        if core[i]:
            label[i] = order[find(i)]
    for i in range(n):
        if not core[i]:
            adj = [label[j] for j in nbr[i] if core[j]]
            if adj:
                label[i] = min(adj)
    clusters = [[i for i in range(n) if label[i] == k] for k in range(len(order))]
    noise = [i for i in range(n) if label[i] == -1]
    return clusters, noise


# -- metrics ------------------------------------------------------------------


def _flat(m):
    return [float(v) for row in m for v in row]


def kl_oracle(gt, pred, eps=1e-12):
    g, p = _flat(gt), _flat(pred)
    sg, sp = math.fsum(g), math.fsum(p)
    return math.fsum((a / sg) * math.log((a / sg + eps) / (b / sp + eps)) for a, b in zip(g, p))


def cc_oracle(gt, pred):
    g, p = _flat(gt), _flat(pred)
    n = len(g)
    mg, mp = math.fsum(g) / n, math.fsum(p) / n
    cov = math.fsum((a - mg) * (b - mp) for a, b in zip(g, p))
    vg = math.fsum((a - mg) ** 2 for a in g)
    vp = math.fsum((b - mp) ** 2 for b in p)
    return cov / math.sqrt(vg * vp)


def sim_oracle(gt, pred):
    g, p = _flat(gt), _flat(pred)
    sg, sp = math.fsum(g), math.fsum(p)
    return math.fsum(min(a / sg, b / sp) for a, b in zip(g, p))


def nearest_pixel(gx, gy, width, height):
    """(row, col) of the pixel whose centre is nearest, halves rounding up."""
    col = math.floor(gx * width / GRID + 0.5)
    row = math.floor(gy * height / GRID + 0.5)
    return min(max(row, 0), height - 1), min(max(col, 0), width - 1)


def nss_oracle(pred, fixations):
    h, w = len(pred), len(pred[0])
    v = _flat(pred)
    mu = math.fsum(v) / len(v)
    sd = math.sqrt(math.fsum((x - mu) ** 2 for x in v) / len(v))
    vals = []
    for gx, gy in fixations:
        r, c = nearest_pixel(gx, gy, w, h)
        vals.append((pred[r][c] - mu) / sd)
    return math.fsum(vals) / len(vals)


def auc_judd_oracle(pred, fixations):
    """Exhaustive threshold sweep: one ROC point per distinct saliency value
    found at a fixated pixel (fixated pixels counted once)."""
    h, w = len(pred), len(pred[0])
    fixed = sorted({nearest_pixel(gx, gy, w, h) for gx, gy in fixations})
    fix_vals = [pred[r][c] for r, c in fixed]
    others = [pred[r][c] for r in range(h) for c in range(w) if (r, c) not in set(fixed)]
    tp, fp = [0.0], [0.0]
    for t in sorted(set(fix_vals), reverse=True):
        tp.append(sum(1 for v in fix_vals if v >= t) / len(fix_vals))
        fp.append(sum(1 for v in others if v >= t) / len(others) if others else 0.0)
    tp.append(1.0)
    fp.append(1.0)
    return math.fsum((fp[i + 1] - fp[i]) * (tp[i + 1] + tp[i]) / 2 for i in range(len(tp) - 1))


# -- rewards ------------------------------------------------------------------


def spatial_reward_oracle(pred, target, d_max=2.0 * GRID * GRID):
    total = 0.0
    for px, py in pred:
        total += min((px - tx) ** 2 + (py - ty) ** 2 for tx, ty in target)
    return math.exp(-total / (d_max * len(pred)))


# -- message validity ------------------------------------------------------------

_DIGITS = "0123456789"
_SPACE = " \t\n\r\f\v"


class _Scanner:
    def __init__(self, s):
        self.s, self.i = s, 0

    def ws(self):
        while self.i < len(self.s) and self.s[self.i] in _SPACE:
            self.i += 1

    def lit(self, ch):
        if self.i < len(self.s) and self.s[self.i] == ch:
            self.i += 1
            return True
        return False

    def int_(self, signed):
        start = self.i
        if signed:
            self.lit("-")
        d0 = self.i
        while self.i < len(self.s) and self.s[self.i] in _DIGITS:
            self.i += 1
        if self.i == d0:
            return None
        return int(self.s[start:self.i]) if self.i - d0 < 30 else 10**30

    def pair(self):
        if not self.lit("["):
            return None
        self.ws()
        x = self.int_(True)
        if x is None:
            return None
        self.ws()
        if not self.lit(","):
            return None
        self.ws()
        y = self.int_(True)
        if y is None:
            return None
        self.ws()
        if not self.lit("]"):
            return None
        return (x, y)

    def done(self):
        return self.i == len(self.s)


def _count_content(s):
    sc = _Scanner(s)
    sc.ws()
    n = sc.int_(False)
    sc.ws()
    return n if n is not None and sc.done() else None


def _list_content(s):
    sc = _Scanner(s)
    sc.ws()
    if not sc.lit("["):
        return None
    sc.ws()
    pts = []
    if sc.lit("]"):
        sc.ws()
        return pts if sc.done() else None
    while True:
        p = sc.pair()
        if p is None:
            return None
        pts.append(p)
        sc.ws()
        if sc.lit(","):
            sc.ws()
            continue
        if sc.lit("]"):
            sc.ws()
            return pts if sc.done() else None
        return None


def _single_content(s):
    sc = _Scanner(s)
    sc.ws()
    p = sc.pair()
    sc.ws()
    return [p] if p is not None and sc.done() else None


def _in(p):
    return 0 <= p[0] <= GRID and 0 <= p[1] <= GRID


def message_oracle(text):
    """(valid_format, n_ref, points) by an independent character scanner."""
    valid = True
    n_ref = None
    a = text.find("<ref>")
    if a < 0:
        valid = False
    else:
        b = text.find("</ref>", a + 5)
        if b < 0:
            valid = False
        else:
            n_ref = _count_content(text[a + 5 : b])
            valid = valid and n_ref is not None

    points = []
    a = text.find("<point>")
    if a < 0:
        return False, n_ref, points
    b = text.find("</point>", a + 7)
    if b < 0:
        return False, n_ref, None  # points unspecified for unterminated spans
    body = text[a + 7 : b]
    lst = _list_content(body)
    single = _single_content(body)
    if lst is not None:
        points = lst
    elif single is not None:
        points = single
        pos = b + 8
        while True:
            c = text.find("<point>", pos)
            if c < 0 or text[pos:c].strip(_SPACE):
                break
            d = text.find("</point>", c + 7)
            if d < 0:
                break
            nxt = _single_content(text[c + 7 : d])
            if nxt is None or not _in(nxt[0]):
                break
            points += nxt
            pos = d + 8
    else:
        return False, n_ref, None
    if not all(_in(p) for p in points):
        valid = False
    return valid, n_ref, points
