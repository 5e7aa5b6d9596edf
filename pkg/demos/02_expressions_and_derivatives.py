#!/usr/bin/env python3
"""Parsing smooth score functions and reading off all their partials at once.

A parsed expression propagates a truncated Taylor jet through its graph, so a
single pass yields the complete table D^alpha f(x) for |alpha| <= L.  Nested
central differences provide an independent cross-check.
"""
from gradseries import derivative_table, evaluate, fd_partial, parse, saliency
from gradseries.exprlang import degree, serialize
from gradseries.multiindex import order

src = "tanh(x1)*x2 + 0.5*x1^2"
f = parse(src)
print(f"source:      {src}")
print(f"canonical:   {serialize(f)}")
print(f"class:       {f.smoothness_class}, dimension {f.dimension}, degree {degree(f)}")

x = (0.3, -0.2)
print(f"\nvalue at {x}: {evaluate(f, x):.6f}")
print(f"gradient:     {saliency(f, x)}")

table = derivative_table(f, x, 4)
print(f"\nall partials up to order 4 at {x} (jet vs central differences):")
print(f"{'alpha':>8} {'jet':>14} {'finite diff':>14}")
steps = {1: 1e-5, 2: 1e-4, 3: 1e-3, 4: 2e-3}
for alpha in sorted(table.entries, key=order):
    k = order(alpha)
    if k == 0:
        continue
    fd = fd_partial(f, x, alpha, steps[k])
    print(f"{str(alpha):>8} {table.partial(alpha):14.8f} {fd:14.8f}")

print("\npolynomials terminate: partials above the degree are exactly zero")
g = parse("x1^3 - 2*x1*x2")
gt = derivative_table(g, (1.0, 1.0), 5)
above = [a for a in gt.entries if order(a) > 3]
print(f"  degree {degree(g)}; {len(above)} entries of order > 3, "
      f"max |value| = {max(abs(gt.partial(a)) for a in above):g}")
