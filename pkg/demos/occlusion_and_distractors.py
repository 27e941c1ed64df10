"""
Broken arcs and other shapes
============================

The fitness of a candidate is the fraction of its perimeter found on edge
pixels. A quarter-occluded ellipse therefore scores about 0.75 and is still
found, while rectangles, triangles and segments do not produce ellipses.
"""

import math

from cab_ellipse.detector import detect, fitness
from cab_ellipse.evaluation import error_score
from cab_ellipse.geometry import ellipse_through
from cab_ellipse.synth import SceneSpec, Shape, render

e = ellipse_through(200, 150, 90, 50, math.radians(30))
occluded = render(SceneSpec(ellipses=[e], occlusions={0: (0.0, math.pi / 2)}))
print("fitness of the true ellipse:", round(fitness(e, occluded.edges), 3))

for seed in range(3):
    found = detect(occluded.edges, seed=seed)
    best = found[0]
    print(f"seed {seed}: {len(found)} detection(s), Es {error_score(e, best.ellipse):.3f}, "
          f"fitness {best.fitness:.3f}")

# %%
# Distractors

e = ellipse_through(200, 150, 70, 40, math.radians(25))
scene = render(SceneSpec(
    ellipses=[e],
    distractors=[
        Shape("rectangle", ((20, 20), (110, 20), (110, 80), (20, 80))),
        Shape("triangle", ((300, 30), (380, 110), (290, 120))),
        Shape("segment", ((30, 200), (120, 280))),
    ],
))
for seed in range(3):
    found = detect(scene.edges, seed=seed)
    print(f"seed {seed}:", [(round(d.ellipse.x0), round(d.ellipse.y0), round(d.fitness, 2)) for d in found])
