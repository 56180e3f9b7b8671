"""Composing tiny policies: streaming averagers + reductions.

The library's solver is built from the same pattern shown here in miniature:
orthogonal pieces with persistent state (an averager) composed with a
stateless reduction.  Swapping either piece changes the behavior without
touching the other.
"""

from proxkit.policies.smoothing import CmaAverager, EmaAverager, max_abs, sum_squared

# exponential moving average feeding a sum-of-squares reduction
f1 = EmaAverager(alpha=0.5)
f1.initialize([0.0, 0.0])
print("ema+sumsq push (3,4) ->", sum_squared(f1.push([3.0, 4.0])))  # 6.25
print("ema+sumsq push (6,8) ->", sum_squared(f1.push([6.0, 8.0])))  # 39.0625

# cumulative moving average feeding a max-abs reduction
f2 = CmaAverager()
f2.initialize([0.0, 0.0])
print("cma+maxabs push (3,4) ->", max_abs(f2.push([3.0, 4.0])))  # 4.0
print("cma+maxabs push (6,8) ->", max_abs(f2.push([6.0, 8.0])))  # 6.0
