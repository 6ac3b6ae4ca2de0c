"""The rotary-position identities that make 3D spatial registration work.

Rotating query and key vectors by their own coordinates makes every inner
product depend only on the coordinate difference, so an attention score
compares positions relatively.  Splitting the head dimension across x, y,
and z extends the same guarantee to volumes.
"""

import numpy as np

from radiofront import RopeConfig, rope_rotate_1d, rope_rotate_3d, split_axis_dims

rng = np.random.default_rng(3)

# 1D: rotation preserves length and composes additively
q = rng.normal(size=16)
print(f"|q| = {np.linalg.norm(q):.12f}")
print(f"|rotate(q, 37)| = {np.linalg.norm(rope_rotate_1d(q, 37)):.12f}")
twice = rope_rotate_1d(rope_rotate_1d(q, 14), 23)
once = rope_rotate_1d(q, 37)
print(f"compose(14, 23) vs rotate(37): max gap {np.max(np.abs(twice - once)):.2e}")

# head dimension split for a 64-wide head
print(f"axis split for d=64: {split_axis_dims(64)}")

# 3D: scores depend only on relative offsets
cfg = RopeConfig.from_head_dim(48)
k = rng.normal(size=48)
q = rng.normal(size=48)
p_q = np.array([5, 11, 2])
p_k = np.array([9, 4, 7])
absolute = rope_rotate_3d(q, *p_q, cfg) @ rope_rotate_3d(k, *p_k, cfg)
relative = q @ rope_rotate_3d(k, *(p_k - p_q), cfg)
print(f"absolute-coordinate score: {absolute:.10f}")
print(f"relative-offset score:     {relative:.10f}")

# shifting both positions by any common offset leaves the score unchanged
shift = np.array([100, -42, 13])
shifted = rope_rotate_3d(q, *(p_q + shift), cfg) @ rope_rotate_3d(k, *(p_k + shift), cfg)
print(f"after a common shift:      {shifted:.10f}")
