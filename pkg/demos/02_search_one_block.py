"""One similarity search, step by step.

A URLLC block of 24 BPSK symbols is placed on the best of K random 4-QAM
blocks.  More candidates means more symbols the eMBB user keeps.
"""
import numpy as np

from urllc_puncture.analytic import expected_similarity
from urllc_puncture.scheduler import apply_plan, similarity_search
from urllc_puncture.similarity import build_similarity_map

rng = np.random.default_rng(3)
zeta = 24
smap = build_similarity_map(2, 4)
urllc = rng.integers(2, size=zeta)

print(" K   best match  expected (closed form)")
for K in (1, 10, 100, 1200):
    cands = rng.integers(4, size=(K, zeta))
    plan = similarity_search(urllc, cands, smap, "srm")
    print(f"{K:5d}  {plan.similarity_count:6d}      {expected_similarity(zeta, zeta, 0, 0.5, candidates=K):6.2f}")

plan = similarity_search(urllc, cands, smap, "srm")
sent = apply_plan(plan, urllc, cands[plan.selected_index], smap)
kept = int(plan.keep.sum())
print(f"\nblock {plan.selected_index} chosen; {kept} of {zeta} positions carry the eMBB point")
print("first six transmitted points:", np.round(sent[:6], 3))
