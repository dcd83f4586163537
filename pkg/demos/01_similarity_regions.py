"""Similarity regions between a BPSK URLLC stream and QAM eMBB streams.

Prints which eMBB points share a region with each BPSK point, the enhanced
subset the ESRM may keep, and the chance two random symbols share a region.
"""
from urllc_puncture.constellation import build_constellation
from urllc_puncture.similarity import build_similarity_map, eta


def main():
    for m in (4, 16, 64):
        smap = build_similarity_map(2, m)
        labels = build_constellation(m).labels
        print(f"BPSK over {m}-QAM, eta = {eta(smap):.2f}")
        for u in range(2):
            region = [labels[e] for e in smap.regions[u]]
            enhanced = [labels[e] for e in smap.enhanced[u]]
            print(f"  BPSK {u}: region {len(region):2d} points, enhanced {len(enhanced):2d}")
            if m <= 16:
                print(f"    enhanced labels: {' '.join(enhanced)}")
        print()


if __name__ == "__main__":
    main()
