"""What the eMBB user gains and what the URLLC user pays.

Relative eMBB loss at 40 dB for each mapper versus K, and the URLLC SNR
penalty when the SRM sends eMBB points in place of URLLC points.
"""
from urllc_puncture.analytic import LoadProfile, embb_loss, substitution_probability, urllc_power_loss_db

g = 1e4
print("relative eMBB loss on punctured symbols, 40 dB")
print("    K   esrm 2-4  urllc 2-4  esrm 2-16  urllc 2-16")
for K in (1, 10, 100, 1200):
    row = []
    for m in (4, 16):
        prof = LoadProfile(2400, {m: 1.0}, {(2, m): 96.0}, 24, K)
        row += [embb_loss(prof, g, "esrm", relative=True), embb_loss(prof, g, "urllc", relative=True)]
    print(f"{K:5d}   {row[0]:.3f}     {row[1]:.3f}      {row[2]:.3f}      {row[3]:.3f}")

q = substitution_probability(2, 4, "srm", 24, 1200)
print(f"\nSRM 2-4: {q:.1%} of URLLC symbols replaced, SNR penalty {urllc_power_loss_db(2, 4, 'srm', q):.2f} dB")
