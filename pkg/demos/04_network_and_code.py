"""Build the hierarchical information network and emit its code.

One triplet carries about 4 bits in total and transfers about 1 bit to
its node; a five-eigenvalue spectrum folds into two nodes and an
eight-letter switch code.
"""

from ipflab import invariants, network

report = network.triplet_accounting(invariants.invariant_set(0.5))
print("triplet accounting at gamma = 0.5")
print(f"  total        : {report.total_nats:.4f} nats = {report.total_bits:.4f} bits")
print(f"  delivered    : {report.contributions['deliver1']:.4f}, "
      f"{report.contributions['deliver2']:.4f}")
print(f"  consumed     : {report.contributions['consumed1']:.4f}, "
      f"{report.contributions['consumed2']:.4f}")
print(f"  closure      : {report.contributions['closure']:.5f} "
      f"(ao^2 = {report.ao_abs ** 2:.5f})")
print(f"  node transfer: {report.node_transfer_nats:.5f} nats = "
      f"{report.node_bits:.4f} bits")

for n in (3, 5):
    net = network.build_in(n, 0.5, 1.0)
    print(f"\nnetwork for n = {n}")
    print(net.to_outline())

check = network.max_ratio_check(2)
print(f"\nspread formula {check['formula_value']:.3f} vs spectrum ratio "
      f"{check['spectrum_ratio']:.4f} (gap {check['relative_gap']:.1%}, reported not asserted)")
