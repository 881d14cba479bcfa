"""Invariants, the ranged spectrum, and the eigenvalue cooperation chain.

Solves the transcendental boundary-moment equation across the admissible
ratio window, builds the ranged spectrum, and equalizes it into a single
eigenvalue whose terminal segment zeroes the state exactly.
"""

from ipflab import eigenchain, invariants

for gamma in (0.0, 0.25, 0.5, 0.75):
    inv = invariants.invariant_set(gamma)
    print(f"gamma={gamma:4.2f}  |ao|={inv.ao_abs:.6f}  a={inv.a:.6f}  "
          f"delta*={inv.delta_star:.6f}")

spec = invariants.optimal_spectrum(3, 1.0)
print(f"\nranged spectrum: {spec.round(6).tolist()}")
print(f"ratios: {spec[0] / spec[1]:.4f}, {spec[1] / spec[2]:.4f}")

chain = eigenchain.build_equalization_chain(spec, 3)
print(f"\ncooperation intervals: {[round(t, 6) for t in chain.intervals]}")
for lam_in, lam_next, lam_out in chain.lambdas:
    print(f"  join {lam_in:.4f} with {lam_next:.4f} -> {lam_out:.4f}")

trace = eigenchain.chain_state_trace(chain, 1.0)
print(f"terminal time {trace['terminal_time']:.4f}, "
      f"final state {trace['final_state']:.2e}")

ratios = invariants.gamma_ratios(0.252)
print(f"\neigenvalue-ratio pair at a=0.252: "
      f"gamma1={ratios['gamma1']:.4f}, gamma2={ratios['gamma2']:.4f}")
