"""Walk the derivation chain end to end and print what each step finds.

    python scripts/reproduce_derivation.py [--lmax 16]
"""

import argparse

from spheralg import analyzer as an
from spheralg.opalg import to_text


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lmax", type=int, default=16)
    args = ap.parse_args()

    der = an.derive_conjugacy_constraints()
    print("1. K+^dagger = K- forces:", ", ".join(der.constraints.labels))

    m = an.commutator_match(lmax_values=(min(12, args.lmax), args.lmax))
    print(f"2. [K+, K-] against the printed form: {m.branch}")
    if m.nl_factor is not None:
        print(f"   difference = ({to_text(m.nl_factor)}) (N.L), which vanishes on the sphere")
    print(f"   interior residual {m.numeric_max_residual:.2e}; with d != b {m.numeric_free_d_residual:.3g}")

    print("3. closure:", "; ".join(an.closure_conditions().labels))
    enum = an.enumerate_cases()
    print("   solutions:", enum.solutions)
    for f in enum.flags:
        print("   flag:", f)

    print("4. closed points:")
    for a, b in ((1, 0), (1, 1), ("3/2", 1)):
        rep = an.classify(a, b, lmax=args.lmax)
        print(f"   (a, b) = ({a}, {b}): raw G({', '.join(map(str, rep.raw))}) -> G{rep.g_entry} {rep.g_algebra} "
              f"[{rep.g_entry_basis}], residual {rep.residuals['closed_commutator']:.1e}")
        for n in rep.notes:
            print("     note:", n)

    print("5. Casimir:")
    for a, b in ((1, 0), (1, 1), ("3/2", 1)):
        rep = an.casimir_check(a, b, lmax=args.lmax, h_lmax=min(12, args.lmax))
        printed = max(rep.residuals[k] for k in ("K+", "K-", "Kz"))
        inv = max(rep.invariant_form_residuals[k] for k in ("K+", "K-", "Kz"))
        print(f"   ({a}, {b}): printed form {printed:.2e}, invariant form {inv:.2e}, [C, L^2/2] {rep.residuals['H']:.4g}")

    print("6. Kx, Ky decompositions:")
    for case in ("CASE1", "CASE2", "CASE3"):
        rep = an.case_decomposition_check(case, lmax=args.lmax)
        verdicts = ", ".join(f"{c.variant}{c.sign}:{c.status}" for c in rep.checks)
        print(f"   {case}: {verdicts}")
        for n in rep.notes:
            print("     note:", n)


if __name__ == "__main__":
    main()
