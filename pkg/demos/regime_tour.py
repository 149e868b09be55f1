"""Tour of the spreading/entanglement regime table for kicked-rotor pairs.

When every kick period is a rational multiple of 4*pi, the evolution over
any number of steps collapses to a closed form in which half the rotors
pick up a half-turn angle shift on odd steps.  Each rotor's momentum
spreading law is then fixed by the parity of its effective potential under
that shift (symmetric -> ballistic, antisymmetric -> period-2 oscillation,
mixed -> hybrid), and the entanglement pattern by the parity of the
coupling alone.  This script classifies three small models, prints the
closed-form coefficients, and checks a few simulated steps against every
predicted law.

Run from the repository root (no arguments, ~15 s):

    python3 demos/regime_tour.py
"""

from __future__ import annotations

import numpy as np

from kickres import (
    BipartitionSpec,
    PotentialSpec,
    ResonancePlan,
    RotorEngine,
    RotorLattice,
    RotorState,
    classify_regimes,
    cosine_term,
    displacement_stats,
    measure_moments,
    predict_moments,
    schmidt_purity,
    term_text,
    wavepacket_params,
)

PART = BipartitionSpec(2, (0,))
STEPS = 24

# Three models spanning the regime table.  Plans list one (numerator,
# denominator) pair per rotor: the kick period is 4*pi*r/s, so (1, 1) is
# the principal resonance and (1, 2) the secondary.
MODELS = [
    (
        "weak kicks, strong coupling, principal + secondary",
        PotentialSpec(
            2,
            (
                cosine_term(0.1, (1, 0)),
                cosine_term(0.2, (0, 1)),
                cosine_term(1.0, (1, -1)),
            ),
        ),
        ResonancePlan(((1, 1), (1, 2))),
    ),
    (
        "strong kicks, weak coupling, both secondary",
        PotentialSpec(
            2,
            (
                cosine_term(2.0, (1, 0)),
                cosine_term(3.0, (0, 1)),
                cosine_term(0.1, (1, -1)),
            ),
        ),
        ResonancePlan(((1, 2), (1, 2))),
    ),
    (
        "second-harmonic kicks, cross-harmonic coupling, both secondary",
        PotentialSpec(
            2,
            (
                cosine_term(0.1, (2, 0)),
                cosine_term(0.1, (0, 2)),
                cosine_term(1.0, (2, -1)),
            ),
        ),
        ResonancePlan(((1, 2), (1, 2))),
    ),
]


def simulate(potential, plan, steps):
    """Evolve |0,0> and return spread records plus the entropy series."""
    momenta = (0,) * potential.rotor_count
    lattice = RotorLattice.for_run(potential, momenta, steps)
    engine = RotorEngine(potential, plan, lattice, auto_grow=True)
    state = RotorState.momentum_eigenstate(lattice, momenta)
    records, entropy = [], []
    for t, current in engine.trajectory(state, steps):
        records.append(measure_moments(current, t))
        entropy.append(1.0 - schmidt_purity(current, PART))
    return displacement_stats(records), entropy


def main() -> None:
    for name, potential, plan in MODELS:
        print("=" * 72)
        print(name)
        print("  V =", "  +  ".join(term_text(t) for t in potential.terms))

        report = classify_regimes(potential, plan, PART)
        params = wavepacket_params(potential, plan.shift_set)
        for j in range(2):
            print(
                f"  rotor {j + 1}: {report.rotor_classes[j].name.lower():14s}"
                f" -> {report.rotor_regimes[j]:22s}"
                f" lambda+ = {params.lambda_plus[j]:.4g},"
                f" lambda- = {params.lambda_minus[j]:.4g}"
            )
        print(
            f"  coupling: {report.interaction_class.name.lower():14s}"
            f" -> {report.interaction_regime}"
        )

        series, entropy = simulate(potential, plan, STEPS)
        print(f"  {'t':>3s} {'sigma2_1 sim':>14s} {'predicted':>14s}"
              f" {'sigma2_2 sim':>14s} {'predicted':>14s} {'s_lin':>10s}")
        for t in (1, 2, 7, 8, 23, 24):
            _, spread = predict_moments(params, t)
            rec = series[t]
            print(
                f"  {t:3d} {rec.spread[0]:14.6f} {spread[0]:14.6f}"
                f" {rec.spread[1]:14.6f} {spread[1]:14.6f}"
                f" {entropy[t]:10.6f}"
            )
        worst = max(
            abs(series[t].spread[j] - predict_moments(params, t)[1][j])
            for t in range(1, STEPS + 1)
            for j in range(2)
        )
        print(f"  worst |sim - closed form| over t <= {STEPS}: {worst:.3e}")
    print("=" * 72)
    print("The three couplings exhaust the entanglement column of the table:")
    print("antisymmetric -> period-2 alternation (models 1 and 3),")
    print("symmetric -> quadratic growth then saturation (model 2).")


if __name__ == "__main__":
    main()
