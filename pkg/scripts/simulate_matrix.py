"""Simulate every (method, setting, attack) cell with the shipped profiles.

Prints the verdict grid as Markdown, checks it against the golden file and
optionally sweeps the fatigue parameters to show where Duo's lockout and the
user's exhaustion trade places.

    python scripts/simulate_matrix.py [--sweep]
"""
import argparse
import sys

from srauth import presets
from srauth.authsim import AttackKind, SimConfig, run_attack, run_matrix
from srauth.model import PlatformSetting, SettingKind
from srauth.report import compare_golden, render_outcomes


def fatigue_sweep():
    cat = {m.id: m for m in presets.catalog()}
    profs = presets.profiles()
    phone = PlatformSetting(SettingKind.SMARTPHONE, smartphone_reader="Talkback")
    lockouts = [None, 3, 5, 10, 15]
    print("\nDuo Push fatigue verdict by exhaustion threshold (rows) and lockout (columns)")
    print("exhaustion | " + " | ".join(str(x) for x in lockouts))
    for ex in (1, 3, 5, 8, 10, 15, 25):
        cells = []
        for lock in lockouts:
            cfg = SimConfig(exhaustion_threshold=ex, admin_lockout_threshold=lock)
            cells.append(run_attack(cat["duo_push"], phone, profs, AttackKind.NOTIFICATION_FATIGUE, cfg).verdict.value)
        print(f"{ex:>10} | " + " | ".join(cells))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sweep", action="store_true")
    args = ap.parse_args()
    out = run_matrix(presets.catalog(), presets.study_settings(), presets.profiles(), list(AttackKind))
    print(render_outcomes(out, "markdown"))
    problems = compare_golden(out, presets.golden_matrix())
    print(f"golden: {len(presets.golden_matrix()) - len(problems)}/{len(presets.golden_matrix())} cells match")
    for p in problems:
        print("  " + p)
    if args.sweep:
        fatigue_sweep()
    return 1 if problems else 0


if __name__ == "__main__":
    sys.exit(main())
