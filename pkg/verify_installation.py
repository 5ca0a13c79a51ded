"""Verify the sketchbound installation.

Checks that every module imports and runs a few seconds of smoke checks
(closed-form bounds, one sketch, a handful of W draws). No result files are written.
"""
import math
import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent / "src"))


def check_imports():
    """Check that all modules can be imported."""
    print("\n" + "=" * 80)
    print("VERIFYING SKETCHBOUND INSTALLATION")
    print("=" * 80)

    modules = [
        ("Settings", "sketchbound.utils.settings"),
        ("Work pool", "sketchbound.utils.pool"),
        ("Linear algebra kernels", "sketchbound.core.linalg"),
        ("Matrix storage", "sketchbound.storage.matrix_io"),
        ("Range finders", "sketchbound.rangefinder"),
        ("Bounds", "sketchbound.bounds"),
        ("Worst-case sampler", "sketchbound.worstcase"),
        ("Experiments", "sketchbound.experiments"),
        ("Plotting", "sketchbound.experiments.plotting"),
        ("CLI", "sketchbound.cli"),
    ]

    success = 0
    failed = []

    for name, module_path in modules:
        try:
            __import__(module_path)
            print(f"✅ {name:35} - OK")
            success += 1
        except Exception as e:
            print(f"❌ {name:35} - FAILED: {e}")
            failed.append((name, str(e)))

    print("\n" + "=" * 80)
    print(f"IMPORT CHECK: {success}/{len(modules)} modules imported successfully")
    print("=" * 80)

    if failed:
        print("\n⚠️  Failed imports:")
        for name, error in failed:
            print(f"   • {name}: {error}")
        return False

    return True


def test_bounds_basic():
    """Closed-form bounds against hand-computed values."""
    print("\n" + "=" * 80)
    print("TESTING: Closed-form bounds")
    print("=" * 80)

    from sketchbound import bounds

    hmt = bounds.bound_hmt(10**5, 10**5, 100, 100)
    proxy = bounds.error_proxy(10**9, 200, 200)
    factor = bounds.power_trick_factor(proxy, 3)

    print(f"\n📊 Prior bound (n=1e5, k=p=100): {hmt:.2f}")
    print(f"   Proxy (n=1e9, k=p=200):        {proxy:.1f}")
    print(f"   Proxy^(1/7) after q=3 powers:  {factor:.3f}")

    if abs(hmt - 181.69) > 0.05 or not 3.40 <= factor <= 3.43:
        print("\n❌ Bounds Test FAILED")
        return False
    print("\n✅ Bounds Test PASSED")
    return True


def test_sketch_basic():
    """One range finder run on an exact rank-2 matrix."""
    print("\n" + "=" * 80)
    print("TESTING: Range finder")
    print("=" * 80)

    import numpy as np

    from sketchbound.models import SketchConfig
    from sketchbound.rangefinder import range_finder, residual_report

    A = np.diag([5.0, 4.0, 0.0, 0.0])
    result = range_finder(A, SketchConfig(k=2, p=0, seed=0))
    report = residual_report(A, result, include_bounds=False)

    print(f"\n📐 ||(I - QQ*)A|| = {result.residual_spectral:.3e} ({report.ratio_convention})")
    if result.residual_spectral > 1e-9:
        print("\n❌ Range Finder Test FAILED")
        return False
    print("\n✅ Range Finder Test PASSED")
    return True


def test_worst_case_basic():
    """A few W draws obey ||L|| <= W <= ||L|| + 1 and W >= 1."""
    print("\n" + "=" * 80)
    print("TESTING: Worst-case error sampler")
    print("=" * 80)

    from sketchbound.worstcase import estimate_expected_W

    batch = estimate_expected_W(2000, 10, 10, trials=20, seed=0, threads=1)
    summary = batch.summary
    print(f"\n🎲 W over 20 draws (n=2000, k=p=10): mean {summary.mean:.2f} ± {summary.ci_half_width:.2f}")
    print(f"   Range: [{batch.min:.2f}, {batch.max:.2f}], method {batch.method}")

    if batch.min < 1.0 or not math.isfinite(batch.max):
        print("\n❌ Worst-case Sampler Test FAILED")
        return False
    print("\n✅ Worst-case Sampler Test PASSED")
    return True


def test_lemma_checks_basic():
    """Two quick property checks plus the negative control."""
    print("\n" + "=" * 80)
    print("TESTING: Lemma checks")
    print("=" * 80)

    from sketchbound.experiments.lemmas import run_checks

    report = run_checks(seed=0, names=["chaining", "single_vector_monotonicity"])
    negated = run_checks(seed=0, negate=True, names=["single_vector_monotonicity"])
    for result in report.results:
        print(f"   {result.name:30} failures={result.failures} worst slack={result.worst_slack:.2e}")
    print(f"   negative control failures: {negated.results[0].failures}")

    if not report.passed or negated.passed:
        print("\n❌ Lemma Checks Test FAILED")
        return False
    print("\n✅ Lemma Checks Test PASSED")
    return True


def main():
    """Run all verification checks."""
    print("\n" + "=" * 80)
    print("SKETCHBOUND - INSTALLATION VERIFICATION")
    print("=" * 80)
    print("\nThis script verifies that all modules are installed and working.")
    print("Note: Full-scale reproductions run via `pytest -m slow` or the configs/ files.")

    results = {}

    results['imports'] = check_imports()
    if not results['imports']:
        print("\n⚠️  Imports failed; skipping smoke checks")
        return 1

    results['bounds'] = test_bounds_basic()
    results['sketch'] = test_sketch_basic()
    results['worst_case'] = test_worst_case_basic()
    results['lemmas'] = test_lemma_checks_basic()

    # Summary
    passed = sum(1 for v in results.values() if v)
    total = len(results)

    print("\n" + "=" * 80)
    print("VERIFICATION SUMMARY")
    print("=" * 80)
    print(f"Passed: {passed}/{total} checks")

    if passed == total:
        print("\n✅ ALL CHECKS PASSED!")
        print("\nNext steps:")
        print("1. Run the test suite: pytest")
        print("2. Reproduce a figure: python sketchbound_cli.py experiment --config configs/fig2.toml")
        print("3. See QUICK_START.md for the CLI reference")
        return 0
    else:
        print(f"\n⚠️  {total - passed} check(s) failed")
        print("Review errors above")
        return 1


if __name__ == "__main__":
    sys.exit(main())
