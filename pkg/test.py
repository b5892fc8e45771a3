#!/usr/bin/env python3
"""
reks Testing Control Script

Unified entry point for the unit and acceptance suites.
"""
import subprocess
import sys
from pathlib import Path


TESTING_DIR = Path(__file__).parent / "testing"


def run_pytest(target: Path, *extra: str) -> bool:
    if not target.exists():
        print(f"❌ {target} not found")
        return False
    result = subprocess.run([sys.executable, "-m", "pytest", str(target), *extra])
    return result.returncode == 0


def run_unit_tests():
    """Run the unit suites (seconds)"""
    print("🚀 Running Unit Tests")
    print("=" * 25)
    return run_pytest(TESTING_DIR / "unit")


def run_integration_tests():
    """Run the acceptance suites, including the slow randomized ones"""
    print("🧪 Running Acceptance Tests (minutes)")
    print("=" * 40)
    return run_pytest(TESTING_DIR / "integration")


def run_quick_tests():
    """Everything except tests marked slow"""
    print("⚡ Running Quick Tests")
    print("=" * 25)
    return run_pytest(TESTING_DIR, "-m", "not slow")


def show_help():
    """Show available testing options"""
    print("🧪 reks Testing Suite")
    print("=" * 25)
    print("")
    print("Available commands:")
    print("")
    print("  unit         Run unit tests")
    print("  integration  Run acceptance tests (slow)")
    print("  quick        Run everything not marked slow")
    print("  all          Run unit and acceptance tests")
    print("  help         Show this help message")
    print("")
    print("Environment:")
    print("  REKS_SEED, REKS_MAX_DIM and the other REKS_* bounds apply to every run;")
    print("  HYPOTHESIS_PROFILE selects a registered hypothesis profile.")
    print("")
    print("Examples:")
    print("  python3 test.py unit")
    print("  python3 test.py all")


def main():
    """Main testing control function"""
    if len(sys.argv) < 2:
        show_help()
        return

    command = sys.argv[1].lower()

    if command == "unit":
        success = run_unit_tests()
    elif command == "integration":
        success = run_integration_tests()
    elif command == "quick":
        success = run_quick_tests()
    elif command == "all":
        unit_success = run_unit_tests()
        print("\n" + "=" * 50 + "\n")
        integration_success = run_integration_tests()
        success = unit_success and integration_success
    elif command == "help":
        show_help()
        return
    else:
        print(f"❌ Unknown command: {command}")
        show_help()
        sys.exit(1)

    sys.exit(0 if success else 1)


if __name__ == "__main__":
    main()
