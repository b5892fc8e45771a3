#!/usr/bin/env python3
"""
Environment Validator for reks
Checks that dependencies, settings and the exact linear algebra backend are usable
"""

import importlib
import sys
from pathlib import Path
from typing import Dict, Tuple

import ujson


sys.path.insert(0, str(Path(__file__).parent.parent))

REQUIRED_PACKAGES = ["pydantic", "pydantic_settings", "structlog", "ujson", "sympy"]
TEST_PACKAGES = ["pytest", "hypothesis"]


class EnvironmentValidator:
    def __init__(self):
        self.validation_results = []
        self.critical_failures = []
        self.warnings = []

    def log_result(self, category: str, test: str, status: str, message: str, critical: bool = False):
        """Log a validation result"""
        result = {
            "category": category,
            "test": test,
            "status": status,
            "message": message,
            "critical": critical,
        }
        self.validation_results.append(result)

        if status == "FAIL":
            if critical:
                self.critical_failures.append(result)
            else:
                self.warnings.append(result)

    def validate_packages(self) -> bool:
        ok = True
        for name in REQUIRED_PACKAGES + TEST_PACKAGES:
            critical = name in REQUIRED_PACKAGES
            try:
                module = importlib.import_module(name)
                version = getattr(module, "__version__", "unknown")
                self.log_result("Packages", name, "PASS", f"version {version}")
            except ImportError as e:
                self.log_result("Packages", name, "FAIL", str(e), critical=critical)
                ok = ok and not critical
        return ok

    def validate_linear_algebra(self) -> bool:
        """smith_normal_decomp and DomainMatrix over ZZ"""
        try:
            from sympy.polys.domains import ZZ
            from sympy.polys.matrices import DomainMatrix
            from sympy.polys.matrices.normalforms import smith_normal_decomp

            A = DomainMatrix([[ZZ(2), ZZ(4)], [ZZ(6), ZZ(8)]], (2, 2), ZZ)
            S, U, V = smith_normal_decomp(A)
            if U * A * V != S:
                self.log_result("Algebra", "Smith normal form", "FAIL", "U A V != S", critical=True)
                return False
            self.log_result("Algebra", "Smith normal form", "PASS", f"diagonal {S.to_Matrix().diagonal().tolist()}")
            return True
        except Exception as e:
            self.log_result("Algebra", "Smith normal form", "FAIL", f"sympy >= 1.13 is required: {e}", critical=True)
            return False

    def validate_settings(self) -> bool:
        try:
            from reks.core.config import settings
        except Exception as e:
            self.log_result("Settings", "Load", "FAIL", str(e), critical=True)
            return False

        ok = True
        for field in ("MAX_DIM", "MAX_GROUP_ORDER", "MAX_S21_DEGREE", "MAX_RANK", "MAX_RING_ORDER", "ENUMERATION_LIMIT"):
            value = getattr(settings, field)
            if value <= 0:
                self.log_result("Settings", field, "FAIL", f"must be positive, got {value}", critical=True)
                ok = False
            else:
                self.log_result("Settings", field, "PASS", str(value))
        if settings.MAX_DIM > 8:
            self.log_result("Settings", "MAX_DIM", "FAIL", "windows above 8 are slow at desk scale")
        if settings.LOG_FORMAT not in ("console", "json"):
            self.log_result("Settings", "LOG_FORMAT", "FAIL", f"unknown format {settings.LOG_FORMAT!r}")
        return ok

    def validate_smoke(self) -> bool:
        """A sphere has the homology of a sphere"""
        try:
            from reks.homology import space_conn
            from reks.sset import sphere

            conn = space_conn(sphere(2, 4))
            if conn != 1:
                self.log_result("Smoke", "S^2", "FAIL", f"connectivity {conn}, expected 1", critical=True)
                return False
            self.log_result("Smoke", "S^2", "PASS", "connectivity 1")
            return True
        except Exception as e:
            self.log_result("Smoke", "S^2", "FAIL", str(e), critical=True)
            return False

    def run_all_validations(self) -> Tuple[bool, Dict]:
        """Run all validation checks"""
        print("🔍 Starting environment validation")
        print("=" * 60)

        validations = [
            ("Packages", self.validate_packages),
            ("Exact Linear Algebra", self.validate_linear_algebra),
            ("Settings", self.validate_settings),
            ("Smoke Test", self.validate_smoke),
        ]

        for name, validation_func in validations:
            print(f"\n📋 {name}")
            print("-" * 40)
            validation_func()

        print("\n🎯 VALIDATION SUMMARY")
        print("=" * 60)

        if self.critical_failures:
            print(f"🔴 CRITICAL FAILURES ({len(self.critical_failures)}):")
            for failure in self.critical_failures:
                print(f"   ❌ {failure['category']}: {failure['test']} - {failure['message']}")

        if self.warnings:
            print(f"🟡 WARNINGS ({len(self.warnings)}):")
            for warning in self.warnings:
                print(f"   ⚠️  {warning['category']}: {warning['test']} - {warning['message']}")

        total_tests = len(self.validation_results)
        passed_tests = len([r for r in self.validation_results if r["status"] == "PASS"])
        print(f"\n📊 RESULTS: {passed_tests}/{total_tests} tests passed")

        ready = not self.critical_failures
        if ready:
            print("✅ Environment is ready!")
        else:
            print("❌ Environment has issues that must be resolved")

        return ready, {
            "ready": ready,
            "results": self.validation_results,
            "critical_failures": len(self.critical_failures),
            "warnings": len(self.warnings),
        }


def main():
    validator = EnvironmentValidator()
    ready, results = validator.run_all_validations()
    if "--json" in sys.argv:
        print("\n" + ujson.dumps(results, indent=2))
    sys.exit(0 if ready else 1)


if __name__ == "__main__":
    main()
