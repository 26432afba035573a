def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if "test_acceptance" not in report.nodeid or report.when != "call":
        return
    name = report.nodeid.split("::")[-1]
    if name.startswith("test_"):
        name = name[len("test_"):]
    verdict = "PASS" if report.passed else "FAIL"
    print(f"\n[ACCEPTANCE] {name}: {verdict}", flush=True)
