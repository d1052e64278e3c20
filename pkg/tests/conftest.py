import sys


def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n][1])
    passed = sum(ok for ok, _ in results.values())
    terminalreporter.write_line(f"{passed}/{len(results)} criteria passed")
