"""
Shared pytest settings.
"""


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "integration: full 200-start sweeps, deselect with -m 'not integration'"
    )
