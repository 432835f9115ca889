"""
integration tests package
These tests run the installed simprof command through `uv run` and inspect the artifacts it writes.
"""
