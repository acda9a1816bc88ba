"""
pytest hooks. absltest helpers such as create_tempfile read --test_tmpdir, so
the absl flags are marked parsed, at their defaults, before any test runs.
"""

from absl import flags


def pytest_configure(config):
    del config
    if not flags.FLAGS.is_parsed():
        flags.FLAGS.mark_as_parsed()
