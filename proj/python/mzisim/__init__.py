"""Monte Carlo simulation and analysis of Mach-Zehnder self-interference scans."""

from ._mzisim import *  # noqa: F401,F403
from ._mzisim import __version__, run_cli


def main(argv=None):
    """Console entry point mirroring the ``mzisim`` executable."""
    import sys

    code, out, err = run_cli(list(sys.argv[1:] if argv is None else argv))
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code
