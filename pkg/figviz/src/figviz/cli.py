"""Render figures from recompiler trace CSVs and circuit files.

    figviz recompile TRACE.csv -o fig.png
    figviz elimination TRACE.csv -o fig.png
    figviz fidelity T1.csv T2.csv --labels li trotter -o fig.png
    figviz resources A.txt B.txt --labels source recompiled -o fig.png

The image format follows the output extension.
"""
from __future__ import annotations

import argparse
import sys


def main(argv=None):
    parser = argparse.ArgumentParser(prog="figviz", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("recompile", help="energy/fidelity/bound plus parameter curves")
    p.add_argument("trace")
    p.add_argument("-o", "--out", required=True)

    p = sub.add_parser("elimination", help="energy with removal markers plus parameter curves")
    p.add_argument("trace")
    p.add_argument("-o", "--out", required=True)

    p = sub.add_parser("fidelity", help="fidelity-versus-time overlay of several traces")
    p.add_argument("traces", nargs="+")
    p.add_argument("--labels", nargs="*", default=None)
    p.add_argument("-o", "--out", required=True)

    p = sub.add_parser("resources", help="one-/two-qubit gate counts per circuit file")
    p.add_argument("circuits", nargs="+")
    p.add_argument("--labels", nargs="*", default=None)
    p.add_argument("-o", "--out", required=True)

    opts = parser.parse_args(argv)
    from . import plots

    try:
        if opts.command == "recompile":
            info = plots.plot_recompile(opts.trace, opts.out)
        elif opts.command == "elimination":
            info = plots.plot_elimination(opts.trace, opts.out)
            print(f"removal markers: {info.n_removal_markers}")
        elif opts.command == "fidelity":
            info = plots.plot_fidelity_compare(opts.traces, opts.labels, opts.out)
        else:
            info = plots.plot_resources(opts.circuits, opts.labels, opts.out)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {info.out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
