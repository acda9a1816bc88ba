"""
Various utilities used project-wide: output tables and writers.
"""

import contextlib
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np
from absl import logging

CSV_FORMAT = "%.17g"


@dataclass
class Table:
    """
    Named numeric columns plus footer entries such as the tail bound. Footer
    values are numbers written as `name,value` lines after the rows.
    """

    columns: list
    values: np.ndarray
    footer: dict = field(default_factory=dict)

    def to_dict(self):
        result = {
            name: self.values[:, i].tolist() for i, name in enumerate(self.columns)
        }
        result.update(self.footer)
        return result


def maybe_make_path(path):
    """Maybe create a path and log it."""
    if path and not os.path.exists(path):
        logging.info("Creating path: {}".format(path))
        os.makedirs(path)


@contextlib.contextmanager
def open_output(path=None):
    """Open `path` for writing, creating its directory, or yield stdout."""
    if path is None:
        yield sys.stdout
        return
    maybe_make_path(os.path.dirname(path))
    with open(path, "w") as stream:
        yield stream
    logging.info("Wrote {}.".format(path))


def _number(value):
    return CSV_FORMAT % value


def _builtin(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError("Cannot serialize {!r}.".format(value))


def write_csv(table, stream):
    np.savetxt(
        stream,
        table.values,
        fmt=CSV_FORMAT,
        delimiter=",",
        header=",".join(table.columns),
        comments="",
    )
    for name, value in table.footer.items():
        stream.write("{},{}\n".format(name, _number(value)))


def write_json(data, stream):
    if isinstance(data, Table):
        data = data.to_dict()
    json.dump(data, stream, sort_keys=True, indent=2, default=_builtin)
    stream.write("\n")


def write_output(data, output_format, path=None):
    """
    Write a Table or a JSON-able dict. Dicts are always written as JSON.

    Parameters
    ----------
    data : Table or dict
    output_format : string
        "csv" or "json".
    path : string, optional
        Output file. If None, write to stdout.
    """
    with open_output(path) as stream:
        if isinstance(data, Table) and output_format == "csv":
            write_csv(data, stream)
        else:
            write_json(data, stream)
