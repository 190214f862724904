import csv
import json
import os
from datetime import datetime, timezone
from fractions import Fraction
from multiprocessing.pool import ThreadPool

from regretbench.config import logger
from regretbench.errors import ConfigError


def parse_fraction(text):
    """Parse an exact rational such as "1/64", "0.25" or 3.

    :param text: string, int, float or Fraction
    """
    if isinstance(text, Fraction):
        return text
    try:
        if isinstance(text, float):
            return Fraction(repr(text))
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"not a rational number: {text!r}") from e


def parse_fraction_list(text):
    """Parse "1/16,1/32" (or a list of such items) into Fractions"""
    if isinstance(text, str):
        text = [item for item in text.split(',') if item.strip()]
    return [parse_fraction(item) for item in text]


def format_float(x):
    """Render a float with 17 significant digits (round-trip exact)"""
    return format(float(x), '.17g')


def write_csv(path, fieldnames, rows):
    """Write dict rows to a CSV file with a header; floats get 17 digits.

    :param path: output file path
    :param fieldnames: ordered column names
    :param rows: iterable of dicts keyed by fieldnames
    """
    with open(path, 'w', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: (format_float(v) if isinstance(v, float)
                                 else v)
                             for k, v in row.items()})
    logger.info(f"Wrote {path}")
    return path


def write_json(path, payload):
    with open(path, 'w') as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write('\n')
    logger.info(f"Wrote {path}")
    return path


def ensure_dir(path):
    if path and not os.path.exists(path):
        os.makedirs(path)
    return path


def utc_timestamp():
    return datetime.now(timezone.utc).strftime('%Y-%m-%dT%H:%M:%SZ')


def parallel_map(fn, items, threads=1):
    """Map fn over items, optionally on a thread pool. Results come back in
    input order whatever the completion order.

    :param fn: function of one argument
    :param items: iterable of arguments
    :param threads: number of worker threads; 1 runs inline
    """
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPool(min(threads, len(items))) as pool:
        return pool.map(fn, items)
