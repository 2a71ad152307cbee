"""Inspect a trajectory CSV written by `sim rabi` or `sim iswap`
Prints column statistics, the oscillation period of P_e against pi/lambda_+
and a damped-envelope fit of the P_e peaks.
"""
import csv
import glob
import io
import os
import sys

import numpy as np
import orjson
from scipy.optimize import curve_fit

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from hyb_test_utils import oscillation_period


def load_csv(path):
    meta, body = {}, []
    with open(path, encoding='utf-8') as f:
        for line in f:
            if line.startswith('# '):
                key, _, value = line[2:].rstrip('\n').partition(' = ')
                meta[key] = value
            else:
                body.append(line)
    reader = csv.DictReader(io.StringIO(''.join(body)))
    columns = {name: [] for name in reader.fieldnames}
    for row in reader:
        if row.get('status') != 'ok':
            continue
        for name in reader.fieldnames:
            columns[name].append(row[name])
    arrays = {}
    for name, values in columns.items():
        try:
            arrays[name] = np.array([float(v) for v in values])
        except ValueError:
            pass
    return meta, arrays


def summarize(name, arr):
    print(f"\n-- {name} --")
    print(f"count: {arr.size}")
    print(f"min: {arr.min():.6g}, max: {arr.max():.6g}, final: {arr[-1]:.6g}")


def envelope(t, amplitude, rate):
    return amplitude * np.exp(-rate * t)


def fit_envelope(t, y):
    """Exponential fit through local maxima of y"""
    peaks = np.where((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:]))[0] + 1
    if peaks.size < 3:
        return None
    span = t[peaks[-1]] - t[peaks[0]]
    p0 = (y[peaks[0]], 1.0 / span if span > 0 else 1.0)
    (amplitude, rate), _ = curve_fit(envelope, t[peaks], y[peaks], p0=p0, maxfev=10000)
    return amplitude, rate


def main():
    if len(sys.argv) > 1:
        fpath = sys.argv[1]
    else:
        files = glob.glob(os.path.join(os.environ.get('HYBSIM_OUT_DIR', 'results'), '*.csv'))
        if not files:
            print('No CSV files found. Run `sim rabi` first or pass a path.')
            return 2
        # pick the newest
        files.sort(key=os.path.getmtime)
        fpath = files[-1]
    print(f"Loading: {fpath}")
    meta, data = load_csv(fpath)
    if 't' not in data:
        print(f"{fpath} has no time column (experiment: {meta.get('experiment', '?')})")
        return 2

    t = data['t']
    for name, arr in data.items():
        if name != 't' and arr.size:
            summarize(name, arr)

    if np.any(np.diff(t) <= 0):
        print("\n[FAIL] time column is not strictly increasing")
        return 1

    if 'P_e' in data:
        summary_path = fpath[:-len('.csv')] + '.summary.json'
        expected = None
        if os.path.exists(summary_path):
            with open(summary_path, 'rb') as f:
                points = orjson.loads(f.read())['points']
            expected = points[0]['summary'].get('rabi_period') if points else None

        try:
            period = oscillation_period(t, data['P_e'], 0.5)
        except ValueError as e:
            period = None
            print(f"\nPeriod: {e}")
        if period is not None:
            print(f"\nP_e period (crossings of 1/2): {period:.6e} s")
            if expected:
                print(f"pi / lambda_+: {expected:.6e} s, relative error {abs(period - expected) / expected:.3%}")

        fit = fit_envelope(t, data['P_e'])
        if fit is not None:
            print(f"Envelope: {fit[0]:.4f} exp(-{fit[1]:.4e} t)")

    if 'fidelity' in data:
        print(f"\nFinal fidelity: {data['fidelity'][-1]:.6f}")

    return 0


if __name__ == '__main__':
    rc = main()
    sys.exit(rc)
