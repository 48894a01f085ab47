"""Brute-force reference implementations of every catalog feature.

Pure Python (math/cmath, explicit loops, direct DFT summation) so that the
package code, which leans on numpy/scipy vectorisation, is checked against an
independent route.  Only meant for short inputs.
"""

import cmath
import math


def dft(x, n=None):
    n = len(x) if n is None else n
    xs = list(x) + [0.0] * (n - len(x))
    return [sum(xs[t] * cmath.exp(-2j * math.pi * k * t / n) for t in range(n)) for k in range(n)]


def spectrum(x, fs):
    n = len(x)
    X = dft(x)
    return [k * fs / n for k in range(n // 2)], [abs(X[k]) for k in range(n // 2)]


def mean(v):
    return sum(v) / len(v)


def demean(x):
    m = mean(x)
    return [v - m for v in x]


def pstd(v):
    m = mean(v)
    return math.sqrt(sum((a - m) ** 2 for a in v) / len(v))


def median(v):
    s = sorted(v)
    n = len(s)
    return s[n // 2] if n % 2 else 0.5 * (s[n // 2 - 1] + s[n // 2])


def percentile(v, q):
    s = sorted(v)
    pos = (len(s) - 1) * q / 100
    lo = math.floor(pos)
    hi = min(lo + 1, len(s) - 1)
    return s[lo] + (s[hi] - s[lo]) * (pos - lo)


# spectral ------------------------------------------------------------------

def fft_mean_coeff(x, fs):
    X = dft(x, 256)
    return [abs(X[k]) for k in range(76)]


def fundamental_frequency(x, fs):
    f, m = spectrum(demean(x), fs)
    h = 0.3 * max(m)
    peaks = [i for i in range(1, len(m) - 1) if m[i - 1] < m[i] > m[i + 1] and m[i] >= h]
    return f[peaks[0]] if peaks else 0.0


def human_range_energy(x, fs):
    f, m = spectrum(x, fs)
    lo = min(range(len(f)), key=lambda i: abs(0.6 - f[i]))
    hi = min(range(len(f)), key=lambda i: abs(2.5 - f[i]))
    return sum(v * v for v in m[lo:hi]) / sum(v * v for v in m)


def _solve(a, b):
    # Gauss-Jordan with partial pivoting
    n = len(b)
    m = [list(row) + [b[i]] for i, row in enumerate(a)]
    for c in range(n):
        p = max(range(c, n), key=lambda r: abs(m[r][c]))
        m[c], m[p] = m[p], m[c]
        for r in range(n):
            if r != c:
                fct = m[r][c] / m[c][c]
                m[r] = [u - fct * w for u, w in zip(m[r], m[c])]
    return [m[i][n] / m[i][i] for i in range(n)]


def lpcc(x, fs, order=12, grid=4096):
    """Cepstrum by inverse DFT of the log all-pole power spectrum on a dense grid."""
    n = len(x)
    r = [sum(x[t] * x[t + k] for t in range(n - k)) / n for k in range(order + 1)]
    toeplitz = [[r[abs(i - j)] for j in range(order)] for i in range(order)]
    a = [-v for v in _solve(toeplitz, r[1:order + 1])]
    err = r[0] + sum(a[k] * r[k + 1] for k in range(order))
    logp = []
    for j in range(grid):
        w = 2 * math.pi * j / grid
        A = 1 + sum(a[k] * cmath.exp(-1j * w * (k + 1)) for k in range(order))
        logp.append(math.log(err / abs(A) ** 2))
    return [sum(logp[j] * math.cos(2 * math.pi * j * m / grid) for j in range(grid)) / grid
            for m in range(order + 1)]


def mfcc(x, fs, n_filters=26, n_ceps=12, nfft=512, pre=0.97):
    y = [x[0]] + [x[t] - pre * x[t - 1] for t in range(1, len(x))]
    X = dft(y, nfft)
    power = [abs(X[k]) ** 2 / nfft for k in range(nfft // 2 + 1)]
    mel_hi = 2595 * math.log10(1 + (fs / 2) / 700)
    edges = []
    for i in range(n_filters + 2):
        m = mel_hi * i / (n_filters + 1)
        hz = 700 * (10 ** (m / 2595) - 1)
        edges.append(math.floor((nfft + 1) * hz / fs))
    logs = []
    for j in range(1, n_filters + 1):
        lo, c, hi = edges[j - 1], edges[j], edges[j + 1]
        e = 0.0
        for k in range(nfft // 2 + 1):
            if lo <= k < c:
                e += power[k] * (k - lo) / (c - lo)
            elif c <= k < hi:
                e += power[k] * (hi - k) / (hi - c)
        logs.append(math.log(e if e > 0 else 2.220446049250313e-16))
    N = n_filters
    out = []
    for q in range(1, n_ceps + 1):
        s = sum(logs[i] * math.cos(math.pi * q * (2 * i + 1) / (2 * N)) for i in range(N))
        out.append(s * math.sqrt(2 / N))
    return out


def _welch_single(x, fs):
    n = len(x)
    sd = pstd(x)
    z = [v / sd for v in x] if sd > 0 else list(x)
    z = demean(z)
    w = [0.5 - 0.5 * math.cos(2 * math.pi * t / n) for t in range(n)]
    scale = fs * sum(v * v for v in w)
    psd = []
    for k in range(n // 2 + 1):
        s = sum(w[t] * z[t] * cmath.exp(-2j * math.pi * k * t / n) for t in range(n))
        p = abs(s) ** 2 / scale
        if k != 0 and not (n % 2 == 0 and k == n // 2):
            p *= 2
        psd.append(p)
    return [k * fs / n for k in range(n // 2 + 1)], psd


def max_power_spectrum(x, fs):
    return max(_welch_single(x, fs)[1])


def _edge(x, fs, frac):
    f, m = spectrum(x, fs)
    total = sum(m)
    run = 0.0
    for fi, mi in zip(f, m):
        run += mi
        if run > frac * total:
            return fi
    return f[-1]


def max_frequency(x, fs):
    return _edge(x, fs, 0.95)


def median_frequency(x, fs):
    return _edge(x, fs, 0.5)


def power_bandwidth(x, fs):
    f, p = _welch_single(x, fs)
    total = sum(p)
    run, lower = 0.0, None
    for i in range(len(p)):
        run += p[i]
        if run >= 0.95 * total:
            lower = f[i]
            break
    run, upper = 0.0, None
    for i in range(len(p) - 1, -1, -1):
        run += p[i]
        if run >= 0.95 * total:
            upper = f[i]
            break
    return abs(upper - lower)


def _moments(x, fs):
    f, m = spectrum(x, fs)
    s = sum(m)
    c = sum(fi * mi for fi, mi in zip(f, m)) / s
    spread = math.sqrt(sum((fi - c) ** 2 * mi for fi, mi in zip(f, m)) / s)
    return f, m, s, c, spread


def spectral_centroid(x, fs):
    return _moments(x, fs)[3]


def spectral_spread(x, fs):
    return _moments(x, fs)[4]


def spectral_skewness(x, fs):
    f, m, s, c, sp = _moments(x, fs)
    return sum((fi - c) ** 3 * mi for fi, mi in zip(f, m)) / s / sp ** 3


def spectral_kurtosis(x, fs):
    f, m, s, c, sp = _moments(x, fs)
    return sum((fi - c) ** 4 * mi for fi, mi in zip(f, m)) / s / sp ** 4


def spectral_decrease(x, fs):
    _, m = spectrum(x, fs)
    return sum((m[k] - m[0]) / k for k in range(1, len(m))) / sum(m[1:])


def spectral_distance(x, fs):
    _, m = spectrum(x, fs)
    cum, run = [], 0.0
    for v in m:
        run += v
        cum.append(run)
    n = len(cum)
    return sum(cum[-1] * i / (n - 1) - cum[i] for i in range(n))


def spectral_entropy(x, fs):
    _, m = spectrum(demean(x), fs)
    pw = [v * v for v in m]
    tot = sum(pw)
    p = [v / tot for v in pw if v / tot > 1e-20]
    return -sum(v * math.log2(v) for v in p) / math.log2(len(p))


def spectral_positive_turning(x, fs):
    _, m = spectrum(x, fs)
    return float(sum(1 for i in range(1, len(m) - 1) if m[i - 1] < m[i] > m[i + 1]))


def _roll(x, fs, frac):
    f, m = spectrum(x, fs)
    total, run = sum(m), 0.0
    for fi, mi in zip(f, m):
        run += mi
        if run >= frac * total:
            return fi


def spectral_roll_off(x, fs):
    return _roll(x, fs, 0.95)


def spectral_roll_on(x, fs):
    return _roll(x, fs, 0.05)


def spectral_slope(x, fs):
    f, m = spectrum(x, fs)
    s = sum(m)
    y = [v / s for v in m]
    fm, ym = mean(f), mean(y)
    return sum((a - fm) * (b - ym) for a, b in zip(f, y)) / sum((a - fm) ** 2 for a in f)


def spectral_variation(x, fs):
    _, m = spectrum(x, fs)
    a, b = m[:-1], m[1:]
    return 1 - sum(u * v for u, v in zip(a, b)) / math.sqrt(sum(u * u for u in a) * sum(v * v for v in b))


# wavelet -------------------------------------------------------------------

def _cwt_row(x, w):
    n = len(x)
    L = min(10 * w, n)
    amp = 2 / (math.sqrt(3 * w) * math.pi ** 0.25)
    psi = []
    for i in range(L):
        t = (i - (L - 1) / 2) / w
        psi.append(amp * (1 - t * t) * math.exp(-t * t / 2))
    # 'same' convolution: full output index k runs 0..n+L-2, centre slice starts at (L-1)//2
    start = (L - 1) // 2
    out = []
    for j in range(n):
        k = j + start
        acc = 0.0
        for i in range(L):
            # full convolution with the reversed wavelet: sum_t x[t] * psi_rev[k - t]
            t = k - i
            if 0 <= t < n:
                acc += x[t] * psi[L - 1 - i]
        out.append(acc)
    return out


def _cwt(x):
    return [_cwt_row(x, w) for w in range(1, 10)]


def wavelet_abs_mean(x, fs):
    return [abs(mean(r)) for r in _cwt(x)]


def wavelet_energy(x, fs):
    return [mean([v * v for v in r]) for r in _cwt(x)]


def wavelet_std(x, fs):
    return [pstd(r) for r in _cwt(x)]


def wavelet_var(x, fs):
    return [pstd(r) ** 2 for r in _cwt(x)]


def wavelet_entropy(x, fs):
    e = [sum(v * v for v in r) for r in _cwt(x)]
    tot = sum(e)
    return -sum(v / tot * math.log(v / tot) for v in e if v > 0)


# statistical ---------------------------------------------------------------

def ecdf(x, fs):
    s = sorted(x)
    return [sum(1 for v in x if v <= s[i]) / len(x) for i in range(10)]


def _ecdf_pct(x):
    s = sorted(x)
    n = len(s)
    out = []
    for p in (0.2, 0.8):
        best = s[0]
        for i in range(n):
            if (i + 1) / n <= p:
                best = s[i]
        out.append(best)
    return out


def ecdf_percentile(x, fs):
    return _ecdf_pct(x)


def ecdf_percentile_count(x, fs):
    return [float(sum(1 for v in x if v <= q)) for q in _ecdf_pct(x)]


def histogram(x, fs):
    lo, hi = min(x), max(x)
    counts = [0.0] * 10
    for v in x:
        k = 0 if hi == lo else min(int((v - lo) / (hi - lo) * 10), 9)
        counts[k] += 1
    return counts


def _m(x, p):
    m = mean(x)
    return sum((v - m) ** p for v in x) / len(x)


STAT_SCALARS = {
    "Interquartile range": lambda x: percentile(x, 75) - percentile(x, 25),
    "Kurtosis": lambda x: _m(x, 4) / _m(x, 2) ** 2 - 3,
    "Max": max,
    "Mean": mean,
    "Mean absolute deviation": lambda x: mean([abs(v - mean(x)) for v in x]),
    "Median": median,
    "Median absolute deviation": lambda x: median([abs(v - median(x)) for v in x]),
    "Min": min,
    "Root mean square": lambda x: math.sqrt(mean([v * v for v in x])),
    "Skewness": lambda x: _m(x, 3) / _m(x, 2) ** 1.5,
    "Standard deviation": pstd,
    "Variance": lambda x: pstd(x) ** 2,
}


# temporal ------------------------------------------------------------------

def _diff(x):
    return [x[i + 1] - x[i] for i in range(len(x) - 1)]


def _pearson(a, b):
    ma, mb = mean(a), mean(b)
    num = sum((u - ma) * (v - mb) for u, v in zip(a, b))
    return num / math.sqrt(sum((u - ma) ** 2 for u in a) * sum((v - mb) ** 2 for v in b))


def _entropy(x):
    counts = {}
    for v in x:
        counts[v] = counts.get(v, 0) + 1
    n = len(x)
    return -sum(c / n * math.log2(c / n) for c in counts.values()) / math.log2(n)


def _nbhd(x, r=10):
    n = len(x)
    return float(sum(1 for i in range(r, n - r)
                     if all(x[i] > x[j] for j in range(i - r, i + r + 1) if j != i)))


def _slope(x, fs):
    t = [i / fs for i in range(len(x))]
    tm, xm = mean(t), mean(x)
    return sum((a - tm) * (b - xm) for a, b in zip(t, x)) / sum((a - tm) ** 2 for a in t)


def _sign(v):
    return (v > 0) - (v < 0)


TEMPORAL_SCALARS = {
    "Absolute energy": lambda x, fs: sum(v * v for v in x),
    "Area under the curve": lambda x, fs: sum(0.5 / fs * abs(x[i] + x[i + 1]) for i in range(len(x) - 1)),
    "Autocorrelation": lambda x, fs: _pearson(x[:-1], x[1:]),
    "Centroid": lambda x, fs: sum(i / fs * v * v for i, v in enumerate(x)) / sum(v * v for v in x),
    "Entropy": lambda x, fs: _entropy(x),
    "Mean absolute diff": lambda x, fs: mean([abs(d) for d in _diff(x)]),
    "Mean diff": lambda x, fs: mean(_diff(x)),
    "Median absolute diff": lambda x, fs: median([abs(d) for d in _diff(x)]),
    "Median diff": lambda x, fs: median(_diff(x)),
    "Negative turning points": lambda x, fs: float(sum(1 for i in range(1, len(x) - 1) if x[i - 1] > x[i] < x[i + 1])),
    "Neighbourhood peaks": lambda x, fs: _nbhd(x),
    "Peak to peak distance": lambda x, fs: max(x) - min(x),
    "Positive turning points": lambda x, fs: float(sum(1 for i in range(1, len(x) - 1) if x[i - 1] < x[i] > x[i + 1])),
    "Signal distance": lambda x, fs: sum(math.sqrt(1 + d * d) for d in _diff(x)),
    "Slope": _slope,
    "Sum absolute diff": lambda x, fs: sum(abs(d) for d in _diff(x)),
    "Total energy": lambda x, fs: sum(v * v for v in x) / ((len(x) - 1) / fs),
    "Zero crossing rate": lambda x, fs: sum(1 for i in range(len(x) - 1) if _sign(x[i]) != _sign(x[i + 1])) / (len(x) - 1),
}


VECTOR_GROUPS = {
    "FFT mean coefficient": fft_mean_coeff,
    "LPCC": lpcc,
    "MFCC": mfcc,
    "Wavelet absolute mean": wavelet_abs_mean,
    "Wavelet energy": wavelet_energy,
    "Wavelet standard deviation": wavelet_std,
    "Wavelet variance": wavelet_var,
    "ECDF": ecdf,
    "ECDF Percentile": ecdf_percentile,
    "ECDF Percentile Count": ecdf_percentile_count,
    "Histogram": histogram,
}

SCALAR_GROUPS = {
    "Fundamental frequency": fundamental_frequency,
    "Human range energy": human_range_energy,
    "Maximum power spectrum": max_power_spectrum,
    "Maximum frequency": max_frequency,
    "Median frequency": median_frequency,
    "Power bandwidth": power_bandwidth,
    "Spectral centroid": spectral_centroid,
    "Spectral decrease": spectral_decrease,
    "Spectral distance": spectral_distance,
    "Spectral entropy": spectral_entropy,
    "Spectral kurtosis": spectral_kurtosis,
    "Spectral positive turning points": spectral_positive_turning,
    "Spectral roll-off": spectral_roll_off,
    "Spectral roll-on": spectral_roll_on,
    "Spectral skewness": spectral_skewness,
    "Spectral slope": spectral_slope,
    "Spectral spread": spectral_spread,
    "Spectral variation": spectral_variation,
    "Wavelet entropy": wavelet_entropy,
}
SCALAR_GROUPS.update({k: (lambda f: lambda x, fs: f(x))(f) for k, f in STAT_SCALARS.items()})
SCALAR_GROUPS.update(TEMPORAL_SCALARS)


def reference_features(x, fs=1.0):
    """Dict of feature name -> reference value for every catalog feature."""
    x = [float(v) for v in x]
    out = {}
    for g, fn in VECTOR_GROUPS.items():
        for k, v in enumerate(fn(x, fs)):
            out[f"{g}_{k}"] = v
    for g, fn in SCALAR_GROUPS.items():
        out[g] = fn(x, fs)
    return out
