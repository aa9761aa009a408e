"""Built-in wavelet filter coefficients.

All filters are stored ready for the package's fixed indexing convention:
analysis (decomposition) is phase-0 periodic correlation,

    a[i] = sum_j dec[j] * x[(2*i + j) mod N],

synthesis (reconstruction) is periodic convolution of the zero-upsampled
subbands,

    x[n] = sum_j rec[j] * up(a)[(n - j) mod N] + ... .

Orthogonal banks (haar, db2, db3, db4) use the alternating-flip high-pass
g[j] = (-1)^j * lo[L-1-j] and identical dec/rec filters.  The biorthogonal
Cohen banks (ch2.2 = CDF 5/3, ch4.4 = CDF 9/7) store their dec/rec pairs
zero-padded to even length, aligned so that perfect reconstruction is exact
(no circular shift) under the convention above.

Low-pass sums are sqrt(2) and high-pass sums are 0 to ~1e-15; the db and
Cohen coefficients were refined from the published tables to satisfy
orthogonality/biorthogonality and vanishing-moment conditions at float64
machine precision.
"""

# name -> (dec_lo, dec_hi, rec_lo, rec_hi, orthogonal)
BUILTIN_WAVELETS = {
    "haar": (
        (0.7071067811865476, 0.7071067811865476),
        (0.7071067811865476, -0.7071067811865476),
        None,
        None,
        True,
    ),
    "db2": (
        (0.4829629131445341, 0.8365163037378077,
         0.2241438680420134, -0.12940952255126034),
        None,
        None,
        None,
        True,
    ),
    "db3": (
        (0.33267055295008263, 0.8068915093110927, 0.4598775021184915,
         -0.1350110200102546, -0.08544127388202666, 0.035226291885709554),
        None,
        None,
        None,
        True,
    ),
    "db4": (
        (0.2303778133088966, 0.7148465705529158, 0.6308807679298588,
         -0.027983769416859948, -0.18703481171909303, 0.030841381835560778,
         0.03288301166688518, -0.01059740178506903),
        None,
        None,
        None,
        True,
    ),
    "ch2.2": (
        (-0.17677669529663687, 0.3535533905932738, 1.0606601717798214,
         0.3535533905932738, -0.17677669529663687, 0.0),
        (0.0, 0.0, 0.3535533905932738, -0.7071067811865476,
         0.3535533905932738, 0.0),
        (0.0, 0.3535533905932738, 0.7071067811865476,
         0.3535533905932738, 0.0, 0.0),
        (0.0, 0.17677669529663687, 0.3535533905932738, -1.0606601717798214,
         0.3535533905932738, 0.17677669529663687),
        False,
    ),
    "ch4.4": (
        (0.03782845550699546, -0.02384946501938, -0.11062440441842342,
         0.37740285561265374, 0.8526986790094033, 0.37740285561265374,
         -0.11062440441842342, -0.02384946501938, 0.03782845550699546, 0.0),
        (0.0, 0.0, -0.06453888262893843, 0.04068941760955844,
         0.4180922732222122, -0.7884856164056644, 0.4180922732222122,
         0.04068941760955844, -0.06453888262893843, 0.0),
        (0.0, -0.06453888262893843, -0.04068941760955844, 0.4180922732222122,
         0.7884856164056644, 0.4180922732222122, -0.04068941760955844,
         -0.06453888262893843, 0.0, 0.0),
        (0.0, -0.03782845550699546, -0.02384946501938, 0.11062440441842342,
         0.37740285561265374, -0.8526986790094033, 0.37740285561265374,
         0.11062440441842342, -0.02384946501938, -0.03782845550699546),
        False,
    ),
}

WAVELET_NAMES = tuple(BUILTIN_WAVELETS)
