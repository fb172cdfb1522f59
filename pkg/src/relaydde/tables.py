"""Published parameter tables, transcribed as printed.

Each row is (a1, a2, p1, p2, |slope|, intercept, mu, T) with the columns in
their printed order. For the double-period table the T column holds the
orbit period 2 (p1 + p2).

Two single-period rows only reproduce their printed |m| and b with mu = 0.5
rather than the printed 0.1; ``TABLE1_MU_ERRATA`` maps the 1-based row
number to the decay rate that reproduces the printed values.
"""

TABLE1 = (
    (2, 0.1, 3, 1, 0.72, 1.76, 0.1, 4),
    (2, 0.5, 3, 2.5, 0.31, 0.43, 0.1, 5.5),
    (3, 1, 3, 1, 0.21, 1.69, 0.1, 4),
    (3, 0.1, 3, 7, 0.41, 1.03, 0.1, 10),
    (1, 0.5, 3, 0.5, 0.26, 0.3, 0.1, 3.5),
    (4, 1, 3, 2.5, 0.31, 0.87, 0.1, 5.5),
    (6, 0.5, 3, 5, 0.44, 1.74, 0.1, 8),
    (6, 2, 3, 1, 0.21, 3.38, 0.1, 4),
    (1, 0.17, 3, 0.5, 0.18, 0.61, 0.5, 3.5),
    (1, 0.25, 3, 1, 0.06, 0.3, 0.5, 4),
    (2, 0.1, 3, 0.5, 0.33, 1.43, 0.5, 3.5),
    (2, 0.1, 3, 2.5, 0.12, 0.4, 0.5, 5.5),
    (2, 0.1, 3, 3, 0.1, 0.27, 0.1, 6),
    (2, 0.5, 3, 1, 0.06, 0.6, 0.5, 4),
    (3, 1, 2, 1, 0.05, 0.73, 0.5, 3),
    (2, 1, 2, 1, 0.38, 0.13, 1, 3),
    (3, 0.25, 2, 1, 0.12, 0.40, 1, 3),
    (4, 0.1, 2, 2.5, 0.04, 0.05, 1, 4.5),
    (4, 0.25, 2, 1, 0.15, 0.55, 1, 3),
    (4, 3, 2, 1, 0.69, 0.09, 1, 3),
    (6, 0.1, 2, 1, 0.2, 0.87, 1, 3),
    (6, 0.1, 2, 3, 0.03, 0.03, 1, 5),
)

TABLE1_MU_ERRATA = {5: 0.5, 13: 0.5}

TABLE2 = (
    (1, 0.17, 1, 4, 0.38, -0.09, 0.1, 10),
    (2, 0.5, 1, 2.5, 0.32, -0.38, 0.1, 7),
    (2, 0.25, 1, 5, 0.40, -0.17, 0.1, 12),
    (4, 2, 0.5, 1, 0.09, -1.72, 0.1, 3),
    (4, 0.1, 1, 7, 0.43, -1.39, 0.1, 16),
    (6, 0.25, 0.5, 5, 0.52, -0.95, 0.1, 11),
    (2, 0.5, 0.5, 1, 0.08, -0.49, 0.5, 3),
    (2, 0.25, 1, 2.5, 0.10, -0.09, 0.5, 7),
    (2, 0.17, 1, 3, 0.1, -0.09, 0.5, 8),
    (3, 0.25, 0.5, 2.5, 0.16, -0.11, 0.5, 6),
    (4, 0.1, 1, 5, 0.05, -0.08, 0.5, 12),
    (4, 1, 0.5, 1, 0.08, -0.98, 0.5, 3),
    (2, 0.5, 0.5, 1, 0.08, -0.21, 1, 3),
    (2, 0.1, 1, 2.5, 0.02, -0.01, 1, 7),
    (3, 0.17, 0.5, 1, 0.16, -0.41, 1, 3),
    (4, 1, 0.5, 1, 0.08, -0.42, 1, 3),
    (4, 0.1, 1, 3, 0.02, -0.03, 1, 8),
    (6, 1, 0.5, 1, 0.02, -0.71, 1, 3),
)
