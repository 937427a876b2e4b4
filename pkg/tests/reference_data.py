"""Published optimal-protocol costs at eps0 = 0.01, keyed by target exponent."""

# target exponent -> (achieved -log10 eps, C_ML)
C_ML = {
    4: (4.46, 17.44), 5: (5.14, 27.93), 6: (6.83, 56.07), 7: (7.11, 57.38), 8: (8.06, 67.52),
    9: (9.08, 100.3), 10: (11.1, 110.7), 11: (11.1, 110.7), 12: (12.1, 113.7), 13: (13.0, 120.4),
    14: (14.1, 126.9), 15: (15.0, 158.5), 16: (16.3, 187.9), 17: (17.0, 195.5), 18: (18.0, 239.8),
    19: (19.5, 272.1), 20: (20.0, 273.3), 21: (21.6, 275.1), 22: (22.0, 278.0), 23: (23.3, 281.9),
    24: (24.2, 287.9), 25: (25.1, 295.7), 26: (26.1, 311.5), 27: (27.1, 333.3), 28: (28.1, 355.6),
    29: (29.3, 363.7), 30: (30.7, 369.3), 31: (31.0, 376.5), 32: (32.4, 411.5), 33: (33.0, 427.3),
    34: (35.2, 459.4), 35: (35.2, 459.4), 36: (36.1, 470.8), 37: (37.3, 471.0), 38: (39.4, 472.6),
    39: (39.4, 472.6),
}

# prior-protocol columns for exponents 4..10, with the families each column may use
PRIOR_COLUMNS = {
    "BH": (("BK", "MEK", "BH"), [17.44, 27.86, 56.07, 58.30, 89.26, 139.3, 179.4]),
    "MEK": (("BK", "MEK"), [17.44, 27.86, 83.99, 83.99, 139.3, 139.3, 261.7]),
    "BK": (("BK",), [17.44, 261.5, 261.5, 261.5, 261.5, 261.5, 261.5]),
}

# rows whose protocols are checked by direct evaluation: (expression, -log10 eps, tol, cost, rel tol)
EVALUATED_ROWS = {
    4: ("BK(eps0)", 4.46, 0.02, 17.44, 0.01),
    5: ("MEK(MEK(eps0))", 5.14, 0.02, 27.93, 0.02),
    6: ("BH[40](BK(eps0))", 6.83, 0.05, 56.07, 0.01),
    10: ("ML[2][24](BH[40](BK(eps0)),BK(eps0))", 11.1, 0.1, 110.7, 0.01),
}
