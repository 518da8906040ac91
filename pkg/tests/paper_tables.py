"""Published mid-span deflection tables (mm) used as regression targets.

Keys are (alpha, beta); only printed cells appear (the beta = 0.5 column is
blank except at alpha = 0.5).
"""

TABLE1 = {
    "homog_high_eq19": 1.137,
    "homog_low_eq19": 2.231,
    "homog_high_present": 1.146,
    "homog_low_present": 2.251,
    "fg_crisp_present": 1.344,
    "fg_lower_present": 1.428,   # all alpha = beta = 0
    "fg_upper_present": 1.270,   # alpha = 0, beta = 1
}

# high-density layer uncertainty, low layer crisp
TABLE2 = {
    (0.0, 0.0): 1.412, (0.0, 0.25): 1.378, (0.0, 0.75): 1.313, (0.0, 1.0): 1.283,
    (0.1, 0.0): 1.405, (0.1, 0.25): 1.374, (0.1, 0.75): 1.316, (0.1, 1.0): 1.288,
    (0.2, 0.0): 1.398, (0.2, 0.25): 1.371, (0.2, 0.75): 1.319, (0.2, 1.0): 1.294,
    (0.3, 0.0): 1.391, (0.3, 0.25): 1.367, (0.3, 0.75): 1.322, (0.3, 1.0): 1.300,
    (0.4, 0.0): 1.384, (0.4, 0.25): 1.364, (0.4, 0.75): 1.325, (0.4, 1.0): 1.307,
    (0.5, 0.0): 1.378, (0.5, 0.25): 1.361, (0.5, 0.5): 1.344, (0.5, 0.75): 1.328, (0.5, 1.0): 1.313,
    (0.6, 0.0): 1.371, (0.6, 0.25): 1.357, (0.6, 0.75): 1.332, (0.6, 1.0): 1.319,
    (0.7, 0.0): 1.364, (0.7, 0.25): 1.354, (0.7, 0.75): 1.335, (0.7, 1.0): 1.325,
    (0.8, 0.0): 1.357, (0.8, 0.25): 1.351, (0.8, 0.75): 1.338, (0.8, 1.0): 1.332,
    (0.9, 0.0): 1.351, (0.9, 0.25): 1.348, (0.9, 0.75): 1.341, (0.9, 1.0): 1.338,
    (1.0, 0.0): 1.344, (1.0, 0.25): 1.344, (1.0, 0.75): 1.344, (1.0, 1.0): 1.344,
}

# low-density layer uncertainty, high layer crisp
TABLE3 = {
    (0.0, 0.0): 1.358, (0.0, 0.25): 1.351, (0.0, 0.75): 1.337, (0.0, 1.0): 1.331,
    (0.1, 0.0): 1.357, (0.1, 0.25): 1.351, (0.1, 0.75): 1.338, (0.1, 1.0): 1.332,
    (0.2, 0.0): 1.356, (0.2, 0.25): 1.350, (0.2, 0.75): 1.339, (0.2, 1.0): 1.333,
    (0.3, 0.0): 1.354, (0.3, 0.25): 1.349, (0.3, 0.75): 1.339, (0.3, 1.0): 1.335,
    (0.4, 0.0): 1.353, (0.4, 0.25): 1.349, (0.4, 0.75): 1.340, (0.4, 1.0): 1.336,
    (0.5, 0.0): 1.351, (0.5, 0.25): 1.348, (0.5, 0.5): 1.344, (0.5, 0.75): 1.341, (0.5, 1.0): 1.337,
    (0.6, 0.0): 1.350, (0.6, 0.25): 1.347, (0.6, 0.75): 1.342, (0.6, 1.0): 1.339,
    (0.7, 0.0): 1.349, (0.7, 0.25): 1.346, (0.7, 0.75): 1.342, (0.7, 1.0): 1.340,
    (0.8, 0.0): 1.347, (0.8, 0.25): 1.346, (0.8, 0.75): 1.343, (0.8, 1.0): 1.342,
    (0.9, 0.0): 1.346, (0.9, 0.25): 1.345, (0.9, 0.75): 1.344, (0.9, 1.0): 1.343,
    (1.0, 0.0): 1.344, (1.0, 0.25): 1.344, (1.0, 0.75): 1.344, (1.0, 1.0): 1.344,
}

# both layers uncertain together
TABLE4 = {
    (0.0, 0.0): 1.428, (0.0, 0.25): 1.385, (0.0, 0.75): 1.306, (0.0, 1.0): 1.270,
    (0.1, 0.0): 1.419, (0.1, 0.25): 1.381, (0.1, 0.75): 1.310, (0.1, 1.0): 1.277,
    (0.2, 0.0): 1.410, (0.2, 0.25): 1.377, (0.2, 0.75): 1.314, (0.2, 1.0): 1.284,
    (0.3, 0.0): 1.402, (0.3, 0.25): 1.372, (0.3, 0.75): 1.317, (0.3, 1.0): 1.291,
    (0.4, 0.0): 1.393, (0.4, 0.25): 1.368, (0.4, 0.75): 1.321, (0.4, 1.0): 1.299,
    (0.5, 0.0): 1.385, (0.5, 0.25): 1.364, (0.5, 0.5): 1.344, (0.5, 0.75): 1.325, (0.5, 1.0): 1.306,
    (0.6, 0.0): 1.377, (0.6, 0.25): 1.360, (0.6, 0.75): 1.329, (0.6, 1.0): 1.314,
    (0.7, 0.0): 1.368, (0.7, 0.25): 1.356, (0.7, 0.75): 1.333, (0.7, 1.0): 1.321,
    (0.8, 0.0): 1.360, (0.8, 0.25): 1.352, (0.8, 0.75): 1.337, (0.8, 1.0): 1.329,
    (0.9, 0.0): 1.352, (0.9, 0.25): 1.348, (0.9, 0.75): 1.340, (0.9, 1.0): 1.337,
    (1.0, 0.0): 1.344, (1.0, 0.25): 1.344, (1.0, 0.75): 1.344, (1.0, 1.0): 1.344,
}


def table_cells():
    """(mode, alpha, beta, reference) over every printed cell."""
    for tab, mode in ((TABLE2, "high"), (TABLE3, "low"), (TABLE4, "both")):
        for (a, b), ref in tab.items():
            yield mode, a, b, ref


def deflection_for(scn, mode, a, b):
    import foamlab as fl

    if mode == "high":
        return fl.ritz_deflection(scn, a, b, 1.0, 1.0)
    if mode == "low":
        return fl.ritz_deflection(scn, 1.0, 1.0, a, b)
    return fl.ritz_deflection(scn, a, b, a, b)
