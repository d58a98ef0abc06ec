"""Independent high-precision reference computations used by several tests."""

import mpmath as mp


def amplification_mp(tab, Omega, xi=0.0, dps=60):
    """Amplification matrix of ``tab`` at ``Omega`` (dt = 1) in extended precision.

    Eliminates nothing: solves the full velocity/acceleration block system
    column by column with mpmath, independent of the package's scaled solve.
    """
    with mp.workdps(dps):
        n = tab.s + 1
        W = mp.mpf(Omega)
        xi = mp.mpf(xi)
        A = mp.matrix([[mp.mpf(float(tab.alpha[i, j])) for j in range(n)] for i in range(n)])
        B = mp.zeros(2 * n, 2 * n)
        for i in range(n):
            B[i, i] = 2 * xi * W
            B[i, n + i] = 1
            B[n + i, i] = 1
            for j in range(n):
                B[i, j] += W * W * A[i, j]
                B[n + i, n + j] = -A[i, j]
        cols = []
        for k in range(2):
            rhs = mp.zeros(2 * n, 1)
            for i in range(n):
                if k == 0:
                    rhs[i] = -W * W
                else:
                    rhs[n + i] = 1
            cols.append(mp.lu_solve(B, rhs))
        b = [mp.mpf(float(x)) for x in tab.b]
        D = mp.eye(2)
        for k in range(2):
            D[0, k] += sum(b[j] * cols[k][j] for j in range(n))
            D[1, k] += sum(b[j] * cols[k][n + j] for j in range(n))
        A1 = (D[0, 0] + D[1, 1]) / 2
        A2 = D[0, 0] * D[1, 1] - D[0, 1] * D[1, 0]
        return D, float(A1), float(A2)
