#!/usr/bin/env python3
"""Independent reference evaluations used to freeze expected values in the
C++ test suite. Everything here is computed with scipy/numpy only, without
any code from the library under test."""

import numpy as np
from scipy.special import wofz, eval_genlaguerre, gammaln
from scipy.linalg import eigh_tridiagonal

# --- physical constants (CODATA 2018) ------------------------------------
E_CHARGE = 1.602176634e-19        # C
AMU = 1.66053906660e-27           # kg
M_CA40_ION_U = 39.96204228        # 40Ca atomic mass minus one electron mass
HBAR = 1.054571817e-34            # J s
KB = 1.380649e-23                 # J/K

TWO_PI = 2.0 * np.pi


def secular_frequencies(gamma_rf, gamma_dc, omega_rf, eps, mass, pol, charge=E_CHARGE):
    """Scalar evaluation of the state-dependent secular frequencies."""
    rad_x = (2 * charge**2 * gamma_rf**2 / (mass**2 * omega_rf**2)
             - 2 * charge * gamma_dc * (1 + eps) / mass
             - 2 * pol * (gamma_rf**2 + gamma_dc**2 * (1 + eps) ** 2) / mass)
    rad_y = (2 * charge**2 * gamma_rf**2 / (mass**2 * omega_rf**2)
             - 2 * charge * gamma_dc * (1 - eps) / mass
             - 2 * pol * (gamma_rf**2 + gamma_dc**2 * (1 - eps) ** 2) / mass)
    rad_z = 4 * charge * gamma_dc / mass - 16 * pol * gamma_dc**2 / mass
    if min(rad_x, rad_y, rad_z) <= 0:
        raise ValueError("unconfined")
    return np.sqrt([rad_x, rad_y, rad_z])


def calibrate(wx, wy, wz, omega_rf, mass, charge=E_CHARGE):
    gamma_dc = mass * wz**2 / (4 * charge)
    eps = -(wx**2 - wy**2) / wz**2
    a = 0.5 * (wx**2 + wy**2 + wz**2)          # 2 e^2 g_rf^2 / (M^2 W^2)
    gamma_rf = np.sqrt(a / 2) * mass * omega_rf / charge
    return gamma_rf, gamma_dc, eps


def main():
    mass = M_CA40_ION_U * AMU
    wx, wy, wz = TWO_PI * np.array([2.16e6, 1.8e6, 1.05e6])
    omega_rf = TWO_PI * 14.11e6

    g_rf, g_dc, eps = calibrate(wx, wy, wz, omega_rf, mass)
    print("== trap calibration ==")
    print(f"mass_kg       = {mass:.12e}")
    print(f"gamma_rf      = {g_rf:.12e} V/m^2")
    print(f"gamma_dc      = {g_dc:.12e} V/m^2")
    print(f"epsilon       = {eps:.12f}")
    w0 = secular_frequencies(g_rf, g_dc, omega_rf, eps, mass, 0.0)
    print(f"roundtrip MHz = {w0 / TWO_PI / 1e6}")

    for pol_e30 in (1.24, 2.18, 3.68, 7.36):
        pol = pol_e30 * 1e-30
        wp = secular_frequencies(g_rf, g_dc, omega_rf, eps, mass, pol)
        d = wp - w0
        print(f"P={pol_e30:5.2f}e-30: w'/2pi MHz = {wp / TWO_PI / 1e6}")
        print(f"             dw/2pi kHz  = {d / TWO_PI / 1e3}")

    # unconfinement threshold (y mode goes soft first)
    pc_y = wy**2 * mass / (2 * (g_rf**2 + g_dc**2 * (1 - eps) ** 2))
    pc_x = wx**2 * mass / (2 * (g_rf**2 + g_dc**2 * (1 + eps) ** 2))
    pc_z = wz**2 * mass / (16 * g_dc**2)
    print(f"P_crit (x,y,z) e-30 = {pc_x * 1e30:.4f} {pc_y * 1e30:.4f} {pc_z * 1e30:.4f}")

    # Lamb-Dicke parameter, 729 nm at 45 deg onto the y mode
    k729 = TWO_PI / 729e-9
    eta_y = k729 * np.cos(np.pi / 4) * np.sqrt(HBAR / (2 * mass * wy))
    print(f"eta_y(729nm,45deg) = {eta_y:.6f}")

    # two-photon Doppler sigma for counter-propagating 213/287 beams, axial 0.5 mK
    k_eff = TWO_PI * (1 / 213e-9 - 1 / 287e-9)
    sigma_v = np.sqrt(KB * 0.5e-3 / mass)
    print(f"doppler sigma = {k_eff * sigma_v / TWO_PI / 1e6:.6f} MHz")

    # relative shift ladder check at P = 3.68e-30
    dwy = (secular_frequencies(g_rf, g_dc, omega_rf, eps, mass, 3.68e-30)[1] - w0[1])
    dwx = (secular_frequencies(g_rf, g_dc, omega_rf, eps, mass, 3.68e-30)[0] - w0[0])
    print("== relative shift ladder, P=3.68e-30 ==")
    print(f"per-phonon shift y = {dwy / TWO_PI / 1e6:.6f} MHz, x = {dwx / TWO_PI / 1e6:.6f} MHz")
    measured = np.array([-0.36, -1.06, -2.56])
    merr = np.array([0.20, 0.20, 0.30]) + 0.01
    for nref in (0.3, 0.4, 0.5):
        pred = np.array([(a * a - nref) * dwy / TWO_PI / 1e6 for a in (2.4, 3.8, 6.0)])
        sig_alpha = np.array([2 * a * s * abs(dwy) / TWO_PI / 1e6
                              for a, s in ((2.4, 0.2), (3.8, 0.3), (6.0, 0.5))])
        margin = merr + sig_alpha - np.abs(pred - measured)
        print(f"nref={nref}: pred={pred.round(4)}  tol={merr + sig_alpha}  margin={margin.round(4)}")

    # --- Voigt reference values (area-normalised density) -----------------
    print("== voigt references: V(x; sigma, gamma_fwhm) ==")
    def voigt(x, sigma, gamma_fwhm):
        if sigma == 0:
            hw = gamma_fwhm / 2
            return hw / np.pi / (x**2 + hw**2)
        z = (x + 1j * gamma_fwhm / 2) / (sigma * np.sqrt(2))
        return wofz(z).real / (sigma * np.sqrt(2 * np.pi))
    cases = [(0.0, 1.0, 1.0), (0.5, 1.0, 1.0), (2.0, 1.0, 1.0), (10.0, 1.0, 1.0),
             (0.0, 1.0, 0.0), (1.0, 1.0, 0.0), (0.0, 0.3, 2.0), (3.0, 0.3, 2.0),
             (0.7, 2.0, 0.1), (25.0, 0.5, 0.5), (0.0, 1e-3, 1.0), (100.0, 1.0, 3.0)]
    for x, s, g in cases:
        print(f"V({x:6.2f},{s:5.2f},{g:5.2f}) = {voigt(x, s, g):.15e}")

    # --- sideband coupling references -------------------------------------
    # displacement-operator matrix elements on a truncated oscillator basis
    print("== displacement matrix elements <n+s|exp(i eta (a+a^dag))|n| ==")
    dim = 450
    off = np.sqrt(np.arange(1, dim))           # a+a^dag off-diagonal
    lam, q = eigh_tridiagonal(np.zeros(dim), off)

    def elem(n, s, eta):
        ph = np.exp(1j * eta * lam)
        return np.vdot(q[n + s, :] * ph, q[n, :]).conjugate()  # sum_k q[m,k] e^{i eta l_k} q[n,k]

    def laguerre_coupling(n, s, eta):
        ns, nl = min(n, n + s), max(n, n + s)
        lg = eval_genlaguerre(ns, abs(s), eta * eta)
        amp = np.exp(-eta * eta / 2 + 0.5 * (gammaln(ns + 1) - gammaln(nl + 1)))
        return amp * eta ** abs(s) * lg

    grid_n = [0, 1, 2, 3, 5, 10, 20, 50, 100, 200, 300]
    worst = 0.0
    for eta in (0.05, 0.1, 0.2, 0.3):
        for n in grid_n:
            for s in (-2, -1, 0, 1, 2):
                if n + s < 0:
                    continue
                a = abs(elem(n, s, eta))
                b = abs(laguerre_coupling(n, s, eta))
                rel = abs(a - b) / max(a, b)
                worst = max(worst, rel)
                if a < 1e-4:
                    print(f"  small element n={n} s={s} eta={eta}: |elem|={a:.3e} rel={rel:.2e}")
    print(f"worst relative disagreement on grid = {worst:.3e}")
    for (n, s, eta) in [(50, 1, 0.1), (300, 2, 0.3), (300, 0, 0.3), (144, -1, 0.051)]:
        print(f"|<{n + s}|D|{n}>| eta={eta}: {abs(elem(n, s, eta)):.15e}")

    # Poisson / thermal reference sums
    print("== phonon distribution references ==")
    n = np.arange(0, 301)
    alpha = 2.4
    p = np.exp(2 * n * np.log(alpha) - gammaln(n + 1) - alpha**2)
    print(f"coherent(2.4): sum={p.sum():.15f} mean={np.sum(n * p):.12f}")
    nb = 6.0
    pt = np.exp(n * np.log(nb) - (n + 1) * np.log(nb + 1))
    print(f"thermal(6) N=300: sum={pt.sum():.15f} mean={np.sum(n * pt):.12f}")
    # truncation bound spot value: coherent(7), tail 1e-6
    a2 = 49.0
    p7 = np.exp(n * np.log(a2) - gammaln(n + 1) - a2)
    c = np.cumsum(p7)
    nmin = int(np.argmax(1 - c <= 1e-6))
    print(f"coherent(7) tail<=1e-6 at N={nmin}, tail(N)={1 - c[nmin]:.3e}, tail(N-1)={1 - c[nmin - 1]:.3e}")

    # kick calibration constant: |alpha| = kappa * Vk * T on resonance,
    # least squares through (10 mV, 2) and (40 mV, 11) at 100 cycles of 1.8 MHz
    T = 100 / 1.8e6
    a_, b_ = 0.010 * T, 0.040 * T
    kappa = (2 * a_ + 11 * b_) / (a_**2 + b_**2)
    print(f"kick kappa = {kappa:.6e} 1/(V s); alpha(10mV)={kappa * a_:.3f} alpha(40mV)={kappa * b_:.3f}")

    # Weideman rational-approximation coefficients for w(z), N = 36
    print("== weideman coefficients N=36 ==")
    N = 36
    M = 2 * N
    M2 = 2 * M
    k = np.arange(-M + 1, M)
    L = np.sqrt(N / np.sqrt(2.0))
    theta = k * np.pi / M
    t = L * np.tan(theta / 2)
    f = np.exp(-t**2) * (L**2 + t**2)
    f = np.concatenate([[0.0], f])
    acoef = np.real(np.fft.fft(np.fft.fftshift(f))) / M2
    acoef = acoef[1:N + 1][::-1]
    print("L =", repr(L))
    for i in range(0, N, 4):
        print(", ".join(f"{c:.18e}" for c in acoef[i:i + 4]) + ",")

    # verify the Weideman evaluation against scipy wofz
    def wofz_weideman(z):
        Z = (L + 1j * z) / (L - 1j * z)
        p = np.polyval(acoef, Z)
        return 2 * p / (L - 1j * z) ** 2 + (1 / np.sqrt(np.pi)) / (L - 1j * z)
    rng = np.random.default_rng(1)
    xs = 10 ** rng.uniform(-3, 3, 4000) * rng.choice([-1, 1], 4000)
    ys = 10 ** rng.uniform(-6, 3, 4000)
    zz = xs + 1j * ys
    w1 = wofz_weideman(zz)
    w2 = wofz(zz)
    rel = np.abs(w1.real - w2.real) / np.abs(w2.real)
    print(f"weideman max rel err (Re) = {rel.max():.3e} at z={zz[np.argmax(rel)]}" )


if __name__ == "__main__":
    main()
