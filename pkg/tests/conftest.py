import mpmath as mp
import pytest

LOG10 = float(mp.log(10))


def log_n_of(exponent: float) -> float:
    """log(10**exponent)."""
    return exponent * LOG10


def _mp_upper_tail(x, lam):
    # S(x) = 2 phi(x) Phi(lam x) int_0^inf exp(-(x s + s^2/2)) Phi(lam (x + s))/Phi(lam x) ds.
    # mp.quad stops on an absolute error test, so the integrand must be O(1):
    # both tiny factors are pulled out. Breakpoints follow the decay length
    # 1/(k x + 1) of the integrand.
    k = 1 + lam**2 if lam < 0 else mp.mpf(1)
    sigma = 1 / (k * x + 1)
    base = mp.ncdf(lam * x)

    def integral(scales):
        pts = [0] + [sigma * v for v in scales] + [mp.inf]
        return mp.quad(lambda s: mp.exp(-(x * s + s * s / 2)) * mp.ncdf(lam * (x + s)) / base, pts)

    value = integral((0.5, 1, 2, 4, 8, 16, 32, 64))
    check = integral((0.3, 1.5, 3, 6, 12, 24, 48))
    assert abs(value - check) <= abs(value) * mp.mpf(10) ** (-(mp.mp.dps // 2)), "oracle unstable"
    return 2 * mp.npdf(x) * base * value


def mp_survival(x, lam, dps: int = 40):
    """Independent extended-precision survival of SN(lam); returns an mpf."""
    with mp.workdps(dps):
        x, lam = mp.mpf(x), mp.mpf(lam)
        if x >= 0:
            return +_mp_upper_tail(x, lam)
        return 1 - _mp_upper_tail(-x, -lam)


def mp_log_survival(x, lam, dps: int = 40) -> float:
    with mp.workdps(dps):
        return float(mp.log(mp_survival(x, lam, dps)))


@pytest.fixture
def oracle():
    return mp_log_survival


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
