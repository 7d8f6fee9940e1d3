import mpmath as mp
import pytest

from selberg_levy import qexp

ACCEPTANCE_KEY = pytest.StashKey[list]()


def cusp_oracle(k: int, s: complex, n_terms: int | None = None, dps: int = 40) -> complex:
    """F_f(s) for the level-one eigenform of weight k from the unrotated Mellin split, in mpmath.

    Lambda(w) = sum a_n [ (2 pi n)^-w Gamma(w, 2 pi n) + i^k (2 pi n)^(w-k) Gamma(k-w, 2 pi n) ]
    with w = s + (k-1)/2. Cancellation grows like e^{pi |t| / 2}, which the
    working precision absorbs.
    """
    with mp.workdps(dps + int(abs(complex(s).imag) * 0.7)):
        w = mp.mpc(s) + mp.mpf(k - 1) / 2
        N = n_terms or int(40 + 3 * abs(mp.im(w)))
        a = qexp.cusp_form(k, N).a
        total = mp.mpc(0)
        for n in range(1, N + 1):
            x = 2 * mp.pi * n
            total += a[n - 1] * (x ** (-w) * mp.gammainc(w, x) + mp.mpc(1j) ** k * x ** (w - k) * mp.gammainc(k - w, x))
        return complex(total / ((2 * mp.pi) ** (-w) * mp.gamma(w)))


@pytest.fixture(scope="session")
def acceptance_log(request):
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])
    return lines


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
