import math

import pytest


def series_csv(label: str, config_hash: str = "cafe01", n: int = 64, omega: float = 2 * math.pi) -> str:
    lines = [
        "# schema=spinlace.timeseries.v1",
        f"# config_hash={config_hash}",
        "# mode=exact_trace",
        f"# label={label}",
        "t,re,im,abs",
    ]
    for k in range(n):
        t = 0.05 * k
        re = math.cos(omega * t) / 32
        im = -math.sin(omega * t) / 32
        lines.append(f"{t:.17g},{re:.17g},{im:.17g},{math.hypot(re, im):.17g}")
    return "\n".join(lines) + "\n"


def spectrum_csv(label: str, config_hash: str = "cafe01", n: int = 81) -> str:
    lines = [
        "# schema=spinlace.spectrum.v1",
        f"# config_hash={config_hash}",
        f"# label={label}",
        "# window_T=20",
        "omega,re,im,abs",
    ]
    for k in range(n):
        w = 0.157 * k
        mag = 0.03 / (1.0 + (w - 6.28) ** 2) + 0.001
        lines.append(f"{w:.17g},{mag:.17g},0,{mag:.17g}")
    return "\n".join(lines) + "\n"


@pytest.fixture
def run_dir(tmp_path):
    """A synthetic full-fig3 output directory with a consistent hash."""
    for name, text in [
        ("series_node_sigma_x.csv", series_csv("node sigma x")),
        ("series_symmetry.csv", series_csv("symmetry")),
        ("series_rung_total_x.csv", series_csv("rung total x")),
        ("spectrum_node_sigma_x.csv", spectrum_csv("node sigma x")),
        ("spectrum_rung_total_x.csv", spectrum_csv("rung total x")),
    ]:
        (tmp_path / name).write_text(text)
    return tmp_path
