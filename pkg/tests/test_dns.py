import numpy as np
import pytest

from widthlab import dns
from widthlab.catalog import realize


def test_default_sequence_cycles_outer_cosets():
    seq = dns.default_sequence(["psl:2:7", "psl:3:4"], d=3)
    R = realize("psl:3:4")
    assert [len(f.autos) for f in seq] == [3, 3]
    assert all(not R.is_inner(a) and R.is_in_Q(a) for a in seq[1].autos)
    with pytest.raises(ValueError):
        dns.default_sequence(["psl:2:8"])


def test_twist_select_minimizes():
    seq = dns.default_sequence(["psl:2:7"])
    t = dns.twist_select(seq)[0]
    assert t.disp == [28]
    R = realize("psl:2:7")
    with pytest.raises(ValueError):
        dns.twist_select([dns.Factor("psl:2:7", [R.identity()])])


def test_image_group_and_class_bound():
    t = dns.twist_select(dns.default_sequence(["psl:2:5"]))[0]
    img = dns.image_group(t.R, t.b)
    assert img.A.order == 120  # PGL(2,5)
    c = dns.xn_image_count(t.R, t.b, 1, img)
    assert c.class_bounds_ok
    assert c.count == 10 and c.s_count == 0  # ten outer involutions


@pytest.mark.parametrize("spec", ["psl:2:5", "psl:2:7"])
def test_xn_routes_agree(spec):
    t = dns.twist_select(dns.default_sequence([spec]))[0]
    img = dns.image_group(t.R, t.b)
    chain = dns.xn_images(img, 3)
    for n in (1, 2, 3):
        assert np.array_equal(chain[n - 1].mask, dns.xn_recheck(img, n))
    # |X_n Y| >= |X_n|
    sizes = [len(P) for P in chain]
    assert sizes == sorted(sizes)


def test_escape_certificate_passes():
    cert = dns.escape_certificate(dns.default_sequence(["psl:2:5", "psl:2:7", "psl:2:13"]), 1, [1, 2])
    assert cert.passed
    assert [w.factor for w in cert.levels] == [0, 2]
    for w in cert.levels:
        assert w.recheck_outside and w.xn_in_S < w.s_order
    js = cert.to_json()
    assert js["pass"] and len(js["levels"]) == 2


def test_escape_certificate_no_escape():
    with pytest.raises(dns.NoEscape) as e:
        dns.escape_certificate(dns.default_sequence(["psl:2:5", "psl:2:7", "psl:2:11"]), 1, [1, 2])
    counts = e.value.counts[2]
    assert [c["xn_in_S"] for c in counts] == [168, 660]


def test_escape_certificate_arity():
    with pytest.raises(ValueError):
        dns.escape_certificate(dns.default_sequence(["psl:2:5"], d=2), 1, [1])
