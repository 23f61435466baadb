import cmath
import json
import math

import pyg2harmonic as g


def close(a, b, tol=1e-10):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    rs = g.RootSystem("g2", 1.0)
    assert rs.rank == 2
    assert rs.weyl_order == 12
    assert len(rs.positive_roots) == 6
    assert json.loads(rs.to_json())["kind"] == "g2"

    assert close(g.gamma(0.5), math.sqrt(math.pi))
    assert g.gamma(-2) is None

    c = g.CFunction(rs, "triv")
    assert close(c.eval([1, 1]), 1.0)
    lam = [0.3 + 1.1j, -0.2 + 0.7j]
    assert close(c.eval(lam), g.gk_product(rs, lam, "triv"))
    assert close(c.eval(lam), g.closed_form_c(lam, "triv"))
    assert c.density([0.4, 0.9]) > 0.0

    p1 = g.residue_density_p(1j)
    assert cmath.isclose(p1, p1.conjugate(), abs_tol=1e-14)
    assert g.line_weight(rs, 1.0) > 0.0
    assert g.p_constant() == "1 * 2^(-17) * pi^(1)"
    assert g.region_of(rs, [-1.0, -0.1]) == "I"

    a1 = g.RootSystem("a1")
    v = g.upsilon_phi(a1, [0.3j], [1.0])
    assert math.isfinite(v.real)

    cert = json.loads(g.no_discrete_series_check(20))
    assert cert["infeasible"]
    report = json.loads(g.verify(["gamma-identities", "c0"]))
    assert report["passed"], report
    print("smoke test ok")


if __name__ == "__main__":
    main()
