import copy
import json

import pytest

from commvar.certify import (
    FORMAT_VERSION,
    NOT_FOUND,
    REDUCIBLE,
    Certificate,
    CertificateError,
    bounds_ledger,
    certify,
    certify_algebra,
    certify_component_dim,
    certify_gamma,
    formula_dims,
    verify_certificate,
)
from commvar.exactfield import QQ, FieldSpec

from conftest import BIG_P, SMALL_P


class TestFormulas:
    def test_4_6(self):
        d = formula_dims(4, 6)
        assert (d.dim_VP, d.dim_N_component, d.dim_uP) == (28, 27, 4)

    def test_2_2(self):
        assert formula_dims(2, 2).dim_N_component == 3

    def test_1_1(self):
        d = formula_dims(1, 1).to_json()
        assert d["dim_G_component"] == 1
        assert d["dim_N_component"] == d["dim_uP"] == d["dim_VP"] == 0

    @pytest.mark.parametrize("n,r", [(0, 1), (1, 0)])
    def test_rejects(self, n, r):
        with pytest.raises(ValueError):
            formula_dims(n, r)

    def test_component_threshold_crossing(self):
        # (r+1) floor(n^2/4) > n^2 - n + (r-1)(n-1) first at n = 4 for r >= 6 and n = 8 for r = 4
        assert formula_dims(4, 5).dim_VP <= formula_dims(4, 5).dim_N_component
        assert formula_dims(4, 6).dim_VP > formula_dims(4, 6).dim_N_component
        assert formula_dims(7, 4).dim_VP <= formula_dims(7, 4).dim_N_component
        assert formula_dims(8, 4).dim_VP > formula_dims(8, 4).dim_N_component

    def test_bounds(self):
        rows = {row["quantity"]: (row["lower"], row["upper"]) for row in bounds_ledger()}
        assert rows == {"n'_r": (4, 4), "n'_3": (4, 16), "n_r": (4, 4), "n_3": (11, 29)}


class TestCertify:
    def test_algebra_4_4(self):
        c = certify(4, 4, BIG_P, seed=7)
        assert (c.kind, c.quantity, c.threshold, c.verdict) == ("AlgebraDim", 4, 3, REDUCIBLE)

    @pytest.mark.parametrize("n,r,q", [(4, 6, 28), (8, 4, 80)])
    def test_component(self, n, r, q):
        c = certify(n, r, BIG_P, seed=0)
        assert c.kind == "ComponentDim" and c.quantity == q and c.verdict == REDUCIBLE

    def test_gamma_16_3(self):
        c = certify(16, 3, BIG_P, seed=7)
        assert (c.kind, c.quantity, c.threshold, c.verdict) == ("GammaDim", 272, 270, REDUCIBLE)
        assert verify_certificate(c)[0]

    @pytest.mark.parametrize("n,r", [(3, 3), (2, 5), (3, 2)])
    def test_small_n_not_found(self, n, r):
        c = certify(n, r, BIG_P)
        assert c.verdict == NOT_FOUND
        assert verify_certificate(c) == (True, verify_certificate(c)[1])

    @pytest.mark.parametrize("s,quantity,threshold", [(1, 17, 18), (2, 68, 70)])
    def test_gamma_small_s(self, s, quantity, threshold):
        c = certify_gamma(s, SMALL_P, 0)
        assert (c.quantity, c.threshold, c.verdict) == (quantity, threshold, NOT_FOUND)

    def test_over_rationals(self):
        c = certify(4, 4, QQ, seed=1)
        assert c.verdict == REDUCIBLE and verify_certificate(c)[0]
        c = certify_component_dim(4, 6, QQ, 0, exact=True)
        assert c.witness["rank_witness"]["rank_field"] == QQ.to_json()
        assert verify_certificate(c)[0]

    def test_algebra_search_below_n(self):
        # tuples reach n - 1 but the search never claims more when r < n
        c = certify_algebra(6, 3, SMALL_P, 0, budget=8)
        assert c.quantity == 5 and c.verdict == NOT_FOUND
        assert verify_certificate(c)[0]

    def test_never_irreducible(self):
        for n, r in [(2, 2), (3, 4), (5, 4)]:
            assert certify(n, r, SMALL_P).verdict in (REDUCIBLE, NOT_FOUND)

    def test_deterministic(self):
        a = json.dumps(certify(5, 3, SMALL_P, seed=3).to_json())
        b = json.dumps(certify(5, 3, SMALL_P, seed=3).to_json())
        assert a == b


@pytest.fixture(scope="module")
def cert():
    return certify(4, 4, BIG_P, seed=7).to_json()


class TestVerify:
    def test_json_round_trip(self, cert):
        assert cert["format_version"] == FORMAT_VERSION
        c = Certificate.from_json(json.loads(json.dumps(cert)))
        assert c.to_json() == cert
        assert verify_certificate(cert)[0]

    def test_tampered_quantity(self, cert):
        bad = copy.deepcopy(cert)
        bad["quantity"] ^= 1
        ok, msg = verify_certificate(bad)
        assert not ok and "quantity" in msg

    def test_tampered_verdict(self, cert):
        bad = copy.deepcopy(cert)
        bad["verdict"] = NOT_FOUND
        assert not verify_certificate(bad)[0]

    def test_tampered_threshold(self, cert):
        bad = copy.deepcopy(cert)
        bad["threshold"] = 2
        assert not verify_certificate(bad)[0]

    def test_non_commuting_witness(self, cert):
        bad = copy.deepcopy(cert)
        mats = bad["witness"]["tuple"]["mats"]
        mats[0] = [[0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]
        assert not verify_certificate(bad)[0]

    def test_tampered_attempt(self):
        c = certify(3, 3, SMALL_P).to_json()
        c["attempts"][-1]["quantity"] += 1
        assert not verify_certificate(c)[0]

    def test_tampered_gamma_partner(self):
        c = certify_gamma(1, SMALL_P, 0).to_json()
        c["witness"]["parts"]["partner_dim"] += 1
        assert not verify_certificate(c)[0]

    @pytest.mark.parametrize("mutate", [
        lambda c: c.pop("witness"),
        lambda c: c.update(kind="Magic"),
        lambda c: c.update(verdict="IRREDUCIBLE"),
        lambda c: c.update(quantity="4"),
        lambda c: c["witness"].pop("tuple"),
    ])
    def test_malformed(self, cert, mutate):
        bad = copy.deepcopy(cert)
        mutate(bad)
        with pytest.raises(CertificateError):
            verify_certificate(bad)

    def test_header_mismatch(self, cert):
        bad = copy.deepcopy(cert)
        bad["n"] = 5
        with pytest.raises(CertificateError):
            verify_certificate(bad)

    def test_field_mismatch(self, cert):
        bad = copy.deepcopy(cert)
        bad["field"] = FieldSpec.prime(101).to_json()
        with pytest.raises(CertificateError):
            verify_certificate(bad)
