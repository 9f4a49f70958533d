import json

import pytest

from hillmap import (
    IntegratorConfig,
    StabilityMapDocument,
    TraceConfig,
    build_metadata,
    cosine,
    damped_threshold,
    read_document,
    square,
    trace_damped_tongue,
    trace_tongue,
    verify_curves,
    write_curves_csv,
    write_document,
)
from hillmap.document import forcing_from_metadata


class TestDocumentRoundTrip:
    def test_curves_survive_json_exactly(self, tmp_path):
        up, lo = trace_tongue(1, cosine(), TraceConfig(epsilon_max=0.4))
        meta = build_metadata(cosine(), 0.0, IntegratorConfig(), TraceConfig(),
                              elapsed_seconds=0.1, command="trace")
        doc = StabilityMapDocument(meta, [up, lo])
        path = tmp_path / "doc.json"
        write_document(doc, path)
        loaded = read_document(path)
        assert len(loaded.curves) == 2
        for orig, back in zip(doc.curves, loaded.curves):
            assert back.tongue_index == orig.tongue_index
            assert back.branch == orig.branch
            assert back.sign == orig.sign
            for p, q in zip(orig.points, back.points):
                assert q.epsilon == p.epsilon  # shortest round-trip decimals
                assert q.a == p.a
                assert q.trace_value == p.trace_value

    def test_forcing_metadata_round_trip(self):
        meta = build_metadata(square(0.3), 0.0, IntegratorConfig())
        spec = forcing_from_metadata(meta)
        assert spec.kind == "square" and spec.duty == 0.3

    def test_metadata_records_provenance(self):
        meta = build_metadata(cosine(), 0.05, IntegratorConfig(), TraceConfig())
        assert meta["tool"] == "hillmap"
        assert meta["scheme"] == "symplectic-euler"
        assert meta["steps_per_period"] == 4096
        assert meta["rk_pair"].startswith("dormand-prince")
        assert meta["target"] == pytest.approx(damped_threshold(0.05))
        assert meta["trace"]["d_epsilon"] == 0.05

    def test_format_guard(self, tmp_path):
        path = tmp_path / "bogus.json"
        path.write_text(json.dumps({"format": "something else"}))
        with pytest.raises(ValueError, match="stability-map"):
            read_document(path)


class TestVerification:
    def test_damped_curves_verify_against_their_target(self, tmp_path):
        kappa = 0.05
        up, lo = trace_damped_tongue(1, kappa, cosine(), TraceConfig(epsilon_max=0.6))
        worst = verify_curves([up, lo], cosine(), kappa, IntegratorConfig())
        assert worst <= 1e-6
        write_curves_csv([up, lo], tmp_path / "c.csv")
        header = (tmp_path / "c.csv").read_text().splitlines()[0]
        assert header == "tongue,branch,eps,a,trace,residual"
