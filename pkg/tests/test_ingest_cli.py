import json
import socket
import threading
import time

import numpy as np
import pytest
import uvicorn

from conftest import bundle_from_frames, make_frame, make_schema
from mlfix import cli
from mlfix.agents import StubProvider
from mlfix.frame import TableFrame
from mlfix.ingest import IngestConfig, IngestError, build_bundle, ingest, read_csv, read_predictions
from mlfix.kb import default_index
from mlfix.model import (
    CheckStatus,
    ColumnKind,
    DatasetRef,
    decode_bundle,
    decode_diagnosis,
    encode_bundle,
    encode_schema,
)
from mlfix.server import ServerConfig, create_app


@pytest.fixture
def schema_file(tmp_path, clean_split):
    schema, _, _ = clean_split
    path = tmp_path / "schema.json"
    path.write_bytes(encode_schema(schema))
    return schema, path


def write_csv(path, header, rows):
    path.write_text("\n".join([",".join(header)] + [",".join(map(str, r)) for r in rows]) + "\n")


class TestReadCsv:
    def test_header_only_file(self, tmp_path, schema_file):
        schema, _ = schema_file
        path = tmp_path / "empty.csv"
        write_csv(path, ["f1", "f2", "color", "label"], [])
        frame = read_csv(path, schema)
        assert frame.row_count == 0

    def test_unparsable_numeric_cell_becomes_null_and_is_counted(self, tmp_path, schema_file):
        schema, _ = schema_file
        path = tmp_path / "bad.csv"
        write_csv(path, ["f1", "f2", "color", "label"], [["abc", "1.5", "red", "yes"]])
        frame = read_csv(path, schema)
        assert np.isnan(frame.numeric("f1")[0])
        assert frame.column_meta["f1"].parse_warnings == 1
        assert frame.column_meta["f2"].parse_warnings == 0

    def test_column_order_is_insensitive(self, tmp_path, schema_file):
        schema, _ = schema_file
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_csv(a, ["f1", "f2", "color", "label"], [["1", "2", "red", "yes"]])
        write_csv(b, ["label", "color", "f2", "f1"], [["yes", "red", "2", "1"]])
        fa, fb = read_csv(a, schema), read_csv(b, schema)
        assert fa.numeric("f1").tolist() == fb.numeric("f1").tolist()
        assert fa.strings("color") == fb.strings("color")

    def test_null_tokens_fold_case_and_whitespace(self, tmp_path, schema_file):
        schema, _ = schema_file
        path = tmp_path / "nulls.csv"
        rows = [["NULL", "1", "red", "yes"], [" n/a ", "2", "None", "no"], ["", "3", "blue", "yes"]]
        write_csv(path, ["f1", "f2", "color", "label"], rows)
        frame = read_csv(path, schema)
        assert np.isnan(frame.numeric("f1")).all()
        assert frame.strings("color")[1] is None
        assert frame.column_meta["f1"].null_token_counts == {"null": 1, "n/a": 1, "": 1}

    def test_missing_column_reported(self, tmp_path, schema_file):
        schema, _ = schema_file
        path = tmp_path / "missing.csv"
        write_csv(path, ["f1", "f2", "color"], [["1", "2", "red"]])
        with pytest.raises(IngestError, match="missing column.*label"):
            read_csv(path, schema)

    def test_undeclared_column_reported(self, tmp_path, schema_file):
        schema, _ = schema_file
        path = tmp_path / "extra.csv"
        write_csv(path, ["f1", "f2", "color", "label", "mystery"], [["1", "2", "red", "yes", "x"]])
        with pytest.raises(IngestError, match="not declared.*mystery"):
            read_csv(path, schema)

    def test_row_length_mismatch_reports_line_number(self, tmp_path, schema_file):
        schema, _ = schema_file
        path = tmp_path / "ragged.csv"
        path.write_text("f1,f2,color,label\n1,2,red,yes\n3,4,blue\n")
        with pytest.raises(IngestError, match="line 3"):
            read_csv(path, schema)

    def test_infinite_numeric_cell_becomes_null_warning(self, tmp_path, schema_file):
        schema, _ = schema_file
        path = tmp_path / "inf.csv"
        write_csv(path, ["f1", "f2", "color", "label"], [["inf", "1", "red", "yes"]])
        frame = read_csv(path, schema)
        assert np.isnan(frame.numeric("f1")[0])
        assert frame.column_meta["f1"].parse_warnings == 1


class TestPredictions:
    def test_classification_labels_normalized(self, tmp_path, schema_file):
        schema, _ = schema_file
        path = tmp_path / "preds.json"
        path.write_text(json.dumps({"dataset_ref": "test", "predicted_labels": ["yes", 1, 2.0]}))
        preds = read_predictions(path, DatasetRef.TEST, schema)
        assert preds.predicted_labels == ["yes", "1", "2"]

    def test_wrong_dataset_ref_rejected(self, tmp_path, schema_file):
        schema, _ = schema_file
        path = tmp_path / "preds.json"
        path.write_text(json.dumps({"dataset_ref": "train", "predicted_labels": []}))
        with pytest.raises(IngestError, match="dataset_ref"):
            read_predictions(path, DatasetRef.TEST, schema)

    def test_bad_probability_rows_rejected(self, tmp_path, schema_file):
        schema, _ = schema_file
        path = tmp_path / "preds.json"
        path.write_text(json.dumps({
            "predicted_labels": ["yes"],
            "probabilities": [[0.7, 0.7]],
            "class_order": ["yes", "no"],
        }))
        with pytest.raises(IngestError, match="sum to 1"):
            read_predictions(path, DatasetRef.TEST, schema)


@pytest.fixture
def dataset_files(tmp_path, schema_file):
    schema, schema_path = schema_file
    train, test = tmp_path / "train.csv", tmp_path / "test.csv"
    rows = [[f"{i / 7:.3f}", f"{(i * 3) % 11}", ["red", "green", "blue"][i % 3], ["yes", "no"][i % 2]]
            for i in range(30)]
    write_csv(train, ["f1", "f2", "color", "label"], rows)
    write_csv(test, ["f1", "f2", "color", "label"], rows[:10])
    return schema_path, train, test


class TestIngestCommand:
    def test_bundle_written_with_three_sections(self, tmp_path, dataset_files):
        schema_path, train, test = dataset_files
        out = tmp_path / "bundle.json"
        code = cli.main(["ingest", "--train", str(train), "--test", str(test),
                         "--schema", str(schema_path), "--out", str(out)])
        assert code == 0
        bundle = decode_bundle(out.read_bytes())
        assert len(bundle.integrity_results) == 12
        assert len(bundle.validation_results) == 8
        assert len(bundle.evaluation_results) == 8

    def test_without_predictions_evaluation_all_skipped(self, tmp_path, dataset_files):
        schema_path, train, test = dataset_files
        out = tmp_path / "bundle.json"
        cli.main(["ingest", "--train", str(train), "--test", str(test),
                  "--schema", str(schema_path), "--out", str(out)])
        bundle = decode_bundle(out.read_bytes())
        assert all(r.status is CheckStatus.SKIPPED for r in bundle.evaluation_results)

    def test_missing_train_file_exits_2_naming_path(self, tmp_path, dataset_files, capsys):
        schema_path, _, test = dataset_files
        out = tmp_path / "bundle.json"
        code = cli.main(["ingest", "--train", str(tmp_path / "nope.csv"), "--test", str(test),
                         "--schema", str(schema_path), "--out", str(out)])
        assert code == 2
        assert "nope.csv" in capsys.readouterr().err
        assert not out.exists()  # no partial bundle

    def test_created_at_pin_makes_bundles_reproducible(self, tmp_path, dataset_files, monkeypatch):
        schema_path, train, test = dataset_files
        monkeypatch.setenv("MLFIX_CREATED_AT", "2026-08-09T00:00:00Z")
        out1, out2 = tmp_path / "b1.json", tmp_path / "b2.json"
        cli.main(["ingest", "--train", str(train), "--test", str(test),
                  "--schema", str(schema_path), "--out", str(out1)])
        cli.main(["ingest", "--train", str(train), "--test", str(test),
                  "--schema", str(schema_path), "--out", str(out2)])
        assert out1.read_bytes() == out2.read_bytes()


class TestOfflineAnalyze:
    def test_offline_round_trip(self, tmp_path, dataset_files, monkeypatch):
        schema_path, train, test = dataset_files
        bundle_path, diagnosis_path = tmp_path / "bundle.json", tmp_path / "diagnosis.json"
        monkeypatch.delenv("MLFIX_LLM_ENDPOINT", raising=False)
        cli.main(["ingest", "--train", str(train), "--test", str(test),
                  "--schema", str(schema_path), "--out", str(bundle_path)])
        code = cli.main(["analyze", "--bundle", str(bundle_path), "--offline",
                         "--out", str(diagnosis_path)])
        assert code == 0
        diagnosis = decode_diagnosis(diagnosis_path.read_bytes())
        assert diagnosis.degraded is True

    def test_offline_reproducibility_byte_identical(self, tmp_path, dataset_files, monkeypatch):
        schema_path, train, test = dataset_files
        monkeypatch.delenv("MLFIX_LLM_ENDPOINT", raising=False)
        bundle_path = tmp_path / "bundle.json"
        cli.main(["ingest", "--train", str(train), "--test", str(test),
                  "--schema", str(schema_path), "--out", str(bundle_path)])
        outs = []
        for name in ("d1.json", "d2.json"):
            path = tmp_path / name
            cli.main(["analyze", "--bundle", str(bundle_path), "--offline", "--out", str(path)])
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]

    def test_malformed_bundle_exits_5(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"bundle_version": "9.9"}')
        out = tmp_path / "d.json"
        assert cli.main(["analyze", "--bundle", str(bad), "--offline", "--out", str(out)]) == 5


@pytest.fixture(scope="module")
def live_server():
    app = create_app(ServerConfig(), provider=StubProvider(), kb_index=default_index())
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started and time.time() < deadline:
        time.sleep(0.02)
    assert server.started
    yield f"http://127.0.0.1:{port}"
    server.should_exit = True
    thread.join(timeout=5)


class TestSubmit:
    def test_submit_writes_diagnosis(self, tmp_path, clean_split, live_server):
        _, train, test = clean_split
        bundle_path = tmp_path / "bundle.json"
        bundle_path.write_bytes(encode_bundle(bundle_from_frames(train, test)))
        out = tmp_path / "diagnosis.json"
        code = cli.main(["analyze", "--bundle", str(bundle_path), "--server", live_server,
                         "--out", str(out)])
        assert code == 0
        decode_diagnosis(out.read_bytes())

    def test_invalid_bundle_fails_local_validation_first(self, tmp_path, clean_split, live_server):
        _, train, test = clean_split
        document = json.loads(encode_bundle(bundle_from_frames(train, test)))
        document["modality"] = "vision"
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(document))
        code = cli.submit(str(bad), live_server, timeout=5, output_path=str(tmp_path / "d.json"))
        assert code == 5  # local decode rejects before any network call

    def test_server_non_200_exits_3_with_body(self, tmp_path, clean_split, live_server, capsys):
        _, train, test = clean_split
        bundle_path = tmp_path / "bundle.json"
        bundle_path.write_bytes(encode_bundle(bundle_from_frames(train, test)))
        # a wrong base path makes the server answer 404 to POST .../analyze
        code = cli.submit(str(bundle_path), live_server + "/metrics", timeout=5,
                          output_path=str(tmp_path / "d.json"))
        assert code == 3
        assert "404" in capsys.readouterr().err

    def test_unreachable_host_exits_4_quickly(self, tmp_path, clean_split, capsys):
        _, train, test = clean_split
        bundle_path = tmp_path / "bundle.json"
        bundle_path.write_bytes(encode_bundle(bundle_from_frames(train, test)))
        with socket.socket() as probe:
            probe.bind(("127.0.0.1", 0))
            dead_port = probe.getsockname()[1]
        started = time.time()
        code = cli.main(["analyze", "--bundle", str(bundle_path),
                         "--server", f"http://127.0.0.1:{dead_port}",
                         "--timeout", "2", "--out", str(tmp_path / "d.json")])
        assert code == 4
        assert time.time() - started < 3.0


class TestReportCommand:
    def test_report_renders_offline_diagnosis(self, tmp_path, dataset_files, monkeypatch, capsys):
        schema_path, train, test = dataset_files
        bundle_path, diagnosis_path = tmp_path / "b.json", tmp_path / "d.json"
        monkeypatch.delenv("MLFIX_LLM_ENDPOINT", raising=False)
        cli.main(["ingest", "--train", str(train), "--test", str(test),
                  "--schema", str(schema_path), "--out", str(bundle_path)])
        cli.main(["analyze", "--bundle", str(bundle_path), "--offline", "--out", str(diagnosis_path)])
        capsys.readouterr()
        assert cli.main(["report", "--diagnosis", str(diagnosis_path), "--format", "markdown"]) == 0
        out = capsys.readouterr().out
        assert "| Finding | Action |" in out

    def test_report_malformed_diagnosis_exits_5(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text('{"summary": 3}')
        assert cli.main(["report", "--diagnosis", str(bad)]) == 5

    def test_report_missing_file_exits_2(self, tmp_path):
        assert cli.main(["report", "--diagnosis", str(tmp_path / "ghost.json")]) == 2
