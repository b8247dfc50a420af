import hashlib
import json
from pathlib import Path

import pytest

from netoff.cli import main
from netoff.clearing import clear
from netoff.fileio import (
    analyze_text,
    emit_report,
    ingest_liquidity,
    ingest_obligations,
    render_graph,
)
from netoff.model import ValidationError

FOUR_FIRM_CSV = """obligation_id,debtor,creditor,amount
o1,f1,f2,1
o2,f1,f4,1
o3,f1,f4,2
o4,f2,f3,2
o5,f3,f1,3
o6,f4,f3,1
"""

CHAIN_CSV = """obligation_id,debtor,creditor,amount
c1,f1,f2,1
c2,f2,f3,1
c3,f3,f4,1
"""

CHAIN_WITH_CYCLE_CSV = """obligation_id,debtor,creditor,amount
c1,f1,f2,1
c2,f2,f3,1
c3,f3,f4,1
c4,f2,f3,1
c5,f3,f5,1
c6,f5,f2,1
"""

CHAIN_LIQUIDITY_CSV = """# a_max=0
firm,holdings,approved_overdraft,drawn_overdraft
f1,1,0,0
"""


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def tree_digest(directory: Path) -> dict:
    return {
        p.name: hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(directory.iterdir())
    }


class TestIngestObligations:
    def test_reference_file(self, tmp_path):
        network, currency = ingest_obligations(write(tmp_path, "obs.csv", FOUR_FIRM_CSV))
        assert network.firm_count == 4
        assert len(network.obligations) == 6
        assert currency is None

    def test_empty_file_with_header(self, tmp_path):
        network, _ = ingest_obligations(
            write(tmp_path, "obs.csv", "obligation_id,debtor,creditor,amount\n")
        )
        assert network.firm_count == 0
        assert network.obligations == ()

    def test_self_loop_reported_with_line(self, tmp_path):
        bad = "obligation_id,debtor,creditor,amount\nx1,A,A,100\n"
        with pytest.raises(ValidationError, match=r"obs.csv:2: self-loop"):
            ingest_obligations(write(tmp_path, "obs.csv", bad))

    def test_multiple_errors_listed(self, tmp_path):
        bad = (
            "obligation_id,debtor,creditor,amount\n"
            "x1,A,B,10\n"
            "x1,B,A,5\n"
            "x2,A,B,0\n"
            "x3,A,B,1.5\n"
        )
        with pytest.raises(ValidationError) as err:
            ingest_obligations(write(tmp_path, "obs.csv", bad))
        text = str(err.value)
        assert "obs.csv:3: duplicate obligation id" in text
        assert "obs.csv:4: bad amount" in text
        assert "obs.csv:5: bad amount" in text

    def test_missing_header(self, tmp_path):
        with pytest.raises(ValidationError, match="header"):
            ingest_obligations(write(tmp_path, "obs.csv", "a,b,c,1\n"))

    def test_currency_must_be_uniform(self, tmp_path):
        bad = (
            "obligation_id,debtor,creditor,amount,currency\n"
            "x1,A,B,10,EUR\n"
            "x2,B,A,5,USD\n"
        )
        with pytest.raises(ValidationError, match="differs"):
            ingest_obligations(write(tmp_path, "obs.csv", bad))

    def test_currency_carried_through(self, tmp_path):
        good = "obligation_id,debtor,creditor,amount,currency\nx1,A,B,10,EUR\n"
        _, currency = ingest_obligations(write(tmp_path, "obs.csv", good))
        assert currency == "EUR"

    def test_non_ascii_labels_roundtrip(self, tmp_path):
        text = (
            "obligation_id,debtor,creditor,amount\n"
            "x1,Müller GmbH,Žito d.o.o.,10\n"
            "x2,Žito d.o.o.,Müller GmbH,4\n"
        )
        network, _ = ingest_obligations(write(tmp_path, "obs.csv", text))
        assert network.labels() == ("Müller GmbH", "Žito d.o.o.")
        result = clear(network)
        emit_report(result, network, tmp_path / "out", graph=True)
        residual = (tmp_path / "out" / "residual_obligations.csv").read_text(encoding="utf-8")
        assert "Müller GmbH" in residual
        assert "Žito d.o.o." in (tmp_path / "out" / "network.dot").read_text(encoding="utf-8")


class TestIngestLiquidity:
    def test_parses_directive_and_defaults(self, tmp_path):
        network, _ = ingest_obligations(write(tmp_path, "obs.csv", CHAIN_CSV))
        src = ingest_liquidity(write(tmp_path, "liq.csv", CHAIN_LIQUIDITY_CSV), network)
        assert src.facility_cap == 0
        assert src.holdings.tolist() == [1, 0, 0, 0]

    def test_missing_cap_directive(self, tmp_path):
        network, _ = ingest_obligations(write(tmp_path, "obs.csv", CHAIN_CSV))
        text = "firm,holdings,approved_overdraft,drawn_overdraft\nf1,1,0,0\n"
        with pytest.raises(ValidationError, match="a_max"):
            ingest_liquidity(write(tmp_path, "liq.csv", text), network)

    def test_unknown_firm_rejected(self, tmp_path):
        network, _ = ingest_obligations(write(tmp_path, "obs.csv", CHAIN_CSV))
        text = "# a_max=5\nfirm,holdings,approved_overdraft,drawn_overdraft\nghost,1,0,0\n"
        with pytest.raises(ValidationError, match="unknown firm"):
            ingest_liquidity(write(tmp_path, "liq.csv", text), network)

    def test_drawn_beyond_approved_rejected(self, tmp_path):
        network, _ = ingest_obligations(write(tmp_path, "obs.csv", CHAIN_CSV))
        text = "# a_max=5\nfirm,holdings,approved_overdraft,drawn_overdraft\nf1,0,1,2\n"
        with pytest.raises(ValidationError, match="exceeds approved"):
            ingest_liquidity(write(tmp_path, "liq.csv", text), network)


class TestEmitReport:
    def test_summary_numbers(self, tmp_path):
        network, currency = ingest_obligations(write(tmp_path, "obs.csv", FOUR_FIRM_CSV))
        result = clear(network)
        emit_report(result, network, tmp_path / "out", currency=currency)
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["original_weight"] == 10
        assert summary["cleared_weight"] == 6
        assert summary["residual_weight"] == 4
        assert summary["nid"] == 2
        assert summary["cycles"] == 2
        assert summary["original_weight"] == summary["cleared_weight"] + summary["residual_weight"]
        assert summary["gridlock_resolved"] is True

    def test_residual_roundtrip_matches_settlement_matrix(self, tmp_path):
        network, _ = ingest_obligations(write(tmp_path, "obs.csv", FOUR_FIRM_CSV))
        result = clear(network)
        emit_report(result, network, tmp_path / "out")
        residual_net, _ = ingest_obligations(tmp_path / "out" / "residual_obligations.csv")
        reparsed = {
            (residual_net.labels()[ob.debtor], residual_net.labels()[ob.creditor]): ob.amount
            for ob in residual_net.obligations
        }
        merged: dict[tuple[str, str], int] = {}
        for pair, amount in reparsed.items():
            merged[pair] = merged.get(pair, 0) + amount
        labels = network.labels()
        expected = {
            (labels[i], labels[j]): v for (i, j), v in result.residual.matrix.items()
        }
        assert merged == expected

    def test_embedded_cycle_residual_file_is_the_chain(self, tmp_path):
        # of the chain+cycle network only the cycle clears, so the residual
        # file aggregates to exactly the chain; on the shared f2->f3 pair the
        # oldest invoice (c2) is the one discharged, leaving c4
        network, _ = ingest_obligations(write(tmp_path, "obs.csv", CHAIN_WITH_CYCLE_CSV))
        result = clear(network)
        emit_report(result, network, tmp_path / "out")
        residual = (tmp_path / "out" / "residual_obligations.csv").read_text()
        assert residual.splitlines() == [
            "obligation_id,debtor,creditor,amount",
            "c1,f1,f2,1",
            "c3,f3,f4,1",
            "c4,f2,f3,1",
        ]
        reparsed, _ = ingest_obligations(tmp_path / "out" / "residual_obligations.csv")
        aggregate = {}
        labels = reparsed.labels()
        for ob in reparsed.obligations:
            pair = (labels[ob.debtor], labels[ob.creditor])
            aggregate[pair] = aggregate.get(pair, 0) + ob.amount
        assert aggregate == {("f1", "f2"): 1, ("f2", "f3"): 1, ("f3", "f4"): 1}

    def test_empty_network_report(self, tmp_path):
        network, _ = ingest_obligations(
            write(tmp_path, "obs.csv", "obligation_id,debtor,creditor,amount\n")
        )
        result = clear(network)
        emit_report(result, network, tmp_path / "out")
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["original_weight"] == 0
        assert summary["notices"] == 0
        notices = (tmp_path / "out" / "notices.csv").read_text().strip().splitlines()
        assert len(notices) == 1  # header only

    def test_graph_export_styles(self, tmp_path):
        network, _ = ingest_obligations(write(tmp_path, "obs.csv", FOUR_FIRM_CSV))
        result = clear(network)
        discharged = {
            item.obligation_id: item.amount
            for notice in result.notices
            for item in notice.debit_items
        }
        dot = render_graph(network, discharged)
        assert dot.startswith("digraph obligations {")
        assert '"f1" -> "f2" [label="o1: 1/1", style=bold];' in dot
        # one of the two parallel invoices to f4 stays untouched
        assert 'label="o3: 0/2", style=dashed' in dot


class TestAnalyze:
    def test_reference_text(self, tmp_path):
        network, currency = ingest_obligations(write(tmp_path, "obs.csv", FOUR_FIRM_CSV))
        text = analyze_text(network, currency)
        assert "net internal debt (cash needed to clear everything): 2" in text
        assert "balanced without external cash: no" in text
        assert "f1: 4 3 -1" in text


class TestCli:
    def test_clear_exit_and_outputs(self, tmp_path, capsys):
        obs = write(tmp_path, "obs.csv", FOUR_FIRM_CSV)
        code = main(["clear", str(obs), "--out", str(tmp_path / "out"), "--graph"])
        assert code == 0
        out = capsys.readouterr().out
        assert "cleared 6 of 10" in out
        assert (tmp_path / "out" / "network.dot").exists()

    def test_validation_failure_exit_code(self, tmp_path, capsys):
        obs = write(tmp_path, "obs.csv", "obligation_id,debtor,creditor,amount\nx,A,A,1\n")
        code = main(["clear", str(obs), "--out", str(tmp_path / "out")])
        assert code == 1
        assert "self-loop" in capsys.readouterr().err

    def test_validate_command(self, tmp_path, capsys):
        obs = write(tmp_path, "obs.csv", FOUR_FIRM_CSV)
        assert main(["validate", str(obs)]) == 0
        assert "ok: 4 firms, 6 obligations" in capsys.readouterr().out

    def test_analyze_command(self, tmp_path, capsys):
        obs = write(tmp_path, "obs.csv", CHAIN_CSV)
        assert main(["analyze", str(obs)]) == 0
        assert "net internal debt" in capsys.readouterr().out

    def test_extended_feasible_run(self, tmp_path, capsys):
        obs = write(tmp_path, "obs.csv", CHAIN_CSV)
        liq = write(tmp_path, "liq.csv", CHAIN_LIQUIDITY_CSV)
        code = main([
            "clear-extended", str(obs), str(liq), "--out", str(tmp_path / "out"),
        ])
        assert code == 0
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["feasible"] is True
        assert summary["discharged_weight"] == 3
        assert summary["account_debits_total"] == 1

    def test_extended_infeasible_exit_code(self, tmp_path, capsys):
        obs = write(tmp_path, "obs.csv", CHAIN_CSV)
        liq = write(
            tmp_path,
            "liq.csv",
            "# a_max=0\nfirm,holdings,approved_overdraft,drawn_overdraft\n",
        )
        code = main([
            "clear-extended", str(obs), str(liq), "--out", str(tmp_path / "out"),
        ])
        assert code == 2
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert summary["feasible"] is False
        assert summary["deadlock"] is True
        assert summary["discharged_weight"] == 0
        # the report is still written before the infeasibility exit
        assert (tmp_path / "out" / "settlement.csv").exists()

    def test_missing_file_is_validation_error(self, tmp_path, capsys):
        code = main(["analyze", str(tmp_path / "nope.csv")])
        assert code == 1
        assert "cannot read" in capsys.readouterr().err

    def test_internal_invariant_violation_exit_code(self, tmp_path, capsys, monkeypatch):
        import netoff.cli as cli_module
        from netoff.model import InternalInvariantError

        def broken(network):
            raise InternalInvariantError("engine self-check failed")

        monkeypatch.setattr(cli_module, "clear", broken)
        obs = write(tmp_path, "obs.csv", FOUR_FIRM_CSV)
        code = main(["clear", str(obs), "--out", str(tmp_path / "out")])
        assert code == 3
        assert "internal error" in capsys.readouterr().err


class TestDeterminism:
    def test_byte_identical_reports(self, tmp_path):
        obs = write(tmp_path, "obs.csv", FOUR_FIRM_CSV)
        for run in ("a", "b"):
            assert main(["clear", str(obs), "--out", str(tmp_path / run), "--graph"]) == 0
        assert tree_digest(tmp_path / "a") == tree_digest(tmp_path / "b")

    def test_byte_identical_extended_reports(self, tmp_path):
        obs = write(tmp_path, "obs.csv", CHAIN_CSV)
        liq = write(tmp_path, "liq.csv", CHAIN_LIQUIDITY_CSV)
        for run in ("a", "b"):
            assert main(["clear-extended", str(obs), str(liq), "--out", str(tmp_path / run)]) == 0
        assert tree_digest(tmp_path / "a") == tree_digest(tmp_path / "b")
